"""Typed labelled transition models and lasso paths.

A model couples proposition-labelled states with event-labelled transitions;
every event additionally carries a type so that parametrised event families
can be handled as one group.  Infinite paths are stored finitely as lassos
(a prefix followed by a repeating loop).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping


class UnknownStateError(KeyError):
    pass


@dataclass(frozen=True)
class EventInfo:
    """A ground event: schema name, argument constants, and its type id."""

    name: str
    args: tuple[str, ...]
    type_id: int

    @property
    def identity(self) -> str:
        return f"{self.name}[{','.join(self.args)}]"


@dataclass(frozen=True)
class Issue:
    """One structural problem found by ``validate_lks``."""

    kind: str
    subject: tuple
    message: str

    def __str__(self) -> str:
        return f"{self.kind}{self.subject}: {self.message}"


@dataclass(frozen=True)
class TypedLks:
    """A finite transition model with labelled states and typed events.

    States, propositions, events and types are identified by their index in
    the corresponding tuple; all deterministic orderings in the package are
    by these ids.  ``edges`` maps a (source, target) pair to the nonempty
    set of event ids labelling that transition.  Instances are immutable
    and safe to share between any number of concurrent queries.
    """

    state_names: tuple[str, ...]
    initial: frozenset[int]
    prop_names: tuple[str, ...]
    labels: tuple[frozenset[int], ...]
    events: tuple[EventInfo, ...]
    type_names: tuple[str, ...]
    edges: Mapping[tuple[int, int], frozenset[int]]

    def __post_init__(self) -> None:
        masks = tuple(
            sum(1 << p for p in lab if 0 <= p < len(self.prop_names))
            for lab in self.labels
        )
        succ: dict[int, list[tuple[int, frozenset[int]]]] = {}
        pairs: dict[int, list[tuple[int, int]]] = {}
        for (src, dst), eids in self.edges.items():
            succ.setdefault(src, []).append((dst, eids))
            pairs.setdefault(src, []).extend((e, dst) for e in eids)
        for lst in succ.values():
            lst.sort(key=lambda it: it[0])
        for plist in pairs.values():
            plist.sort()
        object.__setattr__(self, "_masks", masks)
        object.__setattr__(self, "_succ", {s: tuple(v) for s, v in succ.items()})
        object.__setattr__(self, "_out_pairs", {s: tuple(v) for s, v in pairs.items()})

    # -- basic accessors ---------------------------------------------------

    @property
    def n_states(self) -> int:
        return len(self.state_names)

    def label_mask(self, s: int) -> int:
        return self._masks[s]  # type: ignore[attr-defined]

    def event_type(self, eid: int) -> int:
        return self.events[eid].type_id

    def successors(self, s: int) -> tuple[tuple[int, frozenset[int]], ...]:
        """All (target, events) pairs leaving ``s``, ordered by target id."""
        if not (0 <= s < self.n_states):
            raise UnknownStateError(f"unknown state id {s}")
        return self._succ.get(s, ())  # type: ignore[attr-defined]

    def out_pairs(self, s: int) -> tuple[tuple[int, int], ...]:
        """(event id, target) pairs leaving ``s``, ordered by (event, target).

        This is the canonical expansion order used by every search in the
        package, so that "first" results are reproducible.
        """
        if not (0 <= s < self.n_states):
            raise UnknownStateError(f"unknown state id {s}")
        return self._out_pairs.get(s, ())  # type: ignore[attr-defined]


def successors(lks: TypedLks, s: int) -> tuple[tuple[int, frozenset[int]], ...]:
    return lks.successors(s)


def unroll(lasso: "Lasso", j: int) -> tuple[int, int]:
    """(state, event) at position ``j`` of the lasso's infinite unrolling."""
    return lasso.unroll(j)


def validate_lks(lks: TypedLks) -> list[Issue]:
    """Report every structural violation; an empty list means well-formed.

    Problems are collected, never raised: deadlocked states, empty event
    labels, an empty initial set, out-of-range labels, events without a
    valid type, and edges that refer to unknown states or events.
    """
    issues: list[Issue] = []
    n = lks.n_states
    if not lks.initial:
        issues.append(Issue("empty_initial", (), "no initial state"))
    for s in lks.initial:
        if not (0 <= s < n):
            issues.append(Issue("bad_edge", (s,), "initial state id out of range"))
    deadlocked = set(range(n))
    for (src, dst), eids in lks.edges.items():
        if not (0 <= src < n and 0 <= dst < n):
            issues.append(Issue("bad_edge", (src, dst), "edge endpoint out of range"))
            continue
        deadlocked.discard(src)
        if not eids:
            issues.append(
                Issue("empty_label", (src, dst), "transition carries no event")
            )
        for e in eids:
            if not (0 <= e < len(lks.events)):
                issues.append(Issue("bad_event", (src, dst, e), "unknown event id"))
    for s in sorted(deadlocked):
        issues.append(Issue("deadlock", (s,), f"state {lks.state_names[s]} has no successor"))
    for s, lab in enumerate(lks.labels):
        for p in lab:
            if not (0 <= p < len(lks.prop_names)):
                issues.append(Issue("bad_label", (s, p), "label proposition out of range"))
    for eid, ev in enumerate(lks.events):
        if not (0 <= ev.type_id < len(lks.type_names)):
            issues.append(Issue("bad_type", (eid,), f"event {ev.identity} has no valid type"))
    return issues


@dataclass(frozen=True)
class Lasso:
    """A finitely represented infinite path: prefix then repeating loop.

    ``prefix_events[j]`` labels the step from ``prefix_states[j]`` to the
    next state; the last loop event closes the cycle back to the first loop
    state.  Every position therefore has exactly one state and one outgoing
    event.
    """

    prefix_states: tuple[int, ...]
    prefix_events: tuple[int, ...]
    loop_states: tuple[int, ...]
    loop_events: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.prefix_states) != len(self.prefix_events):
            raise ValueError("prefix states and events must align")
        if not self.loop_states:
            raise ValueError("loop must be nonempty")
        if len(self.loop_states) != len(self.loop_events):
            raise ValueError("loop states and events must align")

    @property
    def loop_start(self) -> int:
        return len(self.prefix_states)

    @property
    def states(self) -> tuple[int, ...]:
        return self.prefix_states + self.loop_states

    @property
    def events(self) -> tuple[int, ...]:
        return self.prefix_events + self.loop_events

    def __len__(self) -> int:
        return len(self.prefix_states) + len(self.loop_states)

    def position(self, j: int) -> int:
        """Canonical stored index for unrolled position ``j``."""
        if j < 0:
            raise ValueError("position must be nonnegative")
        n = len(self)
        if j < n:
            return j
        ls = self.loop_start
        return ls + (j - ls) % len(self.loop_states)

    def unroll(self, j: int) -> tuple[int, int]:
        """(state, event) at unrolled position ``j`` of the infinite path."""
        k = self.position(j)
        return self.states[k], self.events[k]

    def positions_from(self, j: int) -> Iterator[int]:
        """Canonical indices visited from position ``j`` on, each once."""
        k = self.position(j)
        n = len(self)
        yield from range(k, n)
        if k > self.loop_start:
            yield from range(self.loop_start, k)


def validate_lasso(lks: TypedLks, lasso: Lasso) -> list[str]:
    """Check a lasso against a model; returns human-readable problems."""
    problems: list[str] = []
    states, events = lasso.states, lasso.events
    if states[0] not in lks.initial:
        problems.append(f"first state {states[0]} is not initial")
    n = len(lasso)
    for j in range(n):
        src = states[j]
        dst = states[j + 1] if j + 1 < n else states[lasso.loop_start]
        eids = lks.edges.get((src, dst))
        if eids is None:
            problems.append(f"no transition {src} -> {dst} at position {j}")
        elif events[j] not in eids:
            ev = lks.events[events[j]].identity
            problems.append(f"event {ev} does not label {src} -> {dst} (position {j})")
    return problems


def make_lks(
    *,
    states: list[str],
    initial: list[int],
    props: list[str],
    labels: list[set[int]],
    types: list[str],
    events: list[tuple[str, tuple[str, ...], int]],
    edges: dict[tuple[int, int], set[int]],
) -> TypedLks:
    """Convenience constructor from plain containers."""
    return TypedLks(
        state_names=tuple(states),
        initial=frozenset(initial),
        prop_names=tuple(props),
        labels=tuple(frozenset(l) for l in labels),
        events=tuple(EventInfo(n, a, t) for n, a, t in events),
        type_names=tuple(types),
        edges={k: frozenset(v) for k, v in edges.items()},
    )
