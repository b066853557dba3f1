"""Interactive exploration over the set of counterexamples (or witnesses).

A session holds the checked property, the trace on display, a focus index,
and a restriction map remembering which branches were already trimmed at
each position.  Every operation issues one bounded query that pins the
focused prefix and constrains the focused position, so results always agree
with the trace seen so far.  In witness mode the same machinery runs on the
negated constraint, making every returned trace a witness of it.
"""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

from .checker import BoundedChecker, CheckResult, PointConstraint
from .encode import encode_prefix, encode_state, event_atom, nest_next
from .lks import Lasso, TypedLks
from .seltl import And, BoundFormula, Formula, Not, Or, TRUE, TypeAtom, bind


class BoundaryError(IndexError):
    pass


@dataclass(frozen=True)
class PropertyHolds:
    """No counterexample within the bound (no witness, in witness mode)."""

    bound: int


@dataclass(frozen=True)
class NoAlternative:
    """The requested variation has no counterexample left within the bound."""

    bound: int


@dataclass(frozen=True)
class RestrictionMap:
    """Finite-support map from path index to a restriction formula.

    Unstored indices read as true.  Point updates and tail resets return new
    maps; entries are kept sorted by index.
    """

    entries: tuple[tuple[int, Formula], ...] = ()

    def get(self, i: int) -> Formula:
        for idx, f in self.entries:
            if idx == i:
                return f
        return TRUE

    def set(self, i: int, f: Formula) -> "RestrictionMap":
        kept = [(idx, g) for idx, g in self.entries if idx != i]
        kept.append((i, f))
        kept.sort(key=lambda it: it[0])
        return RestrictionMap(tuple(kept))

    def clear_from(self, i: int) -> "RestrictionMap":
        return RestrictionMap(tuple((idx, g) for idx, g in self.entries if idx < i))

    def support(self) -> tuple[int, ...]:
        return tuple(idx for idx, _ in self.entries)


@dataclass(frozen=True)
class TypeProbe:
    enabled: bool
    query_ms: float


@dataclass(frozen=True)
class ExplorationState:
    """One step of an exploration: (property, trace, focus, restrictions)."""

    lks: TypedLks
    phi: BoundFormula  # the effective checked property (negated in witness mode)
    pi: Lasso
    i: int
    restrictions: RestrictionMap
    bound: int
    mode: str  # "counterexample" | "witness"
    engine: BoundedChecker = field(compare=False, repr=False)
    last_query: Formula | None = field(default=None, compare=False, repr=False)

    @property
    def display_index(self) -> int:
        """Focus position folded into the stored trace (loops wrap)."""
        return self.pi.position(self.i)

    def focus_state(self) -> int:
        return self.pi.unroll(self.i)[0]

    def focus_event(self) -> int:
        return self.pi.unroll(self.i)[1]


def init_session(
    lks: TypedLks, phi: BoundFormula, bound: int, mode: str = "counterexample"
) -> ExplorationState | PropertyHolds:
    """Run the first query and start a session on its counterexample.

    In witness mode the property is negated first, so the traces on display
    are exactly the behaviours satisfying the given constraint.
    """
    if mode not in ("counterexample", "witness"):
        raise ValueError(f"unknown mode {mode!r}")
    effective = phi if mode == "counterexample" else BoundFormula(Not(phi.root), lks)
    engine = BoundedChecker(lks, effective, bound)
    result = engine.check()
    if not result.is_counterexample:
        return PropertyHolds(bound)
    return ExplorationState(
        lks=lks,
        phi=effective,
        pi=result.lasso,
        i=0,
        restrictions=RestrictionMap(),
        bound=bound,
        mode=mode,
        engine=engine,
    )


def step_forward(st: ExplorationState) -> ExplorationState:
    """Move the focus one step ahead; the trace and restrictions stay put."""
    return replace(st, i=st.i + 1)


def step_backward(st: ExplorationState) -> ExplorationState:
    if st.i == 0:
        raise BoundaryError("already at the first position")
    return replace(st, i=st.i - 1)


def _query_formula(st: ExplorationState, point: Formula) -> Formula:
    """The literal disjunctive query submitted for an operation."""
    pinned = And(encode_prefix(st.lks, st.pi, st.i), nest_next(point, st.i))
    return Or(st.phi.root, Not(pinned))


def _run_point_query(st: ExplorationState, point: Formula) -> tuple[CheckResult, Formula]:
    query = _query_formula(st, point)
    result = st.engine.check_constrained(PointConstraint(st.pi, st.i, point))
    return result, query


def alt_state(st: ExplorationState) -> ExplorationState | NoAlternative:
    """Ask for a counterexample that differs in the focused state.

    The consumed state is recorded in the restriction map at the focus, and
    all restrictions beyond it are reset; on failure the session is
    unchanged.
    """
    here = encode_state(st.lks, st.focus_state())
    point = And(st.restrictions.get(st.i), Not(here))
    result, query = _run_point_query(st, point)
    if not result.is_counterexample:
        return NoAlternative(st.bound)
    updated = st.restrictions.set(
        st.i, And(st.restrictions.get(st.i), Not(here))
    ).clear_from(st.i + 1)
    return replace(st, pi=result.lasso, restrictions=updated, last_query=query)


def alt_event(st: ExplorationState) -> ExplorationState | NoAlternative:
    """Ask for a different next event of the same type from the same state."""
    lks = st.lks
    here = encode_state(lks, st.focus_state())
    ev = event_atom(lks, st.focus_event())
    ty = TypeAtom(lks.type_names[lks.event_type(st.focus_event())], lks.event_type(st.focus_event()))
    point = And(And(And(st.restrictions.get(st.i), here), Not(ev)), ty)
    result, query = _run_point_query(st, point)
    if not result.is_counterexample:
        return NoAlternative(st.bound)
    updated = st.restrictions.set(
        st.i, And(st.restrictions.get(st.i), Not(And(here, ev)))
    ).clear_from(st.i + 1)
    return replace(st, pi=result.lasso, restrictions=updated, last_query=query)


def set_event_type(
    st: ExplorationState, type_name: str, strict: bool = False
) -> ExplorationState | NoAlternative:
    """Ask for a counterexample whose next event has the given type.

    The focused position's own restriction entry is deliberately not part of
    the query and not updated, so branches trimmed by alt_event stay
    revisitable after a type switch; pass ``strict=True`` to conjoin it
    anyway (a deviation from the default calculus, off by default).
    """
    lks = st.lks
    if type_name not in lks.type_names:
        raise KeyError(f"unknown event type {type_name!r}")
    tid = lks.type_names.index(type_name)
    point = And(encode_state(lks, st.focus_state()), TypeAtom(type_name, tid))
    if strict:
        point = And(st.restrictions.get(st.i), point)
    result, query = _run_point_query(st, point)
    if not result.is_counterexample:
        return NoAlternative(st.bound)
    updated = st.restrictions.clear_from(st.i + 1)
    return replace(st, pi=result.lasso, restrictions=updated, last_query=query)


def enabled_types(st: ExplorationState, jobs: int = 1) -> dict[str, TypeProbe]:
    """Dry-run the type-switch query for every event type.

    Nothing is committed: the session is left untouched, and results are
    reported in type-id order with per-type wall-clock times.  With
    ``jobs > 1`` the queries run on a thread pool; the merge order is still
    deterministic.
    """
    lks = st.lks
    here = encode_state(lks, st.focus_state())

    def probe(tid: int) -> TypeProbe:
        start = time.perf_counter()
        point = And(here, TypeAtom(lks.type_names[tid], tid))
        result = st.engine.check_constrained(PointConstraint(st.pi, st.i, point))
        ms = (time.perf_counter() - start) * 1000
        return TypeProbe(result.is_counterexample, ms)

    tids = range(len(lks.type_names))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            probes = list(pool.map(probe, tids))
    else:
        probes = [probe(t) for t in tids]
    return {lks.type_names[t]: probes[t] for t in tids}


def check_session_invariants(st: ExplorationState) -> list[str]:
    """Sanity conditions every session must satisfy; used by the test suite."""
    from .lks import validate_lasso
    from .seltl import eval_lasso

    problems = validate_lasso(st.lks, st.pi)
    if eval_lasso(st.phi, st.pi):
        problems.append("displayed trace does not refute the checked property")
    if st.i < 0:
        problems.append("negative focus index")
    return problems
