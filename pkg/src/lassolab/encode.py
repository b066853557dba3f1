"""Characteristic formulas used by every exploration query.

``encode_state`` pins a state's exact proposition valuation,
``encode_prefix`` pins the first ``i`` states and events of a path, and
``nest_next`` wraps a formula in ``i`` next-operators.  Conjunct order is
fixed (position-major, proposition-id-minor) so emitted formulas are
byte-stable for logging and snapshots.
"""
from __future__ import annotations

from .lks import Lasso, TypedLks, UnknownStateError
from .seltl import And, EventAtom, Formula, Next, Not, Prop, TRUE, conj


def encode_state(lks: TypedLks, s: int) -> Formula:
    """Conjunction fixing every proposition of state ``s``, in id order."""
    if not (0 <= s < lks.n_states):
        raise UnknownStateError(f"unknown state id {s}")
    label = lks.labels[s]
    parts: list[Formula] = []
    for pid, name in enumerate(lks.prop_names):
        atom = Prop(name, pid)
        parts.append(atom if pid in label else Not(atom))
    return conj(parts)


def nest_next(f: Formula, i: int) -> Formula:
    """``i`` applications of the next operator around ``f``."""
    if i < 0:
        raise ValueError("nesting depth must be nonnegative")
    for _ in range(i):
        f = Next(f)
    return f


def event_atom(lks: TypedLks, eid: int) -> EventAtom:
    ev = lks.events[eid]
    return EventAtom(ev.name, ev.args, eid)


def encode_prefix(lks: TypedLks, lasso: Lasso, i: int) -> Formula:
    """Formula satisfied exactly by paths sharing the first ``i`` steps.

    Built as the conjunction over positions ``j < i`` of
    ``X^j(state valuation and event)``; ``i == 0`` yields true.
    """
    if i < 0:
        raise ValueError("prefix length must be nonnegative")
    if i == 0:
        return TRUE
    parts: list[Formula] = []
    for j in range(i):
        s, e = lasso.unroll(j)
        step = And(encode_state(lks, s), event_atom(lks, e))
        parts.append(nest_next(step, j))
    return conj(parts)
