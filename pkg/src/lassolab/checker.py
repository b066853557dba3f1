"""Bounded first-counterexample search over typed labelled models.

The main engine translates the negated property into a Büchi automaton over
(valuation, event) letters, then enumerates lasso candidates of the model in
a fixed word-lexicographic order (event id, then successor id, loop closures
before extensions).  Automaton state sets are tracked along the path purely
for pruning; whether a closed lasso is a genuine counterexample is decided
by an exact membership test of its infinite word against the automaton, so
the verdict depends only on the candidate's word, never on how the search
reached it.  ``oracle_find`` walks the same candidate order but decides each
candidate with the direct lasso evaluator instead, giving an independent
cross-check of the whole automaton route.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

from .lks import Lasso, TypedLks, validate_lks
from .seltl import (
    And,
    BoundFormula,
    EventAtom,
    FalseF,
    Finally,
    Formula,
    Globally,
    Next,
    Not,
    Or,
    Prop,
    Release,
    TRUE,
    TrueF,
    TypeAtom,
    Until,
    compile_evaluator,
    eval_letter,
    nnf,
    sort_key,
    text,
)


class InvalidModelError(ValueError):
    pass


class OracleLimitError(RuntimeError):
    pass


@dataclass(frozen=True)
class CheckResult:
    """Either valid-within-bound or the first counterexample found."""

    verdict: str  # "valid" | "counterexample"
    bound: int
    lasso: Lasso | None = None
    query_ms: float = 0.0
    states_visited: int = 0

    @property
    def is_counterexample(self) -> bool:
        return self.verdict == "counterexample"


# ---------------------------------------------------------------------------
# Letters and automata
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LetterConstraint:
    """Constraint a transition puts on one (valuation, event) letter."""

    req_props: int = 0
    forb_props: int = 0
    req_event: int | None = None
    forb_events: frozenset[int] = frozenset()
    req_type: int | None = None
    forb_types: frozenset[int] = frozenset()

    def matches(self, mask: int, eid: int, tid: int) -> bool:
        return (
            mask & self.req_props == self.req_props
            and mask & self.forb_props == 0
            and (self.req_event is None or self.req_event == eid)
            and eid not in self.forb_events
            and (self.req_type is None or self.req_type == tid)
            and tid not in self.forb_types
        )

    def satisfiable(self, lks: TypedLks) -> bool:
        if self.req_props & self.forb_props:
            return False
        if self.req_event is not None:
            tid = lks.event_type(self.req_event)
            return (
                self.req_event not in self.forb_events
                and (self.req_type is None or self.req_type == tid)
                and tid not in self.forb_types
            )
        for eid in range(len(lks.events)):
            tid = lks.event_type(eid)
            if eid in self.forb_events or tid in self.forb_types:
                continue
            if self.req_type is None or self.req_type == tid:
                return True
        return False


INIT_STATE = -1


@dataclass
class BuchiAutomaton:
    """Transition-labelled automaton over (valuation, event) letters.

    ``initial`` lists the transitions taken on the first letter; a run is
    accepting when it visits ``accepting`` infinitely often.  The virtual
    pre-initial state is addressed as ``INIT_STATE`` in the step functions.
    """

    n_states: int
    initial: tuple[tuple[LetterConstraint, int], ...]
    transitions: tuple[tuple[tuple[LetterConstraint, int], ...], ...]
    accepting: frozenset[int]
    accept_mask: int = field(init=False)

    def __post_init__(self) -> None:
        self.accept_mask = sum(1 << q for q in self.accepting)
        index: list[tuple[dict[int, list[tuple[LetterConstraint, int]]], list]] = []
        for q in range(self.n_states):
            by_event: dict[int, list[tuple[LetterConstraint, int]]] = {}
            generic: list[tuple[LetterConstraint, int]] = []
            for c, target in self.transitions[q]:
                if c.req_event is None:
                    generic.append((c, target))
                else:
                    by_event.setdefault(c.req_event, []).append((c, target))
            index.append((by_event, generic))
        self._index = index
        init_by_event: dict[int, list[tuple[LetterConstraint, int]]] = {}
        init_generic: list[tuple[LetterConstraint, int]] = []
        for c, target in self.initial:
            if c.req_event is None:
                init_generic.append((c, target))
            else:
                init_by_event.setdefault(c.req_event, []).append((c, target))
        self._init_index = (init_by_event, init_generic)

    def outgoing(self, q: int) -> tuple[tuple[LetterConstraint, int], ...]:
        return self.initial if q == INIT_STATE else self.transitions[q]

    def step(self, q: int, mask: int, eid: int, tid: int) -> list[int]:
        by_event, generic = self._init_index if q == INIT_STATE else self._index[q]
        out = [t for c, t in by_event.get(eid, ()) if c.matches(mask, eid, tid)]
        out += [t for c, t in generic if c.matches(mask, eid, tid)]
        return out

    def step_mask(self, qmask: int, mask: int, eid: int, tid: int) -> int:
        """Subset step: all states reachable from ``qmask`` on one letter."""
        out = 0
        q = 0
        while qmask:
            if qmask & 1:
                for t in self.step(q, mask, eid, tid):
                    out |= 1 << t
            qmask >>= 1
            q += 1
        return out

    def step_initial_mask(self, mask: int, eid: int, tid: int) -> int:
        out = 0
        for t in self.step(INIT_STATE, mask, eid, tid):
            out |= 1 << t
        return out


# ---------------------------------------------------------------------------
# Tableau construction
# ---------------------------------------------------------------------------

def _to_core(f: Formula) -> Formula:
    """Rewrite G/F into Release/Until; input must already be in NNF."""
    match f:
        case Globally(sub):
            return Release(FalseF(), _to_core(sub))
        case Finally(sub):
            return Until(TRUE, _to_core(sub))
        case Not(sub):
            return Not(_to_core(sub))
        case And(a, b):
            return And(_to_core(a), _to_core(b))
        case Or(a, b):
            return Or(_to_core(a), _to_core(b))
        case Next(sub):
            return Next(_to_core(sub))
        case Until(a, b):
            return Until(_to_core(a), _to_core(b))
        case Release(a, b):
            return Release(_to_core(a), _to_core(b))
        case _:
            return f


def _is_literal(f: Formula) -> bool:
    match f:
        case TrueF() | FalseF() | Prop() | EventAtom() | TypeAtom():
            return True
        case Not(sub):
            return _is_literal(sub)
        case _:
            return False


def _lit_conflict(lit: Formula, old: set[Formula], lks: TypedLks) -> bool:
    """Would adding ``lit`` make the literal set unsatisfiable?"""
    if Not(lit) in old or (isinstance(lit, Not) and lit.sub in old):
        return True
    match lit:
        case EventAtom(_, _, eid):
            for g in old:
                match g:
                    case EventAtom(_, _, other) if other != eid:
                        return True
                    case TypeAtom(_, tid) if tid != lks.event_type(eid):
                        return True
                    case Not(TypeAtom(_, tid)) if tid == lks.event_type(eid):
                        return True
        case TypeAtom(_, tid):
            for g in old:
                match g:
                    case TypeAtom(_, other) if other != tid:
                        return True
                    case EventAtom(_, _, eid) if lks.event_type(eid) != tid:
                        return True
        case Not(TypeAtom(_, tid)):
            for g in old:
                match g:
                    case EventAtom(_, _, eid) if lks.event_type(eid) == tid:
                        return True
    return False


def _label_of(old: set[Formula], lks: TypedLks) -> LetterConstraint:
    req_props = forb_props = 0
    req_event = req_type = None
    forb_events: set[int] = set()
    forb_types: set[int] = set()
    for f in old:
        match f:
            case Prop(_, pid):
                req_props |= 1 << pid
            case Not(Prop(_, pid)):
                forb_props |= 1 << pid
            case EventAtom(_, _, eid):
                req_event = eid
            case Not(EventAtom(_, _, eid)):
                forb_events.add(eid)
            case TypeAtom(_, tid):
                req_type = tid
            case Not(TypeAtom(_, tid)):
                forb_types.add(tid)
    return LetterConstraint(
        req_props, forb_props, req_event, frozenset(forb_events), req_type, frozenset(forb_types)
    )


def _collect_untils(f: Formula, acc: set[Formula]) -> None:
    match f:
        case Until(a, b):
            acc.add(f)
            _collect_untils(a, acc)
            _collect_untils(b, acc)
        case Release(a, b) | And(a, b) | Or(a, b):
            _collect_untils(a, acc)
            _collect_untils(b, acc)
        case Next(sub) | Not(sub):
            _collect_untils(sub, acc)
        case _:
            pass


@dataclass
class _Node:
    new: set[Formula]
    old: set[Formula]
    nxt: set[Formula]
    incoming: set[int]


def _tableau(core: Formula, lks: TypedLks):
    """Expand the formula into graph nodes (classic on-the-fly construction).

    Returns (records, untils) where each record is (id, old, nxt, incoming)
    and node 0..k are in creation order.
    """
    records: list[dict] = []
    by_key: dict[tuple[frozenset, frozenset], int] = {}
    stack: list[_Node] = [_Node({core}, set(), set(), {INIT_STATE})]
    while stack:
        node = stack.pop()
        if not node.new:
            key = (frozenset(node.old), frozenset(node.nxt))
            if key in by_key:
                records[by_key[key]]["incoming"] |= node.incoming
                continue
            nid = len(records)
            by_key[key] = nid
            records.append({"id": nid, "old": set(node.old), "nxt": set(node.nxt), "incoming": set(node.incoming)})
            stack.append(_Node(set(node.nxt), set(), set(), {nid}))
            continue
        eta = min(node.new, key=sort_key)
        node.new.discard(eta)
        if _is_literal(eta):
            if isinstance(eta, FalseF) or (isinstance(eta, Not) and isinstance(eta.sub, TrueF)):
                continue  # inconsistent node: drop
            if isinstance(eta, TrueF) or (isinstance(eta, Not) and isinstance(eta.sub, FalseF)):
                # recorded so acceptance can see discharged "until true" goals
                node.old.add(eta)
                stack.append(node)
                continue
            if _lit_conflict(eta, node.old, lks):
                continue
            node.old.add(eta)
            stack.append(node)
            continue
        match eta:
            case And(a, b):
                node.old.add(eta)
                node.new |= {g for g in (a, b) if g not in node.old}
                stack.append(node)
            case Next(sub):
                node.old.add(eta)
                node.nxt.add(sub)
                stack.append(node)
            case Or(a, b):
                n1 = _Node(set(node.new), set(node.old) | {eta}, set(node.nxt), set(node.incoming))
                n2 = _Node(set(node.new), set(node.old) | {eta}, set(node.nxt), set(node.incoming))
                if a not in n1.old:
                    n1.new.add(a)
                if b not in n2.old:
                    n2.new.add(b)
                stack.append(n2)
                stack.append(n1)
            case Until(a, b):
                n1 = _Node(set(node.new), set(node.old) | {eta}, set(node.nxt), set(node.incoming))
                n2 = _Node(set(node.new), set(node.old) | {eta}, set(node.nxt) | {eta}, set(node.incoming))
                if b not in n1.old:
                    n1.new.add(b)
                if a not in n2.old:
                    n2.new.add(a)
                stack.append(n2)
                stack.append(n1)
            case Release(a, b):
                n1 = _Node(set(node.new), set(node.old) | {eta}, set(node.nxt), set(node.incoming))
                n2 = _Node(set(node.new), set(node.old) | {eta}, set(node.nxt) | {eta}, set(node.incoming))
                for g in (a, b):
                    if g not in n1.old:
                        n1.new.add(g)
                if b not in n2.old:
                    n2.new.add(b)
                stack.append(n2)
                stack.append(n1)
            case _:
                raise TypeError(f"unexpected node formula {text(eta)}")
    untils = set()
    _collect_untils(core, untils)
    return records, sorted(untils, key=sort_key)


def ltl_to_buchi(bf: BoundFormula) -> BuchiAutomaton:
    """Automaton accepting exactly the infinite letter words satisfying ``bf``.

    The generalized acceptance produced by the expansion is reduced to a
    single acceptance set with a counter product, then the automaton is
    pruned (unsatisfiable labels, dead states) and equivalent states are
    merged.
    """
    lks = bf.lks
    core = _to_core(nnf(bf.root))
    records, untils = _tableau(core, lks)
    k = len(untils)

    labels = [_label_of(rec["old"], lks) for rec in records]
    # generalized acceptance: per until u, nodes with u unresolved are excluded
    in_set = [
        [u not in rec["old"] or u.right in rec["old"] for u in untils] for rec in records
    ]
    succ: list[list[int]] = [[] for _ in records]
    init_targets: list[int] = []
    for rec in records:
        for q in sorted(rec["incoming"]):
            if q == INIT_STATE:
                init_targets.append(rec["id"])
            else:
                succ[q].append(rec["id"])

    def advance(counter: int, target: int) -> int:
        j = 0 if counter == k else counter
        while j < k and in_set[target][j]:
            j += 1
        return j

    # counter product, built reachably in deterministic order
    state_ids: dict[tuple[int, int], int] = {}
    order: list[tuple[int, int]] = []

    def intern(node: int, counter: int) -> int:
        key = (node, counter)
        if key not in state_ids:
            state_ids[key] = len(order)
            order.append(key)
        return state_ids[key]

    initial: list[tuple[LetterConstraint, int]] = []
    for target in init_targets:
        initial.append((labels[target], intern(target, advance(0, target))))
    i = 0
    transitions: list[list[tuple[LetterConstraint, int]]] = []
    while i < len(order):
        node, counter = order[i]
        outs: list[tuple[LetterConstraint, int]] = []
        for target in succ[node]:
            outs.append((labels[target], intern(target, advance(counter, target))))
        transitions.append(outs)
        i += 1
    accepting = frozenset(i for i, (_, c) in enumerate(order) if c == k)

    return _simplify(
        BuchiAutomaton(
            n_states=len(order),
            initial=tuple(initial),
            transitions=tuple(tuple(t) for t in transitions),
            accepting=accepting,
        ),
        lks,
    )


def _simplify(auto: BuchiAutomaton, lks: TypedLks) -> BuchiAutomaton:
    """Drop unsatisfiable labels and dead states, then merge equivalent states."""
    n = auto.n_states
    trans = [
        [(c, t) for c, t in auto.transitions[q] if c.satisfiable(lks)] for q in range(n)
    ]
    init = [(c, t) for c, t in auto.initial if c.satisfiable(lks)]

    # states with no outgoing transitions cannot lie on an infinite run
    alive = set(range(n))
    changed = True
    while changed:
        changed = False
        for q in sorted(alive):
            if not any(t in alive for _, t in trans[q]):
                alive.discard(q)
                changed = True
    init = [(c, t) for c, t in init if t in alive]
    reach: set[int] = set()
    frontier = sorted({t for _, t in init})
    while frontier:
        q = frontier.pop()
        if q in reach:
            continue
        reach.add(q)
        for _, t in trans[q]:
            if t in alive and t not in reach:
                frontier.append(t)
    alive &= reach

    # partition refinement: same acceptance flag and same outgoing behaviour
    part = {q: (1 if q in auto.accepting else 0) for q in sorted(alive)}
    while True:
        sig: dict[int, tuple] = {}
        for q in sorted(alive):
            outs = sorted(
                {(c, part[t]) for c, t in trans[q] if t in alive},
                key=lambda it: (str(it[0]), it[1]),
            )
            sig[q] = (part[q], tuple(outs))
        renum: dict[tuple, int] = {}
        new_part: dict[int, int] = {}
        for q in sorted(alive):
            key = sig[q]
            if key not in renum:
                renum[key] = len(renum)
            new_part[q] = renum[key]
        if new_part == part:
            break
        part = new_part

    classes = sorted(set(part.values()))
    remap = {c: i for i, c in enumerate(classes)}
    rep: dict[int, int] = {}
    for q in sorted(alive):
        rep.setdefault(part[q], q)
    n_new = len(classes)
    new_trans: list[tuple[tuple[LetterConstraint, int], ...]] = []
    for c in classes:
        q = rep[c]
        outs = sorted(
            {(cst, remap[part[t]]) for cst, t in trans[q] if t in alive},
            key=lambda it: (it[1], str(it[0])),
        )
        new_trans.append(tuple(outs))
    new_init = tuple(
        sorted(
            {(c, remap[part[t]]) for c, t in init if t in alive},
            key=lambda it: (it[1], str(it[0])),
        )
    )
    new_accepting = frozenset(remap[part[q]] for q in alive if q in auto.accepting)
    return BuchiAutomaton(
        n_states=n_new,
        initial=new_init,
        transitions=tuple(new_trans),
        accepting=new_accepting,
    )


# ---------------------------------------------------------------------------
# Candidate enumeration (shared order between engine and oracle)
# ---------------------------------------------------------------------------

def _close(states: list[int], events: list[int], j: int) -> Lasso:
    return Lasso(
        prefix_states=tuple(states[:j]),
        prefix_events=tuple(events[:j]),
        loop_states=tuple(states[j:]),
        loop_events=tuple(events[j:]),
    )


def iter_lassos(lks: TypedLks, bound: int):
    """Yield every lasso of unrolled length <= bound in the canonical order.

    Paths grow by (event id, target id); for each step every loop closure is
    yielded before the path is extended.  This makes "first" answers
    reproducible and shared between the engine and the oracle.
    """
    if bound < 1:
        raise ValueError("bound must be at least 1")

    def walk(states: list[int], events: list[int]):
        s = states[-1]
        for eid, t in lks.out_pairs(s):
            events.append(eid)
            for j, prev in enumerate(states):
                if prev == t:
                    yield _close(states, events, j)
            if len(states) < bound:
                states.append(t)
                yield from walk(states, events)
                states.pop()
            events.pop()

    for s0 in sorted(lks.initial):
        yield from walk([s0], [])


def oracle_find(
    lks: TypedLks, phi: BoundFormula, bound: int, limit: int = 2_000_000
) -> CheckResult:
    """Reference decision: first enumerated lasso the evaluator rejects.

    Walks the same candidate order as the engine but decides each candidate
    with the direct semantic evaluator, so the two can be compared end to
    end.  Exhausts all candidates up to the bound; ``limit`` caps how many
    are evaluated.
    """
    _require_ready(lks, bound)
    start = time.perf_counter()
    evaluate = compile_evaluator(phi)
    count = 0

    def walk(states: list[int], events: list[int]) -> Lasso | None:
        nonlocal count
        for eid, t in lks.out_pairs(states[-1]):
            events.append(eid)
            for j, prev in enumerate(states):
                if prev != t:
                    continue
                count += 1
                if count > limit:
                    raise OracleLimitError(f"enumeration limit {limit} exceeded")
                if not evaluate(states, events, j):
                    return _close(states, events, j)
            if len(states) < bound:
                states.append(t)
                result = walk(states, events)
                if result is not None:
                    return result
                states.pop()
            events.pop()
        return None

    found: Lasso | None = None
    for s0 in sorted(lks.initial):
        found = walk([s0], [])
        if found is not None:
            break
    ms = (time.perf_counter() - start) * 1000
    if found is None:
        return CheckResult("valid", bound, None, ms, count)
    return CheckResult("counterexample", bound, found, ms, count)


def _require_ready(lks: TypedLks, bound: int) -> None:
    if bound < 1:
        raise ValueError("bound must be at least 1")
    issues = validate_lks(lks)
    if issues:
        raise InvalidModelError("; ".join(str(i) for i in issues))


# ---------------------------------------------------------------------------
# The engine
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PointConstraint:
    """Prefix-pinning side of a query: agree with ``pin`` before position
    ``at`` and satisfy the single-position formula ``point`` at ``at``."""

    pin: Lasso
    at: int
    point: Formula


class BoundedChecker:
    """Reusable search context for one (model, property, bound) triple.

    Building it costs one automaton construction plus a product reachability
    table; afterwards both the plain check and any number of prefix-pinned
    checks are cheap.  Instances are immutable after construction and safe
    for concurrent use.
    """

    HOPE_TABLE_CAP = 2_000_000

    def __init__(self, lks: TypedLks, phi: BoundFormula, bound: int):
        _require_ready(lks, bound)
        self.lks = lks
        self.phi = phi
        self.bound = bound
        self.auto = ltl_to_buchi(BoundFormula(nnf(Not(phi.root)), lks))
        self._step_cache: dict[tuple[int, int, int], int] = {}
        self._hopeful = self._compute_hopeful()

    # -- product prospects table -------------------------------------------

    def _compute_hopeful(self) -> list[int] | None:
        """Per model state, bitmask of automaton states from which an
        accepting product cycle is still reachable (unbounded lookahead)."""
        lks, auto = self.lks, self.auto
        n_s, n_q = lks.n_states, auto.n_states
        if n_q == 0:
            return [0] * n_s
        if n_s * n_q > self.HOPE_TABLE_CAP:
            return None
        n_nodes = n_s * n_q

        def node_edges(idx: int) -> list[int]:
            s, q = divmod(idx, n_q)
            out = []
            mask = lks.label_mask(s)
            for eid, t in lks.out_pairs(s):
                for q2 in auto.step(q, mask, eid, lks.event_type(eid)):
                    out.append(t * n_q + q2)
            return out

        # Tarjan over the full product, iterative
        index = [0] * n_nodes
        low = [0] * n_nodes
        on_stack = bytearray(n_nodes)
        visited = bytearray(n_nodes)
        comp = [-1] * n_nodes
        comp_good: list[bool] = []
        counter = 1
        stack: list[int] = []
        for root in range(n_nodes):
            if visited[root]:
                continue
            work = [(root, iter(node_edges(root)), -1)]
            visited[root] = 1
            index[root] = low[root] = counter
            counter += 1
            stack.append(root)
            on_stack[root] = 1
            while work:
                v, edges, _ = work[-1]
                advanced = False
                for w in edges:
                    if not visited[w]:
                        visited[w] = 1
                        index[w] = low[w] = counter
                        counter += 1
                        stack.append(w)
                        on_stack[w] = 1
                        work.append((w, iter(node_edges(w)), v))
                        advanced = True
                        break
                    if on_stack[w]:
                        low[v] = min(low[v], index[w])
                if advanced:
                    continue
                work.pop()
                if work:
                    parent = work[-1][0]
                    low[parent] = min(low[parent], low[v])
                if low[v] == index[v]:
                    cid = len(comp_good)
                    members = []
                    while True:
                        w = stack.pop()
                        on_stack[w] = 0
                        comp[w] = cid
                        members.append(w)
                        if w == v:
                            break
                    good = False
                    has_cycle = len(members) > 1
                    has_accepting = any(
                        (m % n_q) in self.auto.accepting for m in members
                    )
                    if has_accepting:
                        if has_cycle:
                            good = True
                        else:
                            m = members[0]
                            if m in node_edges(m):
                                good = True
                    comp_good.append(good)

        # Tarjan completes components in reverse topological order, so every
        # cross edge points to a lower component id; one pass in increasing
        # id order settles reachability of a good component.
        n_comps = len(comp_good)
        comp_members: list[list[int]] = [[] for _ in range(n_comps)]
        for m in range(n_nodes):
            comp_members[comp[m]].append(m)
        comp_hopeful = [False] * n_comps
        for cid in range(n_comps):
            if comp_good[cid]:
                comp_hopeful[cid] = True
                continue
            done = False
            for m in comp_members[cid]:
                for w in node_edges(m):
                    wc = comp[w]
                    if wc != cid and comp_hopeful[wc]:
                        comp_hopeful[cid] = True
                        done = True
                        break
                if done:
                    break
        hopeful = bytearray(n_nodes)
        for m in range(n_nodes):
            if comp_hopeful[comp[m]]:
                hopeful[m] = 1
        masks = [0] * n_s
        for s in range(n_s):
            acc = 0
            base = s * n_q
            for q in range(n_q):
                if hopeful[base + q]:
                    acc |= 1 << q
            masks[s] = acc
        return masks

    # -- letter stepping ------------------------------------------------------

    def _step(self, qmask: int, s: int, eid: int) -> int:
        key = (qmask, s, eid)
        cached = self._step_cache.get(key)
        if cached is not None:
            return cached
        lks = self.lks
        mask = lks.label_mask(s)
        tid = lks.event_type(eid)
        if qmask == -1:
            out = self.auto.step_initial_mask(mask, eid, tid)
        else:
            out = self.auto.step_mask(qmask, mask, eid, tid)
        self._step_cache[key] = out
        return out

    # -- exact membership of a closed lasso word ------------------------------

    def _member(self, states: list[int], events: list[int], j: int, seed: int) -> bool:
        """Does the word of the closure at ``j`` admit an accepting run?

        ``seed`` is the automaton subset after reading the first ``j``
        letters (-1 for the virtual pre-initial state).  The loop letters
        repeat forever, so acceptance reduces to a cycle search in the
        (phase, automaton state) graph.
        """
        lks, auto = self.lks, self.auto
        m = len(states) - j
        letters = [
            (lks.label_mask(states[j + x]), events[j + x], lks.event_type(events[j + x]))
            for x in range(m)
        ]
        n_q = auto.n_states
        width = n_q + 1  # slot 0 is the virtual initial state

        def enc(phase: int, q: int) -> int:
            return phase * width + (q + 1)

        def edges(idx: int) -> list[int]:
            phase, slot = divmod(idx, width)
            q = slot - 1
            mask, eid, tid = letters[phase]
            nxt = (phase + 1) % m
            return [enc(nxt, q2) for q2 in auto.step(q, mask, eid, tid)]

        if seed == -1:
            starts = [enc(0, INIT_STATE)]
        else:
            starts = [enc(0, q) for q in range(n_q) if seed >> q & 1]
        if not starts:
            return False

        # iterative Tarjan restricted to nodes reachable from the seeds
        index: dict[int, int] = {}
        low: dict[int, int] = {}
        on_stack: set[int] = set()
        stack: list[int] = []
        counter = 1
        accepting = auto.accepting

        for root in starts:
            if root in index:
                continue
            work = [(root, iter(edges(root)))]
            index[root] = low[root] = counter
            counter += 1
            stack.append(root)
            on_stack.add(root)
            while work:
                v, it = work[-1]
                advanced = False
                for w in it:
                    if w not in index:
                        index[w] = low[w] = counter
                        counter += 1
                        stack.append(w)
                        on_stack.add(w)
                        work.append((w, iter(edges(w))))
                        advanced = True
                        break
                    if w in on_stack:
                        low[v] = min(low[v], index[w])
                if advanced:
                    continue
                work.pop()
                if work:
                    low[work[-1][0]] = min(low[work[-1][0]], low[v])
                if low[v] == index[v]:
                    members = []
                    while True:
                        w = stack.pop()
                        on_stack.discard(w)
                        members.append(w)
                        if w == v:
                            break
                    has_acc = any((w % width) - 1 in accepting for w in members)
                    if has_acc:
                        if len(members) > 1:
                            return True
                        w = members[0]
                        if w in edges(w):
                            return True
        return False

    # -- search ---------------------------------------------------------------

    def check(self) -> CheckResult:
        return self._search(None)

    def check_constrained(self, constraint: PointConstraint) -> CheckResult:
        return self._search(constraint)

    def _search(self, constraint: PointConstraint | None) -> CheckResult:
        start = time.perf_counter()
        lks = self.lks
        bound = self.bound
        hopeful = self._hopeful
        visited = 0

        if constraint is not None:
            at = constraint.at
            pin_masks = [
                lks.label_mask(constraint.pin.unroll(p)[0]) for p in range(at)
            ]
            pin_events = [constraint.pin.unroll(p)[1] for p in range(at)]
            point = constraint.point

            def gate(pos: int, smask: int, eid: int) -> bool:
                if pos < at:
                    return smask == pin_masks[pos] and eid == pin_events[pos]
                if pos == at:
                    return eval_letter(point, smask, eid, lks)
                return True

            def wrap_ok(cand: Lasso) -> bool:
                for pos in range(len(cand), at + 1):
                    s, e = cand.unroll(pos)
                    if not gate(pos, lks.label_mask(s), e):
                        return False
                return True
        else:
            gate = None  # type: ignore[assignment]
            wrap_ok = None  # type: ignore[assignment]

        def dfs(states: list[int], events: list[int], qmasks: list[int]) -> Lasso | None:
            nonlocal visited
            s = states[-1]
            pos = len(states) - 1
            smask = lks.label_mask(s)
            q = qmasks[-1]
            for eid, t in lks.out_pairs(s):
                visited += 1
                if gate is not None and not gate(pos, smask, eid):
                    continue
                q2 = self._step(q, s, eid)
                if q2 == 0:
                    continue
                if hopeful is not None and hopeful[t] & q2 == 0:
                    continue
                events.append(eid)
                for j, prev in enumerate(states):
                    if prev != t:
                        continue
                    if wrap_ok is not None and not wrap_ok(_close(states, events, j)):
                        continue
                    if self._member(states, events, j, qmasks[j]):
                        return _close(states, events, j)
                if len(states) < bound:
                    states.append(t)
                    qmasks.append(q2)
                    found = dfs(states, events, qmasks)
                    if found is not None:
                        return found
                    states.pop()
                    qmasks.pop()
                events.pop()
            return None

        result: Lasso | None = None
        for s0 in sorted(lks.initial):
            result = dfs([s0], [], [-1])
            if result is not None:
                break
        ms = (time.perf_counter() - start) * 1000
        if result is None:
            return CheckResult("valid", bound, None, ms, visited)
        return CheckResult("counterexample", bound, result, ms, visited)


def find_counterexample(lks: TypedLks, phi: BoundFormula, bound: int) -> CheckResult:
    """First lasso (in the canonical order) whose word refutes the property,
    or valid-within-bound."""
    return BoundedChecker(lks, phi, bound).check()
