"""Temporal formulas over states, events and event types.

Atoms are propositions, ground events (``@Name[args]``) and event types
(``@Name``).  An event atom holds at a path position when that exact event
is the next one executed; a type atom holds when the next event has that
type.  The remaining connectives are the usual linear-time ones.
"""
from __future__ import annotations

from dataclasses import dataclass

from .lks import Lasso, TypedLks


# ---------------------------------------------------------------------------
# Abstract syntax
# ---------------------------------------------------------------------------

class Formula:
    """Base class of all formula nodes (immutable)."""

    def __str__(self) -> str:
        return text(self)


@dataclass(frozen=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True)
class FalseF(Formula):
    pass


@dataclass(frozen=True)
class Prop(Formula):
    name: str
    pid: int | None = None


@dataclass(frozen=True)
class EventAtom(Formula):
    name: str
    args: tuple[str, ...] = ()
    eid: int | None = None

    @property
    def identity(self) -> str:
        return f"{self.name}[{','.join(self.args)}]"


@dataclass(frozen=True)
class TypeAtom(Formula):
    name: str
    tid: int | None = None


@dataclass(frozen=True)
class Not(Formula):
    sub: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Next(Formula):
    sub: Formula


@dataclass(frozen=True)
class Globally(Formula):
    sub: Formula


@dataclass(frozen=True)
class Finally(Formula):
    sub: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Release(Formula):
    """Dual of Until; produced by negation normalisation, not parseable."""

    left: Formula
    right: Formula


TRUE = TrueF()
FALSE = FalseF()


def conj(parts: list[Formula]) -> Formula:
    """Left-associated conjunction; empty list yields true."""
    if not parts:
        return TRUE
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(parts: list[Formula]) -> Formula:
    if not parts:
        return FALSE
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


# ---------------------------------------------------------------------------
# Printing (stable, minimal parentheses; parse(text(f)) == f)
# ---------------------------------------------------------------------------

_PREC_ATOM = 6
_PREC_UNARY = 5
_PREC_UNTIL = 4
_PREC_AND = 3
_PREC_OR = 2
_PREC_IMPLIES = 1


def _prec(f: Formula) -> int:
    match f:
        case Not() | Next() | Globally() | Finally():
            return _PREC_UNARY
        case Until() | Release():
            return _PREC_UNTIL
        case And():
            return _PREC_AND
        case Or():
            return _PREC_OR
        case Implies():
            return _PREC_IMPLIES
        case _:
            return _PREC_ATOM


def text(f: Formula) -> str:
    """Render a formula in the concrete surface syntax."""

    def wrap(sub: Formula, minimum: int) -> str:
        s = text(sub)
        return f"({s})" if _prec(sub) < minimum else s

    def temporal(op: str, sub: Formula) -> str:
        s = text(sub)
        return f"{op}({s})" if _prec(sub) < _PREC_UNARY else f"{op} {s}"

    match f:
        case TrueF():
            return "true"
        case FalseF():
            return "false"
        case Prop(name, _):
            return name
        case EventAtom(name, args, _):
            return f"@{name}[{','.join(args)}]"
        case TypeAtom(name, _):
            return f"@{name}"
        case Not(sub):
            return f"!{wrap(sub, _PREC_UNARY)}"
        case Next(sub):
            return temporal("X", sub)
        case Globally(sub):
            return temporal("G", sub)
        case Finally(sub):
            return temporal("F", sub)
        case Until(a, b):
            # right-associative: the left operand needs strictly higher level
            return f"{wrap(a, _PREC_UNTIL + 1)} U {wrap(b, _PREC_UNTIL)}"
        case Release(a, b):
            return f"{wrap(a, _PREC_UNTIL + 1)} R {wrap(b, _PREC_UNTIL)}"
        case And(a, b):
            return f"{wrap(a, _PREC_AND)} && {wrap(b, _PREC_AND + 1)}"
        case Or(a, b):
            return f"{wrap(a, _PREC_OR)} || {wrap(b, _PREC_OR + 1)}"
        case Implies(a, b):
            return f"{wrap(a, _PREC_IMPLIES + 1)} -> {wrap(b, _PREC_IMPLIES)}"
    raise TypeError(f"unknown formula node {f!r}")


def sort_key(f: Formula) -> str:
    """Deterministic total order on formulas (used wherever sets are iterated)."""
    return text(f)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


_KEYWORDS = {"true", "false", "X", "G", "F", "U"}


@dataclass(frozen=True)
class _Tok:
    kind: str
    value: str
    line: int
    col: int


def _lex(src: str) -> list[_Tok]:
    toks: list[_Tok] = []
    i, line, col = 0, 1, 1
    n = len(src)
    while i < n:
        c = src[i]
        if c == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if c in " \t\r":
            i, col = i + 1, col + 1
            continue
        if c == "#":
            while i < n and src[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            word = src[i:j]
            kind = word if word in _KEYWORDS else "ident"
            toks.append(_Tok(kind, word, start_line, start_col))
            i, col = j, col + (j - i)
            continue
        two = src[i : i + 2]
        if two in ("&&", "||", "->"):
            toks.append(_Tok(two, two, start_line, start_col))
            i, col = i + 2, col + 2
            continue
        if c in "!()[]@,=&|":
            kind = {"&": "&&", "|": "||"}.get(c, c)
            toks.append(_Tok(kind, c, start_line, start_col))
            i, col = i + 1, col + 1
            continue
        raise ParseError(f"unexpected character {c!r}", line, col)
    toks.append(_Tok("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, toks: list[_Tok]):
        self.toks = toks
        self.pos = 0

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def take(self, kind: str) -> _Tok:
        tok = self.toks[self.pos]
        if tok.kind != kind:
            raise ParseError(f"expected {kind!r}, found {tok.value or 'end of input'!r}", tok.line, tok.col)
        self.pos += 1
        return tok

    def accept(self, kind: str) -> _Tok | None:
        if self.toks[self.pos].kind == kind:
            tok = self.toks[self.pos]
            self.pos += 1
            return tok
        return None

    # precedence: unary > U > && > || > ->
    def formula(self) -> Formula:
        return self.implies()

    def implies(self) -> Formula:
        left = self.disjunction()
        if self.accept("->"):
            return Implies(left, self.implies())
        return left

    def disjunction(self) -> Formula:
        out = self.conjunction()
        while self.accept("||"):
            out = Or(out, self.conjunction())
        return out

    def conjunction(self) -> Formula:
        out = self.until()
        while self.accept("&&"):
            out = And(out, self.until())
        return out

    def until(self) -> Formula:
        left = self.unary()
        if self.accept("U"):
            return Until(left, self.until())
        return left

    def unary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "!":
            self.take("!")
            return Not(self.unary())
        if tok.kind in ("X", "G", "F"):
            self.take(tok.kind)
            ctor = {"X": Next, "G": Globally, "F": Finally}[tok.kind]
            return ctor(self.unary())
        return self.atom()

    def _arg_list(self) -> tuple[str, ...]:
        self.take("[")
        args: list[str] = []
        if self.peek().kind != "]":
            args.append(self.take("ident").value)
            while self.accept(","):
                args.append(self.take("ident").value)
        self.take("]")
        return tuple(args)

    def atom(self) -> Formula:
        tok = self.peek()
        if tok.kind == "true":
            self.take("true")
            return TRUE
        if tok.kind == "false":
            self.take("false")
            return FALSE
        if tok.kind == "(":
            self.take("(")
            f = self.formula()
            self.take(")")
            return f
        if tok.kind == "@":
            self.take("@")
            name = self.take("ident").value
            if self.peek().kind == "[":
                return EventAtom(name, self._arg_list())
            return TypeAtom(name)
        if tok.kind == "ident":
            name = self.take("ident").value
            if self.peek().kind == "[":
                args = self._arg_list()
                name = f"{name}[{','.join(args)}]"
            if self.accept("="):
                name = f"{name}={self.take('ident').value}"
            return Prop(name)
        raise ParseError(f"expected a formula, found {tok.value or 'end of input'!r}", tok.line, tok.col)


def parse_formula(src: str) -> Formula:
    """Parse the concrete syntax; raises ParseError with line/column info.

    Proposition atoms may carry indices and a value suffix so that names
    produced by the model compiler (``gkeys[g0,k1]``, ``current[r0]=k2``)
    stay single atoms.
    """
    parser = _Parser(_lex(src))
    f = parser.formula()
    tok = parser.peek()
    if tok.kind != "eof":
        raise ParseError(f"trailing input {tok.value!r}", tok.line, tok.col)
    return f


# ---------------------------------------------------------------------------
# Binding atoms to a model
# ---------------------------------------------------------------------------

class UnknownAtomError(ValueError):
    def __init__(self, names: list[str]):
        super().__init__("unknown atoms: " + ", ".join(names))
        self.names = names


@dataclass(frozen=True)
class BoundFormula:
    """A formula whose atoms are resolved against one model."""

    root: Formula
    lks: TypedLks


def bind(f: Formula, lks: TypedLks) -> BoundFormula:
    """Resolve every atom to a model id; reports all unresolved names at once."""
    props = {n: i for i, n in enumerate(lks.prop_names)}
    events = {ev.identity: i for i, ev in enumerate(lks.events)}
    types = {n: i for i, n in enumerate(lks.type_names)}
    missing: list[str] = []

    def walk(g: Formula) -> Formula:
        match g:
            case Prop(name, _):
                if name not in props:
                    missing.append(name)
                    return g
                return Prop(name, props[name])
            case EventAtom(name, args, _):
                key = f"{name}[{','.join(args)}]"
                if key not in events:
                    missing.append("@" + key)
                    return g
                return EventAtom(name, args, events[key])
            case TypeAtom(name, _):
                if name not in types:
                    missing.append("@" + name)
                    return g
                return TypeAtom(name, types[name])
            case TrueF() | FalseF():
                return g
            case Not(sub):
                return Not(walk(sub))
            case Next(sub):
                return Next(walk(sub))
            case Globally(sub):
                return Globally(walk(sub))
            case Finally(sub):
                return Finally(walk(sub))
            case And(a, b):
                return And(walk(a), walk(b))
            case Or(a, b):
                return Or(walk(a), walk(b))
            case Implies(a, b):
                return Implies(walk(a), walk(b))
            case Until(a, b):
                return Until(walk(a), walk(b))
            case Release(a, b):
                return Release(walk(a), walk(b))
        raise TypeError(f"unknown formula node {g!r}")

    root = walk(f)
    if missing:
        seen: list[str] = []
        for name in missing:
            if name not in seen:
                seen.append(name)
        raise UnknownAtomError(seen)
    return BoundFormula(root, lks)


# ---------------------------------------------------------------------------
# Negation normal form
# ---------------------------------------------------------------------------

def nnf(f: Formula) -> Formula:
    """Push negations to the atoms using the standard dualities.

    ``X``/``G``/``F`` survive; negated Until turns into the internal
    Release node.  The result is equivalent on every path.
    """
    match f:
        case TrueF() | FalseF() | Prop() | EventAtom() | TypeAtom():
            return f
        case And(a, b):
            return And(nnf(a), nnf(b))
        case Or(a, b):
            return Or(nnf(a), nnf(b))
        case Implies(a, b):
            return Or(nnf(Not(a)), nnf(b))
        case Next(sub):
            return Next(nnf(sub))
        case Globally(sub):
            return Globally(nnf(sub))
        case Finally(sub):
            return Finally(nnf(sub))
        case Until(a, b):
            return Until(nnf(a), nnf(b))
        case Release(a, b):
            return Release(nnf(a), nnf(b))
        case Not(sub):
            match sub:
                case TrueF():
                    return FALSE
                case FalseF():
                    return TRUE
                case Prop() | EventAtom() | TypeAtom():
                    return f
                case Not(inner):
                    return nnf(inner)
                case And(a, b):
                    return Or(nnf(Not(a)), nnf(Not(b)))
                case Or(a, b):
                    return And(nnf(Not(a)), nnf(Not(b)))
                case Implies(a, b):
                    return And(nnf(a), nnf(Not(b)))
                case Next(inner):
                    return Next(nnf(Not(inner)))
                case Globally(inner):
                    return Finally(nnf(Not(inner)))
                case Finally(inner):
                    return Globally(nnf(Not(inner)))
                case Until(a, b):
                    return Release(nnf(Not(a)), nnf(Not(b)))
                case Release(a, b):
                    return Until(nnf(Not(a)), nnf(Not(b)))
    raise TypeError(f"unknown formula node {f!r}")


# ---------------------------------------------------------------------------
# Direct evaluation over lassos
# ---------------------------------------------------------------------------

def _require_bound(value: int | None, node: Formula) -> int:
    if value is None:
        raise ValueError(f"atom {text(node)} is not bound to a model")
    return value


def eval_lasso(bf: BoundFormula, lasso: Lasso) -> bool:
    """Decide whether the infinite unrolling of ``lasso`` satisfies the formula.

    Memoised over (subformula, canonical position); temporal operators scan
    the finitely many canonical positions reachable from a point, which is
    exact because the suffix structure repeats with the loop.
    """
    lks = bf.lks
    memo: dict[tuple[int, int], bool] = {}

    def ev(f: Formula, j: int) -> bool:
        # id() keys are stable here: every subformula stays alive via bf.root
        j = lasso.position(j)
        key = (id(f), j)
        if key in memo:
            return memo[key]
        result = compute(f, j)
        memo[key] = result
        return result

    def compute(f: Formula, j: int) -> bool:
        s, e = lasso.unroll(j)
        match f:
            case TrueF():
                return True
            case FalseF():
                return False
            case Prop(_, pid):
                return _require_bound(pid, f) in lks.labels[s]
            case EventAtom(_, _, eid):
                return e == _require_bound(eid, f)
            case TypeAtom(_, tid):
                return lks.event_type(e) == _require_bound(tid, f)
            case Not(sub):
                return not ev(sub, j)
            case And(a, b):
                return ev(a, j) and ev(b, j)
            case Or(a, b):
                return ev(a, j) or ev(b, j)
            case Implies(a, b):
                return (not ev(a, j)) or ev(b, j)
            case Next(sub):
                return ev(sub, j + 1)
            case Globally(sub):
                return all(ev(sub, k) for k in lasso.positions_from(j))
            case Finally(sub):
                return any(ev(sub, k) for k in lasso.positions_from(j))
            case Until(a, b):
                for k in lasso.positions_from(j):
                    if ev(b, k):
                        return True
                    if not ev(a, k):
                        return False
                return False
            case Release(a, b):
                for k in lasso.positions_from(j):
                    if not ev(b, k):
                        return False
                    if ev(a, k):
                        return True
                return True
        raise TypeError(f"unknown formula node {f!r}")

    return ev(bf.root, 0)


def compile_evaluator(bf: BoundFormula):
    """Precompile the formula into a fast direct evaluator over lassos.

    Returns ``evaluate(states, events, loop_start) -> bool`` computing the
    same verdict as :func:`eval_lasso`, bottom-up over all positions at once;
    worthwhile when one formula is checked against many candidate lassos.
    Until/Release values on the loop are the usual least/greatest fixpoints.
    """
    lks = bf.lks
    order: list[Formula] = []
    index: dict[Formula, int] = {}

    def visit(f: Formula) -> int:
        if f in index:
            return index[f]
        match f:
            case Not(a) | Next(a) | Globally(a) | Finally(a):
                visit(a)
            case And(a, b) | Or(a, b) | Implies(a, b) | Until(a, b) | Release(a, b):
                visit(a)
                visit(b)
            case _:
                pass
        index[f] = len(order)
        order.append(f)
        return index[f]

    visit(bf.root)
    program: list[tuple] = []
    for f in order:
        match f:
            case TrueF():
                program.append(("true",))
            case FalseF():
                program.append(("false",))
            case Prop(_, pid):
                program.append(("prop", _require_bound(pid, f)))
            case EventAtom(_, _, eid):
                program.append(("event", _require_bound(eid, f)))
            case TypeAtom(_, tid):
                program.append(("type", _require_bound(tid, f)))
            case Not(a):
                program.append(("not", index[a]))
            case And(a, b):
                program.append(("and", index[a], index[b]))
            case Or(a, b):
                program.append(("or", index[a], index[b]))
            case Implies(a, b):
                program.append(("implies", index[a], index[b]))
            case Next(a):
                program.append(("next", index[a]))
            case Globally(a):
                program.append(("glob", index[a]))
            case Finally(a):
                program.append(("fin", index[a]))
            case Until(a, b):
                program.append(("until", index[a], index[b]))
            case Release(a, b):
                program.append(("release", index[a], index[b]))
    root = index[bf.root]
    labels = lks.labels
    etype = [ev.type_id for ev in lks.events]

    def evaluate(states, events, loop_start: int) -> bool:
        n = len(states)
        vals: list[list[bool]] = [None] * len(program)  # type: ignore[list-item]
        for k, op in enumerate(program):
            kind = op[0]
            if kind == "true":
                vals[k] = [True] * n
            elif kind == "false":
                vals[k] = [False] * n
            elif kind == "prop":
                pid = op[1]
                vals[k] = [pid in labels[s] for s in states]
            elif kind == "event":
                eid = op[1]
                vals[k] = [e == eid for e in events]
            elif kind == "type":
                tid = op[1]
                vals[k] = [etype[e] == tid for e in events]
            elif kind == "not":
                vals[k] = [not v for v in vals[op[1]]]
            elif kind == "and":
                a, b = vals[op[1]], vals[op[2]]
                vals[k] = [a[j] and b[j] for j in range(n)]
            elif kind == "or":
                a, b = vals[op[1]], vals[op[2]]
                vals[k] = [a[j] or b[j] for j in range(n)]
            elif kind == "implies":
                a, b = vals[op[1]], vals[op[2]]
                vals[k] = [(not a[j]) or b[j] for j in range(n)]
            elif kind == "next":
                a = vals[op[1]]
                vals[k] = [a[j + 1] if j + 1 < n else a[loop_start] for j in range(n)]
            elif kind == "fin":
                a = vals[op[1]]
                out = [False] * n
                hit = any(a[j] for j in range(loop_start, n))
                for j in range(loop_start, n):
                    out[j] = hit
                for j in range(loop_start - 1, -1, -1):
                    out[j] = a[j] or out[j + 1]
                vals[k] = out
            elif kind == "glob":
                a = vals[op[1]]
                out = [False] * n
                hold = all(a[j] for j in range(loop_start, n))
                for j in range(loop_start, n):
                    out[j] = hold
                for j in range(loop_start - 1, -1, -1):
                    out[j] = a[j] and out[j + 1]
                vals[k] = out
            elif kind == "until":
                f_, g_ = vals[op[1]], vals[op[2]]
                out = [False] * n
                for _ in range(n - loop_start):  # least fixpoint on the loop
                    changed = False
                    for j in range(n - 1, loop_start - 1, -1):
                        nxt = out[j + 1] if j + 1 < n else out[loop_start]
                        v = g_[j] or (f_[j] and nxt)
                        if v != out[j]:
                            out[j] = v
                            changed = True
                    if not changed:
                        break
                for j in range(loop_start - 1, -1, -1):
                    out[j] = g_[j] or (f_[j] and out[j + 1])
                vals[k] = out
            else:  # release: greatest fixpoint on the loop
                f_, g_ = vals[op[1]], vals[op[2]]
                out = [True] * n
                for _ in range(n - loop_start):
                    changed = False
                    for j in range(n - 1, loop_start - 1, -1):
                        nxt = out[j + 1] if j + 1 < n else out[loop_start]
                        v = g_[j] and (f_[j] or nxt)
                        if v != out[j]:
                            out[j] = v
                            changed = True
                    if not changed:
                        break
                for j in range(loop_start - 1, -1, -1):
                    out[j] = g_[j] and (f_[j] or out[j + 1])
                vals[k] = out
        return vals[root][0]

    return evaluate


def eval_letter(f: Formula, mask: int, eid: int, lks: TypedLks) -> bool:
    """Evaluate a temporal-operator-free formula at a single path position.

    The position is given as the state's proposition bitmask plus the event
    taken there.  Used for pointwise constraints during constrained search.
    """
    match f:
        case TrueF():
            return True
        case FalseF():
            return False
        case Prop(_, pid):
            return bool(mask >> _require_bound(pid, f) & 1)
        case EventAtom(_, _, e):
            return eid == _require_bound(e, f)
        case TypeAtom(_, tid):
            return lks.event_type(eid) == _require_bound(tid, f)
        case Not(sub):
            return not eval_letter(sub, mask, eid, lks)
        case And(a, b):
            return eval_letter(a, mask, eid, lks) and eval_letter(b, mask, eid, lks)
        case Or(a, b):
            return eval_letter(a, mask, eid, lks) or eval_letter(b, mask, eid, lks)
        case Implies(a, b):
            return (not eval_letter(a, mask, eid, lks)) or eval_letter(b, mask, eid, lks)
    raise ValueError(f"formula {text(f)} is not a single-position constraint")
