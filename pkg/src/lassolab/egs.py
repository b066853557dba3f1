"""Finite-domain guarded-event modelling language and its compiler.

A model declares finite sorts, boolean or sort-valued state variables
(optionally indexed by sorts), one init constraint, and parametrised event
schemas with a guard and a functional effect.  Grounding instantiates each
schema over the product of its parameter sorts; compilation enumerates the
valuations reachable from the init constraint to produce a typed labelled
model whose propositions are the boolean encoding of the variables.

Comparisons involving an undefined term (``next`` of the last constant of
an ordered sort) are false.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .lks import EventInfo, TypedLks


class ModelError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}" if line else message)
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# Surface AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Sort:
    name: str
    constants: tuple[str, ...]
    ordered: bool


@dataclass(frozen=True)
class VarDecl:
    name: str
    index_sorts: tuple[str, ...]
    value_type: str  # "bool" or a sort name


@dataclass(frozen=True)
class Param:
    name: str
    sort: str


@dataclass(frozen=True)
class Ref:
    """Unresolved reference: variable instance, parameter, or constant."""

    name: str
    indices: tuple["Ref | AppliedFn", ...] = ()
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class AppliedFn:
    """next(term), min(Sort) or max(Sort)."""

    fn: str
    arg: "Ref | AppliedFn | str"
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class Cmp:
    op: str  # "=" or "!="
    left: Ref | AppliedFn
    right: Ref | AppliedFn
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class NotE:
    sub: "Expr"


@dataclass(frozen=True)
class AndE:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class OrE:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class ImpliesE:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Quant:
    kind: str  # "forall" | "exists"
    var: str
    sort: str
    body: "Expr"
    line: int = 0
    col: int = 0


Expr = BoolLit | Ref | Cmp | NotE | AndE | OrE | ImpliesE | Quant


@dataclass(frozen=True)
class Assign:
    target: Ref
    value: Expr | Ref | AppliedFn
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class EventSchema:
    name: str
    params: tuple[Param, ...]
    modifies: tuple[str, ...]
    guard: Expr
    effects: tuple[Assign, ...]
    line: int = 0


@dataclass(frozen=True)
class EventSystem:
    name: str
    sorts: dict[str, Sort]
    vars: dict[str, VarDecl]
    init: Expr
    events: tuple[EventSchema, ...]


@dataclass(frozen=True)
class GroundEvent:
    schema: str
    args: tuple[str, ...]

    @property
    def identity(self) -> str:
        return f"{self.schema}[{','.join(self.args)}]"


# ---------------------------------------------------------------------------
# Lexer / parser
# ---------------------------------------------------------------------------

_KEYWORDS = {
    "model", "sort", "ordered", "var", "bool", "init", "event", "modifies",
    "guard", "effect", "forall", "exists", "true", "false", "next", "min", "max",
}


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
        if c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            word = src[i:j]
            toks.append(_Tok(word if word in _KEYWORDS else "ident", word, line, col))
            col += j - i
            i = j
            continue
        for sym in (":=", "!=", "&&", "||", "->"):
            if src.startswith(sym, i):
                toks.append(_Tok(sym, sym, line, col))
                i += len(sym)
                col += len(sym)
                break
        else:
            if c in "{}()[]:,='!&|":
                kind = {"&": "&&", "|": "||"}.get(c, c)
                toks.append(_Tok(kind, c, line, col))
                i += 1
                col += 1
            else:
                raise ModelError(f"unexpected character {c!r}", line, col)
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
            raise ModelError(
                f"expected {kind!r}, found {tok.value or 'end of input'!r}", tok.line, tok.col
            )
        self.pos += 1
        return tok

    def accept(self, kind: str) -> _Tok | None:
        if self.toks[self.pos].kind == kind:
            return self.take(kind)
        return None

    # -- declarations -----------------------------------------------------

    def model(self) -> tuple[str, list]:
        self.take("model")
        name = self.take("ident").value
        decls = []
        while self.peek().kind != "eof":
            tok = self.peek()
            if tok.kind == "sort":
                decls.append(self.sort_decl())
            elif tok.kind == "var":
                decls.append(self.var_decl())
            elif tok.kind == "init":
                decls.append(self.init_decl())
            elif tok.kind == "event":
                decls.append(self.event_decl())
            else:
                raise ModelError(f"unexpected {tok.value!r} at top level", tok.line, tok.col)
        return name, decls

    def sort_decl(self) -> Sort:
        self.take("sort")
        name = self.take("ident").value
        self.take("=")
        self.take("{")
        constants = [self.take("ident").value]
        while self.accept(","):
            constants.append(self.take("ident").value)
        self.take("}")
        ordered = self.accept("ordered") is not None
        return Sort(name, tuple(constants), ordered)

    def _index_names(self) -> tuple[str, ...]:
        names: list[str] = []
        while self.peek().kind == "[":
            self.take("[")
            names.append(self.take("ident").value)
            while self.accept(","):
                names.append(self.take("ident").value)
            self.take("]")
        return tuple(names)

    def var_decl(self) -> VarDecl:
        self.take("var")
        name = self.take("ident").value
        indices = self._index_names()
        self.take(":")
        if self.accept("bool"):
            vtype = "bool"
        else:
            vtype = self.take("ident").value
        return VarDecl(name, indices, vtype)

    def init_decl(self):
        tok = self.take("init")
        self.take("{")
        expr = self.expr()
        self.take("}")
        return ("init", expr, tok)

    def event_decl(self) -> EventSchema:
        tok = self.take("event")
        name = self.take("ident").value
        self.take("(")
        params: list[Param] = []
        if self.peek().kind != ")":
            while True:
                pname = self.take("ident").value
                self.take(":")
                params.append(Param(pname, self.take("ident").value))
                if not self.accept(","):
                    break
        self.take(")")
        modifies: list[str] = []
        if self.accept("modifies"):
            modifies.append(self.take("ident").value)
            while self.accept(","):
                modifies.append(self.take("ident").value)
        self.take("{")
        self.take("guard")
        self.take(":")
        guard = self.expr()
        self.take("effect")
        self.take(":")
        effects: list[Assign] = []
        while self.peek().kind in ("ident",):
            effects.append(self.assign())
        self.take("}")
        return EventSchema(name, tuple(params), tuple(modifies), guard, tuple(effects), tok.line)

    def assign(self) -> Assign:
        target = self.ref()
        tok = self.take("'")
        self.take(":=")
        value = self.expr()
        return Assign(target, value, tok.line, tok.col)

    # -- terms and expressions ---------------------------------------------

    def ref(self) -> Ref:
        tok = self.take("ident")
        indices: list[Ref | AppliedFn] = []
        while self.peek().kind == "[":
            self.take("[")
            indices.append(self.term())
            while self.accept(","):
                indices.append(self.term())
            self.take("]")
        return Ref(tok.value, tuple(indices), tok.line, tok.col)

    def term(self) -> Ref | AppliedFn:
        tok = self.peek()
        if tok.kind in ("next", "min", "max"):
            self.take(tok.kind)
            self.take("(")
            if tok.kind == "next":
                arg: Ref | AppliedFn | str = self.term()
            else:
                arg = self.take("ident").value
            self.take(")")
            return AppliedFn(tok.kind, arg, tok.line, tok.col)
        return self.ref()

    def expr(self) -> Expr:
        return self.implies_expr()

    def implies_expr(self) -> Expr:
        left = self.or_expr()
        if self.accept("->"):
            return ImpliesE(left, self.implies_expr())
        return left

    def or_expr(self) -> Expr:
        out = self.and_expr()
        while self.accept("||"):
            out = OrE(out, self.and_expr())
        return out

    def and_expr(self) -> Expr:
        out = self.unary_expr()
        while self.accept("&&"):
            out = AndE(out, self.unary_expr())
        return out

    def unary_expr(self) -> Expr:
        tok = self.peek()
        if tok.kind == "!":
            self.take("!")
            return NotE(self.unary_expr())
        if tok.kind in ("forall", "exists"):
            self.take(tok.kind)
            var = self.take("ident").value
            self.take(":")
            sort = self.take("ident").value
            self.take("||")  # the | separator lexes as the or-symbol
            return Quant(tok.kind, var, sort, self.expr(), tok.line, tok.col)
        if tok.kind == "(":
            self.take("(")
            inner = self.expr()
            self.take(")")
            return self.maybe_cmp(inner)
        if tok.kind == "true":
            self.take("true")
            return BoolLit(True)
        if tok.kind == "false":
            self.take("false")
            return BoolLit(False)
        if tok.kind in ("next", "min", "max", "ident"):
            left = self.term()
            return self.maybe_cmp(left)
        raise ModelError(f"expected an expression, found {tok.value!r}", tok.line, tok.col)

    def maybe_cmp(self, left) -> Expr:
        tok = self.peek()
        if tok.kind in ("=", "!="):
            self.take(tok.kind)
            right = self.term()
            if not isinstance(left, (Ref, AppliedFn)):
                raise ModelError("comparison needs a term on the left", tok.line, tok.col)
            return Cmp(tok.kind, left, right, tok.line, tok.col)
        return left


# ---------------------------------------------------------------------------
# Elaboration (name/type checking)
# ---------------------------------------------------------------------------

def _const_sort(sorts: dict[str, Sort]) -> dict[str, str]:
    table: dict[str, str] = {}
    for sort in sorts.values():
        for c in sort.constants:
            table[c] = sort.name
    return table


class _Check:
    def __init__(self, sorts: dict[str, Sort], vars_: dict[str, VarDecl]):
        self.sorts = sorts
        self.vars = vars_
        self.consts = _const_sort(sorts)

    def term_sort(self, t, scope: dict[str, str]) -> str:
        """Sort name of a term; raises for bool-valued or unknown names."""
        if isinstance(t, AppliedFn):
            if t.fn == "next":
                inner = self.term_sort(t.arg, scope)
                if not self.sorts[inner].ordered:
                    raise ModelError(f"next() needs an ordered sort, got {inner}", t.line, t.col)
                return inner
            sort = t.arg
            if sort not in self.sorts:
                raise ModelError(f"unknown sort {sort!r}", t.line, t.col)
            if not self.sorts[sort].ordered:
                raise ModelError(f"{t.fn}() needs an ordered sort, got {sort}", t.line, t.col)
            return sort
        assert isinstance(t, Ref)
        if t.name in scope:
            if t.indices:
                raise ModelError(f"{t.name!r} takes no indices", t.line, t.col)
            return scope[t.name]
        if t.name in self.consts:
            if t.indices:
                raise ModelError(f"constant {t.name!r} takes no indices", t.line, t.col)
            return self.consts[t.name]
        if t.name in self.vars:
            decl = self.vars[t.name]
            self.check_indices(decl, t, scope)
            if decl.value_type == "bool":
                raise ModelError(f"{t.name!r} is boolean, not a term", t.line, t.col)
            return decl.value_type
        raise ModelError(f"unknown name {t.name!r}", t.line, t.col)

    def check_indices(self, decl: VarDecl, ref: Ref, scope: dict[str, str]) -> None:
        if len(ref.indices) != len(decl.index_sorts):
            raise ModelError(
                f"{decl.name!r} expects {len(decl.index_sorts)} indices, got {len(ref.indices)}",
                ref.line,
                ref.col,
            )
        for idx, want in zip(ref.indices, decl.index_sorts):
            got = self.term_sort(idx, scope)
            if got != want:
                raise ModelError(
                    f"index of {decl.name!r} must be {want}, got {got}",
                    ref.line,
                    ref.col,
                )

    def check_expr(self, e: Expr, scope: dict[str, str]) -> None:
        match e:
            case BoolLit():
                pass
            case Ref(name, _, line, col):
                if name in self.vars:
                    decl = self.vars[name]
                    self.check_indices(decl, e, scope)
                    if decl.value_type != "bool":
                        raise ModelError(
                            f"{name!r} is {decl.value_type}-valued; compare it with '='",
                            line,
                            col,
                        )
                else:
                    raise ModelError(f"{name!r} is not a boolean variable", line, col)
            case Cmp(_, left, right, line, col):
                ls = self.term_sort(left, scope)
                rs = self.term_sort(right, scope)
                if ls != rs:
                    raise ModelError(f"cannot compare {ls} with {rs}", line, col)
            case NotE(sub):
                self.check_expr(sub, scope)
            case AndE(a, b) | OrE(a, b) | ImpliesE(a, b):
                self.check_expr(a, scope)
                self.check_expr(b, scope)
            case Quant(_, var, sort, body, line, col):
                if sort not in self.sorts:
                    raise ModelError(f"unknown sort {sort!r}", line, col)
                self.check_expr(body, scope | {var: sort})
            case _:
                raise ModelError(f"malformed expression {e!r}")


def parse_model(src: str) -> EventSystem:
    """Parse and type-check a model; raises ModelError with positions."""
    name, decls = _Parser(_lex(src)).model()
    sorts: dict[str, Sort] = {}
    vars_: dict[str, VarDecl] = {}
    init_expr: Expr | None = None
    schemas: list[EventSchema] = []
    for d in decls:
        if isinstance(d, Sort):
            if d.name in sorts:
                raise ModelError(f"duplicate sort {d.name!r}")
            sorts[d.name] = d
        elif isinstance(d, VarDecl):
            if d.name in vars_:
                raise ModelError(f"duplicate variable {d.name!r}")
            vars_[d.name] = d
        elif isinstance(d, EventSchema):
            if any(s.name == d.name for s in schemas):
                raise ModelError(f"duplicate event {d.name!r}", d.line)
            schemas.append(d)
        else:
            _, expr, tok = d
            if init_expr is not None:
                raise ModelError("duplicate init block", tok.line, tok.col)
            init_expr = expr

    if not vars_:
        raise ModelError("model must declare at least one variable")
    if not schemas:
        raise ModelError("model must declare at least one event")
    if init_expr is None:
        raise ModelError("model must declare an init block")
    for v in vars_.values():
        for s in v.index_sorts:
            if s not in sorts:
                raise ModelError(f"variable {v.name!r} indexed by unknown sort {s!r}")
        if v.value_type != "bool" and v.value_type not in sorts:
            raise ModelError(f"variable {v.name!r} has unknown type {v.value_type!r}")
    consts = _const_sort(sorts)
    clash = set(consts) & set(vars_)
    if clash:
        raise ModelError(f"names used for both constants and variables: {sorted(clash)}")

    check = _Check(sorts, vars_)
    check.check_expr(init_expr, {})
    for schema in schemas:
        scope = {}
        for p in schema.params:
            if p.sort not in sorts:
                raise ModelError(f"parameter {p.name!r} has unknown sort {p.sort!r}", schema.line)
            scope[p.name] = p.sort
        check.check_expr(schema.guard, scope)
        seen_targets: set[tuple] = set()
        for a in schema.effects:
            if a.target.name not in vars_:
                raise ModelError(f"assignment to unknown variable {a.target.name!r}", a.line, a.col)
            if a.target.name not in schema.modifies:
                raise ModelError(
                    f"FrameViolation: {a.target.name!r} assigned but not in modifies",
                    a.line,
                    a.col,
                )
            decl = vars_[a.target.name]
            check.check_indices(decl, a.target, scope)
            key = (a.target.name, a.target.indices)
            if key in seen_targets:
                raise ModelError(f"duplicate assignment to {a.target.name!r}", a.line, a.col)
            seen_targets.add(key)
            if decl.value_type == "bool":
                if isinstance(a.value, AppliedFn):
                    raise ModelError(
                        f"{a.target.name!r} is boolean but is assigned a term", a.line, a.col
                    )
                check.check_expr(a.value, scope)
            else:
                if not isinstance(a.value, (Ref, AppliedFn)):
                    raise ModelError(
                        f"{a.target.name!r} holds {decl.value_type}; assign it a term", a.line, a.col
                    )
                got = check.term_sort(a.value, scope)
                if got != decl.value_type:
                    raise ModelError(
                        f"{a.target.name!r} holds {decl.value_type}, got {got}", a.line, a.col
                    )
        for m in schema.modifies:
            if m not in vars_:
                raise ModelError(f"modifies lists unknown variable {m!r}", schema.line)
    return EventSystem(name, sorts, vars_, init_expr, tuple(schemas))


def ground(sys: EventSystem) -> list[GroundEvent]:
    """One ground event per schema and parameter tuple, in declaration order."""
    out: list[GroundEvent] = []
    for schema in sys.events:
        domains = [sys.sorts[p.sort].constants for p in schema.params]
        for combo in itertools.product(*domains):
            out.append(GroundEvent(schema.name, tuple(combo)))
    return out


# ---------------------------------------------------------------------------
# Compilation to a typed labelled model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Instance:
    """One ground variable slot: a variable plus concrete indices."""

    var: str
    indices: tuple[str, ...]
    value_type: str  # "bool" or sort name

    @property
    def display(self) -> str:
        return f"{self.var}[{','.join(self.indices)}]" if self.indices else self.var


# specialised expression nodes (all names resolved, quantifiers expanded)
@dataclass(frozen=True)
class _SBool:
    value: bool


@dataclass(frozen=True)
class _SBoolVar:
    iid: int


@dataclass(frozen=True)
class _SConst:
    value: int  # index within the sort


@dataclass(frozen=True)
class _SSortVar:
    iid: int


@dataclass(frozen=True)
class _SNext:
    arg: object
    size: int


@dataclass(frozen=True)
class _SCmp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class _SNot:
    sub: object


@dataclass(frozen=True)
class _SAnd:
    left: object
    right: object


@dataclass(frozen=True)
class _SOr:
    left: object
    right: object


class _Specializer:
    """Resolves a schema's guard/effects for one parameter binding.

    Quantifiers are expanded over their finite sorts, parameters become
    constants, and variable references become instance slots, with constant
    folding along the way.
    """

    def __init__(self, sys: EventSystem, instance_ids: dict[tuple[str, tuple[str, ...]], int]):
        self.sys = sys
        self.instance_ids = instance_ids
        self.consts = _const_sort(sys.sorts)

    def _const_index(self, sort: str, name: str) -> int:
        return self.sys.sorts[sort].constants.index(name)

    def term(self, t, env: dict[str, str]):
        """Returns _SConst, _SSortVar or _SNext (sort-typed)."""
        if isinstance(t, AppliedFn):
            if t.fn == "min":
                return _SConst(0)
            if t.fn == "max":
                return _SConst(len(self.sys.sorts[t.arg].constants) - 1)
            inner = self.term(t.arg, env)
            size = self._term_size(t.arg, env)
            if isinstance(inner, _SConst):
                nxt = inner.value + 1
                return _SConst(nxt) if nxt < size else _SConst(-1)
            return _SNext(inner, size)
        assert isinstance(t, Ref)
        if t.name in env:
            sort = self.consts[env[t.name]]
            return _SConst(self._const_index(sort, env[t.name]))
        if t.name in self.consts:
            return _SConst(self._const_index(self.consts[t.name], t.name))
        decl = self.sys.vars[t.name]
        idx = tuple(self._index_const(i, env) for i in t.indices)
        return _SSortVar(self.instance_ids[(t.name, idx)])

    def _term_size(self, t, env: dict[str, str]) -> int:
        if isinstance(t, AppliedFn):
            if t.fn == "next":
                return self._term_size(t.arg, env)
            return len(self.sys.sorts[t.arg].constants)
        if t.name in env:
            return len(self.sys.sorts[self.consts[env[t.name]]].constants)
        if t.name in self.consts:
            return len(self.sys.sorts[self.consts[t.name]].constants)
        return len(self.sys.sorts[self.sys.vars[t.name].value_type].constants)

    def _index_const(self, t, env: dict[str, str]) -> str:
        if isinstance(t, Ref) and t.name in env:
            return env[t.name]
        if isinstance(t, Ref) and t.name in self.consts and not t.indices:
            return t.name
        raise ModelError("variable indices must be parameters or constants",
                         getattr(t, "line", 0), getattr(t, "col", 0))

    def expr(self, e: Expr, env: dict[str, str]):
        match e:
            case BoolLit(v):
                return _SBool(v)
            case Ref(name, _, _, _):
                idx = tuple(self._index_const(i, env) for i in e.indices)
                return _SBoolVar(self.instance_ids[(name, idx)])
            case Cmp(op, left, right, _, _):
                l = self.term(left, env)
                r = self.term(right, env)
                if isinstance(l, _SConst) and isinstance(r, _SConst):
                    if l.value < 0 or r.value < 0:
                        return _SBool(False)  # undefined next(): comparisons fail
                    return _SBool(l.value == r.value if op == "=" else l.value != r.value)
                return _SCmp(op, l, r)
            case NotE(sub):
                s = self.expr(sub, env)
                if isinstance(s, _SBool):
                    return _SBool(not s.value)
                return _SNot(s)
            case AndE(a, b):
                l = self.expr(a, env)
                if isinstance(l, _SBool) and not l.value:
                    return _SBool(False)
                r = self.expr(b, env)
                if isinstance(r, _SBool) and not r.value:
                    return _SBool(False)
                if isinstance(l, _SBool):
                    return r
                if isinstance(r, _SBool):
                    return l
                return _SAnd(l, r)
            case OrE(a, b):
                l = self.expr(a, env)
                if isinstance(l, _SBool) and l.value:
                    return _SBool(True)
                r = self.expr(b, env)
                if isinstance(r, _SBool) and r.value:
                    return _SBool(True)
                if isinstance(l, _SBool):
                    return r
                if isinstance(r, _SBool):
                    return l
                return _SOr(l, r)
            case ImpliesE(a, b):
                return self.expr(OrE(NotE(a), b), env)
            case Quant(kind, var, sort, body, _, _):
                parts = [self.expr(body, env | {var: c}) for c in self.sys.sorts[sort].constants]
                out: object = _SBool(kind == "forall")
                for p in parts:
                    if isinstance(p, _SBool):
                        if kind == "forall" and not p.value:
                            return _SBool(False)
                        if kind == "exists" and p.value:
                            return _SBool(True)
                        continue
                    if isinstance(out, _SBool):
                        out = p
                    else:
                        out = _SAnd(out, p) if kind == "forall" else _SOr(out, p)
                return out
        raise ModelError(f"malformed expression {e!r}")


_UNDEF = -1  # next() past the last constant; distinct from None (unassigned)


def _eval_term(t, values) -> int | None:
    """Value of a sort term: an index, _UNDEF, or None for unassigned slots."""
    if isinstance(t, _SConst):
        return t.value  # already _UNDEF when folded past the end
    if isinstance(t, _SSortVar):
        return values[t.iid]
    v = _eval_term(t.arg, values)
    if v is None or v == _UNDEF:
        return v
    return v + 1 if v + 1 < t.size else _UNDEF


def _eval_expr(e, values) -> bool | None:
    """Three-valued evaluation; None means 'depends on unassigned slots'."""
    if isinstance(e, _SBool):
        return e.value
    if isinstance(e, _SBoolVar):
        return values[e.iid]
    if isinstance(e, _SCmp):
        l = _eval_term(e.left, values)
        if l is None:
            return None
        r = _eval_term(e.right, values)
        if r is None:
            return None
        if l == _UNDEF or r == _UNDEF:
            return False  # undefined successor: comparison is false
        return l == r if e.op == "=" else l != r
    if isinstance(e, _SNot):
        v = _eval_expr(e.sub, values)
        return None if v is None else not v
    if isinstance(e, _SAnd):
        l = _eval_expr(e.left, values)
        if l is False:
            return False
        r = _eval_expr(e.right, values)
        if r is False:
            return False
        if l is None or r is None:
            return None
        return True
    if isinstance(e, _SOr):
        l = _eval_expr(e.left, values)
        if l is True:
            return True
        r = _eval_expr(e.right, values)
        if r is True:
            return True
        if l is None or r is None:
            return None
        return False
    raise TypeError(f"bad node {e!r}")


class CompileError(ValueError):
    pass


class EmptyInitialError(CompileError):
    def __init__(self) -> None:
        super().__init__("init constraint has no solution")


class DeadlockError(CompileError):
    def __init__(self, states: list[str]):
        preview = ", ".join(states[:5]) + ("..." if len(states) > 5 else "")
        super().__init__(f"{len(states)} reachable state(s) enable no event: {preview}")
        self.states = states


class StateCapError(CompileError):
    def __init__(self, cap: int):
        super().__init__(f"state count exceeds cap {cap}")
        self.cap = cap


IDLE_EVENT = "idle"
IDLE_TYPE = "Idle"


@dataclass(frozen=True)
class CompiledModel:
    """A compiled system: the model plus rendering metadata."""

    system: EventSystem
    lks: TypedLks
    instances: tuple[Instance, ...]
    valuations: tuple[tuple, ...]
    ground_events: tuple[GroundEvent, ...]

    def state_props(self, state: int) -> dict[str, bool | str]:
        """Human-facing view of one state: instance name -> bool or constant."""
        values = self.valuations[state]
        out: dict[str, bool | str] = {}
        for inst, value in zip(self.instances, values):
            if inst.value_type == "bool":
                out[inst.display] = bool(value)
            else:
                out[inst.display] = self.system.sorts[inst.value_type].constants[value]
        return out


def _instances_of(sys: EventSystem) -> list[Instance]:
    out: list[Instance] = []
    for decl in sys.vars.values():
        domains = [sys.sorts[s].constants for s in decl.index_sorts]
        for combo in itertools.product(*domains):
            out.append(Instance(decl.name, tuple(combo), decl.value_type))
    return out


def _initial_valuations(
    sys: EventSystem, instances: list[Instance], init, cap: int
) -> list[tuple]:
    """Backtracking enumeration of init solutions, lexicographically smallest
    first (False before True, constants in declaration order)."""
    domains: list[list] = []
    for inst in instances:
        if inst.value_type == "bool":
            domains.append([False, True])
        else:
            domains.append(list(range(len(sys.sorts[inst.value_type].constants))))
    found: list[tuple] = []
    values: list = [None] * len(instances)

    def assign(i: int) -> None:
        verdict = _eval_expr(init, values)
        if verdict is False:
            return
        if i == len(instances):
            if verdict is True:
                found.append(tuple(values))
                if len(found) > cap:
                    raise StateCapError(cap)
            return
        for v in domains[i]:
            values[i] = v
            assign(i + 1)
        values[i] = None

    assign(0)
    return found


def compile_lks(
    sys: EventSystem, *, add_idle: bool = False, state_cap: int = 200_000
) -> CompiledModel:
    """Enumerate reachable valuations and build the typed labelled model.

    States are numbered breadth-first from the smallest initial valuation;
    propositions are one per boolean instance plus one per (sort instance,
    constant) pair, so distinct states always differ in some proposition.
    """
    instances = _instances_of(sys)
    instance_ids = {(inst.var, inst.indices): i for i, inst in enumerate(instances)}
    spec = _Specializer(sys, instance_ids)

    init = spec.expr(sys.init, {})
    ground_events = ground(sys)
    compiled = []
    for ge in ground_events:
        schema = next(s for s in sys.events if s.name == ge.schema)
        env = {p.name: c for p, c in zip(schema.params, ge.args)}
        guard = spec.expr(schema.guard, env)
        effects = []
        for a in schema.effects:
            iid = instance_ids[(a.target.name, tuple(spec._index_const(i, env) for i in a.target.indices))]
            if sys.vars[a.target.name].value_type == "bool":
                effects.append((iid, spec.expr(a.value, env)))
            else:
                effects.append((iid, spec.term(a.value, env)))
        if len({iid for iid, _ in effects}) != len(effects):
            raise ModelError(f"event {ge.identity} assigns one slot twice", schema.line)
        compiled.append((guard, effects))

    initial_vals = _initial_valuations(sys, instances, init, state_cap)
    if not initial_vals:
        raise EmptyInitialError()

    state_ids: dict[tuple, int] = {}
    valuations: list[tuple] = []

    def intern(val: tuple) -> int:
        sid = state_ids.get(val)
        if sid is None:
            sid = len(valuations)
            if sid >= state_cap:
                raise StateCapError(state_cap)
            state_ids[val] = sid
            valuations.append(val)
        return sid

    live_events = [
        (eid, guard, effects)
        for eid, (guard, effects) in enumerate(compiled)
        if not (isinstance(guard, _SBool) and not guard.value)
    ]

    for val in initial_vals:
        intern(val)
    edges: dict[tuple[int, int], set[int]] = {}
    deadlocked: list[int] = []
    frontier = 0
    while frontier < len(valuations):
        sid = frontier
        val = valuations[sid]
        frontier += 1
        enabled = False
        for eid, guard, effects in live_events:
            if _eval_expr(guard, val) is not True:
                continue
            enabled = True
            nxt = list(val)
            for iid, rhs in effects:
                if instances[iid].value_type == "bool":
                    nxt[iid] = _eval_expr(rhs, val)
                else:
                    value = _eval_term(rhs, val)
                    if value == _UNDEF or value is None:
                        raise ModelError(
                            f"event {ground_events[eid].identity} assigns an undefined value"
                        )
                    nxt[iid] = value
            tid = intern(tuple(nxt))
            edges.setdefault((sid, tid), set()).add(eid)
        if not enabled:
            deadlocked.append(sid)

    idle_used = bool(deadlocked)
    if deadlocked and not add_idle:
        raise DeadlockError([_state_name(valuations[s], instances, sys) for s in deadlocked])
    idle_eid = len(ground_events)
    for sid in deadlocked:
        edges[(sid, sid)] = {idle_eid}

    # propositions: booleans directly, sort-valued one-hot
    prop_names: list[str] = []
    prop_of: list[tuple[int, int]] = []  # instance id, expected value
    for i, inst in enumerate(instances):
        if inst.value_type == "bool":
            prop_of.append((i, 1))
            prop_names.append(inst.display)
        else:
            for ci, c in enumerate(sys.sorts[inst.value_type].constants):
                prop_of.append((i, ci))
                prop_names.append(f"{inst.display}={c}")
    labels = []
    for val in valuations:
        lab = set()
        for pid, (iid, expected) in enumerate(prop_of):
            value = val[iid]
            if instances[iid].value_type == "bool":
                if value:
                    lab.add(pid)
            elif value == expected:
                lab.add(pid)
        labels.append(frozenset(lab))

    schema_names = [s.name for s in sys.events]
    type_names = list(schema_names)
    events = [
        EventInfo(ge.schema, ge.args, schema_names.index(ge.schema)) for ge in ground_events
    ]
    if idle_used:
        events.append(EventInfo(IDLE_EVENT, (), len(type_names)))
        type_names.append(IDLE_TYPE)

    lks = TypedLks(
        state_names=tuple(f"s{i}" for i in range(len(valuations))),
        initial=frozenset(state_ids[v] for v in initial_vals),
        prop_names=tuple(prop_names),
        labels=tuple(labels),
        events=tuple(events),
        type_names=tuple(type_names),
        edges={k: frozenset(v) for k, v in edges.items()},
    )
    return CompiledModel(
        system=sys,
        lks=lks,
        instances=tuple(instances),
        valuations=tuple(valuations),
        ground_events=tuple(ground_events),
    )


def _state_name(val: tuple, instances: list[Instance], sys: EventSystem) -> str:
    parts = []
    for inst, value in zip(instances, val):
        if inst.value_type == "bool":
            if value:
                parts.append(inst.display)
        else:
            parts.append(f"{inst.display}={sys.sorts[inst.value_type].constants[value]}")
    return "{" + " ".join(parts) + "}"
