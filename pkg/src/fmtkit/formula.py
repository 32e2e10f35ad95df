"""Syntax of first-order logic extended with Härtig, WF and second-order quantifiers.

Grammar (whitespace-insensitive)::

    formula  := iff
    iff      := imp { "<->" imp }                  left associative
    imp      := or [ "->" imp ]                    right associative
    or       := and { "|" and }
    and      := unary { "&" unary }
    unary    := "!" unary | quant | atom | "(" formula ")"
    quant    := ("forall" | "exists") binder { binder } "." formula
              | ("forall2" | "exists2") NAME ":" "(" [ sort { "," sort } ] ")" "." formula
              | "I" binder binder "(" formula ")" "(" formula ")"
              | "WF" binder binder "(" formula ")"
    binder   := NAME [ ":" sort ]
    atom     := "true" | "false" | term ("=" | "!=") term
              | REL [ "(" [ term { "," term } ] ")" ]
    term     := NAME | FUN "(" term { "," term } ")"

A quantifier body extends as far to the right as possible.  Sorts may be
omitted wherever usage determines them; in a single-sorted vocabulary every
variable defaults to the only sort.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from ._lexer import TokenStream
from .errors import FormulaSyntaxError, SortError, UnknownSymbol
from .structures import Vocabulary

KEYWORDS = {"forall", "exists", "forall2", "exists2", "I", "WF", "true", "false"}


# -- terms ------------------------------------------------------------------------

class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    name: str
    sort: str


@dataclass(frozen=True)
class Const(Term):
    name: str


@dataclass(frozen=True)
class FunApp(Term):
    name: str
    args: tuple[Term, ...]


# -- formulas ---------------------------------------------------------------------

class Formula:
    __slots__ = ()

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Truth(Formula):
    value: bool


@dataclass(frozen=True)
class Rel(Formula):
    name: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class SOApp(Formula):
    var: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Eq(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Imp(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    sort: str
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    sort: str
    body: Formula


@dataclass(frozen=True)
class Hartig(Formula):
    """``I x y (left)(right)``: x bound in left, y bound in right."""

    x: str
    xsort: str
    left: Formula
    y: str
    ysort: str
    right: Formula


@dataclass(frozen=True)
class WF(Formula):
    """``WF x y (body)``: the relation defined by body is well-founded."""

    x: str
    y: str
    sort: str
    body: Formula


@dataclass(frozen=True)
class SOForall(Formula):
    var: str
    profile: tuple[str, ...]
    body: Formula


@dataclass(frozen=True)
class SOExists(Formula):
    var: str
    profile: tuple[str, ...]
    body: Formula


TRUE = Truth(True)
FALSE = Truth(False)


def conj(parts: Iterable[Formula]) -> Formula:
    out = None
    for p in parts:
        out = p if out is None else And(out, p)
    return TRUE if out is None else out


def disj(parts: Iterable[Formula]) -> Formula:
    out = None
    for p in parts:
        out = p if out is None else Or(out, p)
    return FALSE if out is None else out


# -- parsing ----------------------------------------------------------------------

class _Binder:
    __slots__ = ("name", "sort", "pos")

    def __init__(self, name, sort, pos):
        self.name = name
        self.sort = sort
        self.pos = pos


class _Sorts:
    """Union-find over binders and fixed sort names."""

    def __init__(self, text):
        self.parent: dict = {}
        self.fixed: dict = {}
        self.text = text

    def find(self, b):
        self.parent.setdefault(b, b)
        while self.parent[b] is not b:
            self.parent[b] = self.parent[self.parent[b]]
            b = self.parent[b]
        return b

    def bind(self, b: _Binder, sort: str, symbol: str, pos: int):
        root = self.find(b)
        have = self.fixed.get(root)
        if have is not None and have != sort:
            raise SortError(f"variable {b.name!r} used with sorts {have!r} and {sort!r} (via {symbol!r})",
                            symbol, pos)
        self.fixed[root] = sort

    def union(self, a: _Binder, b: _Binder, pos: int):
        ra, rb = self.find(a), self.find(b)
        if ra is rb:
            return
        sa, sb = self.fixed.get(ra), self.fixed.get(rb)
        if sa is not None and sb is not None and sa != sb:
            raise SortError(f"cannot equate {a.name!r} of sort {sa!r} with {b.name!r} of sort {sb!r}", "=", pos)
        self.parent[ra] = rb
        if sb is None and sa is not None:
            self.fixed[rb] = sa

    def sort_of(self, b):
        return self.fixed.get(self.find(b))


class _Parser:
    def __init__(self, text: str, voc: Vocabulary, free: Mapping[str, str] | None,
                 so_free: Mapping[str, tuple] | None):
        self.ts = TokenStream(text)
        self.text = text
        self.voc = voc
        self.sorts = _Sorts(text)
        self.scope: list[tuple[str, object]] = []
        self.free: dict[str, _Binder] = {}
        self.so_scope: list[tuple[str, tuple]] = list((so_free or {}).items())
        for name, s in (free or {}).items():
            b = _Binder(name, s, 0)
            self._check_sort(s, 0)
            self.sorts.bind(b, s, name, 0)
            self.free[name] = b

    # -- scope helpers ------------------------------------------------------
    def _check_sort(self, s, pos):
        if s not in self.voc.sorts:
            raise SortError(f"unknown sort {s!r}", s, pos)

    def _lookup_var(self, name):
        for n, b in reversed(self.scope):
            if n == name:
                return b
        return None

    def _lookup_so(self, name):
        for n, prof in reversed(self.so_scope):
            if n == name:
                return prof
        return None

    def _binder(self) -> _Binder:
        tok = self.ts.expect_id("variable")
        if tok.text in KEYWORDS:
            self.ts.error(f"keyword {tok.text!r} cannot be a variable", tok.pos)
        if self.voc.kind(tok.text) is not None:
            raise FormulaSyntaxError(f"symbol {tok.text!r} cannot be bound as a variable", tok.pos, self.text)
        sort = None
        if self.ts.accept(":"):
            st = self.ts.expect_id("sort")
            self._check_sort(st.text, st.pos)
            sort = st.text
        b = _Binder(tok.text, sort, tok.pos)
        if sort is not None:
            self.sorts.bind(b, sort, tok.text, tok.pos)
        return b

    # -- grammar ------------------------------------------------------------
    def parse(self):
        node = self.formula()
        if self.ts.current.kind != "eof":
            self.ts.error(f"unexpected {self.ts.current.text!r}")
        return node

    def formula(self):
        left = self.imp()
        while self.ts.accept("<->"):
            left = ("iff", left, self.imp())
        return left

    def imp(self):
        left = self.disj()
        if self.ts.accept("->"):
            return ("imp", left, self.imp())
        return left

    def disj(self):
        left = self.conj()
        while self.ts.accept("|"):
            left = ("or", left, self.conj())
        return left

    def conj(self):
        left = self.unary()
        while self.ts.accept("&"):
            left = ("and", left, self.unary())
        return left

    def unary(self):
        ts = self.ts
        if ts.accept("!"):
            return ("not", self.unary())
        if ts.accept("("):
            node = self.formula()
            ts.expect(")")
            return node
        tok = ts.current
        if tok.kind == "id":
            if tok.text in ("forall", "exists"):
                ts.advance()
                return self.quant(tok.text)
            if tok.text in ("forall2", "exists2"):
                ts.advance()
                return self.so_quant(tok.text)
            if tok.text == "I" and ts.peek().kind == "id":
                ts.advance()
                return self.hartig()
            if tok.text == "WF" and ts.peek().kind == "id":
                ts.advance()
                return self.wf()
            if tok.text == "true":
                ts.advance()
                return ("truth", True)
            if tok.text == "false":
                ts.advance()
                return ("truth", False)
        return self.atom()

    def quant(self, kw):
        binders = [self._binder()]
        while self.ts.current.kind == "id":
            b = self._binder()
            if any(b.name == o.name for o in binders):
                raise FormulaSyntaxError(f"variable {b.name!r} bound twice", b.pos, self.text)
            binders.append(b)
        self.ts.expect(".")
        for b in binders:
            self.scope.append((b.name, b))
        body = self.formula()
        for _ in binders:
            self.scope.pop()
        for b in reversed(binders):
            body = (kw, b, body)
        return body

    def so_quant(self, kw):
        tok = self.ts.expect_id("relation variable")
        if tok.text in KEYWORDS or self.voc.kind(tok.text) is not None:
            raise FormulaSyntaxError(f"{tok.text!r} cannot be a relation variable", tok.pos, self.text)
        self.ts.expect(":")
        self.ts.expect("(")
        profile = []
        if not self.ts.at(")"):
            while True:
                st = self.ts.expect_id("sort")
                self._check_sort(st.text, st.pos)
                profile.append(st.text)
                if not self.ts.accept(","):
                    break
        self.ts.expect(")")
        self.ts.expect(".")
        self.so_scope.append((tok.text, tuple(profile)))
        body = self.formula()
        self.so_scope.pop()
        return (kw, tok.text, tuple(profile), body)

    def _bracketed(self, binders):
        self.ts.expect("(")
        for b in binders:
            self.scope.append((b.name, b))
        node = self.formula()
        for _ in binders:
            self.scope.pop()
        self.ts.expect(")")
        return node

    def hartig(self):
        x = self._binder()
        y = self._binder()
        left = self._bracketed([x])
        right = self._bracketed([y])
        return ("I", x, left, y, right)

    def wf(self):
        x = self._binder()
        y = self._binder()
        if x.name == y.name:
            raise FormulaSyntaxError("WF needs two distinct variables", y.pos, self.text)
        self.sorts.union(x, y, y.pos)
        body = self._bracketed([x, y])
        return ("WF", x, y, body)

    def atom(self):
        ts = self.ts
        tok = ts.current
        if tok.kind != "id":
            ts.error(f"expected a formula, found {tok.text or 'end of input'!r}")
        name = tok.text
        kind = self.voc.kind(name)
        prof = self._lookup_so(name) if self._lookup_var(name) is None else None
        if prof is not None or kind == "rel":
            ts.advance()
            expected = prof if prof is not None else self.voc.relation(name)
            args = []
            if ts.accept("("):
                args = self._args()
            if len(args) != len(expected):
                raise SortError(f"{name!r} expects {len(expected)} arguments, got {len(args)}", name, tok.pos)
            for (term, pos), s in zip(args, expected):
                self._constrain(term, s, name, pos)
            return ("so" if prof is not None else "rel", name, [t for t, _ in args])
        left, lpos = self.term()
        op = ts.current
        if not (ts.accept("=") or ts.accept("!=")):
            if kind is None and self._lookup_var(name) is None and name not in self.free and ts.at("("):
                raise UnknownSymbol(name, tok.pos)
            ts.error(f"expected '=' or '!=' after term, found {ts.current.text or 'end of input'!r}")
        right, rpos = self.term()
        self._equate(left, right, op.pos)
        node = ("eq", left, right)
        return ("not", node) if op.text == "!=" else node

    def _args(self):
        args = []
        if not self.ts.at(")"):
            while True:
                args.append(self.term())
                if not self.ts.accept(","):
                    break
        self.ts.expect(")")
        return args

    def term(self):
        ts = self.ts
        tok = ts.expect_id("term")
        name = tok.text
        if name in KEYWORDS:
            ts.error(f"keyword {name!r} cannot be a term", tok.pos)
        b = self._lookup_var(name)
        if b is not None:
            return ("var", b), tok.pos
        kind = self.voc.kind(name)
        if kind == "const":
            return ("const", name), tok.pos
        if kind == "fun":
            arg_sorts, _ = self.voc.function(name)
            args = []
            if ts.accept("("):
                args = self._args()
            if len(args) != len(arg_sorts):
                raise SortError(f"{name!r} expects {len(arg_sorts)} arguments, got {len(args)}", name, tok.pos)
            for (t, pos), s in zip(args, arg_sorts):
                self._constrain(t, s, name, pos)
            return ("fun", name, [t for t, _ in args]), tok.pos
        if kind == "rel":
            raise SortError(f"relation {name!r} used as a term", name, tok.pos)
        if ts.at("("):
            raise UnknownSymbol(name, tok.pos)
        b = self.free.get(name)
        if b is None:
            b = _Binder(name, None, tok.pos)
            self.free[name] = b
        return ("var", b), tok.pos

    def _term_sort(self, t):
        if t[0] == "var":
            return self.sorts.sort_of(t[1])
        if t[0] == "const":
            return self.voc.constant(t[1])
        return self.voc.function(t[1])[1]

    def _constrain(self, t, sort, symbol, pos):
        if t[0] == "var":
            self.sorts.bind(t[1], sort, symbol, pos)
            return
        have = self._term_sort(t)
        if have != sort:
            raise SortError(f"{symbol!r} expects sort {sort!r} but got a term of sort {have!r}", symbol, pos)

    def _equate(self, left, right, pos):
        if left[0] == "var" and right[0] == "var":
            self.sorts.union(left[1], right[1], pos)
            return
        if left[0] == "var":
            left, right = right, left
        s = self._term_sort(left)
        if right[0] == "var":
            self.sorts.bind(right[1], s, "=", pos)
        elif self._term_sort(right) != s:
            raise SortError(f"cannot equate terms of sorts {s!r} and {self._term_sort(right)!r}", "=", pos)

    # -- resolution ---------------------------------------------------------
    def resolve_sort(self, b: _Binder) -> str:
        s = self.sorts.sort_of(b)
        if s is None:
            if len(self.voc.sorts) == 1:
                return self.voc.sorts[0]
            raise SortError(f"cannot infer the sort of variable {b.name!r}", b.name, b.pos)
        return s

    def build(self, node) -> Formula:
        tag = node[0]
        if tag == "truth":
            return Truth(node[1])
        if tag == "rel":
            return Rel(node[1], tuple(self.build_term(t) for t in node[2]))
        if tag == "so":
            return SOApp(node[1], tuple(self.build_term(t) for t in node[2]))
        if tag == "eq":
            return Eq(self.build_term(node[1]), self.build_term(node[2]))
        if tag == "not":
            return Not(self.build(node[1]))
        if tag in ("and", "or", "imp", "iff"):
            cls = {"and": And, "or": Or, "imp": Imp, "iff": Iff}[tag]
            return cls(self.build(node[1]), self.build(node[2]))
        if tag in ("forall", "exists"):
            b = node[1]
            cls = Forall if tag == "forall" else Exists
            return cls(b.name, self.resolve_sort(b), self.build(node[2]))
        if tag in ("forall2", "exists2"):
            cls = SOForall if tag == "forall2" else SOExists
            return cls(node[1], node[2], self.build(node[3]))
        if tag == "I":
            _, x, left, y, right = node
            return Hartig(x.name, self.resolve_sort(x), self.build(left), y.name, self.resolve_sort(y),
                          self.build(right))
        if tag == "WF":
            _, x, y, body = node
            return WF(x.name, y.name, self.resolve_sort(x), self.build(body))
        raise AssertionError(tag)

    def build_term(self, t) -> Term:
        if t[0] == "var":
            return Var(t[1].name, self.resolve_sort(t[1]))
        if t[0] == "const":
            return Const(t[1])
        return FunApp(t[1], tuple(self.build_term(a) for a in t[2]))


def parse(text: str, vocabulary: Vocabulary, free: Mapping[str, str] | None = None,
          so_free: Mapping[str, tuple] | None = None) -> Formula:
    """Parse and sort-check ``text`` over ``vocabulary``.

    ``free`` optionally fixes sorts of free variables; ``so_free`` declares
    free relation variables with their profiles.
    """
    p = _Parser(text, vocabulary, free, so_free)
    raw = p.parse()
    return p.build(raw)


# -- printing ---------------------------------------------------------------------

_PREC = {Iff: 1, Imp: 2, Or: 3, And: 4}
_OPS = {Iff: "<->", Imp: "->", Or: "|", And: "&"}


def term_text(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        return t.name
    return f"{t.name}(" + ", ".join(term_text(a) for a in t.args) + ")"


def to_text(phi: Formula) -> str:
    """Render in the concrete grammar with every sort annotated."""
    return _fmt(phi, 0)


def _fmt(phi: Formula, ctx: int) -> str:
    if isinstance(phi, Truth):
        return "true" if phi.value else "false"
    if isinstance(phi, (Rel, SOApp)):
        name = phi.name if isinstance(phi, Rel) else phi.var
        return f"{name}(" + ", ".join(term_text(a) for a in phi.args) + ")"
    if isinstance(phi, Eq):
        return f"{term_text(phi.left)} = {term_text(phi.right)}"
    if isinstance(phi, Not):
        if isinstance(phi.body, Eq):
            return f"{term_text(phi.body.left)} != {term_text(phi.body.right)}"
        return "!" + _fmt(phi.body, 5)
    prec = _PREC.get(type(phi))
    if prec is not None:
        op = _OPS[type(phi)]
        if isinstance(phi, Imp):
            text = f"{_fmt(phi.left, prec + 1)} {op} {_fmt(phi.right, prec)}"
        else:
            text = f"{_fmt(phi.left, prec)} {op} {_fmt(phi.right, prec + 1)}"
        return f"({text})" if ctx > prec else text
    if isinstance(phi, Hartig):
        return f"I {phi.x}:{phi.xsort} {phi.y}:{phi.ysort} ({_fmt(phi.left, 0)})({_fmt(phi.right, 0)})"
    if isinstance(phi, WF):
        return f"WF {phi.x}:{phi.sort} {phi.y}:{phi.sort} ({_fmt(phi.body, 0)})"
    if isinstance(phi, (Forall, Exists)):
        kw = "forall" if isinstance(phi, Forall) else "exists"
        text = f"{kw} {phi.var}:{phi.sort} . {_fmt(phi.body, 0)}"
    elif isinstance(phi, (SOForall, SOExists)):
        kw = "forall2" if isinstance(phi, SOForall) else "exists2"
        text = f"{kw} {phi.var}:(" + ",".join(phi.profile) + f") . {_fmt(phi.body, 0)}"
    else:
        raise TypeError(f"not a formula: {phi!r}")
    return f"({text})" if ctx > 0 else text


# -- analysis ---------------------------------------------------------------------

@dataclass(frozen=True)
class Analysis:
    symbols: frozenset[str]
    sorts: frozenset[str]
    rank: int
    degree: int
    free: dict
    free_so: dict

    def to_dict(self) -> dict:
        return {
            "symbols": sorted(self.symbols),
            "sorts": sorted(self.sorts),
            "rank": self.rank,
            "degree": self.degree,
            "free": dict(sorted(self.free.items())),
            "free_so": {k: list(v) for k, v in sorted(self.free_so.items())},
        }


def analyze(phi: Formula, vocabulary: Vocabulary | None = None) -> Analysis:
    """Symbols, sorts, quantifier rank, second-order degree and free variables.

    Härtig and WF nodes each add one to the quantifier rank; second-order
    binders add to the degree instead.
    """
    symbols: set[str] = set()
    sorts: set[str] = set()
    free: dict[str, str] = {}
    free_so: dict[str, tuple] = {}

    def term(t, bound):
        if isinstance(t, Var):
            sorts.add(t.sort)
            if t.name not in bound:
                free[t.name] = t.sort
        elif isinstance(t, Const):
            symbols.add(t.name)
        else:
            symbols.add(t.name)
            for a in t.args:
                term(a, bound)

    def walk(f, bound, sobound) -> tuple[int, int]:
        if isinstance(f, Truth):
            return 0, 0
        if isinstance(f, Rel):
            symbols.add(f.name)
            for a in f.args:
                term(a, bound)
            return 0, 0
        if isinstance(f, SOApp):
            if f.var not in sobound:
                free_so[f.var] = tuple(_arg_sort(a, vocabulary) for a in f.args)
            for a in f.args:
                term(a, bound)
            return 0, 0
        if isinstance(f, Eq):
            term(f.left, bound)
            term(f.right, bound)
            return 0, 0
        if isinstance(f, Not):
            return walk(f.body, bound, sobound)
        if isinstance(f, (And, Or, Imp, Iff)):
            r1, d1 = walk(f.left, bound, sobound)
            r2, d2 = walk(f.right, bound, sobound)
            return max(r1, r2), max(d1, d2)
        if isinstance(f, (Forall, Exists)):
            sorts.add(f.sort)
            r, d = walk(f.body, bound | {f.var}, sobound)
            return r + 1, d
        if isinstance(f, Hartig):
            sorts.update((f.xsort, f.ysort))
            r1, d1 = walk(f.left, bound | {f.x}, sobound)
            r2, d2 = walk(f.right, bound | {f.y}, sobound)
            return max(r1, r2) + 1, max(d1, d2)
        if isinstance(f, WF):
            sorts.add(f.sort)
            r, d = walk(f.body, bound | {f.x, f.y}, sobound)
            return r + 1, d
        if isinstance(f, (SOForall, SOExists)):
            sorts.update(f.profile)
            r, d = walk(f.body, bound, sobound | {f.var})
            return r, d + 1
        raise TypeError(f"not a formula: {f!r}")

    rank, degree = walk(phi, frozenset(), frozenset())
    if vocabulary is not None:
        for name in symbols:
            info = vocabulary.profile(name)
            if info[0] == "rel":
                sorts.update(info[1])
            elif info[0] == "fun":
                sorts.update(info[1])
                sorts.add(info[2])
            else:
                sorts.add(info[1])
    return Analysis(frozenset(symbols), frozenset(sorts), rank, degree, free, free_so)


def _arg_sort(t, vocabulary):
    if isinstance(t, Var):
        return t.sort
    if vocabulary is None:
        return None
    if isinstance(t, Const):
        return vocabulary.constant(t.name)
    return vocabulary.function(t.name)[1]


def free_variables(phi: Formula) -> dict:
    return analyze(phi).free


def is_sentence(phi: Formula) -> bool:
    a = analyze(phi)
    return not a.free and not a.free_so


# -- substitution -----------------------------------------------------------------

def _term_vars(t: Term) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, FunApp):
        out: set[str] = set()
        for a in t.args:
            out |= _term_vars(a)
        return out
    return set()


def substitute(phi: Formula, mapping: Mapping[str, Term]) -> Formula:
    """Replace free first-order variables; refuses to capture."""
    incoming = set()
    for t in mapping.values():
        incoming |= _term_vars(t)

    def sub_t(t, bound):
        if isinstance(t, Var):
            return mapping[t.name] if t.name in mapping and t.name not in bound else t
        if isinstance(t, FunApp):
            return FunApp(t.name, tuple(sub_t(a, bound) for a in t.args))
        return t

    def binder(name, bound):
        if name in incoming and any(k not in bound for k in mapping):
            raise ValueError(f"substitution would capture {name!r}")
        return bound | {name}

    def go(f, bound):
        if isinstance(f, Truth):
            return f
        if isinstance(f, Rel):
            return Rel(f.name, tuple(sub_t(a, bound) for a in f.args))
        if isinstance(f, SOApp):
            return SOApp(f.var, tuple(sub_t(a, bound) for a in f.args))
        if isinstance(f, Eq):
            return Eq(sub_t(f.left, bound), sub_t(f.right, bound))
        if isinstance(f, Not):
            return Not(go(f.body, bound))
        if isinstance(f, (And, Or, Imp, Iff)):
            return type(f)(go(f.left, bound), go(f.right, bound))
        if isinstance(f, (Forall, Exists)):
            return type(f)(f.var, f.sort, go(f.body, binder(f.var, bound)))
        if isinstance(f, Hartig):
            return Hartig(f.x, f.xsort, go(f.left, binder(f.x, bound)), f.y, f.ysort,
                          go(f.right, binder(f.y, bound)))
        if isinstance(f, WF):
            inner = binder(f.y, binder(f.x, bound))
            return WF(f.x, f.y, f.sort, go(f.body, inner))
        if isinstance(f, (SOForall, SOExists)):
            return type(f)(f.var, f.profile, go(f.body, bound))
        raise TypeError(f"not a formula: {f!r}")

    return go(phi, frozenset())


def check_against(phi: Formula, vocabulary: Vocabulary) -> None:
    """Raise unless every symbol of phi is declared in vocabulary with a matching profile."""
    a = analyze(phi)
    for name in a.symbols:
        if vocabulary.kind(name) is None:
            raise UnknownSymbol(name)
    # re-parsing the printed form runs the full sort checker
    parse(to_text(phi), vocabulary, free=a.free, so_free=a.free_so)


def rename(phi: Formula, sorts: Mapping[str, str] | None = None,
           symbols: Mapping[str, str] | None = None) -> Formula:
    """Rename sorts and vocabulary symbols throughout phi."""
    sorts = sorts or {}
    symbols = symbols or {}

    def s(x):
        return sorts.get(x, x)

    def sym(x):
        return symbols.get(x, x)

    def t(term):
        if isinstance(term, Var):
            return Var(term.name, s(term.sort))
        if isinstance(term, Const):
            return Const(sym(term.name))
        return FunApp(sym(term.name), tuple(t(a) for a in term.args))

    def go(f):
        if isinstance(f, Truth):
            return f
        if isinstance(f, Rel):
            return Rel(sym(f.name), tuple(t(a) for a in f.args))
        if isinstance(f, SOApp):
            return SOApp(f.var, tuple(t(a) for a in f.args))
        if isinstance(f, Eq):
            return Eq(t(f.left), t(f.right))
        if isinstance(f, Not):
            return Not(go(f.body))
        if isinstance(f, (And, Or, Imp, Iff)):
            return type(f)(go(f.left), go(f.right))
        if isinstance(f, (Forall, Exists)):
            return type(f)(f.var, s(f.sort), go(f.body))
        if isinstance(f, Hartig):
            return Hartig(f.x, s(f.xsort), go(f.left), f.y, s(f.ysort), go(f.right))
        if isinstance(f, WF):
            return WF(f.x, f.y, s(f.sort), go(f.body))
        if isinstance(f, (SOForall, SOExists)):
            return type(f)(f.var, tuple(s(x) for x in f.profile), go(f.body))
        raise TypeError(f"not a formula: {f!r}")

    return go(phi)
