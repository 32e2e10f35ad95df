"""Formulas of the ∈-language and their evaluation in transitive models.

Grammar (whitespace-insensitive)::

    formula := iff
    iff     := imp ('<->' imp)*
    imp     := or ('->' imp)?
    or      := and ('|' and)*
    and     := unary ('&' unary)*
    unary   := '!' unary | quant | '(' formula ')' | atom
    quant   := ('forall' | 'exists') VAR ('in' VAR)? '.' formula
    atom    := VAR 'in' VAR | VAR '=' VAR | VAR '!=' VAR

``x != y`` is sugar for ``!(x = y)``.  A quantifier with an ``in`` bound is a
bounded quantifier; a formula is Δ₀ when every quantifier is bounded.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Mapping

from ._lexer import TokenStream
from .errors import FreeVarUnassigned, InputError
from .hf import HfSet, TransitiveModel, is_cardinal, powerset

KEYWORDS = {"forall", "exists", "in", "true", "false"}


class SetFormula:
    __slots__ = ()


@dataclass(frozen=True)
class SIn(SetFormula):
    left: str
    right: str


@dataclass(frozen=True)
class SEq(SetFormula):
    left: str
    right: str


@dataclass(frozen=True)
class SNot(SetFormula):
    body: SetFormula


@dataclass(frozen=True)
class SAnd(SetFormula):
    left: SetFormula
    right: SetFormula


@dataclass(frozen=True)
class SOr(SetFormula):
    left: SetFormula
    right: SetFormula


@dataclass(frozen=True)
class SImp(SetFormula):
    left: SetFormula
    right: SetFormula


@dataclass(frozen=True)
class SIff(SetFormula):
    left: SetFormula
    right: SetFormula


@dataclass(frozen=True)
class SForall(SetFormula):
    var: str
    body: SetFormula
    bound: str | None = None


@dataclass(frozen=True)
class SExists(SetFormula):
    var: str
    body: SetFormula
    bound: str | None = None


_BINARY = {SAnd: "&", SOr: "|", SImp: "->", SIff: "<->"}
_PREC = {SIff: 1, SImp: 2, SOr: 3, SAnd: 4}


# -- parsing ------------------------------------------------------------------

def parse_set_formula(text: str) -> SetFormula:
    ts = TokenStream(text)
    phi = _parse_iff(ts)
    if ts.current.kind != "eof":
        ts.error(f"unexpected {ts.current.text!r}")
    return phi


def _parse_iff(ts):
    left = _parse_imp(ts)
    while ts.accept("<->"):
        left = SIff(left, _parse_imp(ts))
    return left


def _parse_imp(ts):
    left = _parse_or(ts)
    if ts.accept("->"):
        return SImp(left, _parse_imp(ts))
    return left


def _parse_or(ts):
    left = _parse_and(ts)
    while ts.accept("|"):
        left = SOr(left, _parse_and(ts))
    return left


def _parse_and(ts):
    left = _parse_unary(ts)
    while ts.accept("&"):
        left = SAnd(left, _parse_unary(ts))
    return left


def _var(ts) -> str:
    tok = ts.expect_id("variable")
    if tok.text in KEYWORDS:
        ts.error(f"keyword {tok.text!r} used as a variable", tok.pos)
    return tok.text


def _parse_unary(ts):
    if ts.accept("!"):
        return SNot(_parse_unary(ts))
    if ts.at("forall") or ts.at("exists"):
        kind = ts.advance().text
        var = _var(ts)
        bound = None
        if ts.accept("in"):
            bound = _var(ts)
        ts.expect(".")
        body = _parse_iff(ts)
        return SForall(var, body, bound) if kind == "forall" else SExists(var, body, bound)
    if ts.accept("("):
        phi = _parse_iff(ts)
        ts.expect(")")
        return phi
    left = _var(ts)
    if ts.accept("in"):
        return SIn(left, _var(ts))
    if ts.accept("="):
        return SEq(left, _var(ts))
    if ts.accept("!="):
        return SNot(SEq(left, _var(ts)))
    ts.error("expected 'in', '=' or '!='")


# -- printing -----------------------------------------------------------------

def format_set_formula(phi: SetFormula) -> str:
    return _fmt(phi, 0)


def _fmt(phi, ctx: int) -> str:
    if isinstance(phi, SIn):
        return f"{phi.left} in {phi.right}"
    if isinstance(phi, SEq):
        return f"{phi.left} = {phi.right}"
    if isinstance(phi, SNot):
        return "!" + _fmt(phi.body, 5)
    if isinstance(phi, (SForall, SExists)):
        kw = "forall" if isinstance(phi, SForall) else "exists"
        bound = f" in {phi.bound}" if phi.bound is not None else ""
        text = f"{kw} {phi.var}{bound} . {_fmt(phi.body, 0)}"
        return f"({text})" if ctx > 0 else text
    prec = _PREC[type(phi)]
    op = _BINARY[type(phi)]
    if isinstance(phi, SImp):
        text = f"{_fmt(phi.left, prec + 1)} {op} {_fmt(phi.right, prec)}"
    else:
        text = f"{_fmt(phi.left, prec)} {op} {_fmt(phi.right, prec + 1)}"
    return f"({text})" if ctx > prec else text


# -- static analysis ----------------------------------------------------------

def free_vars(phi: SetFormula) -> frozenset[str]:
    if isinstance(phi, (SIn, SEq)):
        return frozenset((phi.left, phi.right))
    if isinstance(phi, SNot):
        return free_vars(phi.body)
    if isinstance(phi, (SForall, SExists)):
        inner = free_vars(phi.body) - {phi.var}
        if phi.bound is not None:
            if phi.bound == phi.var:
                raise InputError(f"variable {phi.var!r} bounded by itself")
            inner |= {phi.bound}
        return inner
    return free_vars(phi.left) | free_vars(phi.right)


def is_delta0(phi: SetFormula) -> bool:
    if isinstance(phi, (SIn, SEq)):
        return True
    if isinstance(phi, SNot):
        return is_delta0(phi.body)
    if isinstance(phi, (SForall, SExists)):
        return phi.bound is not None and is_delta0(phi.body)
    return is_delta0(phi.left) and is_delta0(phi.right)


def is_sigma1(phi: SetFormula) -> bool:
    """∃-prefix (possibly empty) over a Δ₀ matrix."""
    while isinstance(phi, SExists):
        phi = phi.body
    return is_delta0(phi)


# -- evaluation ---------------------------------------------------------------

def eval_set_formula(phi: SetFormula, model: TransitiveModel,
                     assignment: Mapping[str, HfSet] | None = None) -> bool:
    """Truth of phi in (M, ∈).

    Unbounded quantifiers range over the carrier; bounded ones over the real
    elements of the bound, which lie in M by transitivity.
    """
    env = dict(assignment or {})
    for var in free_vars(phi):
        if var not in env:
            raise FreeVarUnassigned(var)
    for var, value in env.items():
        if value not in model.carrier:
            raise InputError(f"value of {var!r} is not a member of the model")
    return _eval(phi, tuple(model.carrier), env)


def _eval(phi, carrier, env) -> bool:
    t = type(phi)
    if t is SIn:
        return env[phi.left] in env[phi.right]
    if t is SEq:
        return env[phi.left] == env[phi.right]
    if t is SNot:
        return not _eval(phi.body, carrier, env)
    if t is SAnd:
        return _eval(phi.left, carrier, env) and _eval(phi.right, carrier, env)
    if t is SOr:
        return _eval(phi.left, carrier, env) or _eval(phi.right, carrier, env)
    if t is SImp:
        return (not _eval(phi.left, carrier, env)) or _eval(phi.right, carrier, env)
    if t is SIff:
        return _eval(phi.left, carrier, env) == _eval(phi.right, carrier, env)
    if t is SForall or t is SExists:
        domain = carrier if phi.bound is None else env[phi.bound]
        var = phi.var
        had = var in env
        old = env.get(var)
        want = t is SExists
        result = not want
        for value in domain:
            env[var] = value
            if _eval(phi.body, carrier, env) == want:
                result = want
                break
        if had:
            env[var] = old
        else:
            env.pop(var, None)
        return result
    raise TypeError(f"not a set formula: {phi!r}")


# -- the fixed predicates -----------------------------------------------------

class Fresh:
    def __init__(self):
        self.n = 0

    def __call__(self, base: str) -> str:
        self.n += 1
        return f"{base}{self.n}"


def pair_text(p: str, a: str, b: str, fresh: Fresh) -> str:
    # p = {{a},{a,b}}
    u, v, t, s, w = fresh("u"), fresh("v"), fresh("t"), fresh("t"), fresh("w")
    return (f"(exists {u} in {p} . exists {v} in {p} . ({a} in {u} & (forall {t} in {u} . {t} = {a})"
            f" & {a} in {v} & {b} in {v} & (forall {s} in {v} . ({s} = {a} | {s} = {b}))"
            f" & (forall {w} in {p} . ({w} = {u} | {w} = {v}))))")


def ordinal_text(x: str, fresh: Fresh) -> str:
    y, z, y2, z2 = fresh("y"), fresh("z"), fresh("y"), fresh("z")
    return (f"((forall {y} in {x} . forall {z} in {y} . {z} in {x})"
            f" & (forall {y2} in {x} . forall {z2} in {x} . ({y2} in {z2} | {y2} = {z2} | {z2} in {y2})))")


def _partial_surjection_text(f: str, dom: str, x: str, fresh: Fresh) -> str:
    p, a, y = fresh("p"), fresh("a"), fresh("y")
    only_pairs = f"(forall {p} in {f} . exists {a} in {dom} . exists {y} in {x} . {pair_text(p, a, y, fresh)})"
    p, q, a, y, y2 = fresh("p"), fresh("q"), fresh("a"), fresh("y"), fresh("y")
    functional = (f"(forall {p} in {f} . forall {q} in {f} . forall {a} in {dom} . forall {y} in {x} ."
                  f" forall {y2} in {x} . (({pair_text(p, a, y, fresh)} & {pair_text(q, a, y2, fresh)})"
                  f" -> {y} = {y2}))")
    y, p, a = fresh("y"), fresh("p"), fresh("a")
    onto = f"(forall {y} in {x} . exists {p} in {f} . exists {a} in {dom} . {pair_text(p, a, y, fresh)})"
    return f"({only_pairs} & {functional} & {onto})"


def cd_text(x: str = "x") -> str:
    """x is an ordinal and no partial surjection from a smaller ordinal onto x exists."""
    fresh = Fresh()
    f, al = fresh("f"), fresh("al")
    return (f"{ordinal_text(x, fresh)} & !(exists {f} . exists {al} in {x} . "
            f"{_partial_surjection_text(f, al, x, fresh)})")


def pwst_text(x: str = "x", y: str = "y") -> str:
    """Every member of y is a subset of x, and every subset of x in the model is in y."""
    fresh = Fresh()
    z, w, z2, w2 = fresh("z"), fresh("w"), fresh("z"), fresh("w")
    return (f"(forall {z} in {y} . forall {w} in {z} . {w} in {x})"
            f" & (forall {z2} . ((forall {w2} in {z2} . {w2} in {x}) -> {z2} in {y}))")


CD = parse_set_formula(cd_text())
PWST = parse_set_formula(pwst_text())

PREDICATES = {"Cd": (CD, ("x",)), "PwSt": (PWST, ("x", "y"))}


def real_truth(name: str, args: tuple[HfSet, ...]) -> bool:
    if name == "Cd":
        return is_cardinal(args[0])
    if name == "PwSt":
        return args[1] == powerset(args[0])
    raise InputError(f"unknown predicate {name!r}")


def r_correctness_failures(model: TransitiveModel, name: str):
    """Yield tuples on which the model's verdict differs from the real one."""
    if name not in PREDICATES:
        raise InputError(f"unknown predicate {name!r}; expected one of {sorted(PREDICATES)}")
    phi, params = PREDICATES[name]
    carrier = tuple(model.carrier)
    for args in itertools.product(carrier, repeat=len(params)):
        env = dict(zip(params, args))
        if _eval(phi, carrier, env) != real_truth(name, args):
            yield args


def is_r_correct(model: TransitiveModel, name: str) -> bool:
    for _ in r_correctness_failures(model, name):
        return False
    return True


# -- random generation --------------------------------------------------------

def random_delta0(rng: random.Random, depth: int, variables: list[str]) -> SetFormula:
    """A random Δ₀ formula whose free variables come from ``variables``."""
    return _rand(rng, depth, list(variables), [0])


def _rand(rng, depth, scope, counter):
    if depth <= 0 or rng.random() < 0.25:
        a, b = rng.choice(scope), rng.choice(scope)
        return SIn(a, b) if rng.random() < 0.65 else SEq(a, b)
    roll = rng.random()
    if roll < 0.15:
        return SNot(_rand(rng, depth - 1, scope, counter))
    if roll < 0.55:
        cls = rng.choice([SAnd, SOr, SImp, SIff])
        return cls(_rand(rng, depth - 1, scope, counter), _rand(rng, depth - 1, scope, counter))
    counter[0] += 1
    var = f"b{counter[0]}"
    bound = rng.choice(scope)
    body = _rand(rng, depth - 1, scope + [var], counter)
    cls = SForall if rng.random() < 0.5 else SExists
    return cls(var, body, bound)


def random_sigma1(rng: random.Random, depth: int, variables: list[str]) -> SetFormula:
    """∃w ψ with ψ Δ₀ and w free in ψ's scope."""
    witness = "w0"
    body = random_delta0(rng, depth, list(variables) + [witness])
    return SExists(witness, body)
