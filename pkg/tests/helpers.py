"""Shared builders and independent reference computations for the tests."""
import itertools
import random

from hypothesis import strategies as st

from fmtkit.formula import (
    And, Const, Eq, Exists, Forall, FunApp, Hartig, Iff, Imp, Not, Or, Rel, SOApp, SOExists,
    SOForall, Truth, Var, WF,
)
from fmtkit.hf import EMPTY, HfSet, v_level
from fmtkit.structures import Structure, Vocabulary

E_VOCAB = Vocabulary.make(relations={"E": ("s", "s")})
P_VOCAB = Vocabulary.make(relations={"P": ("s",)})


def e_structure(n, edges):
    return Structure(E_VOCAB, {"s": tuple(range(n))}, {"E": edges})


def linear_order(n):
    return e_structure(n, [(i, j) for i in range(n) for j in range(n) if i < j])


def brute_transitive_subsets(n):
    """Transitive subsets of V_n by plain subset enumeration."""
    level = list(v_level(n))
    out = []
    for mask in range(1 << len(level)):
        members = {level[i] for i in range(len(level)) if mask >> i & 1}
        if all(e in members for x in members for e in x):
            out.append(frozenset(members))
    return out


def hf_sets(max_leaves=12):
    return st.recursive(
        st.just(EMPTY),
        lambda kids: st.frozensets(kids, max_size=3).map(HfSet.from_iterable),
        max_leaves=max_leaves,
    )


# -- random well-sorted formulas ---------------------------------------------------

RICH_VOCAB = Vocabulary.make(
    sorts=("s", "t"),
    relations={"P": ("s",), "E": ("s", "s"), "R": ("s", "t")},
    functions={"f": (("s",), "t"), "g": (("t", "t"), "t")},
    constants={"c": "s", "d": "t"},
)
FREE = {"u": "s", "w": "t"}


class FormulaGen:
    def __init__(self, seed):
        self.rng = random.Random(seed)
        self.count = 0

    def fresh(self, prefix="v"):
        self.count += 1
        return f"{prefix}{self.count}"

    def term(self, sort, scope, depth):
        rng = self.rng
        names = [v for v, s in scope["fo"].items() if s == sort]
        if sort == "s":
            options = [Var(v, "s") for v in names] + [Const("c")]
            return rng.choice(options)
        if depth > 0 and rng.random() < 0.3:
            if rng.random() < 0.5:
                return FunApp("f", (self.term("s", scope, depth - 1),))
            return FunApp("g", (self.term("t", scope, depth - 1), self.term("t", scope, depth - 1)))
        return rng.choice([Var(v, "t") for v in names] + [Const("d")])

    def atom(self, scope):
        rng = self.rng
        roll = rng.random()
        if roll < 0.05:
            return Truth(rng.random() < 0.5)
        if scope["so"] and roll < 0.25:
            name = rng.choice(sorted(scope["so"]))
            return SOApp(name, tuple(self.term(s, scope, 1) for s in scope["so"][name]))
        if roll < 0.45:
            sort = rng.choice(["s", "t"])
            return Eq(self.term(sort, scope, 1), self.term(sort, scope, 1))
        name = rng.choice(["P", "E", "R"])
        prof = RICH_VOCAB.relation(name)
        return Rel(name, tuple(self.term(s, scope, 1) for s in prof))

    def formula(self, depth, scope=None):
        if scope is None:
            scope = {"fo": dict(FREE), "so": {}}
        rng = self.rng
        if depth <= 0 or rng.random() < 0.2:
            return self.atom(scope)
        roll = rng.random()
        if roll < 0.1:
            return Not(self.formula(depth - 1, scope))
        if roll < 0.4:
            cls = rng.choice([And, Or, Imp, Iff])
            return cls(self.formula(depth - 1, scope), self.formula(depth - 1, scope))
        if roll < 0.7:
            sort = rng.choice(["s", "t"])
            v = self.fresh()
            inner = {"fo": {**scope["fo"], v: sort}, "so": scope["so"]}
            cls = Forall if rng.random() < 0.5 else Exists
            return cls(v, sort, self.formula(depth - 1, inner))
        if roll < 0.8:
            xs, ys = rng.choice(["s", "t"]), rng.choice(["s", "t"])
            x, y = self.fresh(), self.fresh()
            left = self.formula(depth - 1, {"fo": {**scope["fo"], x: xs}, "so": scope["so"]})
            right = self.formula(depth - 1, {"fo": {**scope["fo"], y: ys}, "so": scope["so"]})
            return Hartig(x, xs, left, y, ys, right)
        if roll < 0.9:
            sort = rng.choice(["s", "t"])
            x, y = self.fresh(), self.fresh()
            inner = {"fo": {**scope["fo"], x: sort, y: sort}, "so": scope["so"]}
            return WF(x, y, sort, self.formula(depth - 1, inner))
        name = self.fresh("X")
        profile = tuple(rng.choice(["s", "t"]) for _ in range(rng.randint(1, 2)))
        inner = {"fo": scope["fo"], "so": {**scope["so"], name: profile}}
        cls = SOForall if rng.random() < 0.5 else SOExists
        return cls(name, profile, self.formula(depth - 1, inner))


# -- rank-2 Hintikka sentences over one binary relation ----------------------------

def _lit(atom, positive):
    return atom if positive else Not(atom)


def _conj(parts):
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def hintikka_rank2():
    """Sentences exists x (alpha(x) & for each pair type t: [not] exists y t(x,y)).

    Every sentence of quantifier rank at most 2 over {E} is a Boolean
    combination of these, so two structures agree on all of them iff they
    agree on every rank-2 sentence.
    """
    x, y = Var("x", "s"), Var("y", "s")
    loop_x = Rel("E", (x, x))
    pair_types = [Eq(x, y)]
    for bits in itertools.product((True, False), repeat=3):
        atoms = [Rel("E", (x, y)), Rel("E", (y, x)), Rel("E", (y, y))]
        pair_types.append(_conj([Not(Eq(x, y))] + [_lit(a, b) for a, b in zip(atoms, bits)]))
    out = []
    for loop in (True, False):
        for chosen in itertools.product((True, False), repeat=len(pair_types)):
            parts = [_lit(loop_x, loop)]
            parts += [_lit(Exists("y", "s", t), keep) for t, keep in zip(pair_types, chosen)]
            out.append(Exists("x", "s", _conj(parts)))
    return out


def rank1_sentences():
    x = Var("x", "s")
    return [Exists("x", "s", Rel("E", (x, x))), Exists("x", "s", Not(Rel("E", (x, x))))]
