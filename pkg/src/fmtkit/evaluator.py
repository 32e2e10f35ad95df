"""Compilation of formulas into evaluation closures.

The closures implement Kleene's strong three-valued logic: ``None`` stands
for "not yet determined".  On a complete structure nothing is ever unknown,
so the same code yields ordinary two-valued truth.  On a partially assigned
structure a definite answer holds for every completion, which is what the
model searches rely on for pruning.
"""
from __future__ import annotations

import itertools
from typing import Callable, Mapping

from .config import default_cap
from .errors import ResourceCapExceeded
from .formula import (
    WF,
    And,
    Const,
    Eq,
    Exists,
    Forall,
    Formula,
    FunApp,
    Hartig,
    Iff,
    Imp,
    Not,
    Or,
    Rel,
    SOApp,
    SOExists,
    SOForall,
    Truth,
    Var,
)
from .structures import Layout, Structure

_MISSING = object()


class Interp:
    """Symbol lookups for the compiler.

    ``rel(name)`` returns a callable from argument tuples to True/False/None;
    ``fun(name)`` one from argument tuples to an atom or None; ``const(name)``
    a zero-argument callable returning an atom or None.
    """

    domains: Mapping[str, tuple]

    def rel(self, name: str) -> Callable:
        raise NotImplementedError

    def fun(self, name: str) -> Callable:
        raise NotImplementedError

    def const(self, name: str) -> Callable:
        raise NotImplementedError

    def rel_index(self, name: str, pos: int):
        """For a fully known binary relation: map from the atom at the other
        position to the atoms at ``pos`` related to it, or None."""
        return None


class StructureInterp(Interp):
    def __init__(self, A: Structure):
        self.A = A
        self.domains = A.domains
        self._index_cache = {}

    def rel(self, name):
        return self.A.relations[name].__contains__

    def fun(self, name):
        return self.A.functions[name].__getitem__

    def const(self, name):
        value = self.A.constants[name]
        return lambda: value

    def rel_index(self, name, pos):
        return _binary_index(self.A, name, pos, self._index_cache)


def _binary_index(A: Structure, name: str, pos: int, cache: dict):
    prof = A.vocabulary.relation(name)
    if prof is None or len(prof) != 2:
        return None
    key = (name, pos)
    if key not in cache:
        index = {}
        rank = {a: i for i, a in enumerate(A.domains[prof[pos]])}
        for t in A.relations[name]:
            index.setdefault(t[1 - pos], []).append(t[pos])
        cache[key] = {k: tuple(sorted(v, key=rank.__getitem__)) for k, v in index.items()}
    return cache[key]


class LayoutInterp(Interp):
    """Lookups through a layout's cell vector; ``vals`` may be mutated in place."""

    def __init__(self, layout: Layout, vals: list, base: Structure | None = None):
        self.layout = layout
        self.vals = vals
        self.base = base
        self.domains = layout.domains
        self._index_cache = {}

    def rel(self, name):
        lay = self.layout
        if name in lay.fixed_symbols:
            return self.base.relations[name].__contains__
        idx = lay.index[name]
        fixed = lay.fixed.get(name, {})
        vals = self.vals
        if not fixed:
            def look(args):
                return vals[idx[args]]
        else:
            def look(args):
                i = idx.get(args)
                if i is None:
                    return fixed.get(args, False)
                return vals[i]
        return look

    def rel_index(self, name, pos):
        if name in self.layout.fixed_symbols:
            return _binary_index(self.base, name, pos, self._index_cache)
        return None

    def fun(self, name):
        lay = self.layout
        if name in lay.fixed_symbols:
            return self.base.functions[name].__getitem__
        _, res = lay.vocabulary.function(name)
        dom = lay.domains[res]
        idx = lay.index[name]
        fixed = lay.fixed.get(name, {})
        vals = self.vals

        def look(args):
            i = idx.get(args)
            if i is None:
                return fixed[args]
            v = vals[i]
            return None if v is None else dom[v]
        return look

    def const(self, name):
        lay = self.layout
        if name in lay.fixed_symbols:
            value = self.base.constants[name]
            return lambda: value
        if () in lay.fixed.get(name, {}):
            value = lay.fixed[name][()]
            return lambda: value
        dom = lay.domains[lay.vocabulary.constant(name)]
        i = lay.index[name][()]
        vals = self.vals

        def look():
            v = vals[i]
            return None if v is None else dom[v]
        return look


class RecordingInterp(Interp):
    """Wraps another interpretation and records every symbol it is asked for."""

    def __init__(self, inner: Interp):
        self.inner = inner
        self.domains = inner.domains
        self.consulted: set[str] = set()

    def rel(self, name):
        self.consulted.add(name)
        return self.inner.rel(name)

    def fun(self, name):
        self.consulted.add(name)
        return self.inner.fun(name)

    def const(self, name):
        self.consulted.add(name)
        return self.inner.const(name)

    def rel_index(self, name, pos):
        self.consulted.add(name)
        return self.inner.rel_index(name, pos)


# -- compiler ---------------------------------------------------------------------

def compile_formula(phi: Formula, interp: Interp, cap: int | None = None) -> Callable:
    """Return ``run(env)`` computing the (three-valued) truth of phi."""
    if cap is None:
        cap = default_cap()
    return _Compiler(interp, cap).formula(phi)


class _Compiler:
    def __init__(self, interp: Interp, cap: int):
        self.interp = interp
        self.cap = cap

    def term(self, t):
        if isinstance(t, Var):
            name = t.name
            return lambda env: env[name]
        if isinstance(t, Const):
            return _const_term(self.interp.const(t.name))
        if isinstance(t, FunApp):
            f = self.interp.fun(t.name)
            args = [self.term(a) for a in t.args]

            def app(env):
                vals = tuple(a(env) for a in args)
                if None in vals:
                    return None
                return f(vals)
            return app
        raise TypeError(f"not a term: {t!r}")

    def formula(self, phi):
        method = getattr(self, "_" + type(phi).__name__)
        return method(phi)

    def _Truth(self, phi: Truth):
        value = phi.value
        return lambda env: value

    def _Rel(self, phi: Rel):
        look = self.interp.rel(phi.name)
        return self._application(look, phi.args)

    def _SOApp(self, phi: SOApp):
        var = phi.var
        terms = [self.term(a) for a in phi.args]

        def run(env):
            args = tuple(t(env) for t in terms)
            if None in args:
                return None
            return args in env[var]
        return run

    def _application(self, look, arg_terms):
        terms = [self.term(a) for a in arg_terms]
        if len(terms) == 2 and all(isinstance(a, Var) for a in arg_terms):
            n0, n1 = arg_terms[0].name, arg_terms[1].name

            def run2(env):
                return look((env[n0], env[n1]))
            return run2
        if len(terms) == 1 and isinstance(arg_terms[0], Var):
            n0 = arg_terms[0].name

            def run1(env):
                return look((env[n0],))
            return run1

        def run(env):
            args = tuple(t(env) for t in terms)
            if None in args:
                return None
            return look(args)
        return run

    def _Eq(self, phi: Eq):
        left, right = self.term(phi.left), self.term(phi.right)

        def run(env):
            a = left(env)
            b = right(env)
            if a is None or b is None:
                return None
            return a == b
        return run

    def _Not(self, phi: Not):
        body = self.formula(phi.body)

        def run(env):
            v = body(env)
            return None if v is None else not v
        return run

    def _And(self, phi: And):
        left, right = self.formula(phi.left), self.formula(phi.right)

        def run(env):
            a = left(env)
            if a is False:
                return False
            b = right(env)
            if b is False:
                return False
            if a is None or b is None:
                return None
            return True
        return run

    def _Or(self, phi: Or):
        left, right = self.formula(phi.left), self.formula(phi.right)

        def run(env):
            a = left(env)
            if a is True:
                return True
            b = right(env)
            if b is True:
                return True
            if a is None or b is None:
                return None
            return False
        return run

    def _Imp(self, phi: Imp):
        left, right = self.formula(phi.left), self.formula(phi.right)

        def run(env):
            a = left(env)
            if a is False:
                return True
            b = right(env)
            if b is True:
                return True
            if a is None or b is None:
                return None
            return False
        return run

    def _Iff(self, phi: Iff):
        left, right = self.formula(phi.left), self.formula(phi.right)

        def run(env):
            a = left(env)
            if a is None:
                return None
            b = right(env)
            if b is None:
                return None
            return a == b
        return run

    def _Forall(self, phi: Forall):
        if isinstance(phi.body, Imp):
            guarded = self._guarded(phi.var, phi.body.left, phi.body.right, True)
            if guarded is not None:
                return guarded
        return self._quantifier(phi.var, self.interp.domains[phi.sort], self.formula(phi.body), True)

    def _Exists(self, phi: Exists):
        if isinstance(phi.body, And):
            guarded = self._guarded(phi.var, phi.body.left, phi.body.right, False)
            if guarded is not None:
                return guarded
        return self._quantifier(phi.var, self.interp.domains[phi.sort], self.formula(phi.body), False)

    def _guarded(self, var, guard, rest, universal):
        # forall x (R(x,t) -> rest) and exists x (R(x,t) & rest) with R known:
        # only the atoms related to t need visiting
        if not isinstance(guard, Rel) or len(guard.args) != 2:
            return None
        args = guard.args
        pos = None
        for i in (0, 1):
            a, other = args[i], args[1 - i]
            if isinstance(a, Var) and a.name == var and not _mentions(other, var) \
                    and isinstance(other, (Var, Const)):
                pos = i
                break
        if pos is None:
            return None
        index = self.interp.rel_index(guard.name, pos)
        if index is None:
            return None
        other = self.term(args[1 - pos])
        inner = self._quantifier_gen(var, self.formula(rest), universal)

        def run(env):
            t = other(env)
            if t is None:
                return None
            return inner(env, index.get(t, ()))
        return run

    def _quantifier_gen(self, var, body, universal):
        stop = not universal

        def run(env, dom):
            saved = env.get(var, _MISSING)
            unknown = False
            result = not stop
            for a in dom:
                env[var] = a
                v = body(env)
                if v is stop:
                    result = stop
                    break
                if v is None:
                    unknown = True
            _restore(env, var, saved)
            if result is stop:
                return stop
            return None if unknown else result
        return run

    def _quantifier(self, var, dom, body, universal):
        stop = not universal

        def run(env):
            saved = env.get(var, _MISSING)
            unknown = False
            result = not stop
            for a in dom:
                env[var] = a
                v = body(env)
                if v is stop:
                    result = stop
                    break
                if v is None:
                    unknown = True
            _restore(env, var, saved)
            if result is stop:
                return stop
            return None if unknown else result
        return run

    def _Hartig(self, phi: Hartig):
        left, right = self.formula(phi.left), self.formula(phi.right)
        xdom, ydom = self.interp.domains[phi.xsort], self.interp.domains[phi.ysort]
        x, y = phi.x, phi.y

        def count(var, dom, body, env):
            saved = env.get(var, _MISSING)
            sure = maybe = 0
            for a in dom:
                env[var] = a
                v = body(env)
                if v is True:
                    sure += 1
                elif v is None:
                    maybe += 1
            _restore(env, var, saved)
            return sure, maybe

        def run(env):
            s1, m1 = count(x, xdom, left, env)
            s2, m2 = count(y, ydom, right, env)
            if m1 == 0 and m2 == 0:
                return s1 == s2
            if s1 + m1 < s2 or s2 + m2 < s1:
                return False
            return None
        return run

    def _WF(self, phi: WF):
        body = self.formula(phi.body)
        dom = self.interp.domains[phi.sort]
        x, y = phi.x, phi.y
        n = len(dom)

        def run(env):
            sx = env.get(x, _MISSING)
            sy = env.get(y, _MISSING)
            sure = [[] for _ in range(n)]
            maybe = [[] for _ in range(n)]
            any_unknown = False
            for i, a in enumerate(dom):
                env[x] = a
                for j, b in enumerate(dom):
                    env[y] = b
                    v = body(env)
                    if v is True:
                        sure[i].append(j)
                        maybe[i].append(j)
                    elif v is None:
                        maybe[i].append(j)
                        any_unknown = True
            _restore(env, x, sx)
            _restore(env, y, sy)
            if not any_unknown:
                return is_acyclic(sure)
            if is_acyclic(maybe):
                return True
            if not is_acyclic(sure):
                return False
            return None
        return run

    def _SOForall(self, phi: SOForall):
        return self._so(phi, True)

    def _SOExists(self, phi: SOExists):
        return self._so(phi, False)

    def _so(self, phi, universal):
        tuples = list(itertools.product(*(self.interp.domains[s] for s in phi.profile)))
        if len(tuples) > 60 or (1 << len(tuples)) > self.cap:
            raise ResourceCapExceeded(f"second-order quantifier over {len(tuples)} tuples", self.cap)
        candidates = [frozenset(t for i, t in enumerate(tuples) if mask >> i & 1)
                      for mask in range(1 << len(tuples))]
        return self._quantifier(phi.var, candidates, self.formula(phi.body), universal)


def _mentions(t, var) -> bool:
    if isinstance(t, Var):
        return t.name == var
    if isinstance(t, FunApp):
        return any(_mentions(a, var) for a in t.args)
    return False


def _const_term(look):
    return lambda env: look()


def _restore(env, var, saved):
    if saved is _MISSING:
        env.pop(var, None)
    else:
        env[var] = saved


def is_acyclic(succ) -> bool:
    """Kahn's algorithm on adjacency lists indexed 0..n-1."""
    n = len(succ)
    indeg = [0] * n
    for outs in succ:
        for j in outs:
            indeg[j] += 1
    stack = [i for i in range(n) if indeg[i] == 0]
    seen = 0
    while stack:
        i = stack.pop()
        seen += 1
        for j in succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                stack.append(j)
    return seen == n
