"""Satisfaction, model search, upward-extension probing and Skolem expansion."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Mapping

from .config import default_cap
from .errors import (
    EmptyDomain,
    FreeVarUnassigned,
    InputError,
    PreconditionFailed,
    ResourceCapExceeded,
    SortError,
    UnknownSymbol,
)
from .evaluator import StructureInterp, compile_formula
from .formula import (
    And,
    Const,
    Eq,
    Exists,
    Forall,
    Formula,
    FunApp,
    Imp,
    Not,
    Rel,
    Truth,
    Var,
    analyze,
    check_against,
    substitute,
)
from .search import CellSearch
from .structures import Layout, Structure, SymmetryGroup, Vocabulary, standard_domains


@lru_cache(maxsize=4096)
def _checked(phi: Formula, vocabulary: Vocabulary):
    a = analyze(phi)
    for name in a.symbols:
        if vocabulary.kind(name) is None:
            raise UnknownSymbol(name)
    for s in a.sorts:
        if s not in vocabulary.sorts:
            raise SortError(f"unknown sort {s!r}", s)
    check_against(phi, vocabulary)
    return a


def evaluate(phi: Formula, A: Structure, assignment: Mapping | None = None) -> bool:
    """Truth of phi in A under an assignment of its free variables.

    First-order variables map to atoms, relation variables to collections of
    tuples.
    """
    a = _checked(phi, A.vocabulary)
    env = {}
    assignment = assignment or {}
    for var, sort in a.free.items():
        if var not in assignment:
            raise FreeVarUnassigned(var)
        value = assignment[var]
        if A._sort_of.get(value) != sort:
            raise SortError(f"value {value!r} for {var!r} is not an element of sort {sort!r}", var)
        env[var] = value
    for var, profile in a.free_so.items():
        if var not in assignment:
            raise FreeVarUnassigned(var)
        tuples = frozenset(tuple(t) for t in assignment[var])
        for t in tuples:
            if len(t) != len(profile) or any(A._sort_of.get(x) != s for x, s in zip(t, profile)):
                raise SortError(f"relation variable {var!r} holds an ill-sorted tuple {t!r}", var)
        env[var] = tuples
    return bool(compile_formula(phi, StructureInterp(A))(env))


def satisfies(A: Structure, phi: Formula) -> bool:
    return evaluate(phi, A)


# -- model search -----------------------------------------------------------------

def _size_vectors(vocabulary: Vocabulary, sizes) -> list[dict]:
    if isinstance(sizes, (int, range)):
        if len(vocabulary.sorts) != 1:
            raise InputError("give per-sort sizes for a many-sorted vocabulary")
        sizes = {vocabulary.sorts[0]: sizes}
    ranges = []
    for s in vocabulary.sorts:
        r = sizes.get(s, 0)
        ranges.append([r] if isinstance(r, int) else list(r))
    return [dict(zip(vocabulary.sorts, combo)) for combo in itertools.product(*ranges)]


def find_models(phi: Formula, vocabulary: Vocabulary, sizes, up_to_iso: bool = False,
                cap: int | None = None) -> Iterator[Structure]:
    """All models of the sentence phi with the given domain sizes.

    ``sizes`` is an int or range (single sort) or a map from sort to int or
    range.  Size vectors are visited in product order; within one size the
    models come in cell-lexicographic order over the standard integer
    domains.  With ``up_to_iso`` each isomorphism class is represented by
    its lexicographically least member.
    """
    a = _checked(phi, vocabulary)
    if a.free or a.free_so:
        raise InputError("find_models needs a sentence")
    for vec in _size_vectors(vocabulary, sizes):
        layout = Layout(vocabulary, standard_domains(vocabulary, vec))
        syms = ()
        group = None
        if up_to_iso:
            group = SymmetryGroup(layout)
            syms = group.transpositions()
        search = CellSearch(layout, phi, symmetries=syms, full_group=group, cap=cap)
        for vals in search.solutions():
            yield layout.build(vals)


def fresh_atoms(existing: Iterable, sort: str, count: int) -> list:
    """New atom names: next integers if every existing atom is an int, else ``sort+i``."""
    existing = set(existing)
    if all(isinstance(a, int) and not isinstance(a, bool) for a in existing):
        start = max(existing, default=-1) + 1
        return list(range(start, start + count))
    out = []
    i = 0
    while len(out) < count:
        name = f"{sort}{i}"
        if name not in existing:
            out.append(name)
        i += 1
    return out


def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def upward_extension_probe(phi: Formula, A: Structure, target: int, cap: int | None = None,
                           search_cap: int | None = None) -> Structure | None:
    """Least superstructure B of A with |B| = target and B |= phi, or None.

    A's atoms and interpretations are kept; new atoms are appended to the
    domains.  When several sorts exist the new atoms are distributed in
    product order of the per-sort counts.
    """
    if cap is None:
        cap = default_cap()
    if target < A.size:
        raise PreconditionFailed(f"target {target} is smaller than |A| = {A.size}")
    if target > cap:
        raise ResourceCapExceeded(f"target size {target}", cap)
    if not evaluate(phi, A):
        raise PreconditionFailed("the structure does not satisfy the formula")
    voc = A.vocabulary
    extra = target - A.size
    fixed = {}
    for r, prof in voc.relations:
        rel = A.relations[r]
        fixed[r] = {t: t in rel for t in itertools.product(*(A.domains[s] for s in prof))}
    for f, _, _ in voc.functions:
        fixed[f] = dict(A.functions[f])
    for c, _ in voc.constants:
        fixed[c] = {(): A.constants[c]}
    for combo in _compositions(extra, len(voc.sorts)):
        domains = {}
        new_positions = {}
        used = set(A.atoms())
        for s, k in zip(voc.sorts, combo):
            new = fresh_atoms(used, s, k)
            used.update(new)
            domains[s] = A.domains[s] + tuple(new)
            new_positions[s] = range(len(A.domains[s]), len(domains[s]))
        layout = Layout(voc, domains, fixed=fixed)
        syms = []
        for s, rng in new_positions.items():
            pos = list(rng)
            for i, j in itertools.combinations(pos, 2):
                p = list(range(len(domains[s])))
                p[i], p[j] = j, i
                act = layout.permutation_action({s: tuple(p)})
                if act is not None:
                    syms.append(act)
        search = CellSearch(layout, phi, symmetries=syms, cap=search_cap)
        vals = search.first()
        if vals is not None:
            B = layout.build(vals)
            if not evaluate(phi, B):
                raise AssertionError("probe produced a non-model")
            return B
    return None


# -- Skolem expansion -------------------------------------------------------------

@dataclass(frozen=True)
class SkolemFunction:
    name: str
    arity: int
    psi: Formula  # free variables: x and z1..z<arity>


_PROBE_VOCAB = Vocabulary.make(relations={"E": ("s", "s")}, constants={"c": "s"})


def _probe_structure() -> Structure:
    # the ordinal 3 under membership, with c the empty set
    return Structure(_PROBE_VOCAB, {"s": [0, 1, 2]}, {"E": [(0, 1), (0, 2), (1, 2)]}, constants={"c": 0})


def _literal_atoms(k: int):
    x = Var("x", "s")
    c = Const("c")
    zs = [Var(f"z{i}", "s") for i in range(1, k + 1)]
    atoms = [Rel("E", (x, x)), Rel("E", (x, c)), Rel("E", (c, x)), Eq(x, c)]
    for z in zs:
        atoms += [Rel("E", (x, z)), Rel("E", (z, x)), Eq(x, z)]
    return atoms


@lru_cache(maxsize=None)
def skolem_generating_set(max_vars: int) -> tuple[SkolemFunction, ...]:
    """Quantifier-free psi(x, z1..zk), k <= max_vars, one per equivalence class.

    Candidates are ``x = x`` and conjunctions of at most two literals over the
    atoms that mention x.  Two candidates with the same k are identified when
    they agree on every assignment in the probe structure (the ordinal 3 with
    c = 0); the first candidate of each class is kept.
    """
    probe = _probe_structure()
    interp = StructureInterp(probe)
    out = []
    for k in range(max_vars + 1):
        lits = []
        for atom in _literal_atoms(k):
            lits += [atom, Not(atom)]
        cands = [Eq(Var("x", "s"), Var("x", "s"))] + lits
        cands += [And(a, b) for a, b in itertools.combinations(lits, 2)]
        seen = set()
        names = ["x"] + [f"z{i}" for i in range(1, k + 1)]
        envs = [dict(zip(names, t)) for t in itertools.product((0, 1, 2), repeat=k + 1)]
        for psi in cands:
            run = compile_formula(psi, interp)
            table = tuple(bool(run(dict(env))) for env in envs)
            if table in seen or not any(table):
                continue
            seen.add(table)
            out.append(SkolemFunction(f"sk{len(out)}", k, psi))
    return tuple(out)


def skolem_axiom(f: SkolemFunction, sort: str = "s") -> Formula:
    """forall z (exists x psi(x, z) -> psi(f(z), z))."""
    zs = [Var(f"z{i}", sort) for i in range(1, f.arity + 1)]
    body = Imp(Exists("x", sort, f.psi), substitute(f.psi, {"x": FunApp(f.name, tuple(zs))}))
    for z in reversed(zs):
        body = Forall(z.name, sort, body)
    return body


def skolem_expand(M: Structure, max_vars: int) -> Structure:
    """Expand M over {E, c} by canonical-least Skolem functions for the generating set.

    When no witness exists the function returns the least element of the
    domain.
    """
    voc = M.vocabulary
    if len(voc.sorts) != 1:
        raise InputError("Skolem expansion needs a single-sorted structure")
    sort = voc.sorts[0]
    if voc.relation("E") != (sort, sort) or voc.constant("c") != sort:
        raise InputError("Skolem expansion needs E binary and c a constant")
    dom = M.domains[sort]
    if not dom:
        raise EmptyDomain("no default element in an empty domain")
    fs = skolem_generating_set(max_vars)
    renamed = [SkolemFunction(f.name, f.arity, _resort(f.psi, sort)) for f in fs]
    interp = StructureInterp(M)
    graphs = {}
    for f in renamed:
        run = compile_formula(f.psi, interp)
        graph = {}
        for zs in itertools.product(dom, repeat=f.arity):
            env = {f"z{i + 1}": z for i, z in enumerate(zs)}
            value = dom[0]
            for x in dom:
                env["x"] = x
                if run(env):
                    value = x
                    break
            graph[zs] = value
        graphs[f.name] = graph
    tau = voc.extend(functions={f.name: ((sort,) * f.arity, sort) for f in renamed})
    return Structure(tau, M.domains, M.relations, {**M.functions, **graphs}, M.constants)


def _resort(phi: Formula, sort: str) -> Formula:
    if sort == "s":
        return phi
    names = {"x"} | {f"z{i}" for i in range(1, 10)}
    return substitute(phi, {n: Var(n, sort) for n in names})


def skolem_axioms(max_vars: int, sort: str = "s") -> list[Formula]:
    fs = skolem_generating_set(max_vars)
    return [skolem_axiom(SkolemFunction(f.name, f.arity, _resort(f.psi, sort)), sort) for f in fs]
