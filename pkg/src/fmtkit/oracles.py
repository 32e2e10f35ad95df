"""Reference deciders used to check the evaluator and the search procedures.

Everything here works directly on atoms, edge sets and hereditarily finite
sets.  Nothing is routed through the formula compiler, so a bug there cannot
hide behind a matching bug here.
"""
from __future__ import annotations

import itertools

from .errors import NotExtensional, NotWellFounded
from .hf import HfSet, TransitiveModel, mostowski_collapse, powerset
from .setformula import is_r_correct
from .structures import Structure


def edges_of(A: Structure, name: str = "E") -> set[tuple]:
    return set(A.relations[name])


def single_domain(A: Structure) -> tuple:
    return A.domains[A.vocabulary.sorts[0]]


# -- counting -----------------------------------------------------------------

def equal_split(A: Structure, name: str = "P") -> bool:
    """|P| equals the size of its complement."""
    dom = single_domain(A)
    inside = sum(1 for a in dom if (a,) in A.relations[name])
    return inside == len(dom) - inside


def within_exponential(a: int, b: int) -> bool:
    return b <= 2 ** a


# -- graphs -------------------------------------------------------------------

def acyclic(atoms, edges) -> bool:
    """Depth-first colouring: a grey node reached again closes a cycle."""
    succ = {a: [] for a in atoms}
    for u, v in edges:
        succ[u].append(v)
    colour = dict.fromkeys(atoms, 0)

    def visit(a) -> bool:
        colour[a] = 1
        for b in succ[a]:
            if colour[b] == 1:
                return False
            if colour[b] == 0 and not visit(b):
                return False
        colour[a] = 2
        return True

    return all(colour[a] != 0 or visit(a) for a in atoms)


def every_subset_has_minimal(atoms, edges) -> bool:
    """Every nonempty X has some x with no y in X such that (y, x) is an edge."""
    atoms = list(atoms)
    for r in range(1, len(atoms) + 1):
        for xs in itertools.combinations(atoms, r):
            members = set(xs)
            if not any(all((y, x) not in edges for y in members) for x in members):
                return False
    return True


def extensional(atoms, edges) -> bool:
    preds = {a: frozenset(b for b in atoms if (b, a) in edges) for a in atoms}
    return len(set(preds.values())) == len(preds)


def relation_empty(A: Structure, name: str = "E") -> bool:
    return not A.relations[name]


# -- set-theoretic ------------------------------------------------------------

def collapse(atoms, edges) -> dict | None:
    """The Mostowski collapse map, or None when the relation is not
    well-founded and extensional."""
    try:
        return mostowski_collapse(atoms, edges)
    except (NotWellFounded, NotExtensional):
        return None


def collapse_succeeds(atoms, edges) -> bool:
    return collapse(atoms, edges) is not None


def collapsed_model(atoms, edges) -> TransitiveModel | None:
    image = collapse(atoms, edges)
    if image is None:
        return None
    return TransitiveModel(HfSet.from_iterable(image.values(), allow_duplicates=False))


def in_q(atoms, edges, predicate: str) -> bool:
    """Isomorphic to a transitive model that computes the predicate correctly."""
    model = collapsed_model(atoms, edges)
    return model is not None and is_r_correct(model, predicate)


def is_power_set(x: HfSet, y: HfSet) -> bool:
    return y == powerset(x)


def rank_function(atoms, edges) -> dict | None:
    """Height of each atom in an acyclic relation (0 for sources), else None."""
    if not acyclic(atoms, edges):
        return None
    preds = {a: [b for b, c in edges if c == a] for a in atoms}
    height: dict = {}

    def h(a):
        if a not in height:
            height[a] = max((h(b) + 1 for b in preds[a]), default=0)
        return height[a]

    for a in atoms:
        h(a)
    return height
