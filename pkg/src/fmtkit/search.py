"""Depth-first search over the free cells of a layout.

Cells are assigned in layout order and values in increasing order, so
complete vectors come out lexicographically sorted and the first model found
is the least one.  After every assignment the formula is evaluated in
three-valued logic; a definite False prunes the subtree.

Symmetry breaking is optional.  Given the actions of a group of
permutations that map models to models, a partial vector is abandoned as soon
as some group element provably produces a lexicographically smaller vector.
The least model of every orbit survives, so this is sound for existence and
least-witness queries and for enumeration up to isomorphism.
"""
from __future__ import annotations

from typing import Iterator

from .config import default_cap
from .errors import ResourceCapExceeded
from .evaluator import LayoutInterp, compile_formula
from .formula import Formula
from .structures import Layout, Structure, SymmetryGroup, _compare_image


class CellSearch:
    def __init__(self, layout: Layout, phi: Formula | None, base: Structure | None = None,
                 symmetries=(), full_group: SymmetryGroup | None = None, cap: int | None = None):
        self.layout = layout
        self.base = base
        self.vals: list = [None] * len(layout)
        self.cap = default_cap() if cap is None else cap
        self.run = None
        if phi is not None:
            self.run = compile_formula(phi, LayoutInterp(layout, self.vals, base), self.cap)
        self.symmetries = list(symmetries)
        self.full_group = full_group
        self.nodes = 0

    def _status(self):
        if self.run is None:
            return True
        return self.run({})

    def _pruned_by_symmetry(self) -> bool:
        vals = self.vals
        for img, valmaps in self.symmetries:
            if _compare_image(vals, img, valmaps) < 0:
                return True
        return False

    def solutions(self) -> Iterator[list]:
        """Every satisfying complete vector (modulo symmetry), in lex order."""
        status = self._status()
        if status is False:
            return
        yield from self._dfs(0, status is True)

    def first(self) -> list | None:
        for vals in self.solutions():
            return vals
        return None

    def _dfs(self, depth: int, decided: bool):
        vals = self.vals
        layout = self.layout
        if depth == len(vals):
            if self.full_group is not None and not self.full_group.classify(vals)[0]:
                return
            yield list(vals)
            return
        for v in layout.choices[depth]:
            self.nodes += 1
            if self.nodes > self.cap:
                vals[depth] = None
                raise ResourceCapExceeded("search nodes", self.cap)
            vals[depth] = v
            if self.symmetries and self._pruned_by_symmetry():
                continue
            status = True if decided else self._status()
            if status is False:
                continue
            yield from self._dfs(depth + 1, status is True)
        vals[depth] = None


def automorphism_transpositions(layout: Layout, base: Structure | None, sorts_free=(),
                                base_sorts=()):
    """Transposition actions usable for lex-leader pruning.

    Atoms of sorts in ``sorts_free`` may be swapped freely (they carry no fixed
    structure).  Atoms of ``base_sorts`` may be swapped only when the swap is
    an automorphism of ``base``.
    """
    acts = []
    group = SymmetryGroup(layout, sorts=list(sorts_free))
    acts.extend(group.transpositions())
    if base is not None:
        for s in base_sorts:
            dom = layout.domains[s]
            for i in range(len(dom)):
                for j in range(i + 1, len(dom)):
                    if not _swap_is_automorphism(base, dom[i], dom[j]):
                        continue
                    p = list(range(len(dom)))
                    p[i], p[j] = j, i
                    act = layout.permutation_action({s: tuple(p)})
                    if act is not None:
                        acts.append(act)
    return acts


def _swap_is_automorphism(A: Structure, a, b) -> bool:
    def sw(x):
        return b if x == a else a if x == b else x

    for r, _ in A.vocabulary.relations:
        rel = A.relations[r]
        for t in rel:
            if tuple(sw(x) for x in t) not in rel:
                return False
    for f, _, _ in A.vocabulary.functions:
        graph = A.functions[f]
        for k, v in graph.items():
            if graph[tuple(sw(x) for x in k)] != sw(v):
                return False
    for c, _ in A.vocabulary.constants:
        if A.constants[c] in (a, b):
            return False
    return True
