"""Ehrenfeucht-Fraissé games on finite relational structures."""
from __future__ import annotations

import itertools
from functools import lru_cache

from .errors import InputError, VocabularyMismatch
from .structures import Structure


def qr_equivalent(A: Structure, B: Structure, k: int) -> bool:
    """Duplicator wins the k-round game on A and B.

    Constants are treated as pebbles placed before the first round.  Only
    relational vocabularies (plus constants) are supported.
    """
    if A.vocabulary != B.vocabulary:
        raise VocabularyMismatch("structures have different vocabularies")
    if A.vocabulary.functions:
        raise InputError("Ehrenfeucht-Fraisse games need a vocabulary without function symbols")
    if k < 0:
        raise InputError("number of rounds must be non-negative")
    game = _Game(A, B)
    start = tuple((A.constants[c], B.constants[c]) for c, _ in A.vocabulary.constants)
    if not game.partial_iso(start):
        return False
    return game.wins(start, k)


class _Game:
    def __init__(self, A: Structure, B: Structure):
        self.A = A
        self.B = B
        self.voc = A.vocabulary
        self.wins = lru_cache(maxsize=None)(self._wins)

    def partial_iso(self, pairs) -> bool:
        fwd, back = {}, {}
        for a, b in pairs:
            if fwd.setdefault(a, b) != b or back.setdefault(b, a) != a:
                return False
            if self.A._sort_of[a] != self.B._sort_of[b]:
                return False
        for r, prof in self.voc.relations:
            ra, rb = self.A.relations[r], self.B.relations[r]
            for t in itertools.product(fwd, repeat=len(prof)):
                if (t in ra) != (tuple(fwd[x] for x in t) in rb):
                    return False
        return True

    def _wins(self, pairs, rounds) -> bool:
        if rounds == 0:
            return True
        for s in self.voc.sorts:
            for a in self.A.domains[s]:
                if not any(self._reply(pairs, (a, b), rounds) for b in self.B.domains[s]):
                    return False
            for b in self.B.domains[s]:
                if not any(self._reply(pairs, (a, b), rounds) for a in self.A.domains[s]):
                    return False
        return True

    def _reply(self, pairs, move, rounds) -> bool:
        nxt = tuple(sorted(set(pairs) | {move}, key=repr))
        return self.partial_iso(nxt) and self.wins(nxt, rounds - 1)
