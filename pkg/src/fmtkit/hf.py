"""Hereditarily finite sets.

An :class:`HfSet` is an interned, immutable node whose members are themselves
HfSets.  Interning makes structurally equal sets the same object, so equality
is identity and hashing is constant time.

The canonical order compares rank first and then the element lists, largest
element first.  For sets of rank at most 4 this coincides with the order of
Ackermann codes, which :func:`ackermann_code` exposes.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Iterator

from .config import default_cap
from .errors import (
    FormulaSyntaxError,
    InputError,
    NotExtensional,
    NotWellFounded,
    ResourceCapExceeded,
)

# tower(n) = 2^^n, the number of elements of V_n
_TOWER = [0, 1, 2, 4, 16, 65536]
MAX_DEFAULT_LEVEL = 5

_INTERN: dict[tuple, "HfSet"] = {}


class HfSet:
    __slots__ = ("_elems", "_members", "rank", "key", "_hash")

    def __new__(cls, *args, **kwargs):
        raise TypeError("use HfSet.of(...) or HfSet.from_iterable(...)")

    @classmethod
    def _make(cls, elems: tuple["HfSet", ...]) -> "HfSet":
        ident = tuple(id(e) for e in elems)
        node = _INTERN.get(ident)
        if node is not None:
            return node
        node = object.__new__(cls)
        rank = elems[-1].rank + 1 if elems else 0
        key = (rank, tuple(e.key for e in reversed(elems)))
        for name, value in (("_elems", elems), ("_members", frozenset(elems)),
                            ("rank", rank), ("key", key),
                            ("_hash", hash(tuple(e._hash for e in elems)))):
            object.__setattr__(node, name, value)
        # setdefault keeps one canonical node even under concurrent construction
        return _INTERN.setdefault(ident, node)

    @classmethod
    def of(cls, *elements: "HfSet") -> "HfSet":
        return cls.from_iterable(elements)

    @classmethod
    def from_iterable(cls, elements: Iterable["HfSet"], *, allow_duplicates: bool = True) -> "HfSet":
        elems = list(elements)
        unique = set(elems)
        if len(unique) != len(elems) and not allow_duplicates:
            raise InputError("duplicate elements")
        return cls._make(tuple(sorted(unique, key=_key)))

    def __setattr__(self, name, value):
        raise AttributeError("HfSet is immutable")

    def __reduce__(self):
        return (_rebuild, (self._elems,))

    # -- container protocol -------------------------------------------------
    def __iter__(self) -> Iterator["HfSet"]:
        return iter(self._elems)

    @property
    def elements(self) -> tuple["HfSet", ...]:
        return self._elems

    def __len__(self) -> int:
        return len(self._elems)

    def __contains__(self, item: "HfSet") -> bool:
        return item in self._members

    def __bool__(self) -> bool:
        return bool(self._elems)

    # -- identity and order -------------------------------------------------
    def __eq__(self, other):
        # interning makes structural equality coincide with identity
        if isinstance(other, HfSet):
            return self is other
        return NotImplemented

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "HfSet") -> bool:
        return self.key < other.key

    def __le__(self, other: "HfSet") -> bool:
        return self.key <= other.key

    def __gt__(self, other: "HfSet") -> bool:
        return self.key > other.key

    def __ge__(self, other: "HfSet") -> bool:
        return self.key >= other.key

    # -- set algebra --------------------------------------------------------
    def issubset(self, other: "HfSet") -> bool:
        return self._members <= other._members

    def union(self, other: "HfSet") -> "HfSet":
        return HfSet.from_iterable(self._members | other._members)

    def intersection(self, other: "HfSet") -> "HfSet":
        return HfSet.from_iterable(self._members & other._members)

    def difference(self, other: "HfSet") -> "HfSet":
        return HfSet.from_iterable(self._members - other._members)

    def with_element(self, item: "HfSet") -> "HfSet":
        return HfSet.from_iterable(self._members | {item})

    def __str__(self) -> str:
        return to_text(self)

    def __repr__(self) -> str:
        return f"HfSet({to_text(self)})"


def _key(x: HfSet):
    return x.key


def _rebuild(elems):
    return HfSet._make(tuple(elems))


EMPTY = HfSet._make(())


def ackermann_code(x: HfSet) -> int:
    """Ackermann code; only sensible for small ranks."""
    if x.rank > 5:
        raise ResourceCapExceeded(f"Ackermann code of a rank-{x.rank} set", 5)
    code = 0
    for e in x:
        code |= 1 << ackermann_code(e)
    return code


def from_ackermann(code: int) -> HfSet:
    elems = []
    i = 0
    while code >> i:
        if code >> i & 1:
            elems.append(from_ackermann(i))
        i += 1
    return HfSet._make(tuple(elems))


# -- constructors -------------------------------------------------------------

def von_neumann(n: int) -> HfSet:
    """The von Neumann natural n = {0, ..., n-1}."""
    elems: tuple[HfSet, ...] = ()
    x = EMPTY
    for _ in range(n):
        elems = elems + (x,)
        x = HfSet._make(elems)
    return x


def as_natural(x: HfSet) -> int | None:
    """Return n if x is the von Neumann natural n, else None."""
    n = len(x)
    return n if x is von_neumann(n) else None


def kuratowski_pair(a: HfSet, b: HfSet) -> HfSet:
    return HfSet.of(HfSet.of(a), HfSet.of(a, b))


def powerset(x: HfSet, cap: int | None = None) -> HfSet:
    elems = list(x)
    if cap is None:
        cap = default_cap()
    if len(elems) > 20 or (1 << len(elems)) > cap:
        raise ResourceCapExceeded(f"powerset of a {len(elems)}-element set", cap)
    subs = []
    for mask in range(1 << len(elems)):
        subs.append(HfSet.from_iterable(e for i, e in enumerate(elems) if mask >> i & 1))
    return HfSet.from_iterable(subs)


def v_level(n: int, cap: int | None = None) -> HfSet:
    """V_n, with V_0 = {} and V_{k+1} the powerset of V_k."""
    if n < 0:
        raise ValueError("level must be non-negative")
    if cap is None:
        cap = default_cap()
    if n > MAX_DEFAULT_LEVEL:
        raise ResourceCapExceeded(f"V_{n}", cap)
    size = _TOWER[n]
    if size > cap:
        raise ResourceCapExceeded(f"V_{n} ({size} elements)", cap)
    return _v_level(n)


@lru_cache(maxsize=None)
def _v_level(n: int) -> HfSet:
    x = EMPTY
    for _ in range(n):
        x = powerset(x, cap=1 << 16)
    return x


def level_size(n: int) -> int:
    return _TOWER[n]


# -- transitive closure -------------------------------------------------------

@lru_cache(maxsize=1 << 16)
def trcl(x: HfSet) -> HfSet:
    out = set()
    for e in x:
        out.add(e)
        out |= trcl(e)._members
    return HfSet.from_iterable(out)


def trcl_and_rho(x: HfSet) -> tuple[HfSet, int]:
    """Transitive closure of x together with its size, the finite H-rank."""
    closure = trcl(x)
    return closure, len(closure)


def rho(x: HfSet) -> int:
    return len(trcl(x))


def is_transitive(x: HfSet) -> bool:
    for e in x:
        if not e.issubset(x):
            return False
    return True


def is_ordinal(x: HfSet) -> bool:
    if not is_transitive(x):
        return False
    elems = list(x)
    for a in elems:
        for b in elems:
            if a != b and a not in b and b not in a:
                return False
    return True


def is_cardinal(x: HfSet) -> bool:
    # every HF ordinal is a natural, and every natural is a cardinal
    return as_natural(x) is not None


def is_powerset_of(x: HfSet, y: HfSet) -> bool:
    return y == powerset(x)


def transitive_subsets(n: int, max_size: int | None = None) -> Iterator[HfSet]:
    """All transitive subsets of V_n (n <= 4), in canonical order."""
    if n > 4:
        raise ResourceCapExceeded(f"transitive subsets of V_{n}", default_cap())
    level = list(v_level(n))
    # with Ackermann numbering, element i of V_n has members given by the bits of i
    for mask in range(1 << len(level)):
        if max_size is not None and bin(mask).count("1") > max_size:
            continue
        ok = True
        m = mask
        while m:
            low = m & -m
            if (low.bit_length() - 1) & ~mask:
                ok = False
                break
            m ^= low
        if ok:
            yield HfSet.from_iterable(level[i] for i in range(len(level)) if mask >> i & 1)


# -- textual syntax -----------------------------------------------------------

def to_text(x: HfSet) -> str:
    if not x:
        return "{}"
    return "{" + ",".join(to_text(e) for e in x) + "}"


def parse_hf(text: str) -> HfSet:
    """Parse braces-and-commas syntax such as ``{{},{{}}}``.

    A bare decimal numeral stands for the von Neumann natural.  Duplicate
    elements are rejected.
    """
    pos = _skip_ws(text, 0)
    value, pos = _parse_hf_at(text, pos)
    pos = _skip_ws(text, pos)
    if pos != len(text):
        raise FormulaSyntaxError("trailing input after set", pos, text)
    return value


def _skip_ws(text: str, pos: int) -> int:
    while pos < len(text) and text[pos].isspace():
        pos += 1
    return pos


def _parse_hf_at(text: str, pos: int) -> tuple[HfSet, int]:
    if pos < len(text) and text[pos].isdigit():
        end = pos
        while end < len(text) and text[end].isdigit():
            end += 1
        return von_neumann(int(text[pos:end])), end
    if pos >= len(text) or text[pos] != "{":
        raise FormulaSyntaxError("expected '{'", pos, text)
    pos = _skip_ws(text, pos + 1)
    seen: list[HfSet] = []
    if pos < len(text) and text[pos] == "}":
        return EMPTY, pos + 1
    while True:
        start = pos
        elem, pos = _parse_hf_at(text, pos)
        if elem in seen:
            raise FormulaSyntaxError(f"duplicate element {to_text(elem)}", start, text)
        seen.append(elem)
        pos = _skip_ws(text, pos)
        if pos < len(text) and text[pos] == ",":
            pos = _skip_ws(text, pos + 1)
            continue
        if pos < len(text) and text[pos] == "}":
            return HfSet.from_iterable(seen), pos + 1
        raise FormulaSyntaxError("expected ',' or '}'", pos, text)


# -- transitive models --------------------------------------------------------

class TransitiveModel:
    """A finite transitive set used as an ∈-model."""

    __slots__ = ("carrier",)

    def __init__(self, carrier: HfSet | Iterable[HfSet]):
        if not isinstance(carrier, HfSet):
            carrier = HfSet.from_iterable(carrier, allow_duplicates=False)
        if not is_transitive(carrier):
            raise InputError(f"carrier {carrier} is not transitive")
        object.__setattr__(self, "carrier", carrier)

    def __setattr__(self, name, value):
        raise AttributeError("TransitiveModel is immutable")

    def __iter__(self):
        return iter(self.carrier)

    def __len__(self):
        return len(self.carrier)

    def __contains__(self, x: HfSet) -> bool:
        return x in self.carrier

    def __eq__(self, other):
        return isinstance(other, TransitiveModel) and other.carrier == self.carrier

    def __hash__(self):
        return hash(("TransitiveModel", self.carrier))

    def __repr__(self):
        return f"TransitiveModel({self.carrier})"

    def as_graph(self) -> tuple[list[HfSet], set[tuple[HfSet, HfSet]]]:
        """Atoms and membership pairs ``(member, set)`` of (M, ∈)."""
        atoms = list(self.carrier)
        pairs = {(a, b) for b in atoms for a in b}
        return atoms, pairs


# -- Mostowski collapse -------------------------------------------------------

def mostowski_collapse(domain, edges) -> dict:
    """Collapse a well-founded extensional relation onto a transitive set.

    ``edges`` holds pairs ``(b, a)`` read as "b E a".  Returns the map
    ``a -> {collapse(b) : b E a}``.  Raises NotWellFounded when the relation
    has a cycle (checked first) and NotExtensional when two atoms share their
    predecessor set.
    """
    atoms = list(domain)
    index = {a: i for i, a in enumerate(atoms)}
    if len(index) != len(atoms):
        raise InputError("duplicate atoms in domain")
    preds: list[list[int]] = [[] for _ in atoms]
    for b, a in edges:
        if b not in index or a not in index:
            raise InputError(f"edge ({b!r}, {a!r}) leaves the domain")
        preds[index[a]].append(index[b])

    cycle = _find_cycle(preds)
    if cycle is not None:
        raise NotWellFounded([atoms[i] for i in cycle])

    seen: dict[frozenset, int] = {}
    for i in range(len(atoms)):
        key = frozenset(preds[i])
        if key in seen:
            raise NotExtensional(atoms[seen[key]], atoms[i])
        seen[key] = i

    image: list[HfSet | None] = [None] * len(atoms)

    def collapse(i: int) -> HfSet:
        stack = [i]
        while stack:
            j = stack[-1]
            if image[j] is not None:
                stack.pop()
                continue
            pending = [k for k in preds[j] if image[k] is None]
            if pending:
                stack.extend(pending)
                continue
            image[j] = HfSet.from_iterable(image[k] for k in preds[j])
            stack.pop()
        return image[i]

    return {a: collapse(i) for i, a in enumerate(atoms)}


def _find_cycle(preds: list[list[int]]) -> list[int] | None:
    white, grey, black = 0, 1, 2
    colour = [white] * len(preds)
    parent = [-1] * len(preds)
    for root in range(len(preds)):
        if colour[root] != white:
            continue
        stack = [(root, iter(preds[root]))]
        colour[root] = grey
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if colour[nxt] == white:
                    colour[nxt] = grey
                    parent[nxt] = node
                    stack.append((nxt, iter(preds[nxt])))
                    advanced = True
                    break
                if colour[nxt] == grey:
                    cycle = [nxt]
                    cur = node
                    while cur != nxt:
                        cycle.append(cur)
                        cur = parent[cur]
                    cycle.reverse()
                    return cycle
            if not advanced:
                colour[node] = black
                stack.pop()
    return None
