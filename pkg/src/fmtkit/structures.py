"""Many-sorted vocabularies, finite structures, enumeration and isomorphism."""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .config import default_cap
from .errors import (
    InputError,
    NotSubvocabulary,
    ResourceCapExceeded,
    SortError,
    UnknownSymbol,
    VocabularyMismatch,
)

DEFAULT_SORT = "s"


@dataclass(frozen=True)
class Vocabulary:
    """Sorts plus relation, function and constant symbols with sort profiles.

    Symbols keep their declaration order, which fixes the cell order used by
    enumeration and witness search.
    """

    sorts: tuple[str, ...] = (DEFAULT_SORT,)
    relations: tuple[tuple[str, tuple[str, ...]], ...] = ()
    functions: tuple[tuple[str, tuple[str, ...], str], ...] = ()
    constants: tuple[tuple[str, str], ...] = ()
    _kinds: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "sorts", tuple(self.sorts))
        object.__setattr__(self, "relations", tuple((r, tuple(p)) for r, p in self.relations))
        object.__setattr__(self, "functions", tuple((f, tuple(a), s) for f, a, s in self.functions))
        object.__setattr__(self, "constants", tuple((c, s) for c, s in self.constants))
        if len(set(self.sorts)) != len(self.sorts):
            raise InputError("duplicate sort names")
        kinds: dict[str, tuple] = {}
        declared = set(self.sorts)
        entries = [(r, ("rel", p)) for r, p in self.relations]
        entries += [(f, ("fun", a, s)) for f, a, s in self.functions]
        entries += [(c, ("const", s)) for c, s in self.constants]
        for name, info in entries:
            if name in kinds:
                raise InputError(f"symbol {name!r} declared twice")
            used = list(info[1]) if info[0] == "rel" else []
            if info[0] == "fun":
                used = list(info[1]) + [info[2]]
            if info[0] == "const":
                used = [info[1]]
            for s in used:
                if s not in declared:
                    raise SortError(f"symbol {name!r} uses undeclared sort {s!r}", name)
            kinds[name] = info
        object.__setattr__(self, "_kinds", kinds)

    @classmethod
    def make(cls, sorts=(DEFAULT_SORT,), relations=None, functions=None, constants=None):
        """Build from plain dicts: ``relations={"E": ("s", "s")}`` etc."""
        return cls(
            tuple(sorts),
            tuple((r, tuple(p)) for r, p in (relations or {}).items()),
            tuple((f, tuple(a), s) for f, (a, s) in (functions or {}).items()),
            tuple((constants or {}).items()),
        )

    # -- lookups ------------------------------------------------------------
    def kind(self, name: str) -> str | None:
        info = self._kinds.get(name)
        return info[0] if info else None

    def relation(self, name: str) -> tuple[str, ...]:
        info = self._kinds.get(name)
        if info is None or info[0] != "rel":
            raise UnknownSymbol(name)
        return info[1]

    def function(self, name: str) -> tuple[tuple[str, ...], str]:
        info = self._kinds.get(name)
        if info is None or info[0] != "fun":
            raise UnknownSymbol(name)
        return info[1], info[2]

    def constant(self, name: str) -> str:
        info = self._kinds.get(name)
        if info is None or info[0] != "const":
            raise UnknownSymbol(name)
        return info[1]

    def symbols(self) -> list[str]:
        return list(self._kinds)

    def profile(self, name: str) -> tuple:
        return self._kinds[name]

    def is_subvocabulary_of(self, other: "Vocabulary") -> bool:
        if not set(self.sorts) <= set(other.sorts):
            return False
        return all(other._kinds.get(n) == info for n, info in self._kinds.items())

    def restrict(self, symbols: Iterable[str], sorts: Iterable[str] | None = None) -> "Vocabulary":
        keep = set(symbols)
        sort_set = set(sorts) if sorts is not None else set()
        for n in keep:
            info = self._kinds[n]
            if info[0] == "rel":
                sort_set.update(info[1])
            elif info[0] == "fun":
                sort_set.update(info[1])
                sort_set.add(info[2])
            else:
                sort_set.add(info[1])
        return Vocabulary(
            tuple(s for s in self.sorts if s in sort_set),
            tuple(r for r in self.relations if r[0] in keep),
            tuple(f for f in self.functions if f[0] in keep),
            tuple(c for c in self.constants if c[0] in keep),
        )

    def extend(self, sorts=(), relations=None, functions=None, constants=None) -> "Vocabulary":
        return Vocabulary(
            self.sorts + tuple(s for s in sorts if s not in self.sorts),
            self.relations + tuple((r, tuple(p)) for r, p in (relations or {}).items()),
            self.functions + tuple((f, tuple(a), s) for f, (a, s) in (functions or {}).items()),
            self.constants + tuple((constants or {}).items()),
        )

    # -- documents ----------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "sorts": list(self.sorts),
            "relations": {r: list(p) for r, p in self.relations},
            "functions": {f: {"args": list(a), "result": s} for f, a, s in self.functions},
            "constants": dict(self.constants),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Vocabulary":
        if not isinstance(data, Mapping):
            raise InputError("vocabulary must be an object")
        sorts = tuple(data.get("sorts", [DEFAULT_SORT]))
        rels = []
        for r, p in data.get("relations", {}).items():
            if isinstance(p, int):
                # arity shorthand, only for single-sorted vocabularies
                if len(sorts) != 1:
                    raise InputError(f"relation {r!r}: arity shorthand needs exactly one sort")
                p = [sorts[0]] * p
            rels.append((r, tuple(p)))
        funs = []
        for f, spec in data.get("functions", {}).items():
            funs.append((f, tuple(spec.get("args", [])), spec["result"]))
        consts = tuple(data.get("constants", {}).items())
        return cls(sorts, tuple(rels), tuple(funs), consts)


class Structure:
    """A finite interpretation of a vocabulary.

    Domains are ordered tuples of hashable atoms, pairwise disjoint across
    sorts.  The listed order is the canonical atom order used for witness
    tie-breaking.
    """

    __slots__ = ("vocabulary", "domains", "relations", "functions", "constants", "_sort_of", "_pos")

    def __init__(self, vocabulary: Vocabulary, domains: Mapping, relations=None, functions=None,
                 constants=None, check: bool = True):
        doms = {}
        for s in vocabulary.sorts:
            doms[s] = tuple(domains.get(s, ()))
        extra = set(domains) - set(vocabulary.sorts)
        if extra:
            raise SortError(f"domains given for undeclared sorts {sorted(extra)}")
        rels = {r: frozenset(tuple(t) for t in (relations or {}).get(r, ())) for r, _ in vocabulary.relations}
        funs = {}
        for f, _, _ in vocabulary.functions:
            graph = (functions or {}).get(f, {})
            if not isinstance(graph, Mapping):
                graph = {tuple(args): v for args, v in graph}
            funs[f] = {tuple(k): v for k, v in graph.items()}
        consts = {c: (constants or {}).get(c) for c, _ in vocabulary.constants}
        sort_of = {}
        pos = {}
        for s in vocabulary.sorts:
            for i, a in enumerate(doms[s]):
                if a in sort_of:
                    raise InputError(f"atom {a!r} appears twice")
                sort_of[a] = s
                pos[a] = i
        for name, value in (("vocabulary", vocabulary), ("domains", doms), ("relations", rels),
                            ("functions", funs), ("constants", consts), ("_sort_of", sort_of), ("_pos", pos)):
            object.__setattr__(self, name, value)
        if check:
            self._validate(relations, functions, constants)

    def _validate(self, relations, functions, constants):
        voc = self.vocabulary
        for given, kind in ((relations, "rel"), (functions, "fun"), (constants, "const")):
            for name in (given or {}):
                if voc.kind(name) != kind:
                    raise UnknownSymbol(name)
        for r, prof in voc.relations:
            for t in self.relations[r]:
                self._check_tuple(r, t, prof)
        for f, args, res in voc.functions:
            graph = self.functions[f]
            for k, v in graph.items():
                self._check_tuple(f, k, args)
                self._check_tuple(f, (v,), (res,))
            expected = math.prod(len(self.domains[s]) for s in args)
            if len(graph) != expected:
                raise InputError(f"function {f!r} is not total")
        for c, s in voc.constants:
            v = self.constants[c]
            if v is None:
                raise InputError(f"constant {c!r} is uninterpreted")
            self._check_tuple(c, (v,), (s,))

    def _check_tuple(self, name, t, prof):
        if len(t) != len(prof):
            raise SortError(f"{name!r} expects {len(prof)} arguments, got {len(t)}", name)
        for a, s in zip(t, prof):
            if self._sort_of.get(a) != s:
                raise SortError(f"{name!r}: atom {a!r} is not in sort {s!r}", name)

    def __setattr__(self, name, value):
        raise AttributeError("Structure is immutable")

    def __reduce__(self):
        return (_rebuild_structure, (self.vocabulary, self.domains, self.relations, self.functions,
                                     self.constants))

    # -- basic queries ------------------------------------------------------
    @property
    def size(self) -> int:
        return sum(len(d) for d in self.domains.values())

    def __len__(self) -> int:
        return self.size

    def sort_of(self, atom) -> str:
        return self._sort_of[atom]

    def position(self, atom) -> int:
        return self._pos[atom]

    def atoms(self) -> list:
        return [a for s in self.vocabulary.sorts for a in self.domains[s]]

    def holds(self, rel: str, *args) -> bool:
        return tuple(args) in self.relations[rel]

    def apply(self, fn: str, *args):
        return self.functions[fn][tuple(args)]

    def _sig(self):
        return (
            self.vocabulary,
            tuple(self.domains[s] for s in self.vocabulary.sorts),
            tuple(self.relations[r] for r, _ in self.vocabulary.relations),
            tuple(frozenset(self.functions[f].items()) for f, _, _ in self.vocabulary.functions),
            tuple(self.constants[c] for c, _ in self.vocabulary.constants),
        )

    def __eq__(self, other):
        if not isinstance(other, Structure):
            return NotImplemented
        return self._sig() == other._sig()

    def __hash__(self):
        return hash(self._sig())

    def __repr__(self):
        parts = [f"{s}={list(self.domains[s])}" for s in self.vocabulary.sorts]
        for r, _ in self.vocabulary.relations:
            parts.append(f"{r}={sorted(self.relations[r], key=self._tuple_key)}")
        for f, _, _ in self.vocabulary.functions:
            parts.append(f"{f}={dict(sorted(self.functions[f].items(), key=lambda kv: self._tuple_key(kv[0])))}")
        for c, _ in self.vocabulary.constants:
            parts.append(f"{c}={self.constants[c]!r}")
        return "Structure(" + ", ".join(parts) + ")"

    def _tuple_key(self, t):
        return tuple(self._pos[a] for a in t)

    # -- documents ----------------------------------------------------------
    def to_dict(self) -> dict:
        def enc(a):
            return a if isinstance(a, (int, str)) else str(a)

        voc = self.vocabulary
        return {
            "vocabulary": voc.to_dict(),
            "domains": {s: [enc(a) for a in self.domains[s]] for s in voc.sorts},
            "relations": {
                r: [[enc(a) for a in t] for t in sorted(self.relations[r], key=self._tuple_key)]
                for r, _ in voc.relations
            },
            "functions": {
                f: [[[enc(a) for a in k], enc(v)]
                    for k, v in sorted(self.functions[f].items(), key=lambda kv: self._tuple_key(kv[0]))]
                for f, _, _ in voc.functions
            },
            "constants": {c: enc(self.constants[c]) for c, _ in voc.constants},
        }

    @classmethod
    def from_dict(cls, data: Mapping, vocabulary: Vocabulary | None = None) -> "Structure":
        if not isinstance(data, Mapping):
            raise InputError("structure document must be an object")
        if vocabulary is None:
            if "vocabulary" not in data:
                raise InputError("structure document lacks a vocabulary")
            vocabulary = Vocabulary.from_dict(data["vocabulary"])
        domains = data.get("domains", {})
        if isinstance(domains, list):
            if len(vocabulary.sorts) != 1:
                raise InputError("a bare domain list needs a single-sorted vocabulary")
            domains = {vocabulary.sorts[0]: domains}
        for s, atoms in domains.items():
            for a in atoms:
                if not isinstance(a, (int, str)) or isinstance(a, bool):
                    raise InputError(f"atom {a!r} must be an integer or string")
        relations = {r: [tuple(t) for t in ts] for r, ts in data.get("relations", {}).items()}
        functions = {}
        for f, graph in data.get("functions", {}).items():
            functions[f] = {tuple(k): v for k, v in graph}
        return cls(vocabulary, domains, relations, functions, data.get("constants", {}))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Structure":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(data)


def _rebuild_structure(vocabulary, domains, relations, functions, constants):
    return Structure(vocabulary, domains, relations, functions, constants, check=False)


@dataclass(frozen=True)
class Embedding:
    """Per-sort injective maps between the domains of two structures."""

    maps: Mapping[str, Mapping]

    def __call__(self, atom, sort: str | None = None):
        if sort is not None:
            return self.maps[sort][atom]
        for m in self.maps.values():
            if atom in m:
                return m[atom]
        raise KeyError(atom)

    def is_embedding(self, A: Structure, B: Structure) -> bool:
        voc = A.vocabulary
        for s in voc.sorts:
            m = self.maps.get(s, {})
            if set(m) != set(A.domains[s]) or len(set(m.values())) != len(m):
                return False
            if any(B._sort_of.get(v) != s for v in m.values()):
                return False
        f = {a: self.maps[s][a] for s in voc.sorts for a in A.domains[s]}
        for r, prof in voc.relations:
            image = {tuple(f[a] for a in t) for t in A.relations[r]}
            doms = [[f[a] for a in A.domains[s]] for s in prof]
            for t in itertools.product(*doms):
                if (t in B.relations[r]) != (t in image):
                    return False
        for fn, _, _ in voc.functions:
            for k, v in A.functions[fn].items():
                if B.functions[fn].get(tuple(f[a] for a in k)) != f[v]:
                    return False
        return all(B.constants[c] == f[A.constants[c]] for c, _ in voc.constants)


def identity_embedding(A: Structure) -> Embedding:
    return Embedding({s: {a: a for a in A.domains[s]} for s in A.vocabulary.sorts})


def reduct(B: Structure, tau: Vocabulary) -> Structure:
    """Restrict B to tau; domains of dropped sorts disappear."""
    if not tau.is_subvocabulary_of(B.vocabulary):
        raise NotSubvocabulary("target vocabulary is not contained in the structure's vocabulary")
    return Structure(
        tau,
        {s: B.domains[s] for s in tau.sorts},
        {r: B.relations[r] for r, _ in tau.relations},
        {f: B.functions[f] for f, _, _ in tau.functions},
        {c: B.constants[c] for c, _ in tau.constants},
        check=False,
    )


def expand(A: Structure, tau: Vocabulary, domains=None, relations=None, functions=None,
           constants=None) -> Structure:
    """Expand A to the larger vocabulary tau with the given new interpretations."""
    if not A.vocabulary.is_subvocabulary_of(tau):
        raise NotSubvocabulary("expansion vocabulary must contain the structure's vocabulary")
    doms = dict(A.domains)
    for s, atoms in (domains or {}).items():
        if s in A.vocabulary.sorts:
            raise InputError(f"sort {s!r} already has a domain")
        doms[s] = tuple(atoms)
    rels = dict(A.relations)
    rels.update(relations or {})
    funs = dict(A.functions)
    funs.update(functions or {})
    consts = dict(A.constants)
    consts.update(constants or {})
    return Structure(tau, doms, rels, funs, consts)


def is_substructure(A: Structure, B: Structure) -> bool:
    """A's atoms are B's atoms and B restricted to them is A."""
    if A.vocabulary != B.vocabulary:
        return False
    return identity_embedding(A).is_embedding(A, B)


# -- cell layouts ---------------------------------------------------------------

class Layout:
    """The undetermined part of a structure, flattened into ordered cells.

    A cell is one relation tuple, one function argument tuple, or one
    constant.  Cells follow symbol declaration order and then the
    lexicographic order of their argument positions.  Relation cells take
    values False < True; function and constant cells take the index of an
    atom in the result sort's domain.

    ``fixed`` maps a symbol to a dict from argument tuples to values; those
    entries are not cells.  Symbols in ``fixed_symbols`` are entirely fixed
    (absent tuples of a fixed relation are false).
    """

    def __init__(self, vocabulary: Vocabulary, domains: Mapping, fixed: Mapping | None = None,
                 fixed_symbols: Iterable[str] = ()):
        self.vocabulary = vocabulary
        self.domains = {s: tuple(domains.get(s, ())) for s in vocabulary.sorts}
        self.pos = {}
        for s in vocabulary.sorts:
            for i, a in enumerate(self.domains[s]):
                self.pos[a] = i
        self.fixed = {k: dict(v) for k, v in (fixed or {}).items()}
        self.fixed_symbols = frozenset(fixed_symbols)
        self.cells: list[tuple[str, str, tuple]] = []
        self.choices: list[tuple] = []
        self.result_sort: list[str | None] = []
        self.index: dict[str, dict[tuple, int]] = {}
        for name in vocabulary.symbols():
            info = vocabulary.profile(name)
            self.index[name] = {}
            if name in self.fixed_symbols:
                continue
            fixed_part = self.fixed.get(name, {})
            if info[0] == "rel":
                arg_sorts, choice, res = info[1], (False, True), None
            elif info[0] == "fun":
                arg_sorts, res = info[1], info[2]
                choice = tuple(range(len(self.domains[res])))
            else:
                arg_sorts, res = (), info[1]
                choice = tuple(range(len(self.domains[res])))
            for args in itertools.product(*(self.domains[s] for s in arg_sorts)):
                if args in fixed_part:
                    continue
                self.index[name][args] = len(self.cells)
                self.cells.append((info[0], name, args))
                self.choices.append(choice)
                self.result_sort.append(res)

    def __len__(self):
        return len(self.cells)

    def total(self) -> int:
        return math.prod(len(c) for c in self.choices)

    def build(self, vals, base: Structure | None = None) -> Structure:
        """Materialize a complete cell vector as a Structure."""
        voc = self.vocabulary
        rels = {}
        funs = {}
        consts = {}
        for r, _ in voc.relations:
            if base is not None and r in self.fixed_symbols:
                rels[r] = base.relations[r]
                continue
            true = {args for args, v in self.fixed.get(r, {}).items() if v}
            for args, i in self.index[r].items():
                if vals[i]:
                    true.add(args)
            rels[r] = true
        for f, _, res in voc.functions:
            if base is not None and f in self.fixed_symbols:
                funs[f] = base.functions[f]
                continue
            graph = dict(self.fixed.get(f, {}))
            dom = self.domains[res]
            for args, i in self.index[f].items():
                graph[args] = dom[vals[i]]
            funs[f] = graph
        for c, s in voc.constants:
            if base is not None and c in self.fixed_symbols:
                consts[c] = base.constants[c]
                continue
            if () in self.fixed.get(c, {}):
                consts[c] = self.fixed[c][()]
            else:
                consts[c] = self.domains[s][vals[self.index[c][()]]]
        return Structure(voc, self.domains, rels, funs, consts, check=False)

    # -- symmetry -----------------------------------------------------------
    def permutation_action(self, perm: Mapping[str, tuple[int, ...]]):
        """Cell images and value maps for a per-sort position permutation.

        Returns ``(img, valmap)`` where cell ``c`` is sent to ``img[c]`` and a
        value ``v`` of cell ``c`` becomes ``valmap[c][v]``; ``None`` when the
        permutation moves a free cell onto a fixed one.
        """
        dom_perm = {}
        for s in self.vocabulary.sorts:
            p = perm.get(s)
            dom = self.domains[s]
            if p is None:
                dom_perm.update({a: a for a in dom})
            else:
                dom_perm.update({dom[i]: dom[p[i]] for i in range(len(dom))})
        img = []
        valmaps = []
        for kind, name, args in self.cells:
            target = tuple(dom_perm[a] for a in args)
            j = self.index[name].get(target)
            if j is None:
                return None
            img.append(j)
            res = self.result_sort[len(img) - 1]
            if res is None or perm.get(res) is None:
                valmaps.append(None)
            else:
                valmaps.append(perm[res])
        return img, valmaps


def _compare_image(vals, img, valmaps, limit=None) -> int:
    """Sign of (sigma W) - W in lexicographic cell order.

    ``(sigma W)(c) = sigma(W(sigma^-1 c))``; for involutions and for the
    inverse tables we pass in, ``img`` already holds sigma^-1.  Comparison
    stops at the first unknown value and returns 0 there.
    """
    n = len(vals) if limit is None else limit
    for c in range(n):
        a = vals[c]
        if a is None:
            return 0
        b = vals[img[c]]
        if b is None:
            return 0
        vm = valmaps[c]
        if vm is not None:
            b = vm[b]
        if b != a:
            return -1 if b < a else 1
    return 0


class SymmetryGroup:
    """Per-sort permutations acting on a layout's cells."""

    def __init__(self, layout: Layout, sorts: Iterable[str] | None = None, allowed=None):
        self.layout = layout
        self.sorts = [s for s in layout.vocabulary.sorts if sorts is None or s in sorts]
        self.allowed = allowed
        self._full = None

    def _perms(self):
        per_sort = [list(itertools.permutations(range(len(self.layout.domains[s])))) for s in self.sorts]
        for combo in itertools.product(*per_sort):
            perm = dict(zip(self.sorts, combo))
            if self.allowed is not None and not self.allowed(perm):
                continue
            yield perm

    def order_bound(self) -> int:
        return math.prod(math.factorial(len(self.layout.domains[s])) for s in self.sorts)

    def actions(self, cap: int | None = None):
        """Inverse actions of all group elements (cached)."""
        if self._full is None:
            if cap is None:
                cap = default_cap()
            if self.order_bound() > cap:
                raise ResourceCapExceeded("symmetry group size", cap)
            acts = []
            for perm in self._perms():
                inv = {s: _invert(p) for s, p in perm.items()}
                # img holds sigma^-1 applied to cells, values mapped by sigma
                img_inv = self.layout.permutation_action(inv)
                if img_inv is None:
                    continue
                img, _ = img_inv
                fwd = self.layout.permutation_action(perm)
                acts.append((img, fwd[1] if fwd else None))
            self._full = acts
        return self._full

    def transpositions(self):
        acts = []
        for s in self.sorts:
            n = len(self.layout.domains[s])
            for i in range(n):
                for j in range(i + 1, n):
                    p = list(range(n))
                    p[i], p[j] = j, i
                    perm = {s: tuple(p)}
                    if self.allowed is not None and not self.allowed(perm):
                        continue
                    act = self.layout.permutation_action(perm)
                    if act is not None:
                        acts.append(act)
        return acts

    def classify(self, vals) -> tuple[bool, int]:
        """(is vals the lex-least in its orbit, stabilizer size)."""
        stab = 0
        for img, valmaps in self.actions():
            c = _compare_image(vals, img, valmaps)
            if c < 0:
                return False, 0
            if c == 0:
                stab += 1
        return True, stab

    def canonical(self, vals) -> tuple:
        best = None
        n = len(vals)
        for img, valmaps in self.actions():
            w = tuple(vals[img[c]] if valmaps[c] is None else valmaps[c][vals[img[c]]] for c in range(n))
            if best is None or w < best:
                best = w
        return best if best is not None else tuple(vals)


def _invert(p):
    inv = [0] * len(p)
    for i, j in enumerate(p):
        inv[j] = i
    return tuple(inv)


def layout_vector(layout: Layout, A: Structure) -> list:
    """Cell values of A in a layout over A's own domains."""
    vals = []
    for kind, name, args in layout.cells:
        if kind == "rel":
            vals.append(args in A.relations[name])
        elif kind == "fun":
            vals.append(layout.pos[A.functions[name][args]])
        else:
            vals.append(layout.pos[A.constants[name]])
    return vals


def canonical_key(A: Structure) -> tuple:
    """Isomorphism-invariant key: sizes plus the orbit-least cell vector."""
    layout = Layout(A.vocabulary, A.domains)
    vals = layout_vector(layout, A)
    sizes = tuple(len(A.domains[s]) for s in A.vocabulary.sorts)
    return (sizes, tuple(int(v) for v in SymmetryGroup(layout).canonical(vals)))


# -- enumeration ----------------------------------------------------------------

def standard_domains(vocabulary: Vocabulary, sizes: Mapping[str, int] | int) -> dict:
    """Integer atoms numbered consecutively across sorts in declaration order."""
    if isinstance(sizes, int):
        if len(vocabulary.sorts) != 1:
            raise InputError("a single size needs a single-sorted vocabulary")
        sizes = {vocabulary.sorts[0]: sizes}
    doms = {}
    nxt = 0
    for s in vocabulary.sorts:
        n = sizes.get(s, 0)
        if n < 0:
            raise InputError("sizes must be non-negative")
        doms[s] = tuple(range(nxt, nxt + n))
        nxt += n
    return doms


def enumerate_structures(tau: Vocabulary, sizes, up_to_iso: bool = False,
                         cap: int | None = None) -> Iterator[Structure]:
    """Every tau-structure over the standard domains, in cell-lexicographic order.

    With ``up_to_iso`` only the lexicographically least member of each
    isomorphism class is produced.
    """
    for layout, vals, _ in enumerate_vectors(tau, sizes, up_to_iso, cap):
        yield layout.build(vals)


def enumerate_vectors(tau: Vocabulary, sizes, up_to_iso: bool = False, cap: int | None = None):
    """Yield ``(layout, vals, orbit_size)``; orbit_size is 1 unless up_to_iso."""
    if cap is None:
        cap = default_cap()
    layout = Layout(tau, standard_domains(tau, sizes))
    total = layout.total()
    if total > cap:
        raise ResourceCapExceeded(f"enumeration of {total} structures", cap)
    group = SymmetryGroup(layout) if up_to_iso else None
    if group is not None:
        order = len(group.actions(cap))
    for combo in itertools.product(*layout.choices):
        vals = list(combo)
        if group is None:
            yield layout, vals, 1
            continue
        leader, stab = group.classify(vals)
        if leader:
            yield layout, vals, order // stab


# -- isomorphism ----------------------------------------------------------------

def _atom_invariants(A: Structure) -> dict:
    inv = {a: [] for a in A.atoms()}
    voc = A.vocabulary
    for r, prof in voc.relations:
        counts = {a: [0] * (len(prof) + 1) for a in A.atoms()}
        for t in A.relations[r]:
            for i, a in enumerate(t):
                counts[a][i] += 1
            if len(set(t)) == 1 and t:
                counts[t[0]][len(prof)] += 1
        for a in inv:
            inv[a].append(tuple(counts[a]))
    for f, args, _ in voc.functions:
        pre = {a: 0 for a in A.atoms()}
        for v in A.functions[f].values():
            pre[v] += 1
        for a in inv:
            inv[a].append(pre[a])
    for c, _ in voc.constants:
        for a in inv:
            inv[a].append(A.constants[c] == a)
    return {a: (A.sort_of(a), tuple(v)) for a, v in inv.items()}


def are_isomorphic(A: Structure, B: Structure) -> Embedding | None:
    """Lexicographically least isomorphism A -> B, or None.

    Atoms of A are mapped in their canonical order and candidates in B are
    tried in B's order, so the first complete map found is the least one.
    """
    if A.vocabulary != B.vocabulary:
        raise VocabularyMismatch("structures have different vocabularies")
    voc = A.vocabulary
    for s in voc.sorts:
        if len(A.domains[s]) != len(B.domains[s]):
            return None
    inv_a = _atom_invariants(A)
    inv_b = _atom_invariants(B)
    if sorted(map(repr, inv_a.values())) != sorted(map(repr, inv_b.values())):
        return None
    atoms = A.atoms()
    # constants are forced; put them first so contradictions surface early
    forced = {}
    for c, _ in voc.constants:
        a, b = A.constants[c], B.constants[c]
        if forced.get(a, b) != b:
            return None
        forced[a] = b
    if len(set(forced.values())) != len(forced):
        return None
    facts = _local_facts(A)
    facts_b = _local_facts(B)
    mapping: dict = {}
    used: set = set()

    def consistent(a) -> bool:
        for kind, name, t, v in facts[a]:
            if any(x not in mapping for x in t) or (kind == "fun" and v not in mapping):
                continue
            img = tuple(mapping[x] for x in t)
            if kind == "rel":
                if img not in B.relations[name]:
                    return False
            elif B.functions[name][img] != mapping[v]:
                return False
        for kind, name, t, v in facts_b.get(mapping[a], ()):
            # relation tuples of B among mapped atoms must come from A
            if kind != "rel":
                continue
            back = _preimage(mapping, t)
            if back is not None and back not in A.relations[name]:
                return False
        return True

    inverse: dict = {}

    def _preimage(_m, t):
        out = []
        for x in t:
            if x not in inverse:
                return None
            out.append(inverse[x])
        return tuple(out)

    def solve(i: int) -> bool:
        if i == len(atoms):
            return True
        a = atoms[i]
        s = A.sort_of(a)
        cands = [forced[a]] if a in forced else B.domains[s]
        for b in cands:
            if b in used or inv_b[b] != inv_a[a]:
                continue
            if a not in forced and b in forced.values():
                continue
            mapping[a] = b
            inverse[b] = a
            used.add(b)
            if consistent(a) and solve(i + 1):
                return True
            del mapping[a]
            del inverse[b]
            used.discard(b)
        return False

    if not solve(0):
        return None
    return Embedding({s: {a: mapping[a] for a in A.domains[s]} for s in voc.sorts})


def _local_facts(A: Structure) -> dict:
    """For each atom, the relation tuples and function entries that mention it."""
    facts = {a: [] for a in A.atoms()}
    for r, _ in A.vocabulary.relations:
        for t in A.relations[r]:
            for a in set(t):
                facts[a].append(("rel", r, t, None))
    for f, _, _ in A.vocabulary.functions:
        for k, v in A.functions[f].items():
            for a in set(k) | {v}:
                facts[a].append(("fun", f, k, v))
    return facts
