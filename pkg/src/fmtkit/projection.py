"""Sigma, Pi and Delta classes given by (bounded) projections of model classes."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .errors import (
    BoundMissing,
    InconsistentDelta,
    InputError,
    NotSubvocabulary,
    ResourceCapExceeded,
    VocabularyMismatch,
)
from .formula import Formula, conj, parse, rename, to_text
from .parallel import ordered_map
from .search import CellSearch, automorphism_transpositions
from .semantics import _checked, evaluate, fresh_atoms
from .structures import Layout, Structure, Vocabulary, reduct

# -- bounding functions -----------------------------------------------------------

_EXPONENT_LIMIT = 1 << 20


def _exp2(n: int) -> int:
    if n > _EXPONENT_LIMIT:
        raise ResourceCapExceeded(f"2^{n}", _EXPONENT_LIMIT)
    return 1 << n


_PRIMITIVES = {
    "id": lambda n: n,
    "exp2": _exp2,
    "double": lambda n: 2 * n,
    "succ": lambda n: n + 1,
}


@dataclass(frozen=True)
class BoundingFunction:
    """A non-decreasing function on naturals.

    ``parts`` lists primitive names applied right to left (``("exp2", "id")``
    is exp2 after id).  ``table`` gives explicit values instead; arguments
    outside the table raise BoundMissing.  With ``chain = k > 0`` the value
    is ``n + G(n) + ... + G^(k-1)(n)`` for G the composed primitives, the
    total size of a k-link chain of witnesses.
    """

    name: str
    parts: tuple[str, ...] = ()
    table: tuple[tuple[int, int], ...] = ()
    chain: int = 0

    def __post_init__(self):
        for p in self.parts:
            if p not in _PRIMITIVES:
                raise InputError(f"unknown bounding function {p!r}")
        if not self.parts and not self.table:
            raise InputError("a bounding function needs primitives or a table")
        if self.table:
            xs = sorted(self.table)
            for (_, a), (_, b) in zip(xs, xs[1:]):
                if b < a:
                    raise InputError(f"bounding table {self.name!r} is decreasing")

    @classmethod
    def named(cls, name: str) -> "BoundingFunction":
        """``id``, ``exp2``, ``exp2^3`` or compositions like ``exp2.double``."""
        parts = []
        for chunk in name.split("."):
            base, _, power = chunk.partition("^")
            times = int(power) if power else 1
            if times < 0:
                raise InputError("iteration count must be non-negative")
            parts.extend([base] * times)
        return cls(name, tuple(parts) or ("id",))

    @classmethod
    def from_table(cls, table: Mapping[int, int], name: str = "table") -> "BoundingFunction":
        return cls(name, (), tuple(sorted((int(k), int(v)) for k, v in table.items())))

    def __call__(self, n: int) -> int:
        if self.table:
            value = dict(self.table).get(n)
            if value is None:
                raise BoundMissing(f"bounding table {self.name!r} has no entry for {n}")
            return value
        if self.chain:
            total = n
            x = n
            for _ in range(self.chain - 1):
                x = self._apply(x)
                total += x
            return total
        return self._apply(n)

    def _apply(self, n: int) -> int:
        for p in reversed(self.parts):
            n = _PRIMITIVES[p](n)
        return n

    def chain_total(self, k: int) -> "BoundingFunction":
        return BoundingFunction(f"chain({self.name},{k})", self.parts, (), k)

    def iterate(self, k: int) -> "BoundingFunction":
        if self.table:
            raise InputError("cannot iterate a table")
        return BoundingFunction(f"({self.name})^{k}", self.parts * k or ("id",))

    def compose(self, other: "BoundingFunction") -> "BoundingFunction":
        return BoundingFunction(f"{self.name}.{other.name}", self.parts + other.parts)

    def is_non_decreasing(self, upto: int = 3) -> bool:
        values = [self(n) for n in range(upto + 1)]
        return all(a <= b for a, b in zip(values, values[1:]))

    def to_dict(self) -> dict:
        if self.table:
            return {"table": {str(k): v for k, v in self.table}, "name": self.name}
        if self.chain:
            return {"function": ".".join(self.parts), "chain": self.chain}
        return {"function": self.name}


# -- projection specs -------------------------------------------------------------

@dataclass(frozen=True)
class ProjectionSpec:
    """``(base, extended, phi, bound)``: witnesses are phi-models of the
    extended vocabulary whose total size is at most ``bound(|A|)``.

    An unbounded spec must carry ``cap``, a hard limit on witness size.
    """

    base: Vocabulary
    extended: Vocabulary
    phi: Formula
    bound: BoundingFunction | None = None
    cap: int | None = None
    name: str = ""
    new_sorts: tuple[str, ...] = field(init=False, default=())

    def __post_init__(self):
        if not self.base.is_subvocabulary_of(self.extended):
            raise NotSubvocabulary("base vocabulary must be contained in the extended one")
        a = _checked(self.phi, self.extended)
        if a.free or a.free_so:
            raise InputError("projection formula must be a sentence")
        if self.bound is not None and not self.bound.table and not self.bound.is_non_decreasing():
            raise InputError("bound must be non-decreasing")
        object.__setattr__(self, "new_sorts",
                           tuple(s for s in self.extended.sorts if s not in self.base.sorts))

    def limit(self, size: int) -> int:
        if self.bound is not None:
            return self.bound(size)
        if self.cap is not None:
            return self.cap
        raise BoundMissing("projection spec has neither a bound nor a cap")

    def to_dict(self) -> dict:
        if self.bound is not None:
            bound = self.bound.to_dict()
        elif self.cap is not None:
            bound = {"unbounded": True, "cap": self.cap}
        else:
            bound = None
        return {
            "name": self.name,
            "base": self.base.to_dict(),
            "extended": self.extended.to_dict(),
            "formula": to_text(self.phi),
            "bound": bound,
        }

    @classmethod
    def from_dict(cls, data: Mapping, root: Path | None = None) -> "ProjectionSpec":
        try:
            base = Vocabulary.from_dict(data["base"])
            extended = Vocabulary.from_dict(data["extended"])
        except KeyError as exc:
            raise InputError(f"projection spec lacks {exc.args[0]!r}") from None
        if "formula" in data:
            text = data["formula"]
        elif "formula_file" in data:
            path = Path(data["formula_file"])
            if root is not None and not path.is_absolute():
                path = root / path
            try:
                text = path.read_text(encoding="utf-8")
            except OSError as exc:
                raise InputError(f"cannot read formula file: {exc}") from None
        else:
            raise InputError("projection spec needs 'formula' or 'formula_file'")
        bound_doc = data.get("bound")
        bound = None
        cap = None
        if isinstance(bound_doc, Mapping):
            if "function" in bound_doc:
                bound = BoundingFunction.named(bound_doc["function"])
                if bound_doc.get("chain"):
                    bound = bound.chain_total(int(bound_doc["chain"]))
            elif "table" in bound_doc:
                bound = BoundingFunction.from_table(bound_doc["table"], bound_doc.get("name", "table"))
            elif bound_doc.get("unbounded"):
                if "cap" not in bound_doc:
                    raise BoundMissing("an unbounded spec needs an explicit cap")
                cap = int(bound_doc["cap"])
            else:
                raise InputError("unrecognized bound")
        elif bound_doc is not None:
            raise InputError("bound must be an object")
        return cls(base, extended, parse(text, extended), bound, cap, data.get("name", ""))

    @classmethod
    def load(cls, path: str | Path) -> "ProjectionSpec":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot load projection spec: {exc}") from None
        return cls.from_dict(data, root=path.parent)


# -- membership -------------------------------------------------------------------

def _new_size_vectors(k: int, budget: int):
    """Size vectors of length k with sum <= budget: by total, then lexicographic."""
    for total in range(budget + 1):
        for vec in itertools.product(range(total + 1), repeat=k):
            if sum(vec) == total:
                yield vec


def in_sigma_projection(A: Structure, spec: ProjectionSpec, cap: int | None = None) -> Structure | None:
    """Least witness B |= phi with reduct(B, base) = A and |B| <= bound(|A|)."""
    if A.vocabulary != spec.base:
        raise VocabularyMismatch("structure is not over the spec's base vocabulary")
    limit = spec.limit(A.size)
    if A.size > limit:
        return None
    tau = spec.extended
    base_symbols = set(spec.base.symbols())
    for vec in _new_size_vectors(len(spec.new_sorts), limit - A.size):
        domains = dict(A.domains)
        used = set(A.atoms())
        for s, k in zip(spec.new_sorts, vec):
            new = fresh_atoms(used, s, k)
            used.update(new)
            domains[s] = tuple(new)
        layout = Layout(tau, domains, fixed_symbols=base_symbols)
        syms = automorphism_transpositions(layout, A, sorts_free=spec.new_sorts,
                                           base_sorts=spec.base.sorts)
        search = CellSearch(layout, spec.phi, base=A, symmetries=syms, cap=cap)
        vals = search.first()
        if vals is not None:
            B = layout.build(vals, base=A)
            if reduct(B, spec.base) != A or not evaluate(spec.phi, B):
                raise AssertionError("projection search returned an invalid witness")
            return B
    return None


def in_delta(A: Structure, sigma: ProjectionSpec, pi: ProjectionSpec, cap: int | None = None) -> bool:
    """Membership in the class presented by a Sigma side and a Pi side.

    Exactly one side must have a witness; otherwise the pair is not a Delta
    presentation on this input.
    """
    if sigma.base != pi.base:
        raise VocabularyMismatch("sigma and pi specs have different base vocabularies")
    s = in_sigma_projection(A, sigma, cap) is not None
    p = in_sigma_projection(A, pi, cap) is not None
    if s == p:
        raise InconsistentDelta(s, p)
    return s


# -- definably bounding functions -------------------------------------------------

TWO_SORTS = Vocabulary(("A", "B"))


def two_sorted(a: int, b: int) -> Structure:
    return Structure(TWO_SORTS, {"A": tuple(range(a)), "B": tuple(range(a, a + b))})


@dataclass
class BoundingReport:
    function: str
    spec: str
    max_a: int
    max_b: int
    checked: int
    passed: bool
    counterexample: dict | None

    def to_dict(self) -> dict:
        return {
            "function": self.function,
            "spec": self.spec,
            "max_a": self.max_a,
            "max_b": self.max_b,
            "checked": self.checked,
            "passed": self.passed,
            "counterexample": self.counterexample,
        }


def _bounding_case(args):
    spec, a, b, cap = args
    return in_sigma_projection(two_sorted(a, b), spec, cap) is not None


def verify_bounding(F: BoundingFunction, spec: ProjectionSpec, max_a: int, max_b: int,
                    min_size: int = 1, workers: int | None = 1, cap: int | None = None) -> BoundingReport:
    """Check (a witness exists) <=> b <= F(a) for all min_size <= a <= max_a, min_size <= b <= max_b.

    Pairs are ordered lexicographically by (a, b); the first mismatch is the
    reported counterexample.
    """
    if spec.base != TWO_SORTS:
        raise VocabularyMismatch("verify_bounding needs the two-bare-sorts base vocabulary")
    pairs = [(a, b) for a in range(min_size, max_a + 1) for b in range(min_size, max_b + 1)]
    found = ordered_map(_bounding_case, [(spec, a, b, cap) for a, b in pairs], workers)
    counter = None
    for (a, b), ok in zip(pairs, found):
        expected = b <= F(a)
        if ok != expected:
            counter = {"a": a, "b": b, "witness_found": ok, "within_bound": expected}
            break
    return BoundingReport(F.name, spec.name, max_a, max_b, len(pairs), counter is None, counter)


# -- standard specs ---------------------------------------------------------------

def alephbound_spec() -> ProjectionSpec:
    """|B| <= 2^|A| via an extensional relation E between the sorts."""
    tau = TWO_SORTS.extend(relations={"E": ("A", "B")})
    phi = parse("forall b:B b2:B . (forall a:A . E(a,b) <-> E(a,b2)) -> b = b2", tau)
    return ProjectionSpec(TWO_SORTS, tau, phi, BoundingFunction.named("id"), name="ALEPHBOUND")


def surjection_spec() -> ProjectionSpec:
    """|B| <= |A| via a surjection f from A onto B."""
    tau = TWO_SORTS.extend(functions={"f": (("A",), "B")})
    phi = parse("forall b:B . exists a:A . f(a) = b", tau)
    return ProjectionSpec(TWO_SORTS, tau, phi, BoundingFunction.named("id"), name="SURJECTION")


def chain_spec(spec: ProjectionSpec, n: int, bound: BoundingFunction | None = None) -> ProjectionSpec:
    """Iterate a two-sorted bounding spec by chaining n copies through new sorts.

    Copy i relates sort C(i-1) to C(i), with C0 = A and Cn = B, and uses its
    own renamed symbols.  If spec defines F then the chain defines F^n.
    """
    if spec.base != TWO_SORTS:
        raise VocabularyMismatch("chaining needs the two-bare-sorts base vocabulary")
    if n < 1:
        raise InputError("chain length must be positive")
    if spec.new_sorts:
        raise InputError("chaining specs that add sorts is not supported")
    sorts = ["A"] + [f"C{i}" for i in range(1, n)] + ["B"]
    own = [s for s in spec.extended.symbols()]
    tau = Vocabulary(tuple(["A", "B"] + sorts[1:-1]))
    parts = []
    relations = {}
    functions = {}
    constants = {}
    for i in range(n):
        smap = {"A": sorts[i], "B": sorts[i + 1]}
        symmap = {name: f"{name}{i + 1}" if n > 1 else name for name in own}
        for name in own:
            info = spec.extended.profile(name)
            if info[0] == "rel":
                relations[symmap[name]] = tuple(smap.get(s, s) for s in info[1])
            elif info[0] == "fun":
                functions[symmap[name]] = (tuple(smap.get(s, s) for s in info[1]), smap.get(info[2], info[2]))
            else:
                constants[symmap[name]] = smap.get(info[1], info[1])
        parts.append(rename(spec.phi, smap, symmap))
    tau = tau.extend(relations=relations, functions=functions, constants=constants)
    if bound is None:
        bound = BoundingFunction.named("id")
    return ProjectionSpec(TWO_SORTS, tau, conj(parts), bound, name=f"{spec.name}^{n}")
