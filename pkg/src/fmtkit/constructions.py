"""Registry of concrete formulas and constructions, each with an exhaustive checker.

Every entry pairs a claimed characterization (decided through the formula
evaluator or the projection search) with an independent oracle from
``fmtkit.oracles``.  ``verify`` runs the comparison over all small structures
and returns a ``Report``; the first disagreement in enumeration order is
kept as the counterexample.
"""
from __future__ import annotations

import itertools
import json
import os
from pathlib import Path
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

from . import oracles
from .config import default_cap
from .errors import InputError, ResourceCapExceeded, UnknownConstruction
from .evaluator import LayoutInterp, StructureInterp, compile_formula
from .formula import (
    And,
    Const,
    Eq,
    Exists,
    Forall,
    Formula,
    Iff,
    Imp,
    Not,
    Or,
    Rel,
    Var,
    parse,
)
from .hf import (
    HfSet,
    TransitiveModel,
    kuratowski_pair,
    rho,
    to_text,
    transitive_subsets,
    trcl,
    von_neumann,
)
from .parallel import default_workers, ordered_map
from .projection import (
    BoundingFunction,
    ProjectionSpec,
    alephbound_spec,
    in_sigma_projection,
    verify_bounding,
)
from .semantics import evaluate, skolem_axioms, skolem_expand
from .setformula import (
    SAnd,
    SEq,
    SExists,
    SForall,
    SIff,
    SImp,
    SIn,
    SNot,
    SOr,
    Fresh,
    SetFormula,
    cd_text,
    is_r_correct,
    pair_text,
    parse_set_formula,
    pwst_text,
)
from .structures import Layout, Structure, Vocabulary, are_isomorphic, enumerate_vectors, standard_domains

E_VOCAB = Vocabulary.make(relations={"E": ("s", "s")})
P_VOCAB = Vocabulary.make(relations={"P": ("s",)})


# -- reports ----------------------------------------------------------------------

@dataclass
class Report:
    name: str
    scale: int
    checked: int = 0
    per_size: dict = field(default_factory=dict)
    classes: int = 0
    passed: bool = True
    counterexample: dict | None = None
    observations: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "scale": self.scale,
            "checked": self.checked,
            "per_size": {str(k): v for k, v in sorted(self.per_size.items())},
            "classes": self.classes,
            "passed": self.passed,
            "counterexample": self.counterexample,
            "observations": self.observations,
        }

    @classmethod
    def from_dict(cls, data) -> "Report":
        return cls(
            name=data["name"],
            scale=int(data["scale"]),
            checked=int(data["checked"]),
            per_size={int(k): v for k, v in data.get("per_size", {}).items()},
            classes=int(data.get("classes", 0)),
            passed=bool(data["passed"]),
            counterexample=data.get("counterexample"),
            observations=dict(data.get("observations", {})),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Report":
        return cls.from_dict(json.loads(text))

    def record(self, size: int, weight: int, claimed, oracle, structure: Structure | None = None,
               extra: dict | None = None):
        self.checked += weight
        self.per_size[size] = self.per_size.get(size, 0) + weight
        self.classes += 1
        if claimed != oracle and self.counterexample is None:
            self.passed = False
            self.counterexample = {"size": size, "claimed": claimed, "oracle": oracle}
            if structure is not None:
                self.counterexample["structure"] = _structure_doc(structure)
            if extra:
                self.counterexample.update(extra)

    def fail(self, reason: str, **details):
        self.passed = False
        if self.counterexample is None:
            self.counterexample = {"reason": reason, **details}


def _structure_doc(A: Structure) -> dict:
    doc = A.to_dict()
    for key in ("relations", "functions"):
        doc[key] = {k: doc[key][k] for k in sorted(doc[key])}
    return doc


# -- set formulas in the E-language -----------------------------------------------

def set_to_formula(phi: SetFormula, sort: str = "s", relation: str = "E",
                   constants=frozenset()) -> Formula:
    """Translate an ∈-formula: x in y becomes E(x,y), bounded quantifiers
    become guarded ones.  Free names listed in ``constants`` become constants."""

    def term(name):
        return Const(name) if name in constants else Var(name, sort)

    def go(p):
        if isinstance(p, SIn):
            return Rel(relation, (term(p.left), term(p.right)))
        if isinstance(p, SEq):
            return Eq(term(p.left), term(p.right))
        if isinstance(p, SNot):
            return Not(go(p.body))
        for s_cls, f_cls in ((SAnd, And), (SOr, Or), (SImp, Imp), (SIff, Iff)):
            if isinstance(p, s_cls):
                return f_cls(go(p.left), go(p.right))
        if isinstance(p, (SForall, SExists)):
            if p.var in constants:
                raise InputError(f"bound variable {p.var!r} shadows a constant")
            body = go(p.body)
            if p.bound is not None:
                guard = Rel(relation, (Var(p.var, sort), term(p.bound)))
                body = Imp(guard, body) if isinstance(p, SForall) else And(guard, body)
            return (Forall if isinstance(p, SForall) else Exists)(p.var, sort, body)
        raise TypeError(f"not a set formula: {p!r}")

    return go(phi)


def _parse_set(text: str, **kw) -> Formula:
    return set_to_formula(parse_set_formula(text), **kw)


# -- fixed formulas ---------------------------------------------------------------

EXT_TEXT = "forall x y . (forall z . E(z,x) <-> E(z,y)) -> x = y"
WF_TEXT = "WF x y (E(x,y))"
HARTIG_TEXT = "I x y (P(x))(!P(y))"
PI_TEXT = "(exists x . P(x)) & forall x . P(x) -> exists y . P(y) & E(y,x)"
SIGMA_WF_TEXT = ("forall a:s b:s . E(a,b) -> ((forall x:X . R(a,x) -> R(b,x))"
                 " & !(I y:X z:X (R(a,y))(R(b,z))))")
PWST_PHI_TEXT = ("forall2 Z:(s) . (exists v . E(v,y) & forall w . E(w,v) <-> Z(w))"
                 " <-> (forall v . Z(v) -> E(v,x))")
CD_SENTENCE_BODY = "forall x . E(x,al) -> !(I y z (E(y,x))(E(z,al)))"


@lru_cache(maxsize=None)
def q_empty_formula() -> Formula:
    return parse(f"({EXT_TEXT}) & {WF_TEXT}", E_VOCAB)


@lru_cache(maxsize=None)
def hartig_formula() -> Formula:
    return parse(HARTIG_TEXT, P_VOCAB)


@lru_cache(maxsize=None)
def cd_formula() -> Formula:
    """Cd(al) in the E-language, free variable al."""
    return _parse_set(cd_text("al"))


@lru_cache(maxsize=None)
def cd_sentence() -> Formula:
    return Forall("al", "s", Imp(cd_formula(), parse(CD_SENTENCE_BODY, E_VOCAB, free={"al": "s"})))


@lru_cache(maxsize=None)
def pwst_phi() -> Formula:
    return parse(PWST_PHI_TEXT, E_VOCAB, free={"x": "s", "y": "s"})


@lru_cache(maxsize=None)
def pwst_agreement() -> Formula:
    body = Iff(_parse_set(pwst_text("x", "y")), pwst_phi())
    return Forall("x", "s", Forall("y", "s", body))


@lru_cache(maxsize=None)
def lindstrom_specs() -> tuple[ProjectionSpec, ProjectionSpec]:
    sigma_voc = E_VOCAB.extend(sorts=("X",), relations={"R": ("s", "X")})
    sigma = ProjectionSpec(E_VOCAB, sigma_voc, parse(SIGMA_WF_TEXT, sigma_voc),
                           BoundingFunction.named("double"), name="LINDSTROM_WF")
    pi_voc = E_VOCAB.extend(relations={"P": ("s",)})
    pi = ProjectionSpec(E_VOCAB, pi_voc, parse(PI_TEXT, pi_voc), BoundingFunction.named("id"),
                        name="PI_SIDE")
    return sigma, pi


PHI_VOCAB = E_VOCAB.extend(sorts=("b",), relations={"L": ("b", "b")}, functions={"f": (("s",), "b")})

_PHI_ORDER = ("(forall u:b . !L(u,u)) & (forall u:b v:b w:b . L(u,v) & L(v,w) -> L(u,w))"
              " & (forall u:b v:b . L(u,v) | u = v | L(v,u))")
_PHI_MONOTONE = "(forall a:s a2:s . E(a,a2) -> L(f(a),f(a2)))"
_PHI_SUCCESSOR = ("(forall a:s . forall u:b . L(u,f(a)) -> exists a2:s . E(a2,a)"
                  " & (u = f(a2) | L(u,f(a2))))")
_PHI_COFINAL = "(forall u:b . exists a:s . u = f(a) | L(u,f(a)))"


def _inf(t: str, k: int) -> str:
    # t has infinitely many predecessors: dropping one leaves as many
    return f"(forall x{k}:b . L(x{k},{t}) -> I y{k}:b z{k}:b (L(y{k},{t}) & y{k} != x{k})(L(z{k},{t})))"


def _like(t: str, k: int) -> str:
    return f"(forall w{k}:b . L(w{k},{t}) -> !(I y{k}:b z{k}:b (L(y{k},{t}))(L(z{k},w{k}))))"


@lru_cache(maxsize=None)
def phi_fin_spec() -> ProjectionSpec:
    text = " & ".join([f"({_PHI_ORDER})", _PHI_MONOTONE, _PHI_SUCCESSOR, _PHI_COFINAL])
    return ProjectionSpec(E_VOCAB, PHI_VOCAB, parse(text, PHI_VOCAB), BoundingFunction.named("double"),
                          name="PHI_FIN")


@lru_cache(maxsize=None)
def phi_paper_spec() -> ProjectionSpec:
    clauses = [
        f"({_PHI_ORDER})",
        "(forall u:b . !(I x:b y:b (L(x,u))(y = y)))",
        f"(forall u:b . {_inf('u', 1)} -> exists v:b . (L(v,u) | v = u)"
        f" & (I x:b y:b (L(x,u))(L(y,v))) & {_like('v', 2)})",
        _PHI_MONOTONE,
        f"(forall a:s . {_inf('f(a)', 3)} & {_like('f(a)', 4)})",
        _PHI_SUCCESSOR,
        _PHI_COFINAL,
    ]
    return ProjectionSpec(E_VOCAB, PHI_VOCAB, parse(" & ".join(clauses), PHI_VOCAB),
                          BoundingFunction.named("succ.double"), name="PHI_PAPER_FINITE")


# -- registry ---------------------------------------------------------------------

@dataclass
class Construction:
    name: str
    anchor: str
    claim: str
    default_scale: int
    run: Callable[[int, int], Report]
    vocabulary: Vocabulary | None = None
    formulas: Callable[[], dict] = dict
    notes: str = ""


REGISTRY: dict[str, Construction] = {}


def status_path() -> Path:
    """Where verification outcomes are remembered between runs."""
    root = os.environ.get("FMTKIT_STATE_DIR")
    if root:
        return Path(root) / "status.json"
    cache = os.environ.get("XDG_CACHE_HOME") or Path.home() / ".cache"
    return Path(cache) / "fmtkit" / "status.json"


def _load_status() -> dict:
    try:
        data = json.loads(status_path().read_text(encoding="utf-8"))
    except (OSError, ValueError):
        return {}
    return data if isinstance(data, dict) else {}


def _save_status(name: str, report: "Report"):
    data = _load_status()
    data[name] = {"status": "pass" if report.passed else "fail", "scale": report.scale}
    path = status_path()
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(data, sort_keys=True, indent=2), encoding="utf-8")
    except OSError:
        pass  # the status file is a convenience only


def _register(c: Construction):
    REGISTRY[c.name] = c
    return c


def list_constructions() -> list[dict]:
    status = _load_status()
    rows = []
    for c in REGISTRY.values():
        last = status.get(c.name)
        rows.append({
            "name": c.name,
            "anchor": c.anchor,
            "claim": c.claim,
            "default_scale": c.default_scale,
            "status": last["status"] if isinstance(last, dict) and "status" in last else "unverified",
            "verified_scale": last.get("scale") if isinstance(last, dict) else None,
        })
    return rows


def get(name: str) -> Construction:
    try:
        return REGISTRY[name]
    except KeyError:
        raise UnknownConstruction(name) from None


def verify(name: str, max_size: int | None = None, workers: int | None = None) -> Report:
    c = get(name)
    scale = c.default_scale if max_size is None else max_size
    if scale < 0:
        raise InputError("max size must be non-negative")
    if workers is None:
        workers = default_workers()
    report = c.run(scale, workers)
    _save_status(name, report)
    return report


def registry_formulas() -> dict[str, tuple[Formula, Vocabulary]]:
    """Every fixed formula of the registry with its vocabulary, keyed by entry and role.

    A role maps either to a formula over the entry's vocabulary or to a
    ``(formula, vocabulary)`` pair.
    """
    out = {}
    for c in REGISTRY.values():
        for role, value in c.formulas().items():
            if not isinstance(value, tuple):
                value = (value, c.vocabulary)
            out[f"{c.name}:{role}"] = value
    return out


# -- sweeping helpers -------------------------------------------------------------

def _classes(vocabulary: Vocabulary, n: int, up_to_iso: bool = True):
    return [(layout.build(vals), orbit) for layout, vals, orbit in enumerate_vectors(vocabulary, n, up_to_iso)]


def _sweep(report: Report, vocabulary: Vocabulary, sizes, case, workers: int, tag: str = ""):
    """Run ``case`` on one representative per isomorphism class.

    ``case`` returns ``(claimed, oracle, extra)``; ``extra`` is merged into
    a counterexample and otherwise handed back to the caller.
    """
    extras = []
    for n in sizes:
        items = _classes(vocabulary, n)
        results = ordered_map(case, [A for A, _ in items], workers)
        for (A, orbit), (claimed, oracle, extra) in zip(items, results):
            report.record(n, orbit, claimed, oracle, A, dict(extra or {}, **({"case": tag} if tag else {})))
            extras.append((A, orbit, claimed, oracle, extra))
    return extras


def _edges(A: Structure) -> tuple[tuple, set]:
    return oracles.single_domain(A), oracles.edges_of(A)


# -- HARTIG_HALF ------------------------------------------------------------------

def _case_hartig(A):
    return evaluate(hartig_formula(), A), oracles.equal_split(A), None


def _run_hartig(scale, workers):
    report = Report("HARTIG_HALF", scale)
    _sweep(report, P_VOCAB, range(scale + 1), _case_hartig, workers)
    return report


_register(Construction(
    "HARTIG_HALF", "Härtig quantifier: a unary predicate and its complement of equal size",
    "I x y (P(x))(!P(y)) holds iff |P| = |A \\ P|", 6, _run_hartig, P_VOCAB,
    lambda: {"sentence": hartig_formula()}))


# -- Q_EMPTY ----------------------------------------------------------------------

_CHUNK = 4096


def _q_empty_chunk(args):
    n, lo, hi = args
    layout = Layout(E_VOCAB, standard_domains(E_VOCAB, n))
    vals: list = [None] * len(layout)
    run = compile_formula(q_empty_formula(), LayoutInterp(layout, vals))
    atoms = layout.domains["s"]
    cells = [args for _, _, args in layout.cells]
    held = 0
    counter = None
    for combo in itertools.islice(itertools.product(*layout.choices), lo, hi):
        vals[:] = combo
        claimed = bool(run({}))
        edges = {cells[i] for i, v in enumerate(combo) if v}
        oracle = oracles.collapse_succeeds(atoms, edges)
        held += claimed
        if claimed != oracle and counter is None:
            counter = (list(combo), claimed, oracle)
    return hi - lo, held, counter


def _run_q_empty(scale, workers):
    report = Report("Q_EMPTY", scale)
    held = 0
    cap = default_cap()
    for n in range(scale + 1):
        total = 2 ** (n * n)
        if total > cap:
            raise ResourceCapExceeded(f"enumeration of {total} structures", cap)
        chunks = [(n, lo, min(lo + _CHUNK, total)) for lo in range(0, total, _CHUNK)]
        for count, h, counter in ordered_map(_q_empty_chunk, chunks, workers, chunksize=1):
            report.checked += count
            report.per_size[n] = report.per_size.get(n, 0) + count
            report.classes += count
            held += h
            if counter is not None and report.counterexample is None:
                vals, claimed, oracle = counter
                layout = Layout(E_VOCAB, standard_domains(E_VOCAB, n))
                report.passed = False
                report.counterexample = {"size": n, "claimed": claimed, "oracle": oracle,
                                         "structure": _structure_doc(layout.build(vals))}
    report.observations["collapsing"] = held
    return report


_register(Construction(
    "Q_EMPTY", "well-founded extensional relations and their Mostowski collapse",
    "EXT & WF x y (E(x,y)) holds iff the Mostowski collapse succeeds", 4, _run_q_empty, E_VOCAB,
    lambda: {"sentence": q_empty_formula()},
    "checks every relation, not only isomorphism classes"))


# -- LINDSTROM_WF and PI_SIDE -----------------------------------------------------

def _case_lindstrom(A):
    sigma, pi = lindstrom_specs()
    s = in_sigma_projection(A, sigma) is not None
    p = in_sigma_projection(A, pi) is not None
    atoms, edges = _edges(A)
    acyclic = oracles.acyclic(atoms, edges)
    # report a broken presentation as a disagreement with the oracle
    claimed = s if s != p else None
    return claimed, acyclic, {"sigma": s, "pi": p}


def _run_lindstrom(scale, workers):
    report = Report("LINDSTROM_WF", scale)
    _sweep(report, E_VOCAB, range(scale + 1), _case_lindstrom, workers)
    return report


def _case_pi(A):
    _, pi = lindstrom_specs()
    atoms, edges = _edges(A)
    return in_sigma_projection(A, pi) is not None, not oracles.acyclic(atoms, edges), None


def _run_pi(scale, workers):
    report = Report("PI_SIDE", scale)
    _sweep(report, E_VOCAB, range(scale + 1), _case_pi, workers)
    return report


_register(Construction(
    "LINDSTROM_WF", "well-foundedness through strictly growing subsets of a new sort",
    "exactly one side has a witness, and the sigma side (|X| <= |A|) succeeds iff E is acyclic",
    4, _run_lindstrom, lindstrom_specs()[0].extended,
    lambda: {"sigma": lindstrom_specs()[0].phi,
             "pi": (lindstrom_specs()[1].phi, lindstrom_specs()[1].extended)}))

_register(Construction(
    "PI_SIDE", "ill-foundedness through a nonempty subset without a least element",
    "a nonempty P in which every element has an E-predecessor in P exists iff E has a cycle",
    4, _run_pi, lindstrom_specs()[1].extended, lambda: {"pi": lindstrom_specs()[1].phi}))


# -- ALEPHBOUND -------------------------------------------------------------------

def _run_alephbound(scale, workers):
    spec = alephbound_spec()
    max_b = 2 ** scale + 1
    b = verify_bounding(BoundingFunction.named("exp2"), spec, scale, max_b, workers=workers)
    report = Report("ALEPHBOUND", scale, checked=b.checked, classes=b.checked, passed=b.passed)
    report.per_size = {a: max_b for a in range(1, scale + 1)}
    if b.counterexample is not None:
        c = b.counterexample
        report.counterexample = {"a": c["a"], "b": c["b"], "claimed": c["witness_found"],
                                 "oracle": c["within_bound"]}
    for a in range(1, scale + 1):
        if not oracles.within_exponential(a, 2 ** a) or oracles.within_exponential(a, 2 ** a + 1):
            report.fail("oracle inconsistent", a=a)
    report.observations["max_b"] = max_b
    return report


_register(Construction(
    "ALEPHBOUND", "exponential bound defined by an extensional relation between two sorts",
    "a witness E exists iff |B| <= 2^|A| (sizes from 1)", 3, _run_alephbound, alephbound_spec().extended,
    lambda: {"sentence": alephbound_spec().phi}))


# -- CD_SENTENCE ------------------------------------------------------------------

def _case_cd(A):
    atoms, edges = _edges(A)
    q = evaluate(q_empty_formula(), A)
    claimed = q and evaluate(cd_sentence(), A)
    oracle = oracles.in_q(atoms, edges, "Cd")
    return claimed, oracle, {"collapses": oracles.collapse_succeeds(atoms, edges)}


def _run_cd(scale, workers):
    report = Report("CD_SENTENCE", scale)
    rows = _sweep(report, E_VOCAB, range(scale + 1), _case_cd, workers)
    collapsing = sum(orbit for _, orbit, _, _, extra in rows if extra["collapses"])
    correct = sum(orbit for _, orbit, _, oracle, _ in rows if oracle)
    report.observations["collapsing"] = collapsing
    report.observations["cd_correct"] = correct
    report.observations["cd_correctness_automatic"] = collapsing == correct
    if collapsing != correct:
        report.fail("a finite transitive model computed Cd incorrectly")
    return report


_register(Construction(
    "CD_SENTENCE", "cardinals are not equinumerous with any of their members",
    "EXT & WF & (forall al . Cd(al) -> no member of al matches its size) iff the collapse is Cd-correct",
    4, _run_cd, E_VOCAB, lambda: {"sentence": cd_sentence(), "cd": cd_formula()},
    "every finite transitive set is Cd-correct, so both sides reduce to Q_EMPTY"))


# -- PWST_PHI ---------------------------------------------------------------------

def membership_structure(carrier) -> Structure:
    atoms = list(carrier)
    return Structure(E_VOCAB, {"s": atoms}, {"E": [(a, b) for b in atoms for a in b]})


def _case_pwst_phi(M):
    A = membership_structure(M)
    run = compile_formula(pwst_phi(), StructureInterp(A))
    failures = []
    count = 0
    for x in M:
        for y in M:
            count += 1
            claimed = bool(run({"x": x, "y": y}))
            if claimed != oracles.is_power_set(x, y):
                failures.append((to_text(x), to_text(y), claimed))
    return count, failures


def _run_pwst_phi(scale, workers):
    report = Report("PWST_PHI", scale)
    models = [M for M in transitive_subsets(4, max_size=scale)]
    for M, (count, failures) in zip(models, ordered_map(_case_pwst_phi, models, workers)):
        n = len(M)
        report.checked += count
        report.per_size[n] = report.per_size.get(n, 0) + count
        report.classes += 1
        if failures and report.counterexample is None:
            x, y, claimed = failures[0]
            report.passed = False
            report.counterexample = {"model": to_text(M), "x": x, "y": y,
                                     "claimed": claimed, "oracle": not claimed}
    report.observations["models"] = len(models)
    return report


_register(Construction(
    "PWST_PHI", "second-order definition of the true power set",
    "in a transitive M, Phi(x,y) holds iff y is the power set of x", 6, _run_pwst_phi, E_VOCAB,
    lambda: {"phi": pwst_phi()},
    "the formula as printed in the source never mentions x; the corrected version bounds Z by x"))


# -- Q_PWST -----------------------------------------------------------------------

ORDINAL_FOUR = von_neumann(4)


def _case_q_pwst(A):
    atoms, edges = _edges(A)
    q = evaluate(q_empty_formula(), A)
    claimed = q and evaluate(pwst_agreement(), A)
    model = oracles.collapsed_model(atoms, edges)
    oracle = model is not None and is_r_correct(model, "PwSt")
    carrier = to_text(model.carrier) if model is not None else None
    return claimed, oracle, {"carrier": carrier}


def _run_q_pwst(scale, workers):
    report = Report("Q_PWST", scale)
    rows = _sweep(report, E_VOCAB, range(scale + 1), _case_q_pwst, workers)
    bad = sorted({extra["carrier"] for _, _, _, oracle, extra in rows
                  if extra["carrier"] is not None and not oracle})
    report.observations["non_correct_carriers"] = bad
    witness = to_text(ORDINAL_FOUR)
    flagged = any(extra["carrier"] == witness and not claimed and not oracle
                  for _, _, claimed, oracle, extra in rows)
    report.observations["ordinal_four_flagged"] = flagged
    if scale >= 4 and not flagged:
        report.fail("the ordinal 4 was not flagged as power-set incorrect")
    return report


_register(Construction(
    "Q_PWST", "power-set-correct transitive models",
    "EXT & WF & forall x y (PwSt(x,y) <-> Phi(x,y)) iff the collapse is PwSt-correct",
    4, _run_q_pwst, E_VOCAB, lambda: {"agreement": pwst_agreement()}))


# -- PHI_FIN and PHI_PAPER_FINITE -------------------------------------------------

def _case_phi_fin(A):
    atoms, edges = _edges(A)
    B = in_sigma_projection(A, phi_fin_spec())
    extra = {"witness_b": None if B is None else len(B.domains["b"])}
    return B is not None, oracles.acyclic(atoms, edges), extra


def _run_phi_fin(scale, workers):
    report = Report("PHI_FIN", scale)
    rows = _sweep(report, E_VOCAB, range(scale + 1), _case_phi_fin, workers)
    # the least witness uses exactly as many points as the longest E-path has atoms
    for A, _, claimed, _, extra in rows:
        if claimed:
            heights = oracles.rank_function(*_edges(A))
            expected = max(heights.values()) + 1 if heights else 0
            if extra["witness_b"] != expected:
                report.fail("witness size differs from the height", size=A.size,
                            witness=extra["witness_b"], height=expected)
    return report


def _case_phi_paper(A):
    B = in_sigma_projection(A, phi_paper_spec())
    extra = {"witness_b": None if B is None else len(B.domains["b"])}
    return B is not None, oracles.relation_empty(A), extra


def _run_phi_paper(scale, workers):
    report = Report("PHI_PAPER_FINITE", scale)
    _sweep(report, E_VOCAB, range(scale + 1), _case_phi_paper, workers)
    return report


_register(Construction(
    "PHI_FIN", "finite rank-function analogue of the cardinal-ladder sentence",
    "a linear order B with |B| <= |A| and an E-monotone, gap-free, cofinal f exists iff E is acyclic",
    3, _run_phi_fin, PHI_VOCAB, lambda: {"sentence": phi_fin_spec().phi}))

_register(Construction(
    "PHI_PAPER_FINITE", "cardinal-ladder sentence with infinity and cardinal-likeness clauses",
    "a finite witness with |B| <= |A| + 1 exists iff E is empty", 3, _run_phi_paper, PHI_VOCAB,
    lambda: {"sentence": phi_paper_spec().phi},
    "every f(a) must have infinitely many predecessors, which forces f(a) to be the least point"))


# -- KPRIME_QR --------------------------------------------------------------------

def encode(A: Structure) -> HfSet:
    """Kuratowski pair (n, {(i, j) : a_i E a_j}) with atoms numbered by position."""
    atoms, edges = _edges(A)
    pos = {a: i for i, a in enumerate(atoms)}
    rel = HfSet.from_iterable(kuratowski_pair(von_neumann(pos[a]), von_neumann(pos[b])) for a, b in edges)
    return kuratowski_pair(von_neumann(len(atoms)), rel)


@lru_cache(maxsize=None)
def _transitive_of_size(n: int) -> tuple:
    if n > 4:
        raise InputError("transitive candidates are enumerated inside V_4 only")
    return tuple(M for M in transitive_subsets(n) if len(M) == n)


def _dual_search(A: Structure, predicate: str, rho_bound: int):
    """Least (M, f): M transitive, rho(M) <= rho_bound, f: A ~ (M, in), M correct."""
    for M in _transitive_of_size(A.size):
        if rho(M) > rho_bound:
            continue
        f = are_isomorphic(A, membership_structure(M))
        if f is None:
            continue
        if is_r_correct(TransitiveModel(M), predicate):
            return M, f
    return None


def _case_kprime(A):
    atoms, edges = _edges(A)
    bound = rho(encode(A))
    out = {}
    for predicate in ("Cd", "PwSt"):
        found = _dual_search(A, predicate, bound)
        direct = oracles.in_q(atoms, edges, predicate)
        entry = {"dual": found is not None, "direct": direct}
        if found is not None:
            M, f = found
            graph = HfSet.from_iterable(kuratowski_pair(von_neumann(i), f(a, "s")) for i, a in enumerate(atoms))
            entry["rho_M"] = rho(M)
            entry["rho_f"] = rho(graph)
        out[predicate] = entry
    claimed = tuple(out[p]["dual"] for p in ("Cd", "PwSt"))
    oracle = tuple(out[p]["direct"] for p in ("Cd", "PwSt"))
    return claimed, oracle, {"rho_A": bound, "details": out}


def _run_kprime(scale, workers):
    report = Report("KPRIME_QR", scale)
    if scale > 4:
        raise InputError("KPRIME_QR enumerates transitive sets inside V_4; use max size <= 4")
    rows = _sweep(report, E_VOCAB, range(scale + 1), _case_kprime, workers)
    if report.counterexample is not None:
        report.counterexample["claimed"] = list(report.counterexample["claimed"])
        report.counterexample["oracle"] = list(report.counterexample["oracle"])
    members = {"Cd": 0, "PwSt": 0}
    slack = None
    f_within = f_total = 0
    for _, orbit, _, _, extra in rows:
        for p, entry in extra["details"].items():
            if entry["dual"]:
                members[p] += orbit
                gap = extra["rho_A"] - entry["rho_M"]
                slack = gap if slack is None else min(slack, gap)
                f_total += orbit
                f_within += orbit * (entry["rho_f"] <= extra["rho_A"])
    report.observations.update({
        "members": members,
        "min_rho_slack": slack,
        "rho_f_within_rho_A": f_within,
        "rho_f_checked": f_total,
    })
    return report


_register(Construction(
    "KPRIME_QR", "bounded dual characterization of R-correct isomorphism types",
    "a transitive R-correct M with rho(M) <= rho(code of A) and an isomorphism A ~ (M, in) exists"
    " iff the collapse of A is R-correct (R = Cd, PwSt)", 4, _run_kprime, E_VOCAB))


# -- KSTAR_PIECES -----------------------------------------------------------------

GRAPH_VOCAB = Vocabulary.make(sorts=("pt",), relations={"R": ("pt", "pt")})
KSTAR_MAX_VARS = 1
KSTAR_F = BoundingFunction.named("exp2")


def _decompose(body: str, fresh: Fresh) -> str:
    """c = (d, r) for some d, r, then body."""
    s1, s2 = fresh("s"), fresh("s")
    return (f"exists {s1} in c . exists d in {s1} . exists {s2} in c . exists r in {s2} ."
            f" {pair_text('c', 'd', 'r', fresh)} & {body}")


def symmetric_text() -> str:
    fresh = Fresh()
    p, a, b, q = fresh("p"), fresh("a"), fresh("b"), fresh("q")
    body = (f"(forall {p} in r . forall {a} in d . forall {b} in d . {pair_text(p, a, b, fresh)}"
            f" -> exists {q} in r . {pair_text(q, b, a, fresh)})")
    return _decompose(body, fresh)


def acyclic_text() -> str:
    fresh = Fresh()
    a, q, t, al = fresh("a"), fresh("q"), fresh("t"), fresh("al")
    total = f"(forall {a} in d . exists {q} in h . exists {t} in {q} . exists {al} in {t} . {pair_text(q, a, al, fresh)})"
    p, a, b = fresh("p"), fresh("a"), fresh("b")
    q, q2, t, t2, al, be = fresh("q"), fresh("q"), fresh("t"), fresh("t"), fresh("al"), fresh("be")
    grows = (f"(forall {p} in r . forall {a} in d . forall {b} in d . {pair_text(p, a, b, fresh)} ->"
             f" forall {q} in h . forall {q2} in h . forall {t} in {q} . forall {al} in {t} ."
             f" forall {t2} in {q2} . forall {be} in {t2} ."
             f" ({pair_text(q, a, al, fresh)} & {pair_text(q2, b, be, fresh)}) -> {al} in {be})")
    return "exists h . " + _decompose(f"{total} & {grows}", fresh)


def _symmetric(A):
    return all((b, a) in A.relations["R"] for a, b in A.relations["R"])


def _acyclic(A):
    return oracles.acyclic(A.domains["pt"], A.relations["R"])


KSTAR_CLASSES = {
    "SYMMETRIC": (symmetric_text, _symmetric, "delta0"),
    "ACYCLIC": (acyclic_text, _acyclic, "sigma1"),
}

CONDITION_1 = ("(forall x:m y:m . (forall z:m . E(z,x) <-> E(z,y)) -> x = y)"
               " & (exists x:m . forall y:m . !E(y,x)) & WF x:m y:m (E(x,y))")
CONDITION_6 = ("exists u:m . (exists s:m . E(s,c) & E(u,s) & forall t:m . E(t,s) -> t = u)"
               " & (forall a:pt . E(G(a),u)) & (forall a:pt a2:pt . G(a) = G(a2) -> a = a2)"
               " & (forall x:m . E(x,u) -> exists a:pt . G(a) = x)")

MSET_VOCAB = Vocabulary.make(sorts=("m",), relations={"E": ("m", "m")}, constants={"c": "m"})


@lru_cache(maxsize=None)
def kstar_phi(cls: str) -> Formula:
    text = KSTAR_CLASSES[cls][0]()
    return set_to_formula(parse_set_formula(text), sort="m", constants=frozenset({"c"}))


def kstar_witness(A: Structure, cls: str) -> HfSet | None:
    if cls != "ACYCLIC":
        return None
    atoms = A.domains["pt"]
    heights = oracles.rank_function(atoms, A.relations["R"])
    return HfSet.from_iterable(kuratowski_pair(von_neumann(i), von_neumann(heights[a]))
                               for i, a in enumerate(atoms))


def _code(A: Structure) -> HfSet:
    atoms = A.domains["pt"]
    pos = {a: i for i, a in enumerate(atoms)}
    rel = HfSet.from_iterable(kuratowski_pair(von_neumann(pos[a]), von_neumann(pos[b]))
                              for a, b in A.relations["R"])
    return kuratowski_pair(von_neumann(len(atoms)), rel)


def kstar_model(A: Structure, cls: str, with_witness: bool = True) -> tuple[Structure, Structure]:
    """The set part (M, E, c) and the full expansion with A, G and Skolem functions."""
    c = _code(A)
    tops = [c]
    w = kstar_witness(A, cls) if with_witness else None
    if w is not None:
        tops.append(w)
    carrier = trcl(HfSet.from_iterable(tops))
    atoms = list(carrier)
    mset = Structure(MSET_VOCAB, {"m": atoms}, {"E": [(a, b) for b in atoms for a in b]}, constants={"c": c})
    sk = skolem_expand(mset, KSTAR_MAX_VARS)
    pts = A.domains["pt"]
    voc = sk.vocabulary.extend(sorts=("pt",), relations={"R": ("pt", "pt")},
                               functions={"G": (("pt",), "m")})
    funs = dict(sk.functions)
    funs["G"] = {(a,): von_neumann(i) for i, a in enumerate(pts)}
    full = Structure(voc, {"m": atoms, "pt": pts}, {"E": sk.relations["E"], "R": A.relations["R"]},
                     funs, sk.constants)
    return mset, full


@lru_cache(maxsize=None)
def _kstar_conditions(voc: Vocabulary):
    return parse(CONDITION_1, voc), parse(CONDITION_6, voc), tuple(skolem_axioms(KSTAR_MAX_VARS, "m"))


def _case_kstar(args):
    cls, A = args
    member = KSTAR_CLASSES[cls][1](A)
    if not member:
        mset, _ = _code_only(A)
        return False, member, {"phi": evaluate(kstar_phi(cls), mset)}
    mset, full = kstar_model(A, cls)
    c1, c6, axioms = _kstar_conditions(full.vocabulary)
    atoms = mset.domains["m"]
    edges = mset.relations["E"]
    size = len(atoms)
    f = KSTAR_F(A.size)
    result = {
        "1": evaluate(c1, full),
        "2": oracles.in_q(atoms, edges, "Cd"),
        "3": size.bit_length() - 1 < 2 ** f or size == 1,
        "4": evaluate(kstar_phi(cls), full),
        "5": all(evaluate(ax, full) for ax in axioms),
        "6": evaluate(c6, full),
    }
    return result["4"], member, {"conditions": result, "size_M": size}


def _code_only(A: Structure):
    c = _code(A)
    atoms = list(trcl(HfSet.of(c)))
    return Structure(MSET_VOCAB, {"m": atoms}, {"E": [(a, b) for b in atoms for a in b]},
                     constants={"c": c}), c


def _run_kstar(scale, workers):
    report = Report("KSTAR_PIECES", scale)
    max_m = 0
    members = dict.fromkeys(KSTAR_CLASSES, 0)
    for cls in KSTAR_CLASSES:
        for n in range(scale + 1):
            items = _classes(GRAPH_VOCAB, n)
            results = ordered_map(_case_kstar, [(cls, A) for A, _ in items], workers)
            for (A, orbit), (claimed, oracle, extra) in zip(items, results):
                report.record(n, orbit, claimed, oracle, A, {"class": cls})
                if oracle:
                    members[cls] += orbit
                    conds = extra["conditions"]
                    max_m = max(max_m, extra["size_M"])
                    missing = sorted(k for k, v in conds.items() if not v)
                    if missing:
                        report.fail("K* condition failed", **{"class": cls, "size": n, "conditions": missing,
                                                              "structure": _structure_doc(A)})
                elif extra["phi"]:
                    report.fail("coded sentence holds for a non-member",
                                **{"class": cls, "size": n, "structure": _structure_doc(A)})
    report.observations["members"] = members
    report.observations["max_model_size"] = max_m
    report.observations["skolem_functions"] = len(skolem_axioms(KSTAR_MAX_VARS, "m"))
    return report


_register(Construction(
    "KSTAR_PIECES", "set-theoretic expansion with Skolem functions and a coding bijection",
    "members of a registered class get an expansion satisfying conditions 1-6; the coded sentence"
    " fails for non-members", 3, _run_kstar, GRAPH_VOCAB,
    lambda: {f"phi_{k.lower()}": (kstar_phi(k), MSET_VOCAB) for k in KSTAR_CLASSES}))
