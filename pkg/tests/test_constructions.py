import random
import subprocess
import sys

import pytest

from fmtkit import oracles
from fmtkit.constructions import (
    REGISTRY, Report, encode, get, hartig_formula, kstar_model, list_constructions,
    membership_structure, phi_fin_spec, pwst_phi, q_empty_formula, set_to_formula, verify,
)
from fmtkit.errors import InputError, ResourceCapExceeded, UnknownConstruction
from fmtkit.formula import parse
from fmtkit.hf import TransitiveModel, powerset, rho, transitive_subsets, v_level, von_neumann
from fmtkit.projection import BoundingFunction, ProjectionSpec, in_sigma_projection
from fmtkit.semantics import evaluate, satisfies
from fmtkit.setformula import eval_set_formula, random_delta0
from fmtkit.structures import Structure, enumerate_structures

from helpers import E_VOCAB, P_VOCAB, e_structure

FAST = ["HARTIG_HALF", "PI_SIDE", "ALEPHBOUND", "CD_SENTENCE", "PWST_PHI", "Q_PWST", "PHI_FIN",
        "KPRIME_QR", "KSTAR_PIECES", "Q_EMPTY", "PHI_PAPER_FINITE", "LINDSTROM_WF"]


# -- catalog ----------------------------------------------------------------------

def test_catalog():
    rows = list_constructions()
    names = [r["name"] for r in rows]
    assert "Q_EMPTY" in names
    assert len(rows) >= 10
    assert all(isinstance(r["anchor"], str) and r["anchor"] for r in rows)
    assert set(names) == set(FAST)


def test_unknown_construction():
    with pytest.raises(UnknownConstruction):
        verify("NOPE")
    with pytest.raises(InputError):
        verify("HARTIG_HALF", -1)


def test_status_is_remembered():
    verify("HARTIG_HALF", 3, workers=1)
    row = next(r for r in list_constructions() if r["name"] == "HARTIG_HALF")
    assert row["status"] == "pass" and row["verified_scale"] == 3


# -- every entry passes at its default scale -----------------------------------------

@pytest.mark.parametrize("name", FAST)
def test_entry_passes_at_default_scale(name):
    report = verify(name, workers=1)
    assert report.passed, report.counterexample
    assert report.scale == get(name).default_scale
    assert report.checked > 0


def test_q_empty_counts_every_relation():
    report = verify("Q_EMPTY", 4, workers=1)
    assert report.per_size[4] == 65536
    assert report.checked == 1 + 2 + 16 + 512 + 65536
    assert report.observations["collapsing"] == 232


def test_cd_correctness_is_automatic():
    report = verify("CD_SENTENCE", workers=1)
    assert report.observations["cd_correctness_automatic"] is True


def test_q_pwst_flags_ordinal_four():
    report = verify("Q_PWST", workers=1)
    assert report.observations["ordinal_four_flagged"] is True
    assert report.observations["non_correct_carriers"] == ["{{},{{}},{{},{{}}},{{},{{}},{{},{{}}}}}"]


def test_q_empty_respects_cap():
    with pytest.raises(ResourceCapExceeded):
        verify("Q_EMPTY", 5, workers=1)


# -- reports ----------------------------------------------------------------------

def test_report_round_trip():
    report = verify("HARTIG_HALF", 4, workers=1)
    again = Report.from_json(report.to_json())
    assert again == report
    assert again.to_json() == report.to_json()


def test_report_keeps_first_mismatch():
    r = Report("X", 2)
    r.record(1, 1, True, True)
    r.record(2, 3, True, False, e_structure(1, []), {"note": 1})
    r.record(2, 1, False, True)
    assert not r.passed and r.checked == 5 and r.classes == 3
    assert r.counterexample["size"] == 2 and r.counterexample["note"] == 1
    assert Report.from_json(r.to_json()) == r


# -- the oracles discriminate ---------------------------------------------------------

def test_mutated_hartig_sentence_is_caught():
    wrong = parse("I x y (P(x))(P(y))", P_VOCAB)
    mismatches = [A for A in enumerate_structures(P_VOCAB, 2) if evaluate(wrong, A) != oracles.equal_split(A)]
    assert mismatches
    assert all(evaluate(hartig_formula(), A) == oracles.equal_split(A) for A in enumerate_structures(P_VOCAB, 4))


def test_dropping_well_foundedness_is_caught():
    ext_only = parse("forall x y . (forall z . E(z,x) <-> E(z,y)) -> x = y", E_VOCAB)
    loop = e_structure(1, [(0, 0)])
    assert evaluate(ext_only, loop) and not oracles.collapse_succeeds([0], {(0, 0)})
    assert not evaluate(q_empty_formula(), loop)


def test_shrinking_the_phi_fin_bound_is_caught():
    spec = phi_fin_spec()
    tight = ProjectionSpec(spec.base, spec.extended, spec.phi, BoundingFunction.named("id"))
    chain = e_structure(2, [(0, 1)])
    assert oracles.acyclic([0, 1], {(0, 1)})
    assert in_sigma_projection(chain, spec) is not None
    assert in_sigma_projection(chain, tight) is None


def test_pwst_phi_rejects_a_wrong_powerset():
    M = von_neumann(4)
    A = membership_structure(M)
    x, y = von_neumann(2), von_neumann(3)
    assert y != powerset(x)
    assert not evaluate(pwst_phi(), A, {"x": x, "y": y})
    # V_3 is the true powerset of 2
    V3 = v_level(3)
    assert V3 == powerset(x)
    B = membership_structure(V3.with_element(V3))
    assert evaluate(pwst_phi(), B, {"x": x, "y": V3})


# -- translation of set formulas ------------------------------------------------------

def test_translated_formulas_agree_with_set_evaluation():
    rng = random.Random(9)
    models = [m for m in transitive_subsets(4) if len(m) > 0]
    for _ in range(300):
        M = rng.choice(models)
        phi = random_delta0(rng, 4, ["x", "y"])
        env = {"x": rng.choice(list(M)), "y": rng.choice(list(M))}
        translated = set_to_formula(phi)
        assert evaluate(translated, membership_structure(M), env) == eval_set_formula(phi, TransitiveModel(M), env)


def test_encoding_is_a_pair():
    A = e_structure(2, [(0, 1)])
    code = encode(A)
    assert rho(code) > 0
    assert encode(e_structure(2, [(0, 1)])) == code
    assert encode(e_structure(2, [(1, 0)])) != code


def test_kstar_model_satisfies_skolem_axioms():
    from fmtkit.constructions import GRAPH_VOCAB
    from fmtkit.semantics import skolem_axioms

    A = Structure(GRAPH_VOCAB, {"pt": [0, 1]}, {"R": [(0, 1), (1, 0)]})
    mset, full = kstar_model(A, "SYMMETRIC")
    assert all(satisfies(full, ax) for ax in skolem_axioms(1, "m"))
    assert full.size == mset.size + A.size


# -- oracle independence ---------------------------------------------------------------

def test_oracles_do_not_need_the_evaluator():
    code = (
        "import sys\n"
        "for m in ('evaluator', 'semantics', 'formula', 'search', 'projection', 'constructions'):\n"
        "    sys.modules['fmtkit.' + m] = None\n"
        "import fmtkit.oracles as o\n"
        "assert o.acyclic([0, 1], {(0, 1)})\n"
        "assert not o.collapse_succeeds([0, 1], {(0, 1), (1, 0)})\n"
        "assert o.in_q([0, 1], {(0, 1)}, 'PwSt')\n"
        "print('ok')\n"
    )
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    assert out.stdout.strip() == "ok"
