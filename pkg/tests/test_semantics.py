import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from fmtkit import oracles
from fmtkit.errors import EmptyDomain, FreeVarUnassigned, PreconditionFailed, ResourceCapExceeded, SortError
from fmtkit.evaluator import RecordingInterp, StructureInterp, compile_formula
from fmtkit.formula import And, Eq, Exists, Rel, Var, analyze, parse
from fmtkit.hf import EMPTY, HfSet, TransitiveModel, transitive_subsets, v_level
from fmtkit.semantics import (
    evaluate, find_models, satisfies, skolem_axioms, skolem_expand, skolem_generating_set,
    upward_extension_probe,
)
from fmtkit.structures import Structure, Vocabulary, enumerate_structures, is_substructure

from helpers import E_VOCAB, FREE, P_VOCAB, RICH_VOCAB, FormulaGen, e_structure, linear_order

HARTIG = parse("I x y (P(x))(!P(y))", P_VOCAB)
WF_E = parse("WF x y (E(x,y))", E_VOCAB)
EXT = parse("forall x y . (forall z . E(z,x) <-> E(z,y)) -> x = y", E_VOCAB)
LINEAR = parse("(forall x . !E(x,x)) & (forall x y z . E(x,y) & E(y,z) -> E(x,z))"
               " & (forall x y . x = y | E(x,y) | E(y,x))", E_VOCAB)
MSET = Vocabulary.make(relations={"E": ("s", "s")}, constants={"c": "s"})


def p_structure(n, members):
    return Structure(P_VOCAB, {"s": tuple(range(n))}, {"P": [(a,) for a in members]})


# -- evaluation -------------------------------------------------------------------

def test_hartig_examples():
    assert evaluate(HARTIG, p_structure(2, [0]))
    assert not evaluate(HARTIG, p_structure(3, [0]))


def test_hartig_matches_counting():
    for n in range(7):
        for A in enumerate_structures(P_VOCAB, n):
            assert evaluate(HARTIG, A) == oracles.equal_split(A)


def test_wf_example():
    assert not evaluate(WF_E, e_structure(2, [(0, 1), (1, 0)]))


@pytest.mark.parametrize("n", range(4))
def test_wf_matches_oracles(n):
    for A in enumerate_structures(E_VOCAB, n):
        atoms, edges = A.domains["s"], A.relations["E"]
        minimal = oracles.every_subset_has_minimal(atoms, edges)
        assert evaluate(WF_E, A) == minimal == oracles.acyclic(atoms, edges)


@settings(max_examples=80)
@given(st.integers(0, 6), st.data())
def test_wf_of_defined_relation(n, data):
    # WF over a compound body: the converse of E
    pairs = data.draw(st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)))) if n else set()
    A = e_structure(n, pairs)
    phi = parse("WF x y (E(y,x) & x != y)", E_VOCAB)
    converse = {(b, a) for a, b in pairs if a != b}
    assert evaluate(phi, A) == oracles.acyclic(range(n), converse)


def test_second_order_full_semantics():
    phi = parse("exists2 X:(s) . forall x . X(x)", P_VOCAB)
    for n in range(4):
        assert evaluate(phi, p_structure(n, []))
    every_subset = parse("forall2 X:(s) . exists2 Y:(s) . forall x . Y(x) <-> !X(x)", P_VOCAB)
    assert evaluate(every_subset, p_structure(3, []))
    named = parse("exists2 X:(s) . forall x . X(x) <-> P(x)", P_VOCAB)
    for A in enumerate_structures(P_VOCAB, 3):
        assert evaluate(named, A)


def test_second_order_counts_subsets():
    # exactly one subset has the same size as its complement's complement pattern
    phi = parse("exists2 X:(s) . exists2 Y:(s) . (forall x . X(x) <-> !Y(x)) & I x y (X(x))(Y(y))", P_VOCAB)
    for n in range(5):
        assert evaluate(phi, p_structure(n, [])) == (n % 2 == 0)


def test_free_variables():
    phi = parse("E(x,y)", E_VOCAB)
    A = e_structure(2, [(0, 1)])
    assert evaluate(phi, A, {"x": 0, "y": 1})
    with pytest.raises(FreeVarUnassigned):
        evaluate(phi, A, {"x": 0})
    with pytest.raises(SortError):
        evaluate(phi, A, {"x": 0, "y": 7})


def test_symbols_consulted_are_within_analysis():
    gen = FormulaGen(11)
    rng = random.Random(11)
    for _ in range(200):
        phi = gen.formula(4)
        a = analyze(phi)
        A = _random_rich(rng)
        rec = RecordingInterp(StructureInterp(A))
        env = {v: A.domains[s][0] for v, s in FREE.items()}
        try:
            compile_formula(phi, rec)(env)
        except ResourceCapExceeded:
            continue
        assert rec.consulted <= a.symbols


def _random_rich(rng):
    s, t = [0, 1], [2, 3]
    return Structure(
        RICH_VOCAB, {"s": s, "t": t},
        {"P": [(a,) for a in s if rng.random() < 0.5],
         "E": [p for p in itertools.product(s, s) if rng.random() < 0.5],
         "R": [p for p in itertools.product(s, t) if rng.random() < 0.5]},
        {"f": {(a,): rng.choice(t) for a in s},
         "g": {p: rng.choice(t) for p in itertools.product(t, t)}},
        {"c": rng.choice(s), "d": rng.choice(t)},
    )


# -- model search -----------------------------------------------------------------

def test_find_models_singletons():
    phi = parse("forall x:s . forall y:s . x = y", E_VOCAB)
    sizes = {len(B.domains["s"]) for B in find_models(phi, Vocabulary(), range(4))}
    assert sizes == {0, 1}


def test_find_models_extensionality():
    found = list(find_models(EXT, E_VOCAB, 2))
    expected = [A for A in enumerate_structures(E_VOCAB, 2)
                if oracles.extensional(A.domains["s"], A.relations["E"])]
    assert found == expected
    assert len(found) == 12


def test_find_models_unsatisfiable():
    assert list(find_models(parse("exists x:s . x != x", E_VOCAB), E_VOCAB, range(4))) == []


def test_find_models_up_to_iso_total_relations():
    phi = parse("forall x . exists y . E(x,y)", E_VOCAB)
    reps = list(find_models(phi, E_VOCAB, 3, up_to_iso=True))
    brute = [A for A in enumerate_structures(E_VOCAB, 3, up_to_iso=True) if satisfies(A, phi)]
    assert reps == brute
    assert len(reps) == 70


def test_find_models_many_sorted():
    voc = Vocabulary.make(sorts=("a", "b"), functions={"f": (("a",), "b")})
    phi = parse("forall y:b . exists x:a . f(x) = y", voc)
    models = list(find_models(phi, voc, {"a": 2, "b": range(3)}))
    # surjections 2 -> 1 and 2 -> 2
    assert len(models) == 1 + 2


# -- upward probing ---------------------------------------------------------------

def test_probe_tautology():
    A = e_structure(2, [(0, 1)])
    B = upward_extension_probe(parse("true", E_VOCAB), A, 3)
    assert B is not None and B.size == 3


def test_probe_singleton_cannot_grow():
    phi = parse("forall x:s. forall y:s. x=y", E_VOCAB)
    assert upward_extension_probe(phi, e_structure(1, []), 2) is None


def test_probe_linear_order():
    B = upward_extension_probe(LINEAR, linear_order(2), 4)
    assert B is not None and B.size == 4
    assert satisfies(B, LINEAR)
    assert is_substructure(linear_order(2), _restrict(B, [0, 1]))
    assert B.holds("E", 0, 1)


def _restrict(B, atoms):
    return e_structure(len(atoms), [t for t in B.relations["E"] if set(t) <= set(atoms)])


def test_probe_preconditions():
    with pytest.raises(PreconditionFailed):
        upward_extension_probe(LINEAR, e_structure(2, []), 3)
    with pytest.raises(PreconditionFailed):
        upward_extension_probe(LINEAR, linear_order(3), 2)
    with pytest.raises(ResourceCapExceeded):
        upward_extension_probe(LINEAR, linear_order(2), 5, cap=4)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_probe_witness_extends_and_satisfies(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 3)
    A = e_structure(n, [(i, j) for i in range(n) for j in range(n) if rng.random() < 0.4])
    phi = rng.choice([parse("true", E_VOCAB), EXT, parse("forall x . !E(x,x) | exists y . E(y,x)", E_VOCAB)])
    if not satisfies(A, phi):
        return
    B = upward_extension_probe(phi, A, n + rng.randint(0, 2))
    if B is not None:
        assert satisfies(B, phi)
        assert B.domains["s"][:n] == A.domains["s"]
        assert {t for t in B.relations["E"] if set(t) <= set(A.domains["s"])} == set(A.relations["E"])


# -- Skolem expansion -------------------------------------------------------------

def encoded(carrier):
    atoms = sorted(carrier)
    idx = {x: i for i, x in enumerate(atoms)}
    edges = [(idx[a], idx[b]) for b in atoms for a in b]
    return Structure(MSET, {"s": range(len(atoms))}, {"E": edges}, constants={"c": idx[EMPTY]}), idx


def _fn(psi):
    for f in skolem_generating_set(1):
        if f.psi == psi:
            return f
    raise AssertionError(f"{psi} not in the generating set")


X, Z = Var("x", "s"), Var("z1", "s")


def test_skolem_least_element():
    M, idx = encoded(v_level(2))
    ex = skolem_expand(M, 1)
    f = _fn(Eq(X, X))
    assert ex.functions[f.name][()] == 0


def test_skolem_unique_predecessor():
    M, idx = encoded(v_level(2))
    ex = skolem_expand(M, 1)
    f = _fn(Rel("E", (X, Z)))
    assert ex.functions[f.name][(idx[HfSet.of(EMPTY)],)] == idx[EMPTY]


def test_skolem_default_element():
    M, idx = encoded(v_level(2))
    ex = skolem_expand(M, 1)
    f = _fn(Rel("E", (Z, X)))
    top = idx[HfSet.of(EMPTY)]
    assert ex.functions[f.name][(top,)] == 0
    assert all(satisfies(ex, ax) for ax in skolem_axioms(1))


def test_skolem_empty_domain():
    with pytest.raises(EmptyDomain):
        skolem_expand(Structure(MSET, {"s": []}, check=False), 1)


def test_generating_set_is_deduplicated():
    fs = skolem_generating_set(1)
    assert len({f.name for f in fs}) == len(fs)
    assert {f.arity for f in fs} == {0, 1}


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_skolem_axioms_hold(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 4)
    M = Structure(MSET, {"s": range(n)},
                  {"E": [(i, j) for i in range(n) for j in range(n) if rng.random() < 0.4]},
                  constants={"c": rng.randrange(n)})
    ex = skolem_expand(M, 1)
    assert all(satisfies(ex, ax) for ax in skolem_axioms(1))


def _pair_maps(M_carrier, N_carrier):
    """Encodings of M and N by their own atoms so that M's atoms sit inside N's."""
    def enc(carrier):
        atoms = sorted(carrier)
        return Structure(MSET, {"s": atoms}, {"E": [(a, b) for b in atoms for a in b]}, constants={"c": EMPTY})
    return enc(M_carrier), enc(N_carrier)


def test_skolem_closed_substructures_agree_on_existentials():
    rng = random.Random(5)
    models = [m for m in transitive_subsets(4) if EMPTY in m]
    fs = skolem_generating_set(1)
    checked = 0
    for _ in range(200):
        Mset = rng.choice(models)
        Nset = rng.choice([n for n in models if Mset.issubset(n)])
        M, N = _pair_maps(Mset, Nset)
        exM, exN = skolem_expand(M, 1), skolem_expand(N, 1)
        extends = all(exN.functions[f.name][k] == v for f in fs for k, v in exM.functions[f.name].items())
        if not extends:
            continue
        checked += 1
        for f in fs:
            sentence = Exists("x", "s", f.psi)
            for zs in itertools.product(M.domains["s"], repeat=f.arity):
                env = {f"z{i + 1}": z for i, z in enumerate(zs)}
                assert evaluate(sentence, M, env) == evaluate(sentence, N, env)
    assert checked >= 20
