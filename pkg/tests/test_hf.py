import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from fmtkit.errors import (
    FormulaSyntaxError, FreeVarUnassigned, InputError, NotExtensional, NotWellFounded,
    ResourceCapExceeded,
)
from fmtkit.hf import (
    EMPTY, HfSet, TransitiveModel, ackermann_code, from_ackermann, is_cardinal, is_ordinal,
    is_transitive, kuratowski_pair, level_size, mostowski_collapse, parse_hf, powerset, rho,
    to_text, transitive_subsets, trcl, trcl_and_rho, v_level, von_neumann,
)
from fmtkit.setformula import (
    eval_set_formula, format_set_formula, is_delta0, is_r_correct, is_sigma1, parse_set_formula,
    random_delta0, random_sigma1, real_truth, CD, PWST,
)

from helpers import brute_transitive_subsets, hf_sets

O = von_neumann


def S(*xs):
    return HfSet.of(*xs)


# -- values and levels -------------------------------------------------------------

def test_v_level_examples():
    assert v_level(0) == EMPTY
    assert v_level(2) == S(EMPTY, S(EMPTY))
    assert len(v_level(5)) == 65536


def test_level_sizes_are_towers():
    assert [level_size(n) for n in range(6)] == [0, 1, 2, 4, 16, 65536]
    assert [len(v_level(n)) for n in range(5)] == [0, 1, 2, 4, 16]


def test_v_level_refuses_six():
    with pytest.raises(ResourceCapExceeded):
        v_level(6)


def test_v_level_small_cap():
    with pytest.raises(ResourceCapExceeded):
        v_level(5, cap=1000)


def test_levels_are_powersets():
    for n in range(4):
        assert v_level(n + 1) == powerset(v_level(n))


@pytest.mark.parametrize("n", range(1, 5))
def test_level_members_have_lower_rank(n):
    lower = v_level(n - 1)
    for x in v_level(n):
        assert x.issubset(lower)
        assert x.rank < n


def test_rank_is_recursive_height():
    def height(x):
        return max((height(e) + 1 for e in x), default=0)
    for x in v_level(4):
        assert x.rank == height(x)


def test_trcl_and_rho_examples():
    assert trcl_and_rho(EMPTY) == (EMPTY, 0)
    assert trcl_and_rho(S(EMPTY)) == (S(EMPTY), 1)
    assert trcl_and_rho(S(S(EMPTY))) == (S(EMPTY, S(EMPTY)), 2)
    assert rho(O(4)) == 4


@given(hf_sets())
def test_trcl_is_least_transitive_superset(x):
    closure = trcl(x)
    assert is_transitive(closure)
    assert x.issubset(closure)
    # least: every member of the closure is reachable through membership chains
    reach, todo = set(), list(x)
    while todo:
        y = todo.pop()
        if y not in reach:
            reach.add(y)
            todo.extend(y)
    assert set(closure) == reach


@given(hf_sets(), hf_sets())
def test_equality_is_extensional(x, y):
    assert (x == y) == (set(x) == set(y))
    assert (x == y) == (hash(x) == hash(y) and x is y)


@given(hf_sets(), hf_sets())
def test_canonical_order_is_total(x, y):
    assert (x < y) + (y < x) + (x == y) == 1


@given(hf_sets())
def test_members_precede_the_set(x):
    assert all(e < x for e in x)


def test_ackermann_codes_of_naturals():
    assert [ackermann_code(O(n)) for n in range(5)] == [0, 1, 3, 11, 2059]


def test_ackermann_order_matches_canonical_order():
    level = sorted(v_level(4))
    codes = [ackermann_code(x) for x in level]
    assert codes == sorted(codes) == list(range(16))
    assert all(from_ackermann(c) == x for c, x in zip(codes, level))


def test_naturals_and_pairs():
    assert O(2) == S(EMPTY, S(EMPTY))
    assert len(powerset(O(3))) == 8
    assert kuratowski_pair(O(0), O(1)) == S(S(O(0)), S(O(0), O(1)))
    assert is_ordinal(O(3)) and not is_ordinal(S(S(EMPTY)))
    assert is_cardinal(O(3))


# -- text syntax ------------------------------------------------------------------

def test_text_examples():
    assert to_text(O(3)) == "{{},{{}},{{},{{}}}}"
    assert parse_hf(" { {} , { {} } } ") == O(2)
    assert parse_hf("3") == O(3)


def test_parse_rejects_duplicates():
    with pytest.raises(FormulaSyntaxError):
        parse_hf("{{},{}}")


@pytest.mark.parametrize("text", ["", "{", "{{}", "{}}", "{,}", "x"])
def test_parse_rejects_malformed(text):
    with pytest.raises(FormulaSyntaxError):
        parse_hf(text)


@given(hf_sets())
def test_text_round_trip(x):
    assert parse_hf(to_text(x)) == x


# -- transitive sets and collapse ------------------------------------------------

def test_transitive_subset_counts_match_brute_force():
    brute = brute_transitive_subsets(4)
    ours = list(transitive_subsets(4))
    assert len(ours) == len(brute) == 4131
    assert {frozenset(m) for m in ours} == set(brute)
    assert len(list(transitive_subsets(3))) == len(brute_transitive_subsets(3)) == 6


def test_transitive_model_rejects_non_transitive():
    with pytest.raises(InputError):
        TransitiveModel(S(S(EMPTY)))


def test_collapse_examples():
    assert mostowski_collapse(["a", "b"], {("a", "b")}) == {"a": EMPTY, "b": S(EMPTY)}
    assert mostowski_collapse(["a"], set()) == {"a": EMPTY}
    with pytest.raises(NotExtensional):
        mostowski_collapse(["a", "b", "c"], {("a", "c"), ("b", "c")})


def test_collapse_cycle_is_not_well_founded():
    with pytest.raises(NotWellFounded):
        mostowski_collapse([0, 1], {(0, 1), (1, 0)})
    with pytest.raises(NotWellFounded):
        mostowski_collapse([0], {(0, 0)})


def test_collapse_of_transitive_sets_is_identity():
    for m in transitive_subsets(4):
        atoms, pairs = TransitiveModel(m).as_graph()
        image = mostowski_collapse(atoms, pairs)
        assert all(image[a] == a for a in atoms)


@settings(max_examples=60)
@given(st.integers(0, 5), st.data())
def test_collapse_image_is_transitive_and_injective(n, data):
    # a random relation: the collapse either succeeds with a transitive image or refuses
    pairs = data.draw(st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)))) if n else set()
    try:
        image = mostowski_collapse(list(range(n)), pairs)
    except (NotWellFounded, NotExtensional):
        return
    values = list(image.values())
    assert len(set(values)) == n
    assert is_transitive(HfSet.from_iterable(values))
    for a in range(n):
        assert image[a] == HfSet.from_iterable(image[b] for b, c in pairs if c == a)


# -- set formulas -----------------------------------------------------------------

def test_cd_of_two_in_v3():
    assert eval_set_formula(CD, TransitiveModel(v_level(3)), {"x": O(2)})


def test_pwst_in_ordinal_four():
    M = TransitiveModel(O(4))
    assert eval_set_formula(PWST, M, {"x": O(2), "y": O(3)})
    assert O(3) != powerset(O(2))


def test_exists_member_of_empty_set_is_false():
    phi = parse_set_formula("exists z . z in x")
    assert not eval_set_formula(phi, TransitiveModel(v_level(2)), {"x": EMPTY})


def test_unassigned_free_variable():
    with pytest.raises(FreeVarUnassigned):
        eval_set_formula(parse_set_formula("x in y"), TransitiveModel(v_level(2)), {"x": EMPTY})


def test_set_formula_round_trip_and_flags():
    phi = parse_set_formula("forall z in x . exists w in z . w = w")
    assert parse_set_formula(format_set_formula(phi)) == phi
    assert is_delta0(phi)
    assert not is_delta0(parse_set_formula("exists z . z in x"))
    assert is_sigma1(parse_set_formula("exists z . forall w in z . w in x"))


def test_random_formulas_round_trip():
    rng = random.Random(7)
    for _ in range(300):
        phi = random_delta0(rng, 4, ["x", "y"])
        assert is_delta0(phi)
        assert parse_set_formula(format_set_formula(phi)) == phi
        psi = random_sigma1(rng, 3, ["x"])
        assert is_sigma1(psi)


# -- correctness -------------------------------------------------------------------

def test_ordinal_four_is_not_pwst_correct():
    assert not is_r_correct(TransitiveModel(O(4)), "PwSt")


def test_v2_is_pwst_correct():
    assert is_r_correct(TransitiveModel(v_level(2)), "PwSt")


def test_every_transitive_subset_of_v4_is_cd_correct():
    assert all(is_r_correct(TransitiveModel(m), "Cd") for m in transitive_subsets(4))


def _pwst_in(members, x, y):
    # plain-set reading of the relativized formula
    below = [z for z in members if set(z) <= set(x)]
    return all(set(z) <= set(x) for z in y) and all(z in y for z in below)


def test_pwst_correctness_matches_direct_check():
    flagged = []
    for m in transitive_subsets(4):
        members = list(m)
        direct = all(_pwst_in(members, x, y) == (y == powerset(x))
                     for x, y in itertools.product(members, repeat=2))
        assert is_r_correct(TransitiveModel(m), "PwSt") == direct
        if not direct:
            flagged.append(m)
    assert O(4) in flagged
    assert len(flagged) == 8


def test_real_truth():
    assert real_truth("Cd", (O(3),))
    assert not real_truth("Cd", (S(S(EMPTY)),))
    assert real_truth("PwSt", (O(1), O(2)))
    with pytest.raises(InputError):
        real_truth("Foo", (EMPTY,))


# -- absoluteness ---------------------------------------------------------------

_TRANSITIVE_V4 = None


def _transitive_v4():
    global _TRANSITIVE_V4
    if _TRANSITIVE_V4 is None:
        _TRANSITIVE_V4 = list(transitive_subsets(4))
    return _TRANSITIVE_V4


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_delta0_formulas_are_absolute(seed):
    rng = random.Random(seed)
    models = _transitive_v4()
    M = rng.choice([m for m in models if len(m) > 0])
    above = [n for n in models if M.issubset(n)]
    N = rng.choice(above)
    phi = random_delta0(rng, 4, ["x", "y"])
    env = {"x": rng.choice(list(M)), "y": rng.choice(list(M))}
    assert eval_set_formula(phi, TransitiveModel(M), env) == eval_set_formula(phi, TransitiveModel(N), env)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_sigma1_formulas_go_up(seed):
    rng = random.Random(seed)
    models = _transitive_v4()
    M = rng.choice([m for m in models if len(m) > 0])
    N = rng.choice([n for n in models if M.issubset(n)])
    phi = random_sigma1(rng, 3, ["x"])
    env = {"x": rng.choice(list(M))}
    if eval_set_formula(phi, TransitiveModel(M), env):
        assert eval_set_formula(phi, TransitiveModel(N), env)
