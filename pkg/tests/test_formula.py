import pytest

from fmtkit.constructions import registry_formulas
from fmtkit.errors import FormulaSyntaxError, SortError, UnknownSymbol
from fmtkit.formula import (
    And, Exists, Forall, Hartig, Not, Rel, SOExists, Var, WF, analyze, parse, to_text,
)
from fmtkit.structures import Vocabulary

from helpers import E_VOCAB, FREE, P_VOCAB, RICH_VOCAB, FormulaGen

TWO = Vocabulary.make(sorts=("s", "t"), relations={"R": ("s", "t"), "P": ("s",)})


def test_hartig_node():
    phi = parse("I x y (P(x)) (!P(y))", P_VOCAB)
    x, y = Var("x", "s"), Var("y", "s")
    assert phi == Hartig("x", "s", Rel("P", (x,)), "y", "s", Not(Rel("P", (y,))))


def test_wf_node():
    phi = parse("WF x y (E(x,y))", E_VOCAB)
    assert phi == WF("x", "y", "s", Rel("E", (Var("x", "s"), Var("y", "s"))))


def test_arity_error():
    with pytest.raises(SortError):
        parse("P(x,y)", P_VOCAB)


def test_unknown_symbol():
    with pytest.raises(UnknownSymbol):
        parse("Q(x)", P_VOCAB)


def test_syntax_error_has_position():
    with pytest.raises(FormulaSyntaxError) as info:
        parse("forall x . (P(x)", P_VOCAB)
    assert info.value.pos is not None


def test_cross_sort_equality_is_a_sort_error():
    with pytest.raises(SortError):
        parse("forall x:s y:t . x = y", TWO)


def test_sort_error_names_symbol():
    with pytest.raises(SortError) as info:
        parse("forall x:t . P(x)", TWO)
    assert info.value.symbol == "P"


def test_sorts_are_inferred():
    phi = parse("forall x . exists y . R(x, y)", TWO)
    assert phi == Forall("x", "s", Exists("y", "t", Rel("R", (Var("x", "s"), Var("y", "t")))))


def test_precedence():
    phi = parse("P(x) & P(y) | !P(x)", P_VOCAB)
    assert to_text(phi) == "P(x) & P(y) | !P(x)"
    imp = parse("P(x) -> P(y) -> P(x)", P_VOCAB)
    assert parse(to_text(imp), P_VOCAB, free={"x": "s", "y": "s"}) == imp
    assert isinstance(parse("!P(x) & P(x)", P_VOCAB), And)


def test_second_order_syntax():
    phi = parse("exists2 X:(s) . forall x . X(x)", Vocabulary())
    assert isinstance(phi, SOExists) and phi.profile == ("s",)
    assert analyze(phi).degree == 1


def test_analyze_examples():
    a = analyze(parse("I x y (P(x)) (!P(y))", P_VOCAB))
    assert a.symbols == {"P"} and a.rank == 1 and a.free == {}
    b = analyze(parse("forall x:s . P(x)", P_VOCAB))
    assert b.rank == 1 and b.free == {}
    c = analyze(parse("E(x,y)", E_VOCAB))
    assert c.rank == 0 and set(c.free) == {"x", "y"}


def test_analyze_rank_nesting():
    a = analyze(parse("forall x . exists y . WF u v (E(u,v) & E(x,y))", E_VOCAB))
    assert a.rank == 3 and a.degree == 0
    assert analyze(parse("(forall x . E(x,x)) & exists y . E(y,y)", E_VOCAB)).rank == 1


def _round_trip(phi, vocabulary):
    a = analyze(phi)
    again = parse(to_text(phi), vocabulary, free=a.free, so_free=a.free_so)
    assert again == phi, to_text(phi)


@pytest.mark.parametrize("key", sorted(registry_formulas()))
def test_registry_formulas_round_trip(key):
    phi, vocabulary = registry_formulas()[key]
    _round_trip(phi, vocabulary)


def test_random_formulas_round_trip():
    gen = FormulaGen(2024)
    depths = []
    for _ in range(1000):
        phi = gen.formula(6)
        a = analyze(phi)
        assert set(a.free) <= set(FREE)
        _round_trip(phi, RICH_VOCAB)
        depths.append(a.rank)
    assert max(depths) >= 4
