import pytest
from hypothesis import given, strategies as st

from conftest import BINARY, MIXED, XI1
from treelogic.errors import ParseError, PositionOutOfRange
from treelogic.semirings import NATURALS
from treelogic.trees import (
    RankedAlphabet,
    all_trees,
    hom_preimage_count,
    is_prefix,
    leaf,
    lex_leq,
    node,
    parse_position,
    parse_term,
    render_position,
    render_term,
    trees_of_size,
)
from conftest import counting_homomorphism


def positions_strategy():
    return st.lists(st.integers(min_value=1, max_value=3), max_size=5).map(tuple)


def test_positions_examples():
    assert parse_term("sigma(alpha,alpha)").positions() == ((), (1,), (2,))
    assert parse_term("alpha").positions() == ((),)
    assert [render_position(w) for w in XI1.positions()] == \
        ["e", "1", "1.1", "1.1.1", "1.1.2", "1.2", "2"]


def test_subtree_and_replace():
    t = parse_term("sigma(alpha,beta)")
    assert t.subtree_at((2,)) == leaf("beta")
    assert t.replace_at((1,), leaf("gamma")) == parse_term("sigma(gamma,beta)")
    assert XI1.subtree_at((1, 1)) == parse_term("sigma(alpha,alpha)")
    with pytest.raises(PositionOutOfRange):
        t.subtree_at((3,))
    with pytest.raises(PositionOutOfRange):
        t.replace_at((1, 1), leaf("x"))


def test_height_size():
    assert (leaf("alpha").height, leaf("alpha").size) == (0, 1)
    t = parse_term("sigma(alpha,alpha)")
    assert (t.height, t.size) == (1, 3)
    assert (XI1.height, XI1.size) == (3, 7)


def test_lex_order_examples():
    assert lex_leq((), (1,))
    assert lex_leq((1, 2), (2,))
    assert not lex_leq((2,), (1, 1))


@given(u=positions_strategy(), v=positions_strategy(), w=positions_strategy())
def test_lex_total_order(u, v, w):
    assert lex_leq(u, v) or lex_leq(v, u)
    if lex_leq(u, v) and lex_leq(v, u):
        assert u == v
    if lex_leq(u, v) and lex_leq(v, w):
        assert lex_leq(u, w)
    assert lex_leq((), u)
    if is_prefix(u, v):
        assert lex_leq(u, v)


def test_tree_invariants_on_enumeration():
    for t in all_trees(MIXED, 6):
        positions = t.positions()
        assert t.size == len(positions)
        assert t.height == max(len(w) for w in positions)
        assert list(positions) == sorted(positions, key=lambda w: (
            [c for c in w], ))  # preorder emits prefix-first groups
        for w in positions:
            assert t.replace_at(w, t.subtree_at(w)) == t


def test_positions_sorted_lexicographically():
    for t in all_trees(MIXED, 6):
        ps = list(t.positions())
        for a, b in zip(ps, ps[1:]):
            assert lex_leq(a, b) and a != b


def test_term_parsing():
    assert render_term(parse_term("  sigma ( alpha , alpha ) ")) == "sigma(alpha,alpha)"
    with pytest.raises(ParseError):
        parse_term("sigma(alpha", BINARY)
    with pytest.raises(ParseError):
        parse_term("sigma(alpha)", BINARY)  # rank mismatch
    with pytest.raises(ParseError):
        parse_term("3(alpha)")
    err = None
    try:
        parse_term("sigma(alpha,,alpha)")
    except ParseError as exc:
        err = exc
    assert err is not None and err.line == 1 and err.column is not None


def test_position_rendering():
    assert render_position(()) == "e"
    assert parse_position("1.1.2") == (1, 1, 2)
    assert parse_position("e") == ()
    with pytest.raises(ParseError):
        parse_position("0.1")


def test_alphabet_rules():
    with pytest.raises(ParseError):
        RankedAlphabet({})
    with pytest.raises(ParseError):
        RankedAlphabet({"z1": 0})  # reserved for substitution variables
    assert RankedAlphabet.parse("sigma:2 alpha:0").maxrk == 2
    assert BINARY.is_monadic() is False
    assert RankedAlphabet({"gamma": 1, "e": 0}).is_monadic()


def test_tree_counts():
    # binary trees have odd sizes with Catalan counts
    assert [len(trees_of_size(BINARY, s)) for s in range(1, 10)] == \
        [1, 0, 1, 0, 2, 0, 5, 0, 14]


def test_counting_homomorphism_values():
    h = counting_homomorphism()
    assert hom_preimage_count(h, XI1) == 3
    assert hom_preimage_count(h, parse_term("sigma(alpha,sigma(alpha,alpha))")) == 1
    assert hom_preimage_count(h, leaf("alpha")) == 1
    assert hom_preimage_count(h, XI1, NATURALS) == 3


def test_homomorphism_application():
    h = counting_homomorphism()
    source = parse_term("b(alpha,alpha)")
    assert h.apply(source) == parse_term("sigma(alpha,alpha)")
    deep = parse_term("a(alpha,alpha,alpha)")
    assert h.apply(deep) == parse_term("sigma(sigma(alpha,alpha),alpha)")
