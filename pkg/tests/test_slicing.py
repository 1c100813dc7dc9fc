import itertools

import pytest

from conftest import BINARY, MIXED, MONADIC, XI1
from treelogic.caps import Caps
from treelogic.errors import ExplosionGuard, VariableOutOfRange
from treelogic.slicing import (
    Slice,
    dec,
    enumerate_slices,
    head_cut,
    max_breadth,
    member_of_slice_set,
)
from treelogic.trees import all_trees, leaf, parse_term, render_term, var_name


def brute_force_head_cut(xi, u, n):
    """Search every candidate set of variable positions for the unique one
    that forms a legal slice with tall remainders; completely independent of
    head_cut's direct construction."""
    top = xi.subtree_at(u)
    below = [w for w in top.positions() if w != ()]
    admissible = []
    for r in range(len(below) + 1):
        for combo in itertools.combinations(below, r):
            body = top
            ok = True
            for i, w in enumerate(sorted(combo), start=1):
                try:
                    if top.subtree_at(w).height < n:
                        ok = False
                        break
                    body = body.replace_at(w, leaf(var_name(i)))
                except Exception:
                    ok = False
                    break
            if not ok:
                continue
            if member_of_slice_set(body, n, r):
                admissible.append((r, tuple(tuple(u) + w for w in sorted(combo))))
    return admissible


def test_head_cut_examples():
    piece, cut = head_cut(XI1, (), 1)
    assert render_term(piece.body) == "sigma(z1,alpha)" and cut == ((1,),)
    piece, cut = head_cut(XI1, (1,), 1)
    assert render_term(piece.body) == "sigma(z1,alpha)" and cut == ((1, 1),)
    # a short subtree is its own slice
    piece, cut = head_cut(XI1, (1, 1), 2)
    assert piece.body == XI1.subtree_at((1, 1)) and cut == ()


def test_uniqueness_against_brute_force():
    for n in (1, 2):
        for xi in all_trees(BINARY, 7):
            for u in xi.positions():
                admissible = brute_force_head_cut(xi, u, n)
                assert len(admissible) == 1
                piece, cut = head_cut(xi, u, n)
                assert admissible[0] == (piece.k, cut)


def test_recompose_identity():
    for n in (1, 2):
        for xi in all_trees(MIXED, 7):
            assert dec(xi, n).recompose() == xi


def test_single_slice_iff_low_height():
    for n in (1, 2):
        for xi in all_trees(BINARY, 9):
            assert (dec(xi, n).size == 1) == (xi.height < 2 * n)


def test_dec_slices_are_enumerated():
    catalog = {}
    for n in (1, 2):
        for xi in all_trees(BINARY, 9):
            for piece in dec(xi, n).slices():
                key = (n, piece.k)
                if key not in catalog:
                    catalog[key] = {p.body for p in
                                    enumerate_slices(BINARY, n, piece.k)}
                assert piece.body in catalog[key]


def test_dec_example():
    d = dec(XI1, 1)
    assert d.size == 3
    rendered = [render_term(p.body) for p in d.slices()]
    assert rendered == ["sigma(z1,alpha)", "sigma(z1,alpha)", "sigma(alpha,alpha)"]
    assert dec(parse_term("alpha"), 3).size == 1


def test_enumerate_slices_examples():
    assert [render_term(s.body) for s in enumerate_slices(BINARY, 1, 0)] == \
        ["alpha", "sigma(alpha,alpha)"]
    assert [render_term(s.body) for s in enumerate_slices(BINARY, 1, 2)] == \
        ["sigma(z1,z2)"]
    counts = [len(enumerate_slices(BINARY, 2, k)) for k in range(6)]
    assert counts == [26, 40, 26, 8, 1, 0]


def test_slice_sets_disjoint_by_breadth():
    for i in range(3):
        bodies_i = {s.body for s in enumerate_slices(BINARY, 1, i)}
        for j in range(3):
            if i != j:
                bodies_j = {s.body for s in enumerate_slices(BINARY, 1, j)}
                assert not (bodies_i & bodies_j)


def test_max_breadth():
    assert max_breadth(BINARY, 1) == 2
    assert max_breadth(BINARY, 2) == 4
    assert max_breadth(MONADIC, 3) == 1
    from treelogic.trees import RankedAlphabet
    leaves_only = RankedAlphabet({"alpha": 0, "beta": 0})
    assert max_breadth(leaves_only, 1) == 0
    # verified against enumeration emptiness at desk scale
    for alphabet, n in ((BINARY, 1), (BINARY, 2), (MONADIC, 2), (MONADIC, 3)):
        top = max_breadth(alphabet, n)
        assert enumerate_slices(alphabet, n, top)
        assert not enumerate_slices(alphabet, n, top + 1)


def test_slice_validation():
    with pytest.raises(VariableOutOfRange):
        Slice(parse_term("sigma(z2,z1)", allow_vars=True), 2)  # wrong order
    with pytest.raises(VariableOutOfRange):
        Slice(parse_term("sigma(z1,z1)", allow_vars=True), 2)  # reused


def test_slice_cap():
    with pytest.raises(ExplosionGuard) as info:
        enumerate_slices(BINARY, 2, 1, caps=Caps(slices=10))
    assert info.value.cap_name == "slices"


def test_substitution():
    piece, cut = head_cut(XI1, (), 1)
    rebuilt = piece.substitute([XI1.subtree_at(w) for w in cut])
    assert rebuilt == XI1
