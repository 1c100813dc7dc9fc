import itertools

import pytest

from conftest import BINARY, MIXED, WIDE, XI1
from macro_cases import build_cases, run_case
from treelogic.errors import BadMacroParams
from treelogic import macros
from treelogic.formulas import BFO, BFOMOD, BMSO, EvalCache, evaluate_at, fragment_of
from treelogic.semirings import BOOLEAN, NATURALS
from treelogic.trees import all_trees, parse_term


def test_macro_oracle_equivalence_small():
    """Development-scale version of the exhaustive equivalence check."""
    trees = list(all_trees(BINARY, 5))
    cache = EvalCache()
    for case in build_cases(BINARY):
        mismatches = list(itertools.islice(run_case(case, BINARY, trees, cache), 3))
        assert not mismatches, mismatches


def test_desc_examples_on_wide_tree():
    xi = parse_term("delta(alpha,beta,sigma(alpha,alpha))")
    f = macros.desc_plus(BOOLEAN, WIDE, "x", "y")
    assert evaluate_at(BOOLEAN, f, xi, {"x": (), "y": (3, 1)}) == 1
    assert evaluate_at(BOOLEAN, f, xi, {"x": (2,), "y": (3, 1)}) == 0


def test_desc_zero_length_is_equality():
    f = macros.desc_exact(BOOLEAN, BINARY, 0, "x", "y")
    for u in XI1.positions():
        for v in XI1.positions():
            assert evaluate_at(BOOLEAN, f, XI1, {"x": u, "y": v}) == (u == v)


def test_base_node_example():
    # position 1.1.1 at depth 3 has base 1.1.1 itself when n divides 3
    f = macros.base_node(BOOLEAN, BINARY, 3, "x", "y")
    assert evaluate_at(BOOLEAN, f, XI1, {"x": (1, 1, 1), "y": (1, 1, 1)}) == 1
    assert evaluate_at(BOOLEAN, f, XI1, {"x": (1, 1, 1), "y": ()}) == 0


def test_fragment_claims():
    S = NATURALS
    assert BFO in fragment_of(macros.desc(S, BINARY, "x", "y"), S)
    assert BFO in fragment_of(macros.sibl(S, BINARY, "x", "y"), S)
    assert BFO in fragment_of(macros.sibl_plus(S, BINARY, "x", "y"), S)
    assert BFO in fragment_of(macros.fork(S, BINARY, 2, "X", "y", ("z1", "z2")), S)
    assert BFO in fragment_of(macros.form_cut(S, BINARY, 1, 1, "x", ("y1",)), S)
    assert BFO in fragment_of(macros.on_lmp(S, BINARY, 1, "x", "y"), S)
    mod = macros.mod_expansion(S, BINARY, 2, 0, "x")
    flags = fragment_of(mod, S)
    assert BMSO in flags and BFO not in flags
    base = macros.base_node(S, BINARY, 2, "x", "y")
    flags = fragment_of(base, S)
    assert BFOMOD in flags and BFO not in flags


def test_mod_expansion_matches_atom():
    cache = EvalCache()
    for tree in all_trees(BINARY, 7):
        for n in (1, 2, 3):
            for m in range(n):
                atom = macros.mod_atom("x", n, m)
                expansion = macros.mod_expansion(BOOLEAN, BINARY, n, m, "x")
                for w in tree.positions():
                    a = evaluate_at(BOOLEAN, atom, tree, {"x": w}, cache=cache)
                    b = evaluate_at(BOOLEAN, expansion, tree, {"x": w}, cache=cache)
                    assert a == b == (1 if len(w) % n == m else 0)


def test_progress_property_of_bounded_and_strict_descent():
    cache = EvalCache()
    descp = macros.desc_plus(BOOLEAN, BINARY, "x", "y")
    bounded = macros.desc_between(BOOLEAN, BINARY, 1, 2, "x", "y")
    for tree in all_trees(BINARY, 7):
        for u in tree.positions():
            for v in tree.positions():
                env = {"x": u, "y": v}
                d = evaluate_at(BOOLEAN, descp, tree, env, cache=cache)
                b = evaluate_at(BOOLEAN, bounded, tree, env, cache=cache)
                if b:
                    assert d
                if d:
                    assert len(v) > len(u) and v[: len(u)] == u


def test_progress_tuple_decomposition():
    S = BOOLEAN
    step = macros.desc_plus(S, BINARY, "_px", "_py")
    combined = macros.progress_tuple(S, BINARY, step, ("_px", "_py"),
                                     "x", ("y1", "y2"))
    single = macros.desc_plus(S, BINARY, "x", "y")
    chain = macros.sibl_plus(S, BINARY, "y1", "y2")
    cache = EvalCache()
    for tree in all_trees(BINARY, 6):
        positions = tree.positions()
        for v in positions:
            for v1 in positions:
                for v2 in positions:
                    env = {"x": v, "y1": v1, "y2": v2}
                    whole = evaluate_at(S, combined, tree, env, cache=cache)
                    parts = (
                        evaluate_at(S, single, tree, {"x": v, "y": v1}, cache=cache)
                        and evaluate_at(S, single, tree, {"x": v, "y": v2}, cache=cache)
                        and evaluate_at(S, chain, tree, {"y1": v1, "y2": v2}, cache=cache)
                    )
                    assert whole == (1 if parts else 0)


def test_bad_macro_params():
    with pytest.raises(BadMacroParams):
        macros.desc_between(BOOLEAN, BINARY, 2, 1, "x", "y")
    with pytest.raises(BadMacroParams):
        macros.form_path_w(BOOLEAN, BINARY, (3,), ("y0", "y1"))
    with pytest.raises(BadMacroParams):
        macros.mod_expansion(BOOLEAN, BINARY, 2, 2, "x")
    with pytest.raises(BadMacroParams):
        macros.form_cut(BOOLEAN, BINARY, 0, 0, "x", ())


def test_form_cut_accepts_divergence_below_the_top():
    """Cut positions that split strictly below the slice root must still be
    chained correctly; a fixed divergence depth would reject them."""
    tall = "sigma(sigma(alpha,alpha),alpha)"  # height 2
    xi = parse_term(f"sigma(sigma({tall},{tall}),alpha)")  # size 13
    from treelogic.slicing import head_cut
    piece, cut = head_cut(xi, (), 2)
    assert cut == ((1, 1), (1, 2))
    f = macros.form_cut(BOOLEAN, BINARY, 2, 2, "x", ("y1", "y2"))
    env = {"x": (), "y1": (1, 1), "y2": (1, 2)}
    assert evaluate_at(BOOLEAN, f, xi, env) == 1
