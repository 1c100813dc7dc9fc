"""Table of derived-formula cases: builder + argument kinds + oracle.

Each case pairs a formula (with canonical free-variable names) against the
relational oracle from the macros module, plus the combinator macros whose
oracles are plain Boolean algebra.  The equivalence driver below runs a case
exhaustively over all argument tuples of a tree.
"""

import itertools
from dataclasses import dataclass

from treelogic import macros
from treelogic.formulas import And, In, Label, Not, evaluate_at
from treelogic.semirings import BOOLEAN
from treelogic.slicing import enumerate_slices
from treelogic.trees import render_term


@dataclass(frozen=True)
class MacroCase:
    case_id: str
    variables: tuple       # variable names, first-order lowercase / sets upper
    kinds: str             # one char per variable: p = position, S = set
    build: object          # (S, alphabet) -> Formula
    oracle: object         # (tree, args) -> bool


def _positions_args(tree, kinds):
    positions = tree.positions()
    n = len(positions)
    subsets = [frozenset(positions[i] for i in range(n) if mask & (1 << i))
               for mask in range(1 << n)]
    pools = [positions if k == "p" else subsets for k in kinds]
    return itertools.product(*pools)


def run_case(case: MacroCase, alphabet, trees, cache=None):
    """Yield mismatches between the formula and the oracle; empty means the
    case holds exhaustively."""
    S = BOOLEAN
    formula = case.build(S, alphabet)
    checked = 0
    for tree in trees:
        for args in _positions_args(tree, case.kinds):
            env = dict(zip(case.variables, args))
            got = evaluate_at(S, formula, tree, env, cache=cache)
            want = 1 if case.oracle(tree, args) else 0
            checked += 1
            if got != want:
                yield (case.case_id, render_term(tree), args, got, want)
    if checked == 0:
        yield (case.case_id, "-", (), "no tuples", "some tuples")


def build_cases(alphabet, slice_depths=(1, 2)):
    cases = []

    def add(case_id, variables, kinds, build, oracle):
        cases.append(MacroCase(case_id, tuple(variables), kinds, build, oracle))

    add("eq", "xy", "pp", lambda S, A: macros.eq_pos(S, "x", "y"),
        lambda t, a: macros.oracle("eq", (), t, a))
    add("lt", "xy", "pp", lambda S, A: macros.lt_pos(S, "x", "y"),
        lambda t, a: macros.oracle("lt", (), t, a))
    add("edge", "xy", "pp", lambda S, A: macros.edge_any(S, A, "x", "y"),
        lambda t, a: macros.oracle("edge", (), t, a))
    add("root", "x", "p", lambda S, A: macros.root(S, A, "x"),
        lambda t, a: macros.oracle("root", (), t, a))
    add("desc", "xy", "pp", lambda S, A: macros.desc(S, A, "x", "y"),
        lambda t, a: macros.oracle("desc", (), t, a))
    add("desc+", "xy", "pp", lambda S, A: macros.desc_plus(S, A, "x", "y"),
        lambda t, a: macros.oracle("desc+", (), t, a))
    add("desc-set", ("x", "Y"), "pS",
        lambda S, A: macros.desc_set(S, A, "x", "Y"),
        lambda t, a: macros.oracle("desc-set", (), t, a))
    add("sibl", "xy", "pp", lambda S, A: macros.sibl(S, A, "x", "y"),
        lambda t, a: macros.oracle("sibl", (), t, a))
    add("sibl+", "xy", "pp", lambda S, A: macros.sibl_plus(S, A, "x", "y"),
        lambda t, a: macros.oracle("sibl+", (), t, a))

    for n in (1, 2):
        add(f"sibl-n:{n}", "xy", "pp",
            lambda S, A, n=n: macros.sibl_n(S, A, n, "x", "y"),
            lambda t, a, n=n: macros.oracle("sibl-n", (n,), t, a))

    for lo, hi in ((0, 0), (1, 1), (2, 2), (0, 2), (1, 3)):
        add(f"desc-range:{lo}-{hi}", "xy", "pp",
            lambda S, A, lo=lo, hi=hi: macros.desc_between(S, A, lo, hi, "x", "y"),
            lambda t, a, lo=lo, hi=hi: macros.oracle("desc-range", (lo, hi), t, a))

    for word in ((), (1,), (2,), (1, 1), (2, 1), (1, 2, 1)):
        if word and max(word) > alphabet.maxrk:
            continue
        add(f"y=xw:{'.'.join(map(str, word)) or 'e'}", "xy", "pp",
            lambda S, A, w=word: macros.y_eq_x_word(S, A, w, "x", "y"),
            lambda t, a, w=word: macros.oracle("y=xw", (w,), t, a))

    for n in (0, 1, 2, 3):
        add(f"height>=:{n}", "x", "p",
            lambda S, A, n=n: macros.height_ge(S, A, n, "x"),
            lambda t, a, n=n: macros.oracle("height>=", (n,), t, a))

    for word in ((1,), (2,), (1, 2)):
        if max(word) > alphabet.maxrk:
            continue
        variables = tuple(f"y{i}" for i in range(len(word) + 1))
        add(f"form-path-w:{'.'.join(map(str, word))}", variables,
            "p" * len(variables),
            lambda S, A, w=word, v=variables: macros.form_path_w(S, A, w, v),
            lambda t, a, w=word: macros.oracle("form-path-w", (w,), t, a))

    for count in (2, 3):
        variables = tuple(f"y{i}" for i in range(count))
        add(f"form-path:{count}", variables, "p" * count,
            lambda S, A, v=variables: macros.form_path(S, A, v),
            lambda t, a: macros.oracle("form-path", (), t, a))

    for count in (1, 2, 3):
        variables = tuple(f"y{i}" for i in range(count))
        add(f"form-lmp:{count}", variables, "p" * count,
            lambda S, A, v=variables: macros.form_lmp(S, A, v),
            lambda t, a: macros.oracle("form-lmp", (), t, a))

    for length in (0, 1, 2):
        add(f"on-lmp:{length}", "xy", "pp",
            lambda S, A, n=length: macros.on_lmp(S, A, n, "x", "y"),
            lambda t, a, n=length: macros.oracle("on-lmp", (n,), t, a))

    for n in slice_depths:
        for k in (0, 1, 2):
            variables = ("x",) + tuple(f"y{i}" for i in range(1, k + 1))
            add(f"form-cut:{n},{k}", variables, "p" * (k + 1),
                lambda S, A, n=n, k=k, v=variables: macros.form_cut(
                    S, A, n, k, v[0], v[1:]),
                lambda t, a, n=n, k=k: macros.oracle("form-cut", (n, k), t, a))

    patterns = []
    for n in slice_depths:
        for k in (0, 1, 2):
            pieces = enumerate_slices(alphabet, n, k)
            chosen = pieces[:2] + pieces[-1:]
            patterns.extend((piece.body, k) for piece in chosen)
    seen = set()
    for body, k in patterns:
        if body in seen:
            continue
        seen.add(body)
        variables = ("x",) + tuple(f"y{i}" for i in range(1, k + 1))
        add(f"check:{render_term(body)}", variables, "p" * (k + 1),
            lambda S, A, b=body, v=variables: macros.check_slice(
                S, A, b, v[0], v[1:]),
            lambda t, a, b=body: macros.oracle("check", (b,), t, a))

    for n in (0, 1, 2):
        add(f"len>:{n}", "y", "p",
            lambda S, A, n=n: macros.len_gt(S, A, n, "y"),
            lambda t, a, n=n: macros.oracle("|y|>n", (n,), t, a))

    for n in (1, 2):
        add(f"div-in:{n}", ("y", "X"), "pS",
            lambda S, A, n=n: macros.div_in(S, A, n, "y", "X"),
            lambda t, a, n=n: macros.oracle("y/n-in", (n,), t, a))

    for m in (0, 1, 2):
        add(f"depth-in:{m}", ("X",), "S",
            lambda S, A, m=m: macros.depth_in(S, A, m, "X"),
            lambda t, a, m=m: macros.oracle("m-in-depths", (m,), t, a))

    for n in (1, 2, 3):
        for m in range(n):
            add(f"mod:{n},{m}", "x", "p",
                lambda S, A, n=n, m=m: macros.mod_atom("x", n, m),
                lambda t, a, n=n, m=m: macros.oracle("mod", (n, m), t, a))
            add(f"mod-def:{n},{m}", "x", "p",
                lambda S, A, n=n, m=m: macros.mod_expansion(S, A, n, m, "x"),
                lambda t, a, n=n, m=m: macros.oracle("mod", (n, m), t, a))

    for n in (1, 2, 3):
        add(f"base:{n}", "xy", "pp",
            lambda S, A, n=n: macros.base_node(S, A, n, "x", "y"),
            lambda t, a, n=n: macros.oracle("base", (n,), t, a))

    for k in (0, 1, 2):
        variables = ("X", "y") + tuple(f"z{i}" for i in range(1, k + 1))
        add(f"fork:{k}", variables, "Sp" + "p" * k,
            lambda S, A, k=k, v=variables: macros.fork(S, A, k, v[0], v[1], v[2:]),
            lambda t, a, k=k: macros.oracle("fork", (k,), t,
                                            (a[0], a[1]) + tuple(a[2:])))

    # combinator macros against plain Boolean algebra
    def a_of(t, args):
        return t.label_at(args[0]) == "alpha"

    def b_of(t, args):
        return t.label_at(args[1]) == "sigma"

    atom_a = lambda: Label("alpha", "x")
    atom_b = lambda: Label("sigma", "y")
    add("uor", "xy", "pp",
        lambda S, A: macros.uor(atom_a(), atom_b()),
        lambda t, a: a_of(t, a) or b_of(t, a))
    add("imp+b", "xy", "pp",
        lambda S, A: macros.imp_plus_b(atom_a(), atom_b()),
        lambda t, a: (not a_of(t, a)) or b_of(t, a))
    add("imp+", "xy", "pp",
        lambda S, A: macros.imp_plus(atom_a(), atom_b()),
        lambda t, a: (not a_of(t, a)) or b_of(t, a))
    add("uexists1", "x", "p",
        lambda S, A: macros.uexists("y", And(macros.desc_plus(S, A, "x", "y"),
                                             Label("alpha", "y"))),
        lambda t, a: any(t.label_at(w) == "alpha"
                         and len(w) > len(a[0]) and w[:len(a[0])] == a[0]
                         for w in t.positions()))
    add("uexists2", "x", "p",
        lambda S, A: macros.uexists_so("Z", And(In("x", "Z"), Not(In("x", "Z")))),
        lambda t, a: False)

    return cases
