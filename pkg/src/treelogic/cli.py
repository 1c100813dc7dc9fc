"""Command-line surface: evaluation, construction, and check harnesses.

Exit codes: 0 success, 1 a check found a counterexample, 2 bad input or an
exceeded enumeration cap.
"""

from __future__ import annotations

import argparse
import os
import random
import sys

from .caps import Caps
from .errors import TreeLogicError
from . import macros
from .automata import normalize_final, parse_wta, recognize
from .automata_to_closure import build_phi, check_recognize_equals_closure
from .closure import (
    eval_tc,
    parse_family,
    parse_progress,
    render_family,
)
from .forks import build_psi, check_closure_equals_psi
from .formulas import (
    EvalCache,
    evaluate,
    encode,
    is_so_name,
    parse_formula,
    render_formula,
    step_dnf,
)
from .semirings import by_name
from .slicing import dec
from .trees import (
    RankedAlphabet,
    all_trees,
    parse_position,
    parse_term,
    random_tree,
    render_term,
)

DEFAULT_ALPHABET = "sigma:2 alpha:0"


_FILE_SUFFIXES = (".wta", ".phi", ".mso", ".tree", ".txt")


def _read_text_arg(value: str) -> str:
    """Accept literal input or a path to a file holding it."""
    if os.path.exists(value):
        with open(value, "r", encoding="utf-8") as handle:
            return handle.read()
    if value.endswith(_FILE_SUFFIXES):
        raise TreeLogicError(f"no such file: {value}")
    return value


def _strip_comments(text: str) -> str:
    lines = [ln for ln in text.splitlines() if not ln.lstrip().startswith("#")]
    return "\n".join(lines).strip()


def _tree_arg(value: str, alphabet=None):
    return parse_term(_strip_comments(_read_text_arg(value)), alphabet)


def _caps(args) -> Caps:
    return Caps(so_positions=args.cap_so, slices=args.cap_slices,
                closure_work=args.cap_closure)


def _tree_source(spec: str, alphabet: RankedAlphabet, seed: int):
    kind, _, rest = spec.partition(":")
    if kind == "exhaustive":
        if not rest.isdigit():
            raise TreeLogicError(f"bad tree spec {spec!r}; use exhaustive:MAXSIZE")
        return list(all_trees(alphabet, int(rest))), None
    if kind == "random":
        count_text, _, size_text = rest.partition(":")
        if not (count_text.isdigit() and size_text.isdigit()):
            raise TreeLogicError(f"bad tree spec {spec!r}; use random:COUNT:MAXSIZE")
        rng = random.Random(seed)
        trees = [random_tree(rng, alphabet, int(size_text))
                 for _ in range(int(count_text))]
        return trees, seed
    raise TreeLogicError(f"bad tree spec {spec!r}")


def _emit_outcomes(args, outcomes, seed):
    failures = [o for o in outcomes if not o.ok]
    if args.format == "tab":
        for o in outcomes:
            print(f"{render_term(o.tree)}\t{o.expected}\t{o.actual}\t"
                  f"{'ok' if o.ok else 'FAIL'}")
    else:
        for o in failures:
            print(f"counterexample: {render_term(o.tree)} "
                  f"expected={o.expected} actual={o.actual}")
    if seed is not None:
        print(f"seed {seed}")
    verdict = "pass" if not failures else "fail"
    print(f"RESULT {verdict} checked={len(outcomes)}")
    return 0 if not failures else 1


def _cmd_eval_wta(args) -> int:
    automaton = parse_wta(_read_text_arg(args.automaton))
    tree = _tree_arg(args.tree, automaton.alphabet)
    print(automaton.semiring.render(recognize(automaton, tree)))
    return 0


def _cmd_eval_formula(args) -> int:
    S = by_name(args.semiring)
    formula = parse_formula(_strip_comments(_read_text_arg(args.formula)), S)
    tree = _tree_arg(args.tree)
    assignment = {}
    for item in args.assign or ():
        name, _, value = item.partition("=")
        if is_so_name(name):
            assignment[name] = frozenset(
                parse_position(p) for p in value.split(",") if p
            )
        else:
            assignment[name] = parse_position(value)
    encoded = encode(tree, assignment, set(assignment))
    print(S.render(evaluate(S, formula, encoded, caps=_caps(args))))
    return 0


def _cmd_slice(args) -> int:
    tree = _tree_arg(args.tree)
    print(dec(tree, args.n).render())
    return 0


def _macro_args(tokens):
    out = []
    for tok in tokens:
        if tok.isdigit():
            out.append(int(tok))
        else:
            out.append(tok)
    return out


def _cmd_macro(args) -> int:
    S = by_name(args.semiring)
    alphabet = RankedAlphabet.parse(args.alphabet)
    name = args.name
    rest = args.params
    builders = {
        "eq": lambda: macros.eq_pos(S, rest[0], rest[1]),
        "lt": lambda: macros.lt_pos(S, rest[0], rest[1]),
        "edge": lambda: macros.edge_any(S, alphabet, rest[0], rest[1]),
        "root": lambda: macros.root(S, alphabet, rest[0]),
        "desc": lambda: macros.desc(S, alphabet, rest[0], rest[1]),
        "desc+": lambda: macros.desc_plus(S, alphabet, rest[0], rest[1]),
        "desc-set": lambda: macros.desc_set(S, alphabet, rest[0], rest[1]),
        "desc-i": lambda: macros.desc_exact(S, alphabet, int(rest[0]), rest[1], rest[2]),
        "desc-range": lambda: macros.desc_between(
            S, alphabet, int(rest[0]), int(rest[1]), rest[2], rest[3]),
        "sibl": lambda: macros.sibl(S, alphabet, rest[0], rest[1]),
        "sibl+": lambda: macros.sibl_plus(S, alphabet, rest[0], rest[1]),
        "sibl-n": lambda: macros.sibl_n(S, alphabet, int(rest[0]), rest[1], rest[2]),
        "height>=": lambda: macros.height_ge(S, alphabet, int(rest[0]), rest[1]),
        "form-path-w": lambda: macros.form_path_w(
            S, alphabet, parse_position(rest[0]), tuple(rest[1:])),
        "form-path": lambda: macros.form_path(S, alphabet, tuple(rest)),
        "form-lmp": lambda: macros.form_lmp(S, alphabet, tuple(rest)),
        "on-lmp": lambda: macros.on_lmp(S, alphabet, int(rest[0]), rest[1], rest[2]),
        "form-cut": lambda: macros.form_cut(
            S, alphabet, int(rest[0]), int(rest[1]), rest[2], tuple(rest[3:])),
        "check": lambda: macros.check_slice(
            S, alphabet, parse_term(rest[0], allow_vars=True), rest[1],
            tuple(rest[2:])),
        "y=xw": lambda: macros.y_eq_x_word(
            S, alphabet, parse_position(rest[0]) if rest[0] != "e" else (),
            rest[1], rest[2]),
        "len>": lambda: macros.len_gt(S, alphabet, int(rest[0]), rest[1]),
        "div-in": lambda: macros.div_in(S, alphabet, int(rest[0]), rest[1], rest[2]),
        "depth-in": lambda: macros.depth_in(S, alphabet, int(rest[0]), rest[1]),
        "mod": lambda: macros.mod_atom(rest[0], int(rest[1]), int(rest[2])),
        "mod-def": lambda: macros.mod_expansion(
            S, alphabet, int(rest[1]), int(rest[2]), rest[0]),
        "base": lambda: macros.base_node(S, alphabet, int(rest[0]), rest[1], rest[2]),
        "fork": lambda: macros.fork(
            S, alphabet, int(rest[0]), rest[1], rest[2], tuple(rest[3:])),
    }
    if name not in builders:
        raise TreeLogicError(
            f"unknown macro {name!r}; available: {', '.join(sorted(builders))}"
        )
    try:
        formula = builders[name]()
    except IndexError:
        raise TreeLogicError(f"macro {name!r}: missing parameters") from None
    print(render_formula(formula, S))
    return 0


def _cmd_eval_tc(args) -> int:
    S = by_name(args.semiring) if args.semiring else None
    S, _, family = parse_family(_read_text_arg(args.family), S)
    progress = parse_progress(args.progress)
    tree = _tree_arg(args.tree)
    at = parse_position(args.at)
    value = eval_tc(S, progress, family, tree, at, caps=_caps(args))
    print(S.render(value))
    return 0


def _cmd_build_phi(args) -> int:
    automaton = parse_wta(_read_text_arg(args.automaton))
    normalized = normalize_final(automaton)
    construction = build_phi(normalized, caps=_caps(args))
    text = render_family(normalized.semiring, construction.family,
                         normalized.alphabet)
    header = ""
    if normalized is not automaton:
        header = ("# source automaton was normalized: fresh final state 0, "
                  "original states shifted up by one\n")
    header += f"# bounded closure depth: {2 * normalized.n_states}\n"
    _write_output(args.output, header + text)
    return 0


def _cmd_build_ea(args) -> int:
    S = by_name(args.semiring) if args.semiring else None
    S, alphabet, family = parse_family(_read_text_arg(args.family), S)
    if alphabet is None:
        alphabet = RankedAlphabet.parse(args.alphabet)
    construction = build_psi(S, alphabet, family)
    label = construction.step_fragment or "not a step family"
    text = (f"# semiring {S.name}\n# alphabet {alphabet.render()}\n"
            f"# members classified as: {label}\n"
            f"{render_formula(construction.psi, S)}\n")
    _write_output(args.output, text)
    return 0


def _cmd_check_bbtc(args) -> int:
    automaton = parse_wta(_read_text_arg(args.automaton))
    normalized = normalize_final(automaton)
    if normalized is not automaton:
        print(f"note: automaton normalized, states now 0..{normalized.n_states - 1}")
    trees, seed = _tree_source(args.trees, automaton.alphabet, args.seed)
    outcomes = check_recognize_equals_closure(normalized, trees,
                                              caps=_caps(args),
                                              cache=EvalCache())
    return _emit_outcomes(args, outcomes, seed)


def _cmd_check_ea(args) -> int:
    S = by_name(args.semiring) if args.semiring else None
    S, alphabet, family = parse_family(_read_text_arg(args.family), S)
    if alphabet is None:
        alphabet = RankedAlphabet.parse(args.alphabet)
    trees, seed = _tree_source(args.trees, alphabet, args.seed)
    outcomes = check_closure_equals_psi(S, alphabet, family, trees,
                                        cache=EvalCache())
    return _emit_outcomes(args, outcomes, seed)


def _cmd_dnf(args) -> int:
    S = by_name(args.semiring)
    formula = parse_formula(_strip_comments(_read_text_arg(args.formula)), S)
    for weight, guard in step_dnf(S, formula):
        if args.format == "tab":
            print(f"{S.render(weight)}\t{render_formula(guard, S)}")
        else:
            print(f"{S.render(weight)}: {render_formula(guard, S)}")
    return 0


def _write_output(path, text):
    if path and path != "-":
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


_DEFAULTS = {
    "semiring": None,
    "alphabet": DEFAULT_ALPHABET,
    "seed": 20240801,
    "cap_so": 20,
    "cap_slices": 10000,
    "cap_closure": 10_000_000,
    "format": "human",
}


def _common_options() -> argparse.ArgumentParser:
    # SUPPRESS keeps a subcommand from clobbering values parsed before it
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--semiring", help="bool | nat | tropical | viterbi")
    common.add_argument("--alphabet", help="ranked alphabet, e.g. 'sigma:2 alpha:0'")
    common.add_argument("--seed", type=int)
    common.add_argument("--cap-so", type=int,
                        help="max positions under a set quantifier")
    common.add_argument("--cap-slices", type=int)
    common.add_argument("--cap-closure", type=int)
    common.add_argument("--format", choices=("human", "tab"))
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="treelogic",
        description="Weighted tree automata, weighted MSO, and branching "
                    "closure translations over exact semirings.",
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=lambda **kw: argparse.ArgumentParser(
                                    parents=[common], **kw))

    p = sub.add_parser("eval-wta", help="recognized weight of a tree")
    p.add_argument("automaton")
    p.add_argument("tree")
    p.set_defaults(func=_cmd_eval_wta)

    p = sub.add_parser("eval-formula", help="weight of a formula on a tree")
    p.add_argument("formula")
    p.add_argument("tree")
    p.add_argument("--assign", action="append",
                   help="VAR=POS or SETVAR=POS,POS,... (positions like 1.2, e)")
    p.set_defaults(func=_cmd_eval_formula, needs_semiring=True)

    p = sub.add_parser("slice", help="decompose a tree into depth-n slices")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("tree")
    p.set_defaults(func=_cmd_slice)

    p = sub.add_parser("macro", help="print the expansion of a derived formula")
    p.add_argument("name")
    p.add_argument("params", nargs="*")
    p.set_defaults(func=_cmd_macro)

    p = sub.add_parser("eval-tc", help="branching closure value of a family")
    p.add_argument("--progress", required=True, help="desc+ or bounded:N")
    p.add_argument("--family", required=True)
    p.add_argument("--tree", required=True)
    p.add_argument("--at", default="e", help="evaluation position")
    p.set_defaults(func=_cmd_eval_tc)

    p = sub.add_parser("build-phi",
                       help="compile an automaton into a closure family")
    p.add_argument("automaton")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=_cmd_build_phi)

    p = sub.add_parser("build-ea",
                       help="translate a family into one set quantifier "
                            "plus one universal")
    p.add_argument("family")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=_cmd_build_ea)

    p = sub.add_parser("check-bbtc",
                       help="recognized weight vs compiled bounded closure")
    p.add_argument("automaton")
    p.add_argument("--trees", required=True,
                   help="exhaustive:MAXSIZE or random:COUNT:MAXSIZE")
    p.set_defaults(func=_cmd_check_bbtc)

    p = sub.add_parser("check-ea",
                       help="closure value vs translated formula")
    p.add_argument("family")
    p.add_argument("--trees", required=True)
    p.set_defaults(func=_cmd_check_ea)

    p = sub.add_parser("dnf", help="step-formula disjunctive normal form")
    p.add_argument("formula")
    p.set_defaults(func=_cmd_dnf)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, value in _DEFAULTS.items():
        if not hasattr(args, name):
            setattr(args, name, value)
    if getattr(args, "needs_semiring", False) and not args.semiring:
        print("error: this command needs --semiring", file=sys.stderr)
        return 2
    if args.semiring is None and args.command in ("macro", "dnf"):
        args.semiring = "bool"
    try:
        return args.func(args)
    except TreeLogicError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
