"""From the branching closure to one set quantifier plus one universal.

A chosen set of positions decomposes uniquely into forks: each member's
fork collects its minimal strict descendants inside the set, in
left-to-right order.  Summing over all position sets while multiplying one
family member per fork reproduces the closure value at the root; the
formula below expresses exactly that.
"""

from __future__ import annotations

from dataclasses import dataclass

from .caps import Caps, DEFAULT_CAPS
from .errors import NotStepFamily
from . import macros
from .closure import (
    DescPlus,
    FormulaFamily,
    INPUT_VAR,
    eval_tc,
    output_var,
)
from .formulas import (
    And,
    BFOMOD,
    BFOMOD_STEP,
    BMSO,
    BMSO_STEP,
    EvalCache,
    ExistsFO,
    ExistsSO,
    ForallFO,
    Formula,
    In,
    Or,
    evaluate_at,
    fragment_of,
    intern,
    rename_free,
    step_dnf,
)
from .semirings import Semiring
from .trees import (
    Position,
    RankedAlphabet,
    Tree,
    is_strict_prefix,
    lex_lt,
)

SET_VAR = "X"
SCAN_VAR = "y"


def fork_var(i: int) -> str:
    return f"z{i}"


# -- fork combinatorics -------------------------------------------------------

def find_fork(xi: Tree, members, v: Position) -> tuple:
    """Branching degree and ordered tuple of the minimal strict descendants
    of v inside the member set."""
    v = tuple(v)
    members = {tuple(w) for w in members}
    below = [w for w in members if is_strict_prefix(v, w)]
    minimal = [w for w in below
               if not any(is_strict_prefix(u, w) for u in below)]
    minimal.sort()
    return len(minimal), tuple(minimal)


def forks_below(xi: Tree, members, top: Position, m: int) -> frozenset:
    """All forks of degree <= m whose head lies at or below `top`."""
    top = tuple(top)
    members = {tuple(w) for w in members}
    out = set()
    for v in members:
        if not (v == top or is_strict_prefix(top, v)):
            continue
        k, vs = find_fork(xi, members, v)
        if k <= m:
            out.add((v, vs))
    return frozenset(out)


def branching_degree(xi: Tree, members) -> int:
    members = {tuple(w) for w in members}
    if not members:
        return 0
    return max(find_fork(xi, members, v)[0] for v in members)


# -- the formula ----------------------------------------------------------------

@dataclass(frozen=True)
class PsiConstruction:
    family: FormulaFamily
    theta: Formula   # free variables: input, set, scan
    psi: Formula     # free variable: input
    step_fragment: str | None  # which step grammar all members satisfy


def classify_family(S: Semiring, family: FormulaFamily) -> str | None:
    flags = [fragment_of(member, S) for member in family.members]
    if all(BFOMOD_STEP in f for f in flags):
        return BFOMOD_STEP
    if all(BMSO_STEP in f for f in flags):
        return BMSO_STEP
    return None


def _member_at(family: FormulaFamily, k: int) -> Formula:
    """Family member k with input renamed to the scan variable and outputs
    to the fork variables."""
    mapping = {INPUT_VAR: SCAN_VAR}
    mapping.update({output_var(i): fork_var(i) for i in range(1, k + 1)})
    return rename_free(family.member(k), mapping)


def build_theta(S: Semiring, alphabet: RankedAlphabet,
                family: FormulaFamily) -> Formula:
    """One conjunct per scanned position: members of the set must lie below
    the input and contribute the family member matching their fork."""
    x, X, y = INPUT_VAR, SET_VAR, SCAN_VAR
    branches = []
    for k in range(family.m + 1):
        zs = tuple(fork_var(i) for i in range(1, k + 1))
        body = And(macros.fork(S, alphabet, k, X, y, zs), _member_at(family, k))
        for z in reversed(zs):
            body = ExistsFO(z, body)
        branches.append(body)
    spine = branches[0]
    for b in branches[1:]:
        spine = Or(spine, b)
    consequent = And(macros.desc(S, alphabet, x, y), spine)
    return intern(And(In(x, X), macros.imp_plus(In(y, X), consequent)))


def build_psi(S: Semiring, alphabet: RankedAlphabet, family: FormulaFamily,
              strict: bool = False) -> PsiConstruction:
    """The one-set-quantifier form of the closure of the family.

    The value equality holds for arbitrary families; `strict` additionally
    insists the members are step formulas, which is what the step
    normalization of theta needs.
    """
    fragment = classify_family(S, family)
    if strict and fragment is None:
        raise NotStepFamily("family members are not step formulas")
    theta = build_theta(S, alphabet, family)
    psi = intern(ExistsSO(SET_VAR, ForallFO(SCAN_VAR, theta)))
    return PsiConstruction(family, theta, psi, fragment)


def theta_to_step(S: Semiring, alphabet: RankedAlphabet,
                  family: FormulaFamily) -> Formula:
    """Step-formula normal form of theta: weights of each member are pulled
    out of the exists block, which is then closed with the Boolean exists
    (sound because a position has at most one fork in any set)."""
    if classify_family(S, family) is None:
        raise NotStepFamily("family members are not step formulas")
    x, X, y = INPUT_VAR, SET_VAR, SCAN_VAR
    branches = []
    for k in range(family.m + 1):
        zs = tuple(fork_var(i) for i in range(1, k + 1))
        fork_guard = macros.fork(S, alphabet, k, X, y, zs)
        for weight, guard in step_dnf(S, _member_at(family, k)):
            block = macros.uexists_many(zs, And(fork_guard, guard))
            branches.append(And(macros.Const(weight), block))
    spine = branches[0]
    for b in branches[1:]:
        spine = Or(spine, b)
    consequent = And(macros.desc(S, alphabet, x, y), spine)
    return intern(And(In(x, X), macros.imp_plus(In(y, X), consequent)))


EA_CAPS = Caps(so_positions=16)


def eval_psi(S: Semiring, construction: PsiConstruction, xi: Tree,
             caps: Caps = EA_CAPS, cache: EvalCache | None = None):
    """Value of the translated formula with the input pinned to the root."""
    return evaluate_at(S, construction.psi, xi, {INPUT_VAR: ()},
                       caps=caps, cache=cache)


@dataclass(frozen=True)
class CheckOutcome:
    tree: Tree
    expected: object
    actual: object

    @property
    def ok(self) -> bool:
        return self.expected == self.actual


def check_closure_equals_psi(S: Semiring, alphabet: RankedAlphabet,
                             family: FormulaFamily, trees,
                             caps: Caps = EA_CAPS,
                             cache: EvalCache | None = None):
    """Root value of the unbounded closure vs the translated formula."""
    construction = build_psi(S, alphabet, family)
    cache = cache if cache is not None else EvalCache()
    outcomes = []
    for tree in trees:
        expected = eval_tc(S, DescPlus(), family, tree, (), caps=caps,
                           cache=cache)
        actual = eval_psi(S, construction, tree, caps=caps, cache=cache)
        outcomes.append(CheckOutcome(tree, expected, actual))
    return outcomes
