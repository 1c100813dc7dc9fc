"""The branching closure operator on formula families.

A family supplies one member per branching degree k: member k has the input
variable x and output variables y1..yk.  A progress formula constrains every
input-to-output step to move strictly down the tree, which bounds the
iteration depth by the tree size.  The direct evaluator works on a
level-indexed table; the formula expansion of each level exists for
cross-checking.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .caps import Caps, DEFAULT_CAPS
from .errors import (
    ExplosionGuard,
    NotProgressFormula,
    ParseError,
    PositionOutOfRange,
)
from . import macros
from .formulas import (
    And,
    BFO,
    Const,
    Edge,
    EvalCache,
    ExistsFO,
    Formula,
    Label,
    Leq,
    Mod,
    Not,
    Or,
    _core_flags,
    evaluate_at,
    free_vars,
    fresh_var,
    intern,
    parse_formula,
    rename_free,
    render_formula,
)
from .semirings import BOOLEAN, Semiring, by_name
from .trees import (
    Position,
    RankedAlphabet,
    Tree,
    all_trees,
    are_siblings_ordered,
    is_strict_prefix,
)

INPUT_VAR = "x"


def output_var(i: int) -> str:
    return f"y{i}"


@dataclass(frozen=True)
class FormulaFamily:
    """Members indexed by branching degree; member k uses x and y1..yk."""

    members: tuple

    def __init__(self, members):
        members = tuple(intern(f) for f in members)
        if not members:
            raise ParseError("family needs at least the degree-0 member")
        for k, member in enumerate(members):
            allowed = {INPUT_VAR} | {output_var(i) for i in range(1, k + 1)}
            extra = free_vars(member) - allowed
            if extra:
                raise ParseError(
                    f"member {k} has unexpected free variables {sorted(extra)}"
                )
        object.__setattr__(self, "members", members)

    @property
    def m(self) -> int:
        return len(self.members) - 1

    def member(self, k: int) -> Formula:
        return self.members[k]


# -- progress formulas --------------------------------------------------------

class Progress:
    """Both a relation on positions and a two-variable formula."""

    def holds(self, xi: Tree, u: Position, v: Position) -> bool:
        raise NotImplementedError

    def formula(self, S: Semiring, alphabet: RankedAlphabet,
                x: str, y: str) -> Formula:
        raise NotImplementedError


@dataclass(frozen=True)
class DescPlus(Progress):
    name: str = "desc+"

    def holds(self, xi, u, v):
        return is_strict_prefix(u, v)

    def formula(self, S, alphabet, x, y):
        return macros.desc_plus(S, alphabet, x, y)


@dataclass(frozen=True)
class DescBounded(Progress):
    bound: int

    def __post_init__(self):
        if self.bound < 1:
            raise ParseError("progress bound must be >= 1")

    @property
    def name(self):
        return f"bounded:{self.bound}"

    def holds(self, xi, u, v):
        return is_strict_prefix(u, v) and len(v) - len(u) <= self.bound

    def formula(self, S, alphabet, x, y):
        return macros.desc_between(S, alphabet, 1, self.bound, x, y)


class CustomProgress(Progress):
    """User-supplied progress formula, validated before use."""

    def __init__(self, S: Semiring, alphabet: RankedAlphabet, formula: Formula,
                 x: str, y: str, check_size: int = 7):
        formula = intern(formula)
        if BFO not in _core_flags(S, formula):
            raise NotProgressFormula("progress formulas must be in the "
                                     "negation-and first-order fragment")
        if free_vars(formula) - {x, y}:
            raise NotProgressFormula("progress formulas take exactly two variables")
        self.S = S
        self._formula = formula
        self.vars = (x, y)
        self.name = "custom"
        self._cache = EvalCache()
        for xi in all_trees(alphabet, check_size):
            for u in xi.positions():
                for v in xi.positions():
                    if self.holds(xi, u, v) and not is_strict_prefix(u, v):
                        raise NotProgressFormula(
                            f"holds on a non-descendant pair {u} -> {v}"
                        )

    def holds(self, xi, u, v):
        value = evaluate_at(self.S, self._formula, xi,
                            {self.vars[0]: u, self.vars[1]: v},
                            cache=self._cache)
        return not self.S.is_zero(value)

    def formula(self, S, alphabet, x, y):
        return rename_free(self._formula, {self.vars[0]: x, self.vars[1]: y})


def parse_progress(text: str) -> Progress:
    if text == "desc+":
        return DescPlus()
    if text.startswith("bounded:"):
        try:
            return DescBounded(int(text.split(":", 1)[1]))
        except ValueError:
            raise ParseError(f"bad progress bound in {text!r}") from None
    raise ParseError(f"unknown progress {text!r}; use desc+ or bounded:N")


# -- direct evaluation ---------------------------------------------------------

@lru_cache(maxsize=None)
def _splits(total: int, parts: int) -> tuple:
    """Ordered ways to write total as a sum of `parts` positive integers."""
    if parts == 0:
        return ((),) if total == 0 else ()
    if parts == 1:
        return ((total,),) if total >= 1 else ()
    out = []
    for first in range(1, total - parts + 2):
        for rest in _splits(total - first, parts - 1):
            out.append((first,) + rest)
    return tuple(out)


def _progress_tuples(succ, k: int):
    """Sequences of k successors with consecutive entries in distinct,
    left-to-right ordered branches."""
    out = []

    def extend(seq):
        if len(seq) == k:
            out.append(tuple(seq))
            return
        for w in succ:
            if seq and not are_siblings_ordered(seq[-1], w):
                continue
            seq.append(w)
            extend(seq)
            seq.pop()

    extend([])
    return out


class ClosureRun:
    """Level table of the branching closure of a family on one tree."""

    def __init__(self, S: Semiring, progress: Progress, family: FormulaFamily,
                 xi: Tree, caps: Caps = DEFAULT_CAPS,
                 cache: EvalCache | None = None, max_level: int | None = None):
        self.S = S
        self.xi = xi
        self.family = family
        positions = xi.positions()
        size = len(positions)
        m = family.m
        if m >= 1:
            work = m * size**m
            if work > caps.closure_work:
                raise ExplosionGuard("closure_work", caps.closure_work, work)
        self.max_level = size if max_level is None else max_level
        cache = cache if cache is not None else EvalCache()

        succ = {v: [w for w in positions if progress.holds(xi, v, w)]
                for v in positions}
        member_weight = {}
        for k in range(1, m + 1):
            member = family.member(k)
            names = [output_var(i) for i in range(1, k + 1)]
            for v in positions:
                edges = []
                for tup in _progress_tuples(succ[v], k):
                    env = {INPUT_VAR: v}
                    env.update(zip(names, tup))
                    w = evaluate_at(S, member, xi, env, caps=caps, cache=cache)
                    if not S.is_zero(w):
                        edges.append((tup, w))
                member_weight[(k, v)] = edges

        table = {}
        for v in positions:
            table[(v, 1)] = evaluate_at(S, family.member(0), xi,
                                        {INPUT_VAR: v}, caps=caps, cache=cache)
        for level in range(2, self.max_level + 1):
            for v in positions:
                acc = S.zero
                for k in range(1, m + 1):
                    for tup, weight in member_weight[(k, v)]:
                        branch = S.zero
                        for split in _splits(level - 1, k):
                            term = S.one
                            for w, l_i in zip(tup, split):
                                term = S.mul(term, table[(w, l_i)])
                                if S.is_zero(term):
                                    break
                            branch = S.add(branch, term)
                        acc = S.add(acc, S.mul(weight, branch))
                table[(v, level)] = acc
        self.table = table

    def level(self, v: Position, level: int):
        if level > self.max_level:
            return self.S.zero
        return self.table[(tuple(v), level)]

    def value(self, v: Position):
        v = tuple(v)
        return self.S.sum(self.table[(v, level)]
                          for level in range(1, min(self.max_level, self.xi.size) + 1))


def eval_tc(S: Semiring, progress: Progress, family: FormulaFamily, xi: Tree,
            v: Position = (), caps: Caps = DEFAULT_CAPS,
            cache: EvalCache | None = None):
    """Value of the branching closure at a position (default: the root)."""
    if tuple(v) not in set(xi.positions()):
        raise PositionOutOfRange(f"position {v} not in tree")
    return ClosureRun(S, progress, family, xi, caps=caps, cache=cache).value(v)


def eval_tc_levels(S: Semiring, progress: Progress, family: FormulaFamily,
                   xi: Tree, v: Position = (), caps: Caps = DEFAULT_CAPS,
                   cache: EvalCache | None = None,
                   max_level: int | None = None) -> dict:
    run = ClosureRun(S, progress, family, xi, caps=caps, cache=cache,
                     max_level=max_level)
    return {level: run.level(v, level) for level in range(1, run.max_level + 1)}


# -- formula expansion ---------------------------------------------------------

def build_tc_level(S: Semiring, alphabet: RankedAlphabet, progress: Progress,
                   family: FormulaFamily, level: int, x: str = INPUT_VAR) -> Formula:
    """The level-indexed closure formula, with fresh bound output variables.

    Grows fast with the level; meant for cross-checking the direct evaluator
    on small instances.
    """
    if level < 1:
        raise ParseError("closure level must be >= 1")
    if level == 1:
        return rename_free(family.member(0), {INPUT_VAR: x})
    m = family.m
    step = progress.formula(S, alphabet, "_px", "_py")
    disjuncts = []
    for k in range(1, m + 1):
        splits = _splits(level - 1, k)
        if not splits:
            continue
        ys = tuple(fresh_var("y") for _ in range(k))
        guard = macros.progress_tuple(S, alphabet, step, ("_px", "_py"), x, ys)
        member = rename_free(
            family.member(k),
            {INPUT_VAR: x, **{output_var(i + 1): ys[i] for i in range(k)}},
        )
        split_parts = []
        for split in splits:
            split_parts.append(macros.land(S, (
                build_tc_level(S, alphabet, progress, family, l_i, ys[i])
                for i, l_i in enumerate(split)
            )))
        body = And(guard, And(member, _big_or(S, split_parts)))
        for y in reversed(ys):
            body = ExistsFO(y, body)
        disjuncts.append(body)
    return intern(_big_or(S, disjuncts))


def _big_or(S, parts):
    parts = list(parts)
    if not parts:
        return Const(S.zero)
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def build_tc(S: Semiring, alphabet: RankedAlphabet, progress: Progress,
             family: FormulaFamily, size: int, x: str = INPUT_VAR) -> Formula:
    """Disjunction of the level formulas up to the given tree size."""
    return intern(_big_or(S, (
        build_tc_level(S, alphabet, progress, family, level, x)
        for level in range(1, size + 1)
    )))


def lift_bounded(S: Semiring, alphabet: RankedAlphabet, family: FormulaFamily,
                 bound: int) -> FormulaFamily:
    """Push a depth bound into the members so the unbounded progress formula
    computes the same closure."""
    if bound < 1:
        raise ParseError("bound must be >= 1")
    step = macros.desc_between(S, alphabet, 1, bound, "_px", "_py")
    members = [family.member(0)]
    for k in range(1, family.m + 1):
        ys = tuple(output_var(i) for i in range(1, k + 1))
        guard = macros.progress_tuple(S, alphabet, step, ("_px", "_py"),
                                      INPUT_VAR, ys)
        members.append(intern(And(guard, family.member(k))))
    return FormulaFamily(members)


# -- family files ---------------------------------------------------------------

def render_family(S: Semiring, family: FormulaFamily,
                  alphabet: RankedAlphabet | None = None) -> str:
    lines = [f"semiring {S.name}"]
    if alphabet is not None:
        lines.append(f"alphabet {alphabet.render()}")
    for k, member in enumerate(family.members):
        lines.append(f"phi{k}: {render_formula(member, S)}")
    return "\n".join(lines) + "\n"


def parse_family(text: str, default_semiring: Semiring | None = None):
    """Returns (semiring, alphabet or None, family)."""
    S = default_semiring
    alphabet = None
    raw_members = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("semiring "):
            S = by_name(line.split(None, 1)[1].strip())
            continue
        if line.startswith("alphabet "):
            alphabet = RankedAlphabet.parse(line.split(None, 1)[1])
            continue
        head, sep, rest = line.partition(":")
        if not sep or not head.startswith("phi") or not head[3:].isdigit():
            raise ParseError(f"expected 'phiK: (...)' line, got {line!r}",
                             lineno, 1)
        if S is None:
            raise ParseError("family file needs a semiring line before members",
                             lineno, 1)
        k = int(head[3:])
        if k in raw_members:
            raise ParseError(f"duplicate member phi{k}", lineno, 1)
        raw_members[k] = parse_formula(rest.strip(), S)
    if S is None:
        raise ParseError("family file declares no semiring and none was given")
    if sorted(raw_members) != list(range(len(raw_members))):
        raise ParseError("family members must be phi0..phiM without gaps")
    family = FormulaFamily([raw_members[k] for k in range(len(raw_members))])
    return S, alphabet, family


# -- random families for the harnesses -------------------------------------------

def random_step_family(rng, S: Semiring, alphabet: RankedAlphabet, m: int,
                       allow_mod: bool = True) -> FormulaFamily:
    """Seeded random family of step formulas with small weights."""
    from fractions import Fraction

    def weight():
        if S.name == "bool":
            return rng.choice((0, 1, 1))
        if S.name == "nat":
            return rng.choice((0, 1, 2, 3))
        if S.name == "tropical":
            return rng.choice((S.zero, Fraction(0), Fraction(1), Fraction(3, 2)))
        return rng.choice((Fraction(0), Fraction(1), Fraction(1, 2), Fraction(3, 4)))

    def atom(variables):
        kinds = ["label", "label", "edge", "leq"]
        if allow_mod:
            kinds.append("mod")
        kind = rng.choice(kinds)
        if kind == "label":
            sym = rng.choice([name for name, _ in alphabet.entries])
            return Label(sym, rng.choice(variables))
        if kind == "edge":
            return Edge(rng.randrange(1, alphabet.maxrk + 1),
                        rng.choice(variables), rng.choice(variables))
        if kind == "leq":
            return Leq(rng.choice(variables), rng.choice(variables))
        n = rng.choice((2, 3))
        return Mod(rng.choice(variables), n, rng.randrange(n))

    def step(variables, depth):
        roll = rng.random()
        if depth <= 0 or roll < 0.3:
            return atom(variables) if rng.random() < 0.7 else Const(weight())
        if roll < 0.55:
            return And(step(variables, depth - 1), step(variables, depth - 1))
        if roll < 0.8:
            return Or(step(variables, depth - 1), step(variables, depth - 1))
        return Not(step(variables, depth - 1))

    members = []
    for k in range(m + 1):
        variables = [INPUT_VAR] + [output_var(i) for i in range(1, k + 1)]
        members.append(intern(step(variables, 2)))
    return FormulaFamily(members)
