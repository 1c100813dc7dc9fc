"""Compiling a weighted tree automaton into a closure formula family.

States are represented by tree positions: a position v encodes the state
depth(v) mod n, and its base position (the longest ancestor at a depth
divisible by n) is where the enclosing slice starts.  Each family member
guards a slice shape and multiplies in the precomputed slice weight; the
depth-2n bounded closure of the family then reproduces the recognized
weight at the root.
"""

from __future__ import annotations

from dataclasses import dataclass

from .caps import Caps, DEFAULT_CAPS
from .errors import ExplosionGuard
from . import macros
from .automata import Wta, require_normalized, run
from .closure import (
    ClosureRun,
    DescBounded,
    FormulaFamily,
    INPUT_VAR,
    eval_tc,
    output_var,
)
from .formulas import And, Const, EvalCache, Formula, intern
from .semirings import Semiring
from .slicing import Slice, enumerate_slices, head_cut, max_breadth
from .trees import Position, Tree

BASE_VAR = "z"


def slice_var(i: int) -> str:
    return f"z{i}"


def base_of(v: Position, n: int) -> Position:
    """Longest prefix whose depth is a multiple of n."""
    return tuple(v)[: (len(v) // n) * n]


def state_of(v: Position, n: int) -> int:
    return len(v) % n


def theta(S: Semiring, alphabet, n: int, k: int, q: int, qs: tuple,
          piece: Slice) -> Formula:
    """Conjunction tying the input/output positions to one slice shape:
    the base of x starts the slice, its cut positions are the bases of the
    outputs, outputs sit on leftmost paths below their bases at the depth
    of their state, and x sits at depth q below its base."""
    x = INPUT_VAR
    z = BASE_VAR
    ys = tuple(output_var(i) for i in range(1, k + 1))
    zs = tuple(slice_var(i) for i in range(1, k + 1))
    parts = [macros.base_node(S, alphabet, n, x, z),
             macros.form_cut(S, alphabet, n, k, z, zs)]
    parts += [macros.on_lmp(S, alphabet, n - 1, zs[i], ys[i]) for i in range(k)]
    parts.append(macros.desc_exact(S, alphabet, q, z, x))
    parts += [macros.desc_exact(S, alphabet, qs[i], zs[i], ys[i]) for i in range(k)]
    parts.append(macros.check_slice(S, alphabet, piece.body, z, zs))
    return macros.land(S, parts)


def witness_block(S: Semiring, alphabet, n: int, k: int, q: int, qs: tuple,
                  piece: Slice) -> Formula:
    """The theta conjunction with the base positions existentially closed."""
    zs = tuple(slice_var(i) for i in range(1, k + 1))
    return macros.uexists_many((BASE_VAR,) + zs,
                               theta(S, alphabet, n, k, q, qs, piece))


def _state_tuples(n, k):
    if k == 0:
        yield ()
        return
    for rest in _state_tuples(n, k - 1):
        for q in range(n):
            yield rest + (q,)


@dataclass(frozen=True)
class PhiConstruction:
    automaton: Wta
    n: int
    slices: dict          # k -> tuple of Slice
    slice_weights: dict   # (k, slice index, state tuple) -> weight vector
    family: FormulaFamily

    @property
    def progress(self) -> DescBounded:
        return DescBounded(2 * self.n)


def build_phi(automaton: Wta, caps: Caps = DEFAULT_CAPS) -> PhiConstruction:
    """Family of step formulas whose bounded closure recognizes like the
    automaton.  Requires final-state set {0}."""
    require_normalized(automaton)
    S = automaton.semiring
    alphabet = automaton.alphabet
    n = automaton.n_states
    top = max_breadth(alphabet, n)

    slices = {}
    weights = {}
    members = []
    for k in range(top + 1):
        slices[k] = enumerate_slices(alphabet, n, k, caps=caps)
        disjuncts = []
        for qs in _state_tuples(n, k):
            for index, piece in enumerate(slices[k]):
                vector = run(automaton, piece.body, qs)
                weights[(k, index, qs)] = vector
                for q in range(n):
                    if S.is_zero(vector[q]):
                        continue
                    block = witness_block(S, alphabet, n, k, q, qs, piece)
                    disjuncts.append(And(block, Const(vector[q])))
        member = disjuncts[0] if disjuncts else Const(S.zero)
        for d in disjuncts[1:]:
            member = macros.Or(member, d)
        members.append(intern(member))
    family = FormulaFamily(members)
    return PhiConstruction(automaton, n, slices, weights, family)


def phi_semantics_direct(automaton: Wta, xi: Tree, k: int, v: Position,
                         vs: tuple):
    """Closed-form value of family member k at the given positions: the
    slice weight when the bases line up with the cut and every output sits
    on the leftmost path below its base, zero otherwise."""
    S = automaton.semiring
    n = automaton.n_states
    v = tuple(v)
    vs = tuple(map(tuple, vs))
    base = base_of(v, n)
    bases = tuple(base_of(u, n) for u in vs)
    piece, cut = head_cut(xi, base, n)
    if cut != bases:
        return S.zero
    for u, b in zip(vs, bases):
        if not macros.oracle("on-lmp", (n - 1,), xi, (b, u)):
            return S.zero
    states = tuple(state_of(u, n) for u in vs)
    return run(automaton, piece.body, states)[state_of(v, n)]


@dataclass(frozen=True)
class CheckOutcome:
    tree: Tree
    expected: object
    actual: object

    @property
    def ok(self) -> bool:
        return self.expected == self.actual


def guard_scale(automaton: Wta):
    """Slice tables explode for wide alphabets with three or more states."""
    if automaton.n_states >= 3 and automaton.alphabet.maxrk >= 2:
        raise ExplosionGuard(
            "states*maxrk",
            2,
            automaton.n_states,
        )


def check_recognize_equals_closure(automaton: Wta, trees,
                                   caps: Caps = DEFAULT_CAPS,
                                   cache: EvalCache | None = None):
    """Compare the recognized weight with the bounded closure of the
    compiled family on every tree; yields one outcome per tree."""
    from .automata import normalize_final, recognize

    normalized = normalize_final(automaton)
    guard_scale(normalized)
    construction = build_phi(normalized, caps=caps)
    cache = cache if cache is not None else EvalCache()
    outcomes = []
    for tree in trees:
        expected = recognize(normalized, tree)
        actual = eval_tc(normalized.semiring, construction.progress,
                         construction.family, tree, (), caps=caps, cache=cache)
        outcomes.append(CheckOutcome(tree, expected, actual))
    return outcomes
