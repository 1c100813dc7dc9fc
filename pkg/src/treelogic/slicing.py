"""Bounded-depth decomposition of trees into slices.

A depth-n slice is a tree fragment whose positions all lie at depth < 2n and
whose substitution variables, if any, sit at depth exactly n.  Cutting a tree
at the depth-n descendants whose subtrees are still tall (height >= n) yields
the unique such fragment; applying the cut recursively decomposes the whole
tree.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .caps import Caps, DEFAULT_CAPS
from .errors import ExplosionGuard, ParseError, VariableOutOfRange
from .trees import (
    Position,
    RankedAlphabet,
    Tree,
    is_prefix,
    leaf,
    render_term,
    var_index,
    var_name,
)


@dataclass(frozen=True)
class Slice:
    """A tree over the alphabet plus variables z1..zk, each used once,
    in left-to-right order."""

    body: Tree
    k: int

    def __post_init__(self):
        seen = self.body.var_positions()
        if sorted(seen) != list(range(1, self.k + 1)):
            raise VariableOutOfRange(
                f"slice must use z1..z{self.k} exactly once each"
            )
        order = sorted(seen.items(), key=lambda item: item[1])
        if [i for i, _ in order] != sorted(seen):
            raise VariableOutOfRange("slice variables must appear in order")

    @property
    def var_positions(self) -> tuple:
        found = self.body.var_positions()
        return tuple(found[i] for i in range(1, self.k + 1))

    def substitute(self, fillers) -> Tree:
        fillers = tuple(fillers)
        if len(fillers) != self.k:
            raise VariableOutOfRange(
                f"slice of breadth {self.k} got {len(fillers)} fillers"
            )

        def go(t: Tree) -> Tree:
            idx = var_index(t.symbol)
            if idx is not None:
                return fillers[idx - 1]
            return Tree(t.symbol, tuple(go(c) for c in t.children))

        return go(self.body)

    def render(self) -> str:
        return render_term(self.body)


def member_of_slice_set(body: Tree, n: int, k: int) -> bool:
    """Direct test for membership in the depth-n slice set of breadth k."""
    found = body.var_positions()
    if sorted(found) != list(range(1, k + 1)):
        return False
    order = sorted(found.items(), key=lambda item: item[1])
    if [i for i, _ in order] != sorted(found):
        return False
    for w in body.positions():
        if len(w) >= 2 * n:
            return False
        if var_index(body.label_at(w)) is not None and len(w) != n:
            return False
    return True


def head_cut(xi: Tree, u: Position, n: int) -> tuple:
    """The slice of the tree at u and its cut positions.

    Cut positions are the depth-n descendants of u whose subtrees have
    height >= n, in left-to-right order; the slice is the subtree at u with
    those subtrees replaced by variables.
    """
    if n < 1:
        raise ParseError(f"slice depth must be >= 1, got {n}")
    top = xi.subtree_at(u)
    cuts = []
    relative = []
    for w in top.positions():
        if len(w) == n and top.subtree_at(w).height >= n:
            relative.append(w)
            cuts.append(tuple(u) + w)
    body = top
    for i, w in enumerate(relative, start=1):
        body = body.replace_at(w, leaf(var_name(i)))
    piece = Slice(body, len(relative))
    assert member_of_slice_set(body, n, len(relative))
    return piece, tuple(cuts)


@dataclass(frozen=True)
class Decomposition:
    """Tree of slices; substituting children back recomposes the original.

    `cuts` holds the absolute positions (in the original tree) where the
    child decompositions start.
    """

    piece: Slice
    cuts: tuple
    children: tuple

    @property
    def size(self) -> int:
        return 1 + sum(c.size for c in self.children)

    def recompose(self) -> Tree:
        return self.piece.substitute(c.recompose() for c in self.children)

    def slices(self):
        yield self.piece
        for c in self.children:
            yield from c.slices()

    def render(self, indent: int = 0) -> str:
        from .trees import render_position

        head = "  " * indent + f"slice k={self.piece.k} {self.piece.render()}"
        if self.cuts:
            head += "   cut: " + " ".join(render_position(w) for w in self.cuts)
        return "\n".join([head] + [c.render(indent + 1) for c in self.children])


def dec(xi: Tree, n: int, at: Position = ()) -> Decomposition:
    """Recursive decomposition into depth-n slices below the given position."""
    piece, cuts = head_cut(xi, at, n)
    return Decomposition(piece, cuts, tuple(dec(xi, n, at=w) for w in cuts))


@lru_cache(maxsize=None)
def _slice_bodies(alphabet: RankedAlphabet, n: int, depth: int, want_vars: int) -> tuple:
    """Subtrees rooted at `depth` using exactly `want_vars` variables.

    Variables are produced as z1 placeholders and renumbered by the caller;
    ordering left-to-right is inherent in the construction.
    """
    out = []
    if depth == n and want_vars == 1:
        out.append(leaf(var_name(1)))
    if depth >= 2 * n:
        return tuple(out)
    for name, rank in alphabet.entries:
        if rank == 0:
            if want_vars == 0:
                out.append(leaf(name))
            continue
        if depth + 1 >= 2 * n and rank > 0:
            continue
        for split in _var_splits(want_vars, rank):
            child_lists = [
                _slice_bodies(alphabet, n, depth + 1, j) for j in split
            ]
            out.extend(_combine(name, child_lists))
    return tuple(out)


def _var_splits(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _var_splits(total - first, parts - 1):
            yield (first,) + rest


def _combine(name, child_lists):
    def go(i, acc):
        if i == len(child_lists):
            yield Tree(name, tuple(acc))
            return
        for t in child_lists[i]:
            acc.append(t)
            yield from go(i + 1, acc)
            acc.pop()

    yield from go(0, [])


def _renumber(body: Tree) -> Tree:
    counter = [0]

    def go(t: Tree) -> Tree:
        if var_index(t.symbol) is not None:
            counter[0] += 1
            return leaf(var_name(counter[0]))
        return Tree(t.symbol, tuple(go(c) for c in t.children))

    return go(body)


def enumerate_slices(alphabet: RankedAlphabet, n: int, k: int,
                     caps: Caps = DEFAULT_CAPS) -> tuple:
    """All depth-n slices of breadth k, ordered by size then rendered text."""
    if n < 1 or k < 0:
        raise ParseError(f"bad slice parameters n={n}, k={k}")
    bodies = [_renumber(b) for b in _slice_bodies(alphabet, n, 0, k)]
    if len(bodies) > caps.slices:
        raise ExplosionGuard("slices", caps.slices, len(bodies))
    bodies.sort(key=lambda t: (t.size, render_term(t)))
    return tuple(Slice(b, k) for b in bodies)


def max_breadth(alphabet: RankedAlphabet, n: int) -> int:
    """Largest k with a nonempty depth-n slice set: maxrk^n, or 0 if the
    alphabet has no symbol of positive rank."""
    if n < 1:
        raise ParseError(f"slice depth must be >= 1, got {n}")
    r = alphabet.maxrk
    return r**n if r >= 1 else 0
