"""Ranked alphabets, finite ordered trees, and Gorn positions.

Positions are tuples of 1-based child indices; the root is the empty tuple.
The lexicographic order on positions treats a proper prefix as strictly
smaller, which makes it coincide with preorder traversal.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Mapping, Sequence

from .errors import ParseError, PositionOutOfRange

Position = tuple  # tuple of ints >= 1

EPSILON: Position = ()

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_VAR_RE = re.compile(r"z([1-9][0-9]*)$")


def var_name(i: int) -> str:
    """Name of the i-th substitution variable (1-based)."""
    return f"z{i}"


def var_index(symbol: str):
    """Index of a substitution variable name, or None."""
    m = _VAR_RE.match(symbol)
    return int(m.group(1)) if m else None


@dataclass(frozen=True)
class RankedAlphabet:
    """Finite map from symbol names to ranks.

    Symbol names matching z1, z2, ... are reserved for substitution
    variables and rejected here.
    """

    entries: tuple

    def __init__(self, symbols: Mapping[str, int] | Sequence[tuple]):
        items = tuple(sorted(dict(symbols).items()))
        if not items:
            raise ParseError("alphabet must be non-empty")
        for name, rank in items:
            if not _NAME_RE.fullmatch(name):
                raise ParseError(f"bad symbol name {name!r}")
            if var_index(name) is not None:
                raise ParseError(f"symbol name {name!r} is reserved for variables")
            if not isinstance(rank, int) or rank < 0:
                raise ParseError(f"bad rank for {name!r}: {rank!r}")
        object.__setattr__(self, "entries", items)

    @property
    def symbols(self) -> dict:
        return dict(self.entries)

    def rank(self, symbol: str) -> int:
        for name, rank in self.entries:
            if name == symbol:
                return rank
        raise ParseError(f"symbol {symbol!r} not in alphabet")

    def __contains__(self, symbol: str) -> bool:
        return any(name == symbol for name, _ in self.entries)

    @property
    def maxrk(self) -> int:
        return max(rank for _, rank in self.entries)

    def with_rank(self, k: int) -> tuple:
        return tuple(name for name, rank in self.entries if rank == k)

    def is_monadic(self) -> bool:
        ranks = sorted(rank for _, rank in self.entries)
        leaves = self.with_rank(0)
        return set(ranks) <= {0, 1} and len(leaves) == 1

    def render(self) -> str:
        return " ".join(f"{name}:{rank}" for name, rank in self.entries)

    @staticmethod
    def parse(text: str) -> "RankedAlphabet":
        symbols = {}
        for token in text.split():
            if ":" not in token:
                raise ParseError(f"alphabet entry {token!r} must look like name:rank")
            name, _, rank = token.partition(":")
            if not rank.isdigit():
                raise ParseError(f"bad rank in alphabet entry {token!r}")
            if name in symbols:
                raise ParseError(f"duplicate symbol {name!r} in alphabet")
            symbols[name] = int(rank)
        return RankedAlphabet(symbols)


@dataclass(frozen=True)
class Tree:
    """Ordered tree with named nodes; immutable and hashable."""

    symbol: str
    children: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.symbol, self.children)))

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Tree({render_term(self)!r})"

    @property
    def size(self) -> int:
        return 1 + sum(c.size for c in self.children)

    @property
    def height(self) -> int:
        if not self.children:
            return 0
        return 1 + max(c.height for c in self.children)

    def positions(self) -> tuple:
        """All Gorn addresses in lexicographic (= preorder) order."""
        out = [EPSILON]
        for i, child in enumerate(self.children, start=1):
            out.extend((i,) + w for w in child.positions())
        return tuple(out)

    def label_at(self, w: Position) -> str:
        return self.subtree_at(w).symbol

    def subtree_at(self, w: Position) -> "Tree":
        node = self
        for depth, i in enumerate(w):
            if not 1 <= i <= len(node.children):
                raise PositionOutOfRange(
                    f"position {render_position(w)} not in tree "
                    f"(failed at component {depth + 1})"
                )
            node = node.children[i - 1]
        return node

    def replace_at(self, w: Position, sub: "Tree") -> "Tree":
        if not w:
            return sub
        i = w[0]
        if not 1 <= i <= len(self.children):
            raise PositionOutOfRange(f"position {render_position(w)} not in tree")
        kids = list(self.children)
        kids[i - 1] = kids[i - 1].replace_at(w[1:], sub)
        return Tree(self.symbol, tuple(kids))

    def var_positions(self) -> dict:
        """Map substitution-variable index -> its (unique) position."""
        from .errors import VariableOutOfRange

        out = {}
        for w in self.positions():
            idx = var_index(self.label_at(w))
            if idx is not None:
                if idx in out:
                    raise VariableOutOfRange(f"variable z{idx} occurs twice")
                out[idx] = w
        return out


def leaf(symbol: str) -> Tree:
    return Tree(symbol, ())


def node(symbol: str, *children: Tree) -> Tree:
    return Tree(symbol, tuple(children))


def lex_leq(u: Position, v: Position) -> bool:
    """Lexicographic order: a proper prefix is strictly smaller."""
    for a, b in zip(u, v):
        if a != b:
            return a < b
    return len(u) <= len(v)


def lex_lt(u: Position, v: Position) -> bool:
    return u != v and lex_leq(u, v)


def is_prefix(u: Position, v: Position) -> bool:
    return len(u) <= len(v) and v[: len(u)] == u


def is_strict_prefix(u: Position, v: Position) -> bool:
    return len(u) < len(v) and v[: len(u)] == u


def are_siblings_ordered(u: Position, v: Position) -> bool:
    """True iff u lies in a strictly earlier branch than v (incomparable, u before v)."""
    return not is_prefix(u, v) and not is_prefix(v, u) and lex_lt(u, v)


def render_position(w: Position) -> str:
    return "e" if not w else ".".join(str(i) for i in w)


def parse_position(text: str) -> Position:
    text = text.strip()
    if text == "e":
        return EPSILON
    parts = text.split(".")
    out = []
    for p in parts:
        if not p.isdigit() or int(p) < 1:
            raise ParseError(f"bad position {text!r}")
        out.append(int(p))
    return tuple(out)


def render_term(t: Tree) -> str:
    if not t.children:
        return t.symbol
    return f"{t.symbol}({','.join(render_term(c) for c in t.children)})"


class _TermParser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def _error(self, message):
        raise ParseError(message, self.line, self.col)

    def _advance(self, n):
        for ch in self.text[self.pos : self.pos + n]:
            if ch == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
        self.pos += n

    def _skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self._advance(1)

    def _peek(self):
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse(self) -> Tree:
        self._skip_ws()
        t = self._term()
        self._skip_ws()
        if self.pos != len(self.text):
            self._error(f"unexpected trailing input {self.text[self.pos:]!r}")
        return t

    def _term(self) -> Tree:
        self._skip_ws()
        m = _NAME_RE.match(self.text, self.pos)
        if not m:
            self._error("expected a symbol name")
        name = m.group(0)
        self._advance(len(name))
        self._skip_ws()
        children = []
        if self._peek() == "(":
            self._advance(1)
            while True:
                children.append(self._term())
                self._skip_ws()
                ch = self._peek()
                if ch == ",":
                    self._advance(1)
                    continue
                if ch == ")":
                    self._advance(1)
                    break
                self._error("expected ',' or ')' in term")
        return Tree(name, tuple(children))


def parse_term(text: str, alphabet: RankedAlphabet | None = None,
               allow_vars: bool = False) -> Tree:
    """Parse `name` / `name(t1,...,tk)` notation; whitespace insignificant."""
    t = _TermParser(text).parse()
    if alphabet is not None:
        _check_ranks(t, alphabet, allow_vars)
    return t


def _check_ranks(t: Tree, alphabet: RankedAlphabet, allow_vars: bool):
    if allow_vars and var_index(t.symbol) is not None:
        if t.children:
            raise ParseError(f"variable {t.symbol} cannot have children")
        return
    rank = alphabet.rank(t.symbol)
    if rank != len(t.children):
        raise ParseError(
            f"symbol {t.symbol!r} has rank {rank} but got {len(t.children)} children"
        )
    for c in t.children:
        _check_ranks(c, alphabet, allow_vars)


def infer_alphabet(trees: Sequence[Tree]) -> RankedAlphabet:
    """Derive an alphabet from usage; rejects inconsistent ranks."""
    symbols = {}
    def walk(t):
        seen = symbols.get(t.symbol)
        if seen is None:
            symbols[t.symbol] = len(t.children)
        elif seen != len(t.children):
            raise ParseError(f"symbol {t.symbol!r} used with ranks {seen} and {len(t.children)}")
        for c in t.children:
            walk(c)
    for t in trees:
        walk(t)
    return RankedAlphabet(symbols)


@lru_cache(maxsize=None)
def trees_of_size(alphabet: RankedAlphabet, size: int) -> tuple:
    """All trees of exactly `size` nodes, in a fixed canonical order."""
    if size <= 0:
        return ()
    out = []
    for name, rank in alphabet.entries:
        if rank == 0:
            if size == 1:
                out.append(leaf(name))
            continue
        for split in _compositions(size - 1, rank):
            parts = [trees_of_size(alphabet, s) for s in split]
            out.extend(_products(name, parts))
    return tuple(out)


def _products(name, parts):
    def go(i, acc):
        if i == len(parts):
            yield Tree(name, tuple(acc))
            return
        for t in parts[i]:
            acc.append(t)
            yield from go(i + 1, acc)
            acc.pop()
    yield from go(0, [])


def _compositions(total: int, parts: int):
    """All ways to write `total` as an ordered sum of `parts` positive ints."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def all_trees(alphabet: RankedAlphabet, max_size: int) -> Iterator[Tree]:
    for s in range(1, max_size + 1):
        yield from trees_of_size(alphabet, s)


def count_trees(alphabet: RankedAlphabet, max_size: int) -> int:
    return sum(len(trees_of_size(alphabet, s)) for s in range(1, max_size + 1))


def random_tree(rng, alphabet: RankedAlphabet, max_size: int) -> Tree:
    """Uniform over all trees of size <= max_size (exact counting)."""
    weights = [len(trees_of_size(alphabet, s)) for s in range(1, max_size + 1)]
    total = sum(weights)
    if total == 0:
        raise ParseError(f"no trees of size <= {max_size} over {alphabet.render()}")
    pick = rng.randrange(total)
    for s, w in enumerate(weights, start=1):
        if pick < w:
            return trees_of_size(alphabet, s)[pick]
        pick -= w
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class TreeHomomorphism:
    """Linear nondeleting tree homomorphism given by per-symbol image trees.

    The image of a rank-k symbol is a tree over the target alphabet plus
    variables z1..zk, each occurring exactly once; rank-0 images contain
    no variables.
    """

    source: RankedAlphabet
    images: tuple  # sorted tuple of (symbol, image tree)

    def __init__(self, source: RankedAlphabet, images: Mapping[str, Tree]):
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "images", tuple(sorted(images.items())))
        for name, rank in source.entries:
            image = self.image(name)
            vars_seen = image.var_positions()
            if sorted(vars_seen) != list(range(1, rank + 1)):
                raise ParseError(
                    f"image of {name!r} must use exactly z1..z{rank} once each"
                )

    def image(self, symbol: str) -> Tree:
        for name, img in self.images:
            if name == symbol:
                return img
        raise ParseError(f"no image for symbol {symbol!r}")

    def apply(self, t: Tree) -> Tree:
        image = self.image(t.symbol)
        mapped = [self.apply(c) for c in t.children]

        def subst(u: Tree) -> Tree:
            idx = var_index(u.symbol)
            if idx is not None:
                return mapped[idx - 1]
            return Tree(u.symbol, tuple(subst(c) for c in u.children))

        return subst(image)

    def __call__(self, t: Tree) -> Tree:
        return self.apply(t)


def hom_preimage_count(h: TreeHomomorphism, t: Tree, S=None):
    """|h^{-1}(t)| by brute-force search over source trees of size <= size(t).

    With a semiring `S` the count is embedded as 1+1+...+1; without one the
    plain integer is returned.  Deliberately independent of any closure-based
    evaluation: it enumerates source trees by size and compares images.
    """
    target_size = t.size
    image_cache = {}

    def image_of(s: Tree) -> Tree:
        got = image_cache.get(s)
        if got is None:
            got = h.apply(s)
            image_cache[s] = got
        return got

    count = 0
    for size in range(1, target_size + 1):
        for candidate in trees_of_size(h.source, size):
            if image_of(candidate) == t:
                count += 1
    if S is None:
        return count
    return S.sum(S.one for _ in range(count))
