"""Weighted bottom-up tree automata over a commutative semiring.

States are 0..n-1; transitions are stored sparsely (absent means weight
zero).  `run` computes the state-indexed weight vector of a tree that may
contain substitution variables z1..zk, given the k states those variables
are pinned to.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import NotNormalized, ParseError, VariableOutOfRange
from .semirings import Semiring, by_name
from .trees import RankedAlphabet, Tree, parse_term, render_term, var_index


@dataclass(frozen=True)
class Wta:
    semiring: Semiring
    alphabet: RankedAlphabet
    n_states: int
    transitions: tuple  # sorted ((symbol, state tuple, target), weight)
    finals: frozenset

    def __init__(self, semiring, alphabet, n_states, transitions, finals):
        if n_states < 1:
            raise ParseError("automaton needs at least one state")
        cleaned = {}
        for (symbol, sources, target), weight in dict(transitions).items():
            sources = tuple(sources)
            rank = alphabet.rank(symbol)
            if rank != len(sources):
                raise ParseError(
                    f"transition for {symbol!r} needs {rank} source states"
                )
            for q in sources + (target,):
                if not 0 <= q < n_states:
                    raise ParseError(f"state {q} outside 0..{n_states - 1}")
            semiring.validate(weight)
            if not semiring.is_zero(weight):
                cleaned[(symbol, sources, target)] = weight
        for q in finals:
            if not 0 <= q < n_states:
                raise ParseError(f"final state {q} outside 0..{n_states - 1}")
        object.__setattr__(self, "semiring", semiring)
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "n_states", n_states)
        object.__setattr__(self, "transitions", tuple(sorted(
            cleaned.items(),
            key=lambda item: (item[0][0], item[0][1], item[0][2]),
        )))
        object.__setattr__(self, "finals", frozenset(finals))

    def weight(self, symbol, sources, target):
        sources = tuple(sources)
        for (sym, src, tgt), w in self.transitions:
            if (sym, src, tgt) == (symbol, sources, target):
                return w
        return self.semiring.zero

    def by_symbol(self):
        table = getattr(self, "_by_symbol", None)
        if table is None:
            table = {}
            for (sym, src, tgt), w in self.transitions:
                table.setdefault(sym, []).append((src, tgt, w))
            object.__setattr__(self, "_by_symbol", table)
        return table


def run(automaton: Wta, tree: Tree, context=()):  # -> tuple of weights
    """State-indexed weight vector of a tree with variables.

    A variable z_i evaluates to the unit vector at context[i-1]; a symbol
    node combines its transition weights with the product of the child
    vectors.
    """
    S = automaton.semiring
    n = automaton.n_states
    context = tuple(context)
    table = automaton.by_symbol()

    def go(t: Tree):
        idx = var_index(t.symbol)
        if idx is not None:
            if not 1 <= idx <= len(context):
                raise VariableOutOfRange(
                    f"variable z{idx} but only {len(context)} context states"
                )
            return tuple(
                S.one if q == context[idx - 1] else S.zero for q in range(n)
            )
        kids = [go(c) for c in t.children]
        out = [S.zero] * n
        for sources, target, w in table.get(t.symbol, ()):
            acc = w
            for child_vec, p in zip(kids, sources):
                acc = S.mul(acc, child_vec[p])
                if S.is_zero(acc):
                    break
            if not S.is_zero(acc):
                out[target] = S.add(out[target], acc)
        return tuple(out)

    return go(tree)


def recognize(automaton: Wta, tree: Tree):
    vec = run(automaton, tree)
    return automaton.semiring.sum(vec[q] for q in sorted(automaton.finals))


def normalize_final(automaton: Wta) -> Wta:
    """Equivalent automaton with the single final state 0.

    A one-final automaton is merely renumbered.  Otherwise a fresh final
    state is added whose incoming weights sum the old final rows; the fresh
    state has no outgoing behaviour, so runs are preserved.
    """
    S = automaton.semiring
    if len(automaton.finals) == 1:
        final = next(iter(automaton.finals))
        if final == 0:
            return automaton
        swap = {final: 0, 0: final}
        relabel = lambda q: swap.get(q, q)
        moved = {
            (sym, tuple(relabel(q) for q in src), relabel(tgt)): w
            for (sym, src, tgt), w in automaton.transitions
        }
        return Wta(S, automaton.alphabet, automaton.n_states, moved, {0})

    shift = lambda q: q + 1
    new_transitions: dict = {}
    summed: dict = {}
    for (sym, src, tgt), w in automaton.transitions:
        new_transitions[(sym, tuple(map(shift, src)), shift(tgt))] = w
        if tgt in automaton.finals:
            key = (sym, tuple(map(shift, src)), 0)
            summed[key] = S.add(summed.get(key, S.zero), w)
    for key, w in summed.items():
        new_transitions[key] = w
    return Wta(S, automaton.alphabet, automaton.n_states + 1, new_transitions, {0})


def require_normalized(automaton: Wta):
    if automaton.finals != frozenset({0}):
        raise NotNormalized(
            "the construction needs final-state set {0}; run normalize_final first"
        )


# -- file format --------------------------------------------------------------

def render_wta(automaton: Wta) -> str:
    lines = [
        f"semiring {automaton.semiring.name}",
        f"alphabet {automaton.alphabet.render()}",
        f"states {automaton.n_states}",
        "final " + " ".join(str(q) for q in sorted(automaton.finals)),
    ]
    for (sym, src, tgt), w in automaton.transitions:
        lhs = sym if not src else f"{sym}({','.join(map(str, src))})"
        lines.append(f"trans {lhs} -> {tgt} : {automaton.semiring.render(w)}")
    return "\n".join(lines) + "\n"


def parse_wta(text: str) -> Wta:
    semiring = None
    alphabet = None
    n_states = None
    finals: list = []
    raw_transitions: list = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        try:
            if head == "semiring":
                semiring = by_name(rest)
            elif head == "alphabet":
                alphabet = RankedAlphabet.parse(rest)
            elif head == "states":
                n_states = int(rest)
            elif head == "final":
                finals = [int(tok) for tok in rest.split()] if rest else []
            elif head == "trans":
                raw_transitions.append((lineno, rest))
            else:
                raise ParseError(f"unknown directive {head!r}", lineno, 1)
        except ParseError as exc:
            if exc.line is None:
                raise ParseError(str(exc), lineno, 1) from exc
            raise
        except ValueError as exc:
            raise ParseError(str(exc), lineno, 1) from exc
    if semiring is None or alphabet is None or n_states is None:
        raise ParseError("automaton file needs semiring, alphabet and states lines")
    transitions: dict = {}
    for lineno, rest in raw_transitions:
        try:
            lhs, _, tail = rest.partition("->")
            tgt_text, _, weight_text = tail.partition(":")
            lhs = lhs.strip()
            if "(" in lhs:
                sym, _, args = lhs.partition("(")
                if not args.endswith(")"):
                    raise ParseError("missing ')' in transition")
                sources = tuple(
                    int(tok) for tok in args[:-1].split(",") if tok.strip() != ""
                )
            else:
                sym, sources = lhs, ()
            key = (sym.strip(), sources, int(tgt_text.strip()))
            if key in transitions:
                raise ParseError(f"duplicate transition {lhs.strip()}")
            transitions[key] = semiring.parse(weight_text.strip())
        except ParseError as exc:
            if exc.line is None:
                raise ParseError(str(exc), lineno, 1) from exc
            raise
        except ValueError as exc:
            raise ParseError(str(exc), lineno, 1) from exc
    return Wta(semiring, alphabet, n_states, transitions, finals)


# -- generators and oracles ----------------------------------------------------

def random_wta(rng, S: Semiring, alphabet: RankedAlphabet, n_states: int,
               density: float = 0.75, finals=None) -> Wta:
    """Seeded random automaton with small exact weights."""
    def draw():
        if S.name == "bool":
            return 1
        if S.name == "nat":
            return rng.choice((1, 1, 2, 3))
        if S.name == "tropical":
            return Fraction(rng.randrange(0, 7), rng.choice((1, 2)))
        if S.name == "viterbi":
            return Fraction(rng.randrange(1, 5), rng.randrange(5, 9))
        raise ParseError(f"no weight generator for semiring {S.name!r}")

    transitions = {}
    for name, rank in alphabet.entries:
        for src in _tuples(n_states, rank):
            for tgt in range(n_states):
                if rng.random() < density:
                    transitions[(name, src, tgt)] = draw()
    if finals is None:
        finals = {q for q in range(n_states) if rng.random() < 0.5} or {0}
    return Wta(S, alphabet, n_states, transitions, finals)


def _tuples(n, k):
    if k == 0:
        yield ()
        return
    for rest in _tuples(n, k - 1):
        for q in range(n):
            yield rest + (q,)


def monadic_string(tree: Tree) -> tuple:
    """Unary-symbol string of a monadic tree, root first."""
    out = []
    node = tree
    while node.children:
        if len(node.children) != 1:
            raise ParseError("tree is not monadic")
        out.append(node.symbol)
        node = node.children[0]
    return tuple(out), node.symbol


def string_recognize(automaton: Wta, tree: Tree):
    """Weight of a monadic tree via an independent string-automaton sweep.

    Reads the corresponding string leaf-first with explicit vector-matrix
    steps; used as a cross-check for `recognize` on monadic alphabets.
    """
    S = automaton.semiring
    n = automaton.n_states
    word, leaf_symbol = monadic_string(tree)
    vec = [automaton.weight(leaf_symbol, (), q) for q in range(n)]
    for symbol in reversed(word):
        nxt = [S.zero] * n
        for q in range(n):
            for p in range(n):
                nxt[q] = S.add(
                    nxt[q],
                    S.mul(automaton.weight(symbol, (p,), q), vec[p]),
                )
        vec = nxt
    return S.sum(vec[q] for q in sorted(automaton.finals))
