"""The derived-formula catalog: positional relations expressed in weighted MSO.

Every builder returns a formula whose Boolean value on a tree coincides with
the relation computed by the matching oracle in `oracle()`; the test suite
checks this exhaustively on small trees.  Builders are cached, so repeated
construction with the same arguments yields the identical formula object.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

from .errors import BadMacroParams
from .formulas import (
    And,
    Const,
    Edge,
    Formula,
    ForallFO,
    ForallSO,
    In,
    Label,
    Leq,
    Mod,
    Not,
    Or,
    fresh_var,
    fresh_so_var,
    intern,
)
from .semirings import Semiring
from .trees import (
    Position,
    RankedAlphabet,
    Tree,
    is_prefix,
    is_strict_prefix,
    leaf,
    lex_leq,
    lex_lt,
    var_index,
)
from .errors import PositionOutOfRange


# -- combinators ------------------------------------------------------------

def land(S: Semiring, parts) -> Formula:
    """Conjunction; the empty conjunction is the constant one."""
    parts = list(parts)
    if not parts:
        return intern(Const(S.one))
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return intern(out)


def uor(left: Formula, right: Formula) -> Formula:
    """Boolean disjunction within the negation-and fragment."""
    return intern(Not(And(Not(left), Not(right))))


def ubigor(S: Semiring, parts) -> Formula:
    """Boolean disjunction of many parts; empty gives the constant zero."""
    parts = list(parts)
    if not parts:
        return intern(Const(S.zero))
    out = parts[0]
    for p in parts[1:]:
        out = uor(out, p)
    return intern(out)


def uexists(var: str, body: Formula) -> Formula:
    """Boolean first-order exists: not-forall-not."""
    return intern(Not(ForallFO(var, Not(body))))


def uexists_many(variables, body: Formula) -> Formula:
    for v in reversed(list(variables)):
        body = uexists(v, body)
    return intern(body)


def uexists_so(var: str, body: Formula) -> Formula:
    return intern(Not(ForallSO(var, Not(body))))


def imp_plus(guard: Formula, then: Formula) -> Formula:
    """Weighted guarded implication: not-guard or (guard and then)."""
    return intern(Or(Not(guard), And(guard, then)))


def imp_plus_b(guard: Formula, then: Formula) -> Formula:
    """Boolean guarded implication, staying inside the Boolean fragment."""
    return uor(Not(guard), And(guard, then))


# -- position relations -----------------------------------------------------

@lru_cache(maxsize=None)
def eq_pos(S: Semiring, x: str, y: str) -> Formula:
    return intern(And(Leq(x, y), Leq(y, x)))


@lru_cache(maxsize=None)
def lt_pos(S: Semiring, x: str, y: str) -> Formula:
    return intern(And(Leq(x, y), Not(eq_pos(S, x, y))))


@lru_cache(maxsize=None)
def edge_any(S: Semiring, alphabet: RankedAlphabet, x: str, y: str) -> Formula:
    return ubigor(S, (Edge(i, x, y) for i in range(1, alphabet.maxrk + 1)))


@lru_cache(maxsize=None)
def root(S: Semiring, alphabet: RankedAlphabet, x: str) -> Formula:
    y = fresh_var("r")
    return intern(ForallFO(y, Not(edge_any(S, alphabet, y, x))))


def _check_word(alphabet: RankedAlphabet, word):
    for i in word:
        if not 1 <= i <= alphabet.maxrk:
            raise BadMacroParams(
                f"child index {i} outside 1..{alphabet.maxrk}"
            )


@lru_cache(maxsize=None)
def form_path_w(S: Semiring, alphabet: RankedAlphabet, word: tuple,
                variables: tuple) -> Formula:
    """The given variables form a path following the child indices in word."""
    _check_word(alphabet, word)
    if len(variables) != len(word) + 1:
        raise BadMacroParams("need one more path variable than word letters")
    return land(S, (Edge(w, variables[i], variables[i + 1])
                    for i, w in enumerate(word)))


def _words(alphabet: RankedAlphabet, length: int):
    return itertools.product(range(1, alphabet.maxrk + 1), repeat=length)


def _words_between(alphabet: RankedAlphabet, lo: int, hi: int):
    for length in range(lo, hi + 1):
        yield from _words(alphabet, length)


@lru_cache(maxsize=None)
def form_path(S: Semiring, alphabet: RankedAlphabet, variables: tuple) -> Formula:
    """The variables form a path (any child indices)."""
    n = len(variables) - 1
    return ubigor(S, (form_path_w(S, alphabet, w, variables)
                      for w in _words(alphabet, n)))


@lru_cache(maxsize=None)
def y_eq_x_word(S: Semiring, alphabet: RankedAlphabet, word: tuple,
                x: str, y: str) -> Formula:
    """y is exactly x extended by the concrete child-index word."""
    _check_word(alphabet, word)
    if not word:
        return eq_pos(S, x, y)
    variables = tuple(fresh_var("p") for _ in range(len(word) + 1))
    body = land(S, [eq_pos(S, x, variables[0]),
                    form_path_w(S, alphabet, word, variables),
                    eq_pos(S, variables[-1], y)])
    return uexists_many(variables, body)


@lru_cache(maxsize=None)
def desc_between(S: Semiring, alphabet: RankedAlphabet, lo: int, hi: int,
                 x: str, y: str) -> Formula:
    """y is below x at a depth within [lo, hi]."""
    if lo < 0 or hi < lo:
        raise BadMacroParams(f"bad depth range [{lo},{hi}]")
    return ubigor(S, (y_eq_x_word(S, alphabet, w, x, y)
                      for w in _words_between(alphabet, lo, hi)))


def desc_exact(S: Semiring, alphabet: RankedAlphabet, n: int, x: str, y: str) -> Formula:
    return desc_between(S, alphabet, n, n, x, y)


@lru_cache(maxsize=None)
def desc(S: Semiring, alphabet: RankedAlphabet, x: str, y: str) -> Formula:
    """y is a descendant of x (reflexive)."""
    z, z1, z2 = fresh_var("d"), fresh_var("d"), fresh_var("d")
    split = ubigor(S, (And(Edge(i, z, z1), Edge(j, z, z2))
                       for i in range(1, alphabet.maxrk + 1)
                       for j in range(i + 1, alphabet.maxrk + 1)))
    crossing = uexists_many(
        (z, z1, z2),
        land(S, [split, Leq(z1, x), lt_pos(S, x, z2), Leq(z2, y)]),
    )
    return intern(And(Leq(x, y), Not(crossing)))


@lru_cache(maxsize=None)
def desc_plus(S: Semiring, alphabet: RankedAlphabet, x: str, y: str) -> Formula:
    return intern(And(desc(S, alphabet, x, y), Not(eq_pos(S, x, y))))


@lru_cache(maxsize=None)
def desc_set(S: Semiring, alphabet: RankedAlphabet, x: str, Y: str) -> Formula:
    """Every member of the set Y is a (reflexive) descendant of x."""
    y = fresh_var("m")
    return intern(ForallFO(y, imp_plus_b(In(y, Y), desc(S, alphabet, x, y))))


@lru_cache(maxsize=None)
def sibl(S: Semiring, alphabet: RankedAlphabet, x: str, y: str) -> Formula:
    """x and y are children of one node, x strictly earlier."""
    z = fresh_var("s")
    split = ubigor(S, (And(Edge(i, z, x), Edge(j, z, y))
                       for i in range(1, alphabet.maxrk + 1)
                       for j in range(i + 1, alphabet.maxrk + 1)))
    return uexists(z, split)


@lru_cache(maxsize=None)
def sibl_plus(S: Semiring, alphabet: RankedAlphabet, x: str, y: str) -> Formula:
    """x and y descend from two ordered siblings: distinct branches, x first."""
    a, b = fresh_var("s"), fresh_var("s")
    return uexists_many(
        (a, b),
        land(S, [sibl(S, alphabet, a, b),
                 desc(S, alphabet, a, x),
                 desc(S, alphabet, b, y)]),
    )


@lru_cache(maxsize=None)
def sibl_n(S: Semiring, alphabet: RankedAlphabet, n: int, x: str, y: str) -> Formula:
    """x and y sit exactly n-1 levels below two ordered siblings."""
    if n < 1:
        raise BadMacroParams("sibling depth must be >= 1")
    a, b = fresh_var("s"), fresh_var("s")
    return uexists_many(
        (a, b),
        land(S, [sibl(S, alphabet, a, b),
                 desc_exact(S, alphabet, n - 1, a, x),
                 desc_exact(S, alphabet, n - 1, b, y)]),
    )


@lru_cache(maxsize=None)
def height_ge(S: Semiring, alphabet: RankedAlphabet, n: int, x: str) -> Formula:
    """The subtree at x has height at least n."""
    if n < 0:
        raise BadMacroParams("height bound must be >= 0")
    z = fresh_var("h")
    return uexists(z, desc_exact(S, alphabet, n, x, z))


@lru_cache(maxsize=None)
def form_lmp(S: Semiring, alphabet: RankedAlphabet, variables: tuple) -> Formula:
    """The variables form the leftmost path of length len(variables)-1."""
    n = len(variables)
    if n < 1:
        raise BadMacroParams("need at least one path variable")
    z = fresh_var("l")
    leftmost = ForallFO(
        z,
        imp_plus_b(desc_exact(S, alphabet, n - 1, variables[0], z),
                   Leq(variables[-1], z)),
    )
    return intern(And(form_path(S, alphabet, variables), leftmost))


@lru_cache(maxsize=None)
def on_lmp(S: Semiring, alphabet: RankedAlphabet, length: int, x: str, y: str) -> Formula:
    """A leftmost path of the given length starts at x and y lies on it."""
    if length < 0:
        raise BadMacroParams("path length must be >= 0")
    variables = tuple(fresh_var("q") for _ in range(length + 1))
    body = land(S, [eq_pos(S, x, variables[0]),
                    form_lmp(S, alphabet, variables),
                    ubigor(S, (eq_pos(S, v, y) for v in variables))])
    return uexists_many(variables, body)


@lru_cache(maxsize=None)
def form_cut(S: Semiring, alphabet: RankedAlphabet, n: int, k: int,
             x: str, ys: tuple) -> Formula:
    """The ys are exactly the depth-n descendants of x whose subtrees have
    height >= n, listed left to right.

    The left-to-right chain uses the ordered-branches relation; a fixed
    divergence depth would wrongly reject cut positions that split below x.
    """
    if n < 1 or k < 0 or len(ys) != k:
        raise BadMacroParams(f"bad cut parameters n={n}, k={k}")
    members = [And(desc_exact(S, alphabet, n, x, y),
                   height_ge(S, alphabet, n, y)) for y in ys]
    chain = [sibl_plus(S, alphabet, ys[i], ys[i + 1]) for i in range(k - 1)]
    z = fresh_var("c")
    closed = ForallFO(
        z,
        imp_plus_b(
            And(desc_exact(S, alphabet, n, x, z), height_ge(S, alphabet, n, z)),
            ubigor(S, (eq_pos(S, z, y) for y in ys)),
        ),
    )
    return land(S, members + chain + [closed])


@lru_cache(maxsize=None)
def check_slice(S: Semiring, alphabet: RankedAlphabet, pattern: Tree,
                x: str, ys: tuple) -> Formula:
    """The subtree at x, with the positions of ys replaced by variables,
    equals the given pattern."""
    positions = pattern.positions()
    var_pos = pattern.var_positions()
    if sorted(var_pos) != list(range(1, len(ys) + 1)):
        raise BadMacroParams("pattern variables must be z1..zk, once each")
    parts = []
    for w in positions:
        symbol = pattern.label_at(w)
        if var_index(symbol) is not None:
            continue
        y = fresh_var("c")
        parts.append(uexists(y, And(y_eq_x_word(S, alphabet, w, x, y),
                                    Label(symbol, y))))
    for i, y in enumerate(ys, start=1):
        parts.append(y_eq_x_word(S, alphabet, var_pos[i], x, y))
    return land(S, parts)


# -- depth arithmetic -------------------------------------------------------

@lru_cache(maxsize=None)
def len_gt(S: Semiring, alphabet: RankedAlphabet, n: int, y: str) -> Formula:
    """The depth of y exceeds n."""
    if n < 0:
        raise BadMacroParams("depth bound must be >= 0")
    x = fresh_var("g")
    return uexists(x, desc_exact(S, alphabet, n + 1, x, y))


@lru_cache(maxsize=None)
def div_in(S: Semiring, alphabet: RankedAlphabet, n: int, y: str, X: str) -> Formula:
    """The ancestor n levels above y belongs to X."""
    x = fresh_var("g")
    return uexists(x, And(In(x, X), desc_exact(S, alphabet, n, x, y)))


@lru_cache(maxsize=None)
def depth_in(S: Semiring, alphabet: RankedAlphabet, m: int, X: str) -> Formula:
    """X contains a position at depth exactly m."""
    x, y = fresh_var("g"), fresh_var("g")
    return uexists_many(
        (x, y),
        land(S, [root(S, alphabet, x),
                 desc_exact(S, alphabet, m, x, y),
                 In(y, X)]),
    )


def mod_atom(var: str, modulus: int, residue: int) -> Formula:
    """The distinguished depth-modulo node."""
    return intern(Mod(var, modulus, residue))


@lru_cache(maxsize=None)
def mod_expansion(S: Semiring, alphabet: RankedAlphabet, modulus: int,
                  residue: int, x: str) -> Formula:
    """Set-quantifier definition of the depth-modulo test.

    Close X under "step n levels up" while the depth is still >= n (stepping
    only above depth n would strand multiples of n at depth n and break the
    residue-0 case), then require a member at depth `residue`.
    """
    if modulus < 1 or not 0 <= residue < modulus:
        raise BadMacroParams(f"bad modulo parameters {modulus}, {residue}")
    X = fresh_so_var()
    y = fresh_var("g")
    anc = fresh_var("g")
    can_step = uexists(anc, desc_exact(S, alphabet, modulus, anc, y))
    closed = ForallFO(
        y,
        imp_plus_b(And(In(y, X), can_step), div_in(S, alphabet, modulus, y, X)),
    )
    return intern(ForallSO(
        X,
        imp_plus_b(And(In(x, X), closed), depth_in(S, alphabet, residue, X)),
    ))


@lru_cache(maxsize=None)
def base_node(S: Semiring, alphabet: RankedAlphabet, n: int, x: str, y: str) -> Formula:
    """y is the base position of x: the longest prefix whose depth is a
    multiple of n."""
    if n < 1:
        raise BadMacroParams("state count must be >= 1")
    return land(S, (imp_plus_b(mod_atom(x, n, q), desc_exact(S, alphabet, q, y, x))
                    for q in range(n)))


# -- forks and progress -----------------------------------------------------

@lru_cache(maxsize=None)
def fork(S: Semiring, alphabet: RankedAlphabet, k: int, X: str, y: str,
         zs: tuple) -> Formula:
    """The zs are the maximal sibling-ordered strict X-descendants of y."""
    if k < 0 or len(zs) != k:
        raise BadMacroParams(f"bad fork parameters k={k}")
    members = [And(In(z, X), desc_plus(S, alphabet, y, z)) for z in zs]
    chain = [sibl_plus(S, alphabet, zs[i], zs[i + 1]) for i in range(k - 1)]
    w = fresh_var("f")
    closed = ForallFO(
        w,
        imp_plus_b(And(In(w, X), desc_plus(S, alphabet, y, w)),
                   ubigor(S, (desc(S, alphabet, z, w) for z in zs))),
    )
    return land(S, members + chain + [closed])


def progress_tuple(S: Semiring, alphabet: RankedAlphabet, step: Formula,
                   step_vars: tuple, x: str, ys: tuple) -> Formula:
    """Conjunction of one progress step per output variable plus the
    ordered-branches chain between consecutive outputs."""
    from .formulas import rename_free

    parts = [rename_free(step, {step_vars[0]: x, step_vars[1]: y}) for y in ys]
    parts += [sibl_plus(S, alphabet, ys[i], ys[i + 1]) for i in range(len(ys) - 1)]
    return land(S, parts)


# -- oracles ----------------------------------------------------------------

def _oracle_desc(xi, u, v):
    return is_prefix(u, v)


def _oracle_on_lmp(xi, length, u, v):
    depths = [w for w in xi.positions()
              if len(w) == len(u) + length and is_prefix(u, w)]
    if not depths:
        return False
    best = min(depths, key=lambda w: w)  # equal length: tuple order is lex
    return any(v == best[: len(u) + i] for i in range(length + 1))


def _oracle_cut(xi, n, u):
    from .slicing import head_cut

    return head_cut(xi, u, n)[1]


def _oracle_check(xi, pattern, u, us):
    t = xi
    try:
        for i, ui in enumerate(us, start=1):
            t = t.replace_at(ui, leaf(f"z{i}"))
        return t.subtree_at(u) == pattern
    except PositionOutOfRange:
        return False


def _oracle_fork(xi, J, v, vs):
    J = set(map(tuple, J))
    if not all(z in J and is_strict_prefix(v, z) for z in vs):
        return False
    for a, b in zip(vs, vs[1:]):
        if not (not is_prefix(a, b) and not is_prefix(b, a) and lex_lt(a, b)):
            return False
    for w in J:
        if is_strict_prefix(v, w):
            if not any(is_prefix(z, w) for z in vs):
                return False
    return True


def oracle(name: str, params: tuple, xi: Tree, args: tuple):
    """Direct combinatorial semantics of a macro, for testing the formulas.

    `params` are the macro's integer/tree parameters, `args` the positions
    (or position sets) the free variables are bound to.
    """
    pos = set(xi.positions())
    if name == "eq":
        return args[0] == args[1]
    if name == "lt":
        return lex_lt(args[0], args[1])
    if name == "leq":
        return lex_leq(args[0], args[1])
    if name == "edge":
        u, v = args
        return len(v) == len(u) + 1 and is_prefix(u, v)
    if name == "root":
        return args[0] == ()
    if name == "desc":
        return _oracle_desc(xi, args[0], args[1])
    if name == "desc+":
        return is_strict_prefix(args[0], args[1])
    if name == "desc-set":
        u, J = args
        return all(is_prefix(u, w) for w in J)
    if name == "desc-range":
        lo, hi = params
        u, v = args
        return is_prefix(u, v) and lo <= len(v) - len(u) <= hi
    if name == "y=xw":
        (word,) = params
        u, v = args
        return v == u + tuple(word)
    if name == "sibl":
        u, v = args
        return (len(u) == len(v) and len(u) >= 1 and u[:-1] == v[:-1]
                and u[-1] < v[-1])
    if name == "sibl+":
        u, v = args
        return not is_prefix(u, v) and not is_prefix(v, u) and lex_lt(u, v)
    if name == "sibl-n":
        (n,) = params
        u, v = args
        if len(u) < n or len(v) < n:
            return False
        a, b = u[: len(u) - (n - 1)], v[: len(v) - (n - 1)]
        return (len(u) == len(v) and len(a) >= 1 and a[:-1] == b[:-1]
                and a[-1] < b[-1])
    if name == "height>=":
        (n,) = params
        u = args[0]
        return xi.subtree_at(u).height >= n
    if name == "form-path-w":
        (word,) = params
        chain = args
        return all(chain[i + 1] == chain[i] + (w,) for i, w in enumerate(word))
    if name == "form-path":
        chain = args
        return all(len(chain[i + 1]) == len(chain[i]) + 1
                   and is_prefix(chain[i], chain[i + 1])
                   for i in range(len(chain) - 1))
    if name == "form-lmp":
        chain = args
        if not oracle("form-path", (), xi, chain):
            return False
        n = len(chain)
        deep = [w for w in pos
                if len(w) == len(chain[0]) + n - 1 and is_prefix(chain[0], w)]
        return bool(deep) and chain[-1] == min(deep)
    if name == "on-lmp":
        (length,) = params
        return _oracle_on_lmp(xi, length, args[0], args[1])
    if name == "form-cut":
        n, k = params
        u, us = args[0], tuple(args[1:])
        return len(us) == k and _oracle_cut(xi, n, u) == us
    if name == "check":
        (pattern,) = params
        return _oracle_check(xi, pattern, args[0], tuple(args[1:]))
    if name == "|y|>n":
        (n,) = params
        return len(args[0]) > n
    if name == "y/n-in":
        (n,) = params
        v, J = args
        return len(v) >= n and v[: len(v) - n] in J
    if name == "m-in-depths":
        (m,) = params
        (J,) = args
        return any(len(w) == m for w in J)
    if name == "mod":
        n, m = params
        return len(args[0]) % n == m
    if name == "base":
        (n,) = params
        v, u = args
        return u == v[: (len(v) // n) * n]
    if name == "fork":
        (k,) = params
        J, v, zs = args[0], args[1], tuple(args[2:])
        return len(zs) == k and _oracle_fork(xi, J, v, zs)
    raise BadMacroParams(f"unknown macro {name!r}")
