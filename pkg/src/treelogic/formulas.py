"""Weighted MSO formulas on trees: AST, semantics, fragments, step normal form.

A formula is evaluated against an encoded tree: a tree over the original
alphabet whose nodes additionally carry the variables assigned to them.
First-order variables start with a lowercase letter or underscore,
second-order variables with an uppercase letter.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Mapping

from .caps import Caps, DEFAULT_CAPS
from .errors import (
    ExplosionGuard,
    InvalidEncoding,
    NotStepFormula,
    ParseError,
    PositionOutOfRange,
    TreeLogicError,
    UnboundVariable,
)
from .semirings import Semiring
from .trees import Position, Tree, lex_leq

_VARNAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def is_so_name(name: str) -> bool:
    return name[0].isupper()


def _check_var(name: str, so: bool):
    if not _VARNAME_RE.fullmatch(name):
        raise ParseError(f"bad variable name {name!r}")
    if is_so_name(name) != so:
        kind = "second-order" if so else "first-order"
        raise ParseError(f"{name!r} is not a {kind} variable name")


class Formula:
    """Base class; all nodes are immutable and hashable."""

    __slots__ = ()


def _freeze(node, fields):
    object.__setattr__(node, "_hash", hash((type(node).__name__,) + fields))


@dataclass(frozen=True, eq=False, repr=False)
class Const(Formula):
    value: object

    def __post_init__(self):
        _freeze(self, (self.value,))


@dataclass(frozen=True, eq=False, repr=False)
class Label(Formula):
    symbol: str
    var: str

    def __post_init__(self):
        _check_var(self.var, so=False)
        _freeze(self, (self.symbol, self.var))


@dataclass(frozen=True, eq=False, repr=False)
class Edge(Formula):
    index: int
    left: str
    right: str

    def __post_init__(self):
        if self.index < 1:
            raise ParseError(f"edge index must be >= 1, got {self.index}")
        _check_var(self.left, so=False)
        _check_var(self.right, so=False)
        _freeze(self, (self.index, self.left, self.right))


@dataclass(frozen=True, eq=False, repr=False)
class Leq(Formula):
    left: str
    right: str

    def __post_init__(self):
        _check_var(self.left, so=False)
        _check_var(self.right, so=False)
        _freeze(self, (self.left, self.right))


@dataclass(frozen=True, eq=False, repr=False)
class In(Formula):
    var: str
    set_var: str

    def __post_init__(self):
        _check_var(self.var, so=False)
        _check_var(self.set_var, so=True)
        _freeze(self, (self.var, self.set_var))


@dataclass(frozen=True, eq=False, repr=False)
class Mod(Formula):
    """Depth-modulo test: the depth of `var` is `residue` modulo `modulus`.

    Kept as its own node so the fragment classifier can see it; the
    evaluator uses the direct arithmetic test, the equivalent set-quantifier
    expansion lives in the macros module.
    """

    var: str
    modulus: int
    residue: int

    def __post_init__(self):
        _check_var(self.var, so=False)
        if self.modulus < 1 or not 0 <= self.residue < self.modulus:
            raise ParseError(
                f"mod parameters out of range: modulus={self.modulus}, residue={self.residue}"
            )
        _freeze(self, (self.var, self.modulus, self.residue))


@dataclass(frozen=True, eq=False, repr=False)
class Not(Formula):
    body: Formula

    def __post_init__(self):
        _freeze(self, (self.body,))


@dataclass(frozen=True, eq=False, repr=False)
class Or(Formula):
    left: Formula
    right: Formula

    def __post_init__(self):
        _freeze(self, (self.left, self.right))


@dataclass(frozen=True, eq=False, repr=False)
class And(Formula):
    left: Formula
    right: Formula

    def __post_init__(self):
        _freeze(self, (self.left, self.right))


class _Quantifier(Formula):
    __slots__ = ()


@dataclass(frozen=True, eq=False, repr=False)
class ExistsFO(_Quantifier):
    var: str
    body: Formula

    def __post_init__(self):
        _check_var(self.var, so=False)
        _freeze(self, (self.var, self.body))


@dataclass(frozen=True, eq=False, repr=False)
class ForallFO(_Quantifier):
    var: str
    body: Formula

    def __post_init__(self):
        _check_var(self.var, so=False)
        _freeze(self, (self.var, self.body))


@dataclass(frozen=True, eq=False, repr=False)
class ExistsSO(_Quantifier):
    var: str
    body: Formula

    def __post_init__(self):
        _check_var(self.var, so=True)
        _freeze(self, (self.var, self.body))


@dataclass(frozen=True, eq=False, repr=False)
class ForallSO(_Quantifier):
    var: str
    body: Formula

    def __post_init__(self):
        _check_var(self.var, so=True)
        _freeze(self, (self.var, self.body))


for _cls in (Const, Label, Edge, Leq, In, Mod, Not, Or, And,
             ExistsFO, ForallFO, ExistsSO, ForallSO):
    _cls.__hash__ = lambda self: self._hash  # type: ignore[method-assign]
    _cls.__repr__ = lambda self: f"<{type(self).__name__} {id(self):#x}>"  # type: ignore[method-assign]


def _node_eq(a, b):
    if a is b:
        return True
    if type(a) is not type(b) or a._hash != b._hash:
        return False
    for f in a.__dataclass_fields__:
        va, vb = getattr(a, f), getattr(b, f)
        if type(va) is not type(vb) or va != vb:
            return False
    return True


for _cls in (Const, Label, Edge, Leq, In, Mod, Not, Or, And,
             ExistsFO, ForallFO, ExistsSO, ForallSO):
    _cls.__eq__ = _node_eq  # type: ignore[method-assign]

_ATOMS = (Const, Label, Edge, Leq, In, Mod)
_BINDERS = (ExistsFO, ForallFO, ExistsSO, ForallSO)


# ---------------------------------------------------------------------------
# Interning.  Equal structures become the same object, so caches downstream
# can key on id().  Interned nodes are kept alive by the table.

_INTERN: dict = {}

_KIND_CONST = 0
_KIND_LABEL = 1
_KIND_EDGE = 2
_KIND_LEQ = 3
_KIND_IN = 4
_KIND_MOD = 5
_KIND_NOT = 6
_KIND_OR = 7
_KIND_AND = 8
_KIND_EXISTS_FO = 9
_KIND_FORALL_FO = 10
_KIND_EXISTS_SO = 11
_KIND_FORALL_SO = 12

_KINDS = {
    Const: _KIND_CONST, Label: _KIND_LABEL, Edge: _KIND_EDGE, Leq: _KIND_LEQ,
    In: _KIND_IN, Mod: _KIND_MOD, Not: _KIND_NOT, Or: _KIND_OR, And: _KIND_AND,
    ExistsFO: _KIND_EXISTS_FO, ForallFO: _KIND_FORALL_FO,
    ExistsSO: _KIND_EXISTS_SO, ForallSO: _KIND_FORALL_SO,
}


def _scalar_key(v):
    # 0 == Fraction(0) == False in Python; tag with the type to keep
    # weights from different semirings apart
    return (type(v).__name__, v)


def intern(node: Formula) -> Formula:
    if getattr(node, "_interned", False):
        return node
    if isinstance(node, _ATOMS):
        key = (type(node).__name__,) + tuple(
            _scalar_key(getattr(node, f)) for f in node.__dataclass_fields__
        )
    else:
        parts = []
        for f in node.__dataclass_fields__:
            v = getattr(node, f)
            if isinstance(v, Formula):
                v = intern(v)
                object.__setattr__(node, f, v)
                parts.append(id(v))
            else:
                parts.append(_scalar_key(v))
        key = (type(node).__name__,) + tuple(parts)
    found = _INTERN.get(key)
    if found is not None:
        return found
    _INTERN[key] = node
    object.__setattr__(node, "_interned", True)
    free = _compute_free(node)
    object.__setattr__(node, "_free", free)
    object.__setattr__(node, "_order", tuple(sorted(free)))
    object.__setattr__(node, "_kind", _KINDS[type(node)])
    object.__setattr__(node, "_nest", None)
    return node


def _compute_free(node: Formula) -> frozenset:
    if isinstance(node, Const):
        return frozenset()
    if isinstance(node, Label):
        return frozenset((node.var,))
    if isinstance(node, Edge):
        return frozenset((node.left, node.right))
    if isinstance(node, Leq):
        return frozenset((node.left, node.right))
    if isinstance(node, In):
        return frozenset((node.var, node.set_var))
    if isinstance(node, Mod):
        return frozenset((node.var,))
    if isinstance(node, Not):
        return free_vars(node.body)
    if isinstance(node, (Or, And)):
        return free_vars(node.left) | free_vars(node.right)
    if isinstance(node, _BINDERS):
        return free_vars(node.body) - {node.var}
    raise TypeError(f"not a formula node: {node!r}")


def free_vars(node: Formula) -> frozenset:
    return intern(node)._free


_fresh_counter = itertools.count(1)


def fresh_var(prefix: str = "v") -> str:
    """Fresh first-order variable name; never collides with earlier draws."""
    return f"_{prefix}{next(_fresh_counter)}"


def fresh_so_var(prefix: str = "X") -> str:
    return f"{prefix}_{next(_fresh_counter)}"


def rename_free(node: Formula, mapping: Mapping[str, str]) -> Formula:
    """Simultaneous renaming of free variables, capture-avoiding."""
    mapping = {k: v for k, v in mapping.items() if k != v}
    if not mapping:
        return intern(node)
    return intern(_rename(intern(node), mapping))


def _rename(node, mapping):
    mapping = {k: v for k, v in mapping.items() if k in free_vars(node)}
    if not mapping:
        return node
    if isinstance(node, Label):
        return Label(node.symbol, mapping.get(node.var, node.var))
    if isinstance(node, Edge):
        return Edge(node.index, mapping.get(node.left, node.left),
                    mapping.get(node.right, node.right))
    if isinstance(node, Leq):
        return Leq(mapping.get(node.left, node.left),
                   mapping.get(node.right, node.right))
    if isinstance(node, In):
        return In(mapping.get(node.var, node.var),
                  mapping.get(node.set_var, node.set_var))
    if isinstance(node, Mod):
        return Mod(mapping.get(node.var, node.var), node.modulus, node.residue)
    if isinstance(node, Not):
        return Not(_rename(node.body, mapping))
    if isinstance(node, (Or, And)):
        return type(node)(_rename(node.left, mapping), _rename(node.right, mapping))
    if isinstance(node, _BINDERS):
        inner = {k: v for k, v in mapping.items() if k != node.var}
        var = node.var
        body = node.body
        if var in inner.values():
            fresh = fresh_so_var() if is_so_name(var) else fresh_var()
            body = _rename(body, {var: fresh})
            var = fresh
        return type(node)(var, _rename(body, inner))
    raise TypeError(f"not a formula node: {node!r}")


# ---------------------------------------------------------------------------
# Encoded trees.

@dataclass(frozen=True)
class EncodedTree:
    """A tree plus per-node variable marks, representing (tree, assignment).

    Valid iff every first-order variable in `varset` marks exactly one node.
    """

    base: Tree
    varset: frozenset
    marks: tuple  # sorted tuple of (position, frozenset of names)

    def __init__(self, base: Tree, varset: Iterable[str],
                 marks: Mapping[Position, Iterable[str]]):
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "varset", frozenset(varset))
        cleaned = []
        for pos, names in sorted(marks.items()):
            names = frozenset(names)
            if not names <= self.varset:
                raise UnboundVariable(
                    f"marks mention variables outside the declared set: "
                    f"{sorted(names - self.varset)}"
                )
            if names:
                cleaned.append((tuple(pos), names))
        object.__setattr__(self, "marks", tuple(cleaned))

    @property
    def is_valid(self) -> bool:
        counts = {v: 0 for v in self.varset if not is_so_name(v)}
        for _, names in self.marks:
            for v in names:
                if v in counts:
                    counts[v] += 1
        return all(c == 1 for c in counts.values())

    def assignment(self) -> dict:
        """Variable -> position (first-order) or frozenset of positions."""
        fo = {}
        so = {v: set() for v in self.varset if is_so_name(v)}
        for pos, names in self.marks:
            for v in names:
                if is_so_name(v):
                    so[v].add(pos)
                else:
                    fo[v] = pos
        out = dict(fo)
        out.update({v: frozenset(ps) for v, ps in so.items()})
        return out


def encode(tree: Tree, assignment: Mapping, varset: Iterable[str]) -> EncodedTree:
    varset = frozenset(varset)
    positions = set(tree.positions())
    marks: dict = {}
    for var, value in assignment.items():
        if var not in varset:
            raise UnboundVariable(f"assignment for {var!r} outside the variable set")
        if is_so_name(var):
            for pos in value:
                pos = tuple(pos)
                if pos not in positions:
                    raise PositionOutOfRange(f"{var!r} assigned position outside tree")
                marks.setdefault(pos, set()).add(var)
        else:
            pos = tuple(value)
            if pos not in positions:
                raise PositionOutOfRange(f"{var!r} assigned position outside tree")
            marks.setdefault(pos, set()).add(var)
    return EncodedTree(tree, varset, marks)


def decode(encoded: EncodedTree):
    if not encoded.is_valid:
        raise InvalidEncoding("a first-order variable does not mark exactly one node")
    return encoded.base, encoded.assignment()


# ---------------------------------------------------------------------------
# Fragment classification.

MSO = "MSO"
FO = "FO"
BFO = "BFO"
BFOMOD = "BFO+mod"
BMSO = "BMSO"
RMSO = "RMSO"
BMSO_STEP = "BMSO-step"
BFOMOD_STEP = "BFO+mod-step"

_FRAGMENT_CACHE: dict = {}


def _bool_const(S: Semiring, node) -> bool:
    return isinstance(node, Const) and (S.eq(node.value, S.zero) or S.eq(node.value, S.one))


def _core_flags(S: Semiring, node) -> frozenset:
    """Flags for FO / BFO / BFO+mod / BMSO, computed bottom-up."""
    key = (S.name, id(node))
    got = _FRAGMENT_CACHE.get(key)
    if got is not None:
        return got
    if isinstance(node, Const):
        flags = {FO}
        if _bool_const(S, node):
            flags |= {BFO, BFOMOD, BMSO}
    elif isinstance(node, (Label, Edge, Leq, In)):
        flags = {FO, BFO, BFOMOD, BMSO}
    elif isinstance(node, Mod):
        flags = {BFOMOD, BMSO}
    elif isinstance(node, Not):
        flags = set(_core_flags(S, node.body))
    elif isinstance(node, And):
        flags = set(_core_flags(S, node.left) & _core_flags(S, node.right))
    elif isinstance(node, Or):
        flags = set(_core_flags(S, node.left) & _core_flags(S, node.right)) & {FO}
    elif isinstance(node, ExistsFO):
        flags = set(_core_flags(S, node.body)) & {FO}
    elif isinstance(node, ForallFO):
        flags = set(_core_flags(S, node.body))
    elif isinstance(node, ExistsSO):
        flags = set()
    elif isinstance(node, ForallSO):
        flags = set(_core_flags(S, node.body)) & {BMSO}
    else:
        raise TypeError(f"not a formula node: {node!r}")
    result = frozenset(flags)
    _FRAGMENT_CACHE[key] = result
    return result


def is_step(S: Semiring, node: Formula, fragment: str = BMSO) -> bool:
    """Membership in the step grammar over the given Boolean fragment."""
    node = intern(node)
    if fragment in _core_flags(S, node):
        return True
    if isinstance(node, Const):
        return True
    if isinstance(node, Not):
        return is_step(S, node.body, fragment)
    if isinstance(node, (Or, And)):
        return is_step(S, node.left, fragment) and is_step(S, node.right, fragment)
    return False


def _is_rmso(S: Semiring, node) -> bool:
    if isinstance(node, (Const, Label, Edge, Leq, In)):
        return True
    if isinstance(node, Mod):
        return True
    if isinstance(node, Not):
        return is_step(S, node.body, BMSO)
    if isinstance(node, (Or, And)):
        return _is_rmso(S, node.left) and _is_rmso(S, node.right)
    if isinstance(node, (ExistsFO, ExistsSO)):
        return _is_rmso(S, node.body)
    if isinstance(node, ForallFO):
        return is_step(S, node.body, BMSO)
    if isinstance(node, ForallSO):
        return BMSO in _core_flags(S, node.body)
    raise TypeError(f"not a formula node: {node!r}")


def fragment_of(node: Formula, S: Semiring) -> frozenset:
    """Every syntactic fragment the formula belongs to.

    Constants need the semiring to decide whether they are the Boolean 0/1,
    hence the extra argument.
    """
    node = intern(node)
    flags = set(_core_flags(S, node)) | {MSO}
    if _is_rmso(S, node):
        flags.add(RMSO)
    if is_step(S, node, BMSO):
        flags.add(BMSO_STEP)
    if is_step(S, node, BFOMOD):
        flags.add(BFOMOD_STEP)
    return frozenset(flags)


def is_boolean_fragment(S: Semiring, node: Formula) -> bool:
    """Syntactically Boolean-valued (BMSO, with depth-modulo atoms allowed)."""
    return BMSO in _core_flags(S, intern(node))


# ---------------------------------------------------------------------------
# Step-formula disjunctive normal form.

def step_atoms(S: Semiring, node: Formula) -> list:
    """Maximal Boolean subformulas of a step formula, first-seen order."""
    node = intern(node)
    out: list = []
    seen: set = set()

    def walk(n):
        if BMSO in _core_flags(S, n):
            if id(n) not in seen:
                seen.add(id(n))
                out.append(n)
            return
        if isinstance(n, Const):
            return
        if isinstance(n, Not):
            walk(n.body)
            return
        if isinstance(n, (Or, And)):
            walk(n.left)
            walk(n.right)
            return
        raise NotStepFormula(f"subformula {render_formula(n, S)} is not step-shaped")

    walk(node)
    return out


def step_dnf(S: Semiring, node: Formula) -> list:
    """Rewrite a step formula as a weighted disjunction of guarded constants.

    Returns pairs (weight, boolean formula); on every valid encoded tree the
    input equals the sum of weight * [[formula]] over the pairs.
    """
    node = intern(node)
    atoms = step_atoms(S, node)

    def fold(n, truth):
        if isinstance(n, Const):
            return n.value
        got = truth.get(id(n))
        if got is not None:
            return S.one if got else S.zero
        if isinstance(n, Not):
            return S.from_bool(S.is_zero(fold(n.body, truth)))
        if isinstance(n, Or):
            return S.add(fold(n.left, truth), fold(n.right, truth))
        if isinstance(n, And):
            return S.mul(fold(n.left, truth), fold(n.right, truth))
        raise NotStepFormula("unreachable: step_atoms already validated the shape")

    result = []
    for bits in itertools.product((True, False), repeat=len(atoms)):
        truth = {id(a): b for a, b in zip(atoms, bits)}
        weight = fold(node, truth)
        literals = [a if b else Not(a) for a, b in zip(atoms, bits)]
        if literals:
            guard = literals[0]
            for lit in literals[1:]:
                guard = And(guard, lit)
        else:
            guard = Const(S.one)
        result.append((weight, intern(guard)))
    return result


# ---------------------------------------------------------------------------
# Evaluation.

class EvalCache:
    """Cross-call memo, shared by harnesses that evaluate many formulas
    against the same trees.  Keyed by semiring and base tree."""

    def __init__(self):
        self._contexts: dict = {}

    def context(self, S: Semiring, base: Tree) -> dict:
        key = (S.name, base)
        ctx = self._contexts.get(key)
        if ctx is None:
            ctx = {}
            self._contexts[key] = ctx
        return ctx


def evaluate(S: Semiring, formula: Formula, encoded: EncodedTree,
             caps: Caps = DEFAULT_CAPS, cache: EvalCache | None = None):
    """Weight of the formula on an encoded tree; zero if the encoding is invalid."""
    formula = intern(formula)
    missing = free_vars(formula) - encoded.varset
    if missing:
        raise UnboundVariable(f"free variables without a declaration: {sorted(missing)}")
    if not encoded.is_valid:
        return S.zero
    env = encoded.assignment()
    return evaluate_at(S, formula, encoded.base, env, caps=caps, cache=cache)


def evaluate_at(S: Semiring, formula: Formula, tree: Tree, env: Mapping,
                caps: Caps = DEFAULT_CAPS, cache: EvalCache | None = None):
    """Evaluate against a tree and a direct variable assignment.

    The assignment maps first-order variables to positions and second-order
    variables to frozensets of positions; it is taken at face value (it
    already describes a valid encoding).
    """
    formula = intern(formula)
    memo = cache.context(S, tree) if cache is not None else {}
    ev = _Evaluator(S, tree, caps, memo)
    env = {v: (frozenset(map(tuple, val)) if is_so_name(v) else tuple(val))
           for v, val in env.items()}
    missing = free_vars(formula) - set(env)
    if missing:
        raise UnboundVariable(f"no assignment for: {sorted(missing)}")
    return ev.eval(formula, env)


def _conjuncts(node):
    if isinstance(node, And):
        return _conjuncts(node.left) + _conjuncts(node.right)
    return (node,)


def _stage_plan(variables, conjuncts):
    """Assign each conjunct to the earliest point where its block variables
    are all bound: (prefix conjuncts, per-variable conjunct lists)."""
    index = {v: i for i, v in enumerate(variables)}
    prefix = []
    stages = [[] for _ in variables]
    for c in conjuncts:
        relevant = [index[v] for v in c._free if v in index]
        if relevant:
            stages[max(relevant)].append(c)
        else:
            prefix.append(c)
    return tuple(prefix), tuple(tuple(s) for s in stages)


def _nest_plan(node, S, witness):
    """Cached decomposition of an exists block into variables + staged
    conjuncts; None when the node does not have the needed shape."""
    cache = node._nest
    if cache is None:
        cache = {}
        object.__setattr__(node, "_nest", cache)
    key = ("w", S.name) if witness else "e"
    plan = cache.get(key, False)
    if plan is not False:
        return plan
    variables = []
    body = node
    if witness:
        while (isinstance(body, Not) and isinstance(body.body, ForallFO)
               and isinstance(body.body.body, Not)):
            variables.append(body.body.var)
            body = body.body.body.body
    else:
        while isinstance(body, ExistsFO):
            variables.append(body.var)
            body = body.body
    conj = _conjuncts(body)
    plan = None
    if variables and len(set(variables)) == len(variables):
        if not witness or all(BMSO in _core_flags(S, c) for c in conj):
            prefix, stages = _stage_plan(variables, conj)
            plan = (tuple(variables), prefix, stages)
    cache[key] = plan
    return plan


class _Evaluator:
    def __init__(self, S: Semiring, tree: Tree, caps: Caps, memo: dict):
        self.S = S
        self.tree = tree
        self.caps = caps
        self.memo = memo
        self.positions = tree.positions()
        self.labels = {w: tree.label_at(w) for w in self.positions}

    def eval(self, node, env):
        S = self.S
        kind = node._kind
        # atoms: direct, no memo
        if kind == _KIND_LABEL:
            return S.one if self.labels[env[node.var]] == node.symbol else S.zero
        if kind == _KIND_CONST:
            return node.value
        if kind == _KIND_EDGE:
            return (S.one if env[node.right] == env[node.left] + (node.index,)
                    else S.zero)
        if kind == _KIND_LEQ:
            return S.one if lex_leq(env[node.left], env[node.right]) else S.zero
        if kind == _KIND_IN:
            return S.one if env[node.var] in env[node.set_var] else S.zero
        if kind == _KIND_MOD:
            return (S.one if len(env[node.var]) % node.modulus == node.residue
                    else S.zero)

        memo = self.memo
        key = (id(node),) + tuple([env[v] for v in node._order])
        got = memo.get(key)
        if got is not None:
            return got

        if kind == _KIND_AND:
            value = self.eval(node.left, env)
            if value != S.zero:
                value = S.mul(value, self.eval(node.right, env))
        elif kind == _KIND_OR:
            value = S.add(self.eval(node.left, env), self.eval(node.right, env))
        elif kind == _KIND_NOT:
            plan = _nest_plan(node, S, witness=True)
            if plan is not None:
                value = self._staged(plan, env, witness=True)
            else:
                value = S.one if self.eval(node.body, env) == S.zero else S.zero
        elif kind == _KIND_EXISTS_FO:
            plan = _nest_plan(node, S, witness=False)
            if plan is not None:
                value = self._staged(plan, env, witness=False)
            else:  # shadowed variable names; fall back to one level at a time
                value = S.zero
                env2 = dict(env)
                for w in self.positions:
                    env2[node.var] = w
                    value = S.add(value, self.eval(node.body, env2))
        elif kind == _KIND_FORALL_FO:
            value = S.one
            env2 = dict(env)
            for w in self.positions:
                env2[node.var] = w
                value = S.mul(value, self.eval(node.body, env2))
                if value == S.zero:
                    break
        elif kind == _KIND_EXISTS_SO:
            value = S.zero
            env2 = dict(env)
            for subset in self._subsets():
                env2[node.var] = subset
                value = S.add(value, self.eval(node.body, env2))
        elif kind == _KIND_FORALL_SO:
            value = S.one
            env2 = dict(env)
            for subset in self._subsets():
                env2[node.var] = subset
                value = S.mul(value, self.eval(node.body, env2))
                if value == S.zero:
                    break
        else:
            raise TypeError(f"not a formula node: {node!r}")

        memo[key] = value
        return value

    def _subsets(self):
        """Subsets of the position set, enumerated by a binary counter over
        the lexicographically sorted positions."""
        n = len(self.positions)
        if n > self.caps.so_positions:
            raise ExplosionGuard("so_positions", self.caps.so_positions, n)
        for mask in range(1 << n):
            yield frozenset(
                self.positions[i] for i in range(n) if mask & (1 << i)
            )

    def _staged(self, plan, env, witness):
        """Backtracking evaluation of an exists-block over a conjunction.

        Conjuncts are evaluated as soon as their block variables are bound;
        zero factors prune the branch.  For the weighted block this computes
        the sum over all assignments of the product of conjuncts (sound by
        commutativity and distributivity).  For the Boolean block (all
        conjuncts 0/1-valued) it searches for a witness.
        """
        S = self.S
        variables, prefix, stages = plan
        zero = S.zero
        mul = S.mul
        add = S.add
        one = S.one
        evaluate = self.eval
        positions = self.positions

        base = one
        for c in prefix:
            base = mul(base, evaluate(c, env))
            if base == zero:
                return zero

        env2 = dict(env)
        last = len(variables)

        def rec(i):
            total = zero
            var = variables[i]
            stage = stages[i]
            deeper = i + 1
            for w in positions:
                env2[var] = w
                factor = one
                for c in stage:
                    factor = mul(factor, evaluate(c, env2))
                    if factor == zero:
                        break
                if factor == zero:
                    continue
                if deeper == last:
                    if witness:
                        return one
                    total = add(total, factor)
                    continue
                rest = rec(deeper)
                if witness and rest != zero:
                    return one
                total = add(total, mul(factor, rest))
            return total

        value = rec(0)
        if witness:
            return one if value != zero else zero
        return mul(base, value)


# ---------------------------------------------------------------------------
# Classical two-valued model checking, used as an independent oracle.

def classical_holds(S: Semiring, formula: Formula, tree: Tree, env: Mapping,
                    caps: Caps = DEFAULT_CAPS) -> bool:
    """Direct satisfaction relation; constants must be the Boolean 0/1."""
    positions = tree.positions()
    labels = {w: tree.label_at(w) for w in positions}

    def subsets():
        n = len(positions)
        if n > caps.so_positions:
            raise ExplosionGuard("so_positions", caps.so_positions, n)
        for mask in range(1 << n):
            yield frozenset(positions[i] for i in range(n) if mask & (1 << i))

    def sat(node, rho) -> bool:
        if isinstance(node, Const):
            if S.eq(node.value, S.one):
                return True
            if S.eq(node.value, S.zero):
                return False
            raise TreeLogicError("classical oracle needs 0/1 constants")
        if isinstance(node, Label):
            return labels[rho[node.var]] == node.symbol
        if isinstance(node, Edge):
            return rho[node.right] == rho[node.left] + (node.index,)
        if isinstance(node, Leq):
            return lex_leq(rho[node.left], rho[node.right])
        if isinstance(node, In):
            return rho[node.var] in rho[node.set_var]
        if isinstance(node, Mod):
            return len(rho[node.var]) % node.modulus == node.residue
        if isinstance(node, Not):
            return not sat(node.body, rho)
        if isinstance(node, Or):
            return sat(node.left, rho) or sat(node.right, rho)
        if isinstance(node, And):
            return sat(node.left, rho) and sat(node.right, rho)
        if isinstance(node, ExistsFO):
            return any(sat(node.body, {**rho, node.var: w}) for w in positions)
        if isinstance(node, ForallFO):
            return all(sat(node.body, {**rho, node.var: w}) for w in positions)
        if isinstance(node, ExistsSO):
            return any(sat(node.body, {**rho, node.var: I}) for I in subsets())
        if isinstance(node, ForallSO):
            return all(sat(node.body, {**rho, node.var: I}) for I in subsets())
        raise TypeError(f"not a formula node: {node!r}")

    rho = {v: (frozenset(map(tuple, val)) if is_so_name(v) else tuple(val))
           for v, val in env.items()}
    return sat(intern(formula), rho)


# ---------------------------------------------------------------------------
# S-expression syntax.

def render_formula(node: Formula, S: Semiring) -> str:
    if isinstance(node, Const):
        return f"(const {S.render(node.value)})"
    if isinstance(node, Label):
        return f"(label {node.symbol} {node.var})"
    if isinstance(node, Edge):
        return f"(edge {node.index} {node.left} {node.right})"
    if isinstance(node, Leq):
        return f"(leq {node.left} {node.right})"
    if isinstance(node, In):
        return f"(in {node.var} {node.set_var})"
    if isinstance(node, Mod):
        return f"(mod {node.var} {node.modulus} {node.residue})"
    if isinstance(node, Not):
        return f"(not {render_formula(node.body, S)})"
    if isinstance(node, Or):
        return f"(or {render_formula(node.left, S)} {render_formula(node.right, S)})"
    if isinstance(node, And):
        return f"(and {render_formula(node.left, S)} {render_formula(node.right, S)})"
    if isinstance(node, ExistsFO):
        return f"(exists1 {node.var} {render_formula(node.body, S)})"
    if isinstance(node, ForallFO):
        return f"(forall1 {node.var} {render_formula(node.body, S)})"
    if isinstance(node, ExistsSO):
        return f"(exists2 {node.var} {render_formula(node.body, S)})"
    if isinstance(node, ForallSO):
        return f"(forall2 {node.var} {render_formula(node.body, S)})"
    raise TypeError(f"not a formula node: {node!r}")


class _SexpParser:
    def __init__(self, text, S):
        self.text = text
        self.S = S
        self.pos = 0
        self.line = 1
        self.col = 1

    def _error(self, msg):
        raise ParseError(msg, self.line, self.col)

    def _advance(self, n=1):
        for ch in self.text[self.pos : self.pos + n]:
            if ch == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
        self.pos += n

    def _skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self._advance()

    def _peek(self):
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def _token(self):
        self._skip_ws()
        start = self.pos
        while self.pos < len(self.text) and not self.text[self.pos].isspace() \
                and self.text[self.pos] not in "()":
            self._advance()
        if start == self.pos:
            self._error("expected a token")
        return self.text[start : self.pos]

    def parse(self):
        self._skip_ws()
        node = self._formula()
        self._skip_ws()
        if self.pos != len(self.text):
            self._error("unexpected trailing input")
        return intern(node)

    def _expect(self, ch):
        self._skip_ws()
        if self._peek() != ch:
            self._error(f"expected {ch!r}")
        self._advance()

    def _int(self):
        tok = self._token()
        if not tok.isdigit():
            self._error(f"expected an integer, got {tok!r}")
        return int(tok)

    def _formula(self):
        self._expect("(")
        head = self._token()
        line, col = self.line, self.col
        try:
            node = self._body(head)
        except ParseError:
            raise
        except TreeLogicError as exc:
            raise ParseError(str(exc), line, col) from exc
        self._expect(")")
        return node

    def _body(self, head):
        if head == "const":
            return Const(self.S.parse(self._token()))
        if head == "label":
            return Label(self._token(), self._token())
        if head == "edge":
            return Edge(self._int(), self._token(), self._token())
        if head == "leq":
            return Leq(self._token(), self._token())
        if head == "in":
            return In(self._token(), self._token())
        if head == "mod":
            return Mod(self._token(), self._int(), self._int())
        if head == "not":
            return Not(self._formula())
        if head == "or":
            return Or(self._formula(), self._formula())
        if head == "and":
            return And(self._formula(), self._formula())
        if head in ("exists1", "forall1", "exists2", "forall2"):
            var = self._token()
            body = self._formula()
            cls = {"exists1": ExistsFO, "forall1": ForallFO,
                   "exists2": ExistsSO, "forall2": ForallSO}[head]
            return cls(var, body)
        self._error(f"unknown formula head {head!r}")


def parse_formula(text: str, S: Semiring) -> Formula:
    return _SexpParser(text, S).parse()
