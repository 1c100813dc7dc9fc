"""Straight-line reference evaluator for weighted MSO.

A deliberate transliteration of the semantics table with no sharing, no
memoization and no search-order tricks; the production evaluator must agree
with it everywhere.  Keep this file free of imports from the evaluator
internals.
"""

from treelogic.formulas import (
    And,
    Const,
    Edge,
    ExistsFO,
    ExistsSO,
    ForallFO,
    ForallSO,
    In,
    Label,
    Leq,
    Mod,
    Not,
    Or,
)
from treelogic.trees import lex_leq


def reference_eval(S, formula, tree, env):
    positions = tree.positions()

    def subsets():
        n = len(positions)
        for mask in range(1 << n):
            yield frozenset(positions[i] for i in range(n) if mask & (1 << i))

    def ev(node, rho):
        if isinstance(node, Const):
            return node.value
        if isinstance(node, Label):
            return S.from_bool(tree.label_at(rho[node.var]) == node.symbol)
        if isinstance(node, Edge):
            return S.from_bool(rho[node.right] == rho[node.left] + (node.index,))
        if isinstance(node, Leq):
            return S.from_bool(lex_leq(rho[node.left], rho[node.right]))
        if isinstance(node, In):
            return S.from_bool(rho[node.var] in rho[node.set_var])
        if isinstance(node, Mod):
            return S.from_bool(len(rho[node.var]) % node.modulus == node.residue)
        if isinstance(node, Not):
            return S.from_bool(S.is_zero(ev(node.body, rho)))
        if isinstance(node, Or):
            return S.add(ev(node.left, rho), ev(node.right, rho))
        if isinstance(node, And):
            return S.mul(ev(node.left, rho), ev(node.right, rho))
        if isinstance(node, ExistsFO):
            total = S.zero
            for w in positions:
                total = S.add(total, ev(node.body, {**rho, node.var: w}))
            return total
        if isinstance(node, ForallFO):
            total = S.one
            for w in positions:
                total = S.mul(total, ev(node.body, {**rho, node.var: w}))
            return total
        if isinstance(node, ExistsSO):
            total = S.zero
            for I in subsets():
                total = S.add(total, ev(node.body, {**rho, node.var: I}))
            return total
        if isinstance(node, ForallSO):
            total = S.one
            for I in subsets():
                total = S.mul(total, ev(node.body, {**rho, node.var: I}))
            return total
        raise TypeError(f"unexpected node {node!r}")

    rho = {}
    for name, value in env.items():
        if isinstance(value, (tuple, list)):
            rho[name] = tuple(value)
        else:
            rho[name] = frozenset(map(tuple, value))
    return ev(formula, rho)
