"""Enumeration caps shared by the evaluator and the construction harnesses."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Caps:
    # set quantifiers enumerate 2^positions subsets
    so_positions: int = 20
    # slice enumeration per (alphabet, depth, variable count)
    slices: int = 10000
    # branching-closure table work estimate, m * positions^m
    closure_work: int = 10_000_000


DEFAULT_CAPS = Caps()
