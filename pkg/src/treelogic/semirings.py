"""Commutative semirings with exact weights.

All weights are exact values: Python ints for the Boolean and natural-number
semirings, `fractions.Fraction` for the tropical and Viterbi semirings
(tropical additionally uses the distinguished infinity `INF`).  Floating
point never appears in a weight.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

from .errors import ParseError


class _Infinity:
    """The tropical zero; compares greater than every rational."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __hash__(self):
        return hash("treelogic-tropical-infinity")


INF = _Infinity()


def _trop_add(a, b):
    if a is INF:
        return b
    if b is INF:
        return a
    return a if a <= b else b


def _trop_mul(a, b):
    if a is INF or b is INF:
        return INF
    return a + b


def _frac_to_text(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational literal {text!r}") from exc


@dataclass(frozen=True)
class Semiring:
    """A commutative semiring together with parsing and rendering of weights.

    `zero_divisor_free` asserts that a product of nonzero elements is
    nonzero; the evaluator uses it to justify witness-search shortcuts.
    All four built-in semirings have the property.
    """

    name: str
    zero: object
    one: object
    add: Callable
    mul: Callable
    render: Callable
    parse: Callable
    validate: Callable = field(default=lambda v: None)
    zero_divisor_free: bool = True

    def eq(self, a, b) -> bool:
        return a == b or (a is INF and b is INF)

    def is_zero(self, v) -> bool:
        return self.eq(v, self.zero)

    def sum(self, values: Iterable):
        acc = self.zero
        for v in values:
            acc = self.add(acc, v)
        return acc

    def product(self, values: Iterable):
        acc = self.one
        for v in values:
            acc = self.mul(acc, v)
            if self.is_zero(acc):
                return self.zero
        return acc

    def from_bool(self, b: bool):
        return self.one if b else self.zero

    def __repr__(self):
        return f"Semiring({self.name})"


def _parse_bool(text: str):
    if text == "0":
        return 0
    if text == "1":
        return 1
    raise ParseError(f"boolean weight must be 0 or 1, got {text!r}")


def _parse_nat(text: str):
    if not text.isdigit():
        raise ParseError(f"natural-number weight must be a decimal integer, got {text!r}")
    return int(text)


def _validate_nat(v):
    if not isinstance(v, int) or isinstance(v, bool) or v < 0:
        raise ParseError(f"not a natural number: {v!r}")


def _parse_tropical(text: str):
    if text == "inf":
        return INF
    return _parse_fraction(text)


def _validate_tropical(v):
    if v is INF:
        return
    if not isinstance(v, Fraction):
        raise ParseError(f"tropical weight must be a rational or inf: {v!r}")


def _parse_viterbi(text: str):
    v = _parse_fraction(text)
    _validate_viterbi(v)
    return v


def _validate_viterbi(v):
    if not isinstance(v, Fraction) or not (0 <= v <= 1):
        raise ParseError(f"viterbi weight must be a rational in [0,1]: {v!r}")


def _validate_bool(v):
    if v not in (0, 1) or isinstance(v, bool):
        raise ParseError(f"boolean weight must be the int 0 or 1: {v!r}")


BOOLEAN = Semiring(
    name="bool",
    zero=0,
    one=1,
    add=lambda a, b: a | b,
    mul=lambda a, b: a & b,
    render=str,
    parse=_parse_bool,
    validate=_validate_bool,
)

NATURALS = Semiring(
    name="nat",
    zero=0,
    one=1,
    add=lambda a, b: a + b,
    mul=lambda a, b: a * b,
    render=str,
    parse=_parse_nat,
    validate=_validate_nat,
)

TROPICAL = Semiring(
    name="tropical",
    zero=INF,
    one=Fraction(0),
    add=_trop_add,
    mul=_trop_mul,
    render=lambda v: "inf" if v is INF else _frac_to_text(v),
    parse=_parse_tropical,
    validate=_validate_tropical,
)

VITERBI = Semiring(
    name="viterbi",
    zero=Fraction(0),
    one=Fraction(1),
    add=max,
    mul=lambda a, b: a * b,
    render=_frac_to_text,
    parse=_parse_viterbi,
    validate=_validate_viterbi,
)

SEMIRINGS = {s.name: s for s in (BOOLEAN, NATURALS, TROPICAL, VITERBI)}


def by_name(name: str) -> Semiring:
    try:
        return SEMIRINGS[name]
    except KeyError:
        raise ParseError(
            f"unknown semiring {name!r}; expected one of {sorted(SEMIRINGS)}"
        ) from None


def semiring_sum(S: Semiring, values: Iterable):
    return S.sum(values)


def semiring_product(S: Semiring, values: Iterable):
    return S.product(values)


def is_zero(S: Semiring, v) -> bool:
    return S.is_zero(v)
