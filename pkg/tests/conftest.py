import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from treelogic.closure import FormulaFamily
from treelogic.formulas import parse_formula
from treelogic.semirings import BOOLEAN, NATURALS, SEMIRINGS, TROPICAL, VITERBI
from treelogic.trees import RankedAlphabet, TreeHomomorphism, parse_term

ALL_SEMIRINGS = (BOOLEAN, NATURALS, TROPICAL, VITERBI)

BINARY = RankedAlphabet({"sigma": 2, "alpha": 0})
MONADIC = RankedAlphabet({"gamma": 1, "e": 0})
MONADIC2 = RankedAlphabet({"gamma": 1, "delta": 1, "e": 0})
MIXED = RankedAlphabet({"sigma": 2, "gamma": 1, "alpha": 0})
WIDE = RankedAlphabet({"delta": 3, "sigma": 2, "alpha": 0, "beta": 0})

XI1 = parse_term("sigma(sigma(sigma(alpha,alpha),alpha),alpha)")
XI2 = parse_term("sigma(alpha,sigma(alpha,alpha))")

COUNTING_MEMBERS = (
    "(label alpha x)",
    "(const 0)",
    "(and (label sigma x) (and (edge 1 x y1) (edge 2 x y2)))",
    "(and (label sigma x) (exists1 x1 (and (edge 1 x x1) (and (label sigma x1)"
    " (and (edge 1 x1 y1) (and (edge 2 x1 y2) (edge 2 x y3)))))))",
)


def counting_family(S):
    """Family whose bounded closure counts preimages of the flattening
    homomorphism below."""
    return FormulaFamily([parse_formula(text, S) for text in COUNTING_MEMBERS])


def counting_homomorphism():
    source = RankedAlphabet({"a": 3, "b": 2, "alpha": 0})
    return TreeHomomorphism(source, {
        "a": parse_term("sigma(sigma(z1,z2),z3)", allow_vars=True),
        "b": parse_term("sigma(z1,z2)", allow_vars=True),
        "alpha": parse_term("alpha"),
    })


@pytest.fixture
def binary():
    return BINARY


@pytest.fixture
def monadic():
    return MONADIC


@pytest.fixture(params=ALL_SEMIRINGS, ids=lambda s: s.name)
def semiring(request):
    return request.param
