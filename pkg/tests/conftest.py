from fractions import Fraction
from pathlib import Path

import pytest

from algebra import build_modular_linear_family, min_family
from functions import FunctionTable, OrderedRange

REPO_ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture
def z5():
    """ω(x, y) = 3(x + y) mod 5, the midpoint of Z_5."""
    return build_modular_linear_family(5, [(3, 3)], names=["omega1"])


@pytest.fixture
def min4():
    return min_family(4)


@pytest.fixture
def add4():
    return build_modular_linear_family(4, [(1, 1)], names=["add4"])


@pytest.fixture
def midpoint_range():
    return OrderedRange.scalar({"omega1": [Fraction(1, 2), Fraction(1, 2)]})


@pytest.fixture
def min_range():
    return OrderedRange.scalar({"min2": [Fraction(1, 2), Fraction(1, 2)]})


@pytest.fixture
def min_f():
    return FunctionTable.scalars([1, 2, 2, 5])


@pytest.fixture
def instances_dir():
    return REPO_ROOT / "instances"
