from fractions import Fraction

import pytest

from rentdiv import make_instance

# The three instances every module's examples revolve around.
FIX_A_VALS = [[10, 2], [4, 6]]
FIX_EX_VALS = [[20, 0, 20, 0], [0, 19, 0, 0], [5, 0, 5, 0], [0, 0, 0, 2]]
FIX_TIE_VALS = [[5, 5], [5, 5]]


def make_fix_a(**overrides):
    kwargs = {"total_rent": 8}
    kwargs.update(overrides)
    return make_instance(FIX_A_VALS, **kwargs)


def make_fix_ex(**overrides):
    kwargs = {"total_rent": 4, "lower_bounds": [0, 0, 0, 2],
              "upper_bounds": [2, 2, 2, 2]}
    kwargs.update(overrides)
    return make_instance(FIX_EX_VALS, **kwargs)


def make_fix_tie(**overrides):
    kwargs = {"total_rent": 6}
    kwargs.update(overrides)
    return make_instance(FIX_TIE_VALS, **kwargs)


@pytest.fixture
def fix_a():
    return make_fix_a()


@pytest.fixture
def fix_ex():
    return make_fix_ex()


@pytest.fixture
def fix_tie():
    return make_fix_tie()


def F(x):
    return Fraction(x)
