import math

import numpy as np
import pytest

from circinv.symbol import GegenbauerSymbol, RationalRegularPart

# c1 = |2 + chi|^2 = 5 + 4 cos(theta)
FIVE_FOUR = RationalRegularPart((2.0, 1.0), (1.0,))

# the four symbols of the oracle triangle
TEST_SYMBOLS = [
    GegenbauerSymbol(a, t) for a in (-0.25, 0.25) for t in (math.pi / 3, math.pi / 2)
]

ACCEPTANCE_LINES: list[str] = []


def symbol_id(sym):
    reg = "" if sym.regular.is_constant_one else ",c1"
    return f"a={sym.alpha:g},t={sym.theta0:.4g}{reg}"


@pytest.fixture
def quarter():
    return GegenbauerSymbol(0.25, math.pi / 3)


@pytest.fixture
def quarter_c1():
    return GegenbauerSymbol(0.25, math.pi / 3, FIVE_FOUR)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
