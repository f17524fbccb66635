import math

import mpmath
import numpy as np
import pytest
from scipy.integrate import quad

from circinv.errors import DomainError, NoConvergence
from circinv.fourier import (
    FourierTable,
    abel_tail,
    identity_table,
    single_zero_coeffs,
    singular_fourier,
    smooth_fourier,
    symbol_fourier,
)
from circinv.symbol import GegenbauerSymbol, eval_symbol

from conftest import FIVE_FOUR

MATRIX = [
    GegenbauerSymbol(a, t, reg)
    for a in (-0.25, 0.25, 0.4)
    for t in (math.pi / 3, math.pi / 2, 2.5)
    for reg in (GegenbauerSymbol(0, 1).regular, FIVE_FOUR)
]


def quad_coeff(sym, s):
    """(1/pi) int_0^pi h(theta) cos(s theta), splitting at theta0."""
    f = lambda t: eval_symbol(sym, t) * math.cos(s * t)
    v1, _ = quad(f, 0, sym.theta0, limit=400, epsabs=1e-13)
    v2, _ = quad(f, sym.theta0, math.pi, limit=400, epsabs=1e-13)
    return (v1 + v2) / math.pi


class TestClosedForms:
    def test_abs_cos(self):
        sym = GegenbauerSymbol(0.5, math.pi / 2)
        for method in ("analytic", "quadrature"):
            tab = symbol_fourier(sym, 8, method)
            assert tab[0].real == pytest.approx(4 / math.pi, abs=1e-12)
            assert abs(tab[1]) < 1e-12
            # |2 cos| has coefficients 4 (-1)^{m+1} / (pi (4 m^2 - 1)) at s = 2m
            for m in (1, 2, 3, 4):
                assert tab[2 * m].real == pytest.approx(4 * (-1) ** (m + 1) / (math.pi * (4 * m * m - 1)), abs=1e-12)

    def test_single_zero(self):
        # |1 - chi|^{2a} = |2 sin(t/2)|^{2a}
        a = 0.3
        c = single_zero_coeffs(a, 6)
        for s in range(7):
            v, _ = quad(lambda t: abs(2 * math.sin(t / 2)) ** (2 * a) * math.cos(s * t), 0, math.pi, epsabs=1e-13)
            assert c[s] == pytest.approx(v / math.pi, abs=1e-11)

    def test_identity_table(self):
        tab = identity_table(5)
        assert tab[0] == 1 and all(tab[s] == 0 for s in range(1, 6))

    def test_smooth_ar1(self):
        f = lambda t: 1 / np.abs(1 - 0.5 * np.exp(1j * t)) ** 2
        c = smooth_fourier(f, 10)
        assert np.allclose(c, 0.5 ** np.arange(11) / 0.75, atol=1e-14)

    def test_abel_tail(self):
        # sum_j z^j / (j + a) is the Lerch transcendent Phi(z, 1, a)
        z = np.exp(1j * 1.3)
        a = 1001
        ref = complex(mpmath.lerchphi(z, 1, a))
        assert abs(abel_tail(1.0 / (np.arange(13) + a), z) - ref) <= 1e-12 * abs(ref)


class TestCrossMethod:
    @pytest.mark.parametrize("sym", MATRIX, ids=lambda s: f"{s.alpha},{s.theta0:.3g},{len(s.regular.numerator)}")
    def test_agree(self, sym):
        a = symbol_fourier(sym, 64, "analytic").values
        q = symbol_fourier(sym, 64, "quadrature").values
        assert np.max(np.abs(a - q)) <= 1e-8

    def test_both_method(self, quarter):
        tab = symbol_fourier(quarter, 32, "both")
        assert tab.method == "analytic"

    @pytest.mark.parametrize("s", [0, 1, 2, 7, 30])
    def test_adaptive_quadrature_oracle(self, quarter, s):
        assert symbol_fourier(quarter, 30).values[s].real == pytest.approx(quad_coeff(quarter, s), abs=1e-9)

    @pytest.mark.parametrize("s", [0, 1, 5])
    def test_adaptive_oracle_with_c1(self, s):
        sym = GegenbauerSymbol(-0.25, 2.5, FIVE_FOUR)
        assert symbol_fourier(sym, 5).values[s].real == pytest.approx(quad_coeff(sym, s), abs=1e-8)


class TestTableProperties:
    @pytest.mark.parametrize("sym", MATRIX[:6])
    def test_real_even_positive(self, sym):
        tab = symbol_fourier(sym, 40, "quadrature")
        assert np.max(np.abs(tab.values.imag)) <= 1e-12
        assert tab[0].real > 0
        assert all(tab[-s] == np.conj(tab[s]) for s in range(41))

    def test_two_sided(self):
        tab = FourierTable(np.array([1.0, 0.5 + 0.25j, 0.1j]), "analytic")
        assert np.allclose(tab.two_sided(), [-0.1j, 0.5 - 0.25j, 1.0, 0.5 + 0.25j, 0.1j])
        with pytest.raises(IndexError):
            tab[3]

    def test_truncated(self, quarter):
        tab = symbol_fourier(quarter, 20)
        assert np.array_equal(tab.truncated(5).values, tab.values[:6])

    def test_parseval(self):
        # h in L^2 only for alpha > 1/4
        sym = GegenbauerSymbol(0.4, math.pi / 3)
        total = quad(lambda t: eval_symbol(sym, t) ** 2, 0, math.pi, points=[sym.theta0], limit=400)[0] / math.pi
        gaps = []
        for n in (64, 256, 1024):
            v = symbol_fourier(sym, n).values.real
            partial = v[0] ** 2 + 2 * np.sum(v[1:] ** 2)
            assert partial <= total + 1e-12
            gaps.append(total - partial)
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] < 1e-3 * total


class TestErrors:
    def test_unknown_method(self, quarter):
        with pytest.raises(DomainError):
            symbol_fourier(quarter, 4, "trapezoid")

    def test_negative_order(self, quarter):
        with pytest.raises(DomainError):
            symbol_fourier(quarter, -1)

    def test_refinement_stall(self):
        with pytest.raises(NoConvergence):
            singular_fourier([1.0, -1.0], -0.49, lambda t: np.ones_like(t), 64, tol=1e-16, max_halvings=1)
