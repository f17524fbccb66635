import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import gamma as G

from circinv.asymptotics import constants, envelope_fit
from circinv.coefficients import (
    CoefficientSeries,
    beta_theta0,
    beta_theta0_asymptotic,
    beta_theta0_c1,
    beta_theta0_c1_series,
    beta_theta0_series,
    beta_tilde,
    beta_tilde_series,
    c_inv_coeffs,
    gamma_fn,
    gamma_full,
    gamma_full_quadrature,
    gamma_full_series,
    gamma_tilde,
    inv_gamma,
    oscillatory_partial_sum,
    ratio_on_circle,
)
from circinv.errors import DomainError, PoleAtIndex, TruncationTooShort
from circinv.symbol import GegenbauerSymbol, OuterFactor, RationalRegularPart, outer_factorize

from conftest import FIVE_FOUR


def window_amplitude(seq, center, theta0, shape=None):
    return envelope_fit(seq, center, theta0, shape).amplitude


class TestGamma:
    @pytest.mark.parametrize("x", [-0.49, -0.25, -0.1, 0.1, 0.5, 1.5])
    def test_reflection(self, x):
        assert gamma_fn(x) == pytest.approx(float(G(x)), rel=1e-13)

    def test_inv_gamma_zero(self):
        assert inv_gamma(0.0) == 0.0


class TestBetaTilde:
    def test_constant_term(self):
        assert beta_tilde(0.37, 0) == 1.0

    def test_first(self):
        assert beta_tilde(0.25, 1) == 0.25

    def test_asymptotic(self):
        assert beta_tilde(0.25, 1000) == pytest.approx(1000 ** (-0.75) / G(0.25), rel=2e-3)

    @pytest.mark.parametrize("alpha", [-0.4, -0.25, 0.1, 0.25, 0.5])
    def test_gamma_ratio(self, alpha):
        k = np.arange(51)
        direct = G(k + alpha) / (G(alpha) * G(k + 1))
        assert np.allclose(beta_tilde_series(alpha, 50), direct, rtol=1e-12, atol=0)

    def test_positive(self):
        for alpha in (0.05, 0.25, 0.5):
            assert np.all(beta_tilde_series(alpha, 500) > 0)

    def test_taylor(self):
        z = 0.3 + 0.2j
        assert np.polyval(beta_tilde_series(0.25, 200)[::-1], z) == pytest.approx((1 - z) ** -0.25, abs=1e-14)

    def test_negative_index(self):
        with pytest.raises(DomainError):
            beta_tilde(0.25, -1)


class TestBetaTheta0:
    def test_constant_term(self):
        assert beta_theta0(0.25, 1.0, 0) == 1.0

    def test_two_term(self):
        assert abs(beta_theta0(0.25, math.pi / 2, 1)) < 1e-16

    def test_real(self):
        b = beta_theta0_series(0.25, math.pi / 3, 300)
        assert np.max(np.abs(b.imag)) <= 1e-12

    @pytest.mark.parametrize("theta0", [0.4, math.pi / 3, 2.0])
    def test_reflection_symmetry(self, theta0):
        k = np.arange(101)
        b = beta_theta0_series(0.3, theta0, 100)
        r = beta_theta0_series(0.3, math.pi - theta0, 100)
        assert np.allclose(r, (-1.0) ** k * np.conj(b), atol=1e-14)

    def test_taylor(self):
        a, t, z = -0.25, 1.1, 0.4 - 0.3j
        c0 = np.exp(1j * t)
        expect = (1 - z * c0) ** -a * (1 - z * np.conj(c0)) ** -a
        assert np.polyval(beta_theta0_series(a, t, 200)[::-1], z) == pytest.approx(expect, abs=1e-13)

    def test_envelope(self):
        a, t = 0.25, math.pi / 3
        seq = beta_theta0_series(a, t, 2100).real
        fit = envelope_fit(seq, 2000, t, lambda k: k ** (a - 1) * inv_gamma(a))
        K = 2 ** (1 - a) * math.sin(t) ** (-a)
        assert fit.amplitude == pytest.approx(K, rel=0.05)
        # phase of cos((k + a) theta0 - pi a / 2)
        assert math.cos(fit.phase - (a * t - math.pi * a / 2)) > math.cos(0.05)

    def test_asymptotic_companion(self):
        k = np.arange(1990, 2010)
        a, t = 0.25, math.pi / 3
        exact = beta_theta0_series(a, t, 2010).real[k]
        assert np.max(np.abs(exact - beta_theta0_asymptotic(a, t, k))) < 0.05 * np.max(np.abs(exact))


class TestBetaTheta0C1:
    def test_identity_regular_part(self, quarter):
        assert np.array_equal(beta_theta0_c1_series(quarter, 50), beta_theta0_series(0.25, math.pi / 3, 50))

    def test_normalized(self, quarter_c1):
        assert beta_theta0_c1(quarter_c1, 0) == pytest.approx(1.0, abs=1e-15)

    def test_is_normalized_inverse_of_g(self, quarter_c1):
        # c11(0)/g evaluated inside the disk
        z = 0.35 + 0.1j
        c0 = quarter_c1.chi0
        outer = outer_factorize(quarter_c1.regular)
        g = (1 - z * c0) ** 0.25 * (1 - z * np.conj(c0)) ** 0.25 * outer(z)
        ser = beta_theta0_c1_series(quarter_c1, 200)
        assert np.polyval(ser[::-1], z) == pytest.approx(outer.scale / g, abs=1e-13)

    def test_envelope(self, quarter_c1):
        # the k = 0 normalization multiplies the natural 1/g coefficients by c11(0) = 2
        a, t = 0.25, math.pi / 3
        c = constants(quarter_c1)
        seq = beta_theta0_c1_series(quarter_c1, 2100).real
        fit = envelope_fit(seq, 2000, t, lambda k: k ** (a - 1) * inv_gamma(a))
        assert c.K == pytest.approx(2 ** 0.75 * (math.sqrt(3) / 2) ** -0.25 / math.sqrt(7), rel=1e-14)
        assert fit.amplitude / c.c11_0 == pytest.approx(c.K, rel=0.05)
        assert math.cos(fit.phase - c.omega) > math.cos(0.05)

    def test_truncation_too_short(self):
        outer = OuterFactor(np.array([1.0]), np.array([1.0, 0.5]), 1.0, np.array([1.0]), np.array([1.0]))
        with pytest.raises(TruncationTooShort):
            c_inv_coeffs(outer, 10)

    def test_c_inv_summable(self):
        outer = outer_factorize(RationalRegularPart((3.0, 1.0, 0.5), (1.0, -0.3)))
        c = c_inv_coeffs(outer, 4000)
        assert np.sum(np.abs(c[2000:])) < 1e-10
        assert c[0] == pytest.approx(1.0)


class TestGammaTilde:
    def test_value(self):
        assert gamma_tilde(0.25, 0) == pytest.approx(2 * math.sqrt(2) / math.pi, rel=1e-14)
        assert gamma_tilde(0.25, 0) == pytest.approx(0.90032, abs=1e-5)

    @pytest.mark.parametrize("k", [-3, -2, 0, 1, 4])
    def test_quadrature(self, k):
        # order -k coefficient of (1 - chi)^a / (1 - conj chi)^a, principal branches
        a = 0.25
        f = lambda t: (1 - np.exp(1j * t)) ** a / (1 - np.exp(-1j * t)) ** a * np.exp(1j * k * t)
        re = quad(lambda t: f(t).real, 0, 2 * math.pi, limit=200)[0]
        im = quad(lambda t: f(t).imag, 0, 2 * math.pi, limit=200)[0]
        assert gamma_tilde(a, k) == pytest.approx(re / (2 * math.pi), abs=1e-9)
        assert abs(im) < 1e-9

    def test_sign(self):
        assert gamma_tilde(0.25, -2) < 0

    def test_small_alpha(self):
        assert abs(gamma_tilde(1e-9, 5)) < 1e-9

    def test_pole(self):
        with pytest.raises(PoleAtIndex):
            gamma_tilde(0.0, 0)


class TestGammaFull:
    def test_quadrature(self):
        sym = GegenbauerSymbol(0.25, math.pi / 2)
        assert gamma_full(sym, -50) == pytest.approx(complex(gamma_full_quadrature(sym, -50, -50)[0]), abs=1e-6)

    @pytest.mark.parametrize("reg", [RationalRegularPart(), FIVE_FOUR, RationalRegularPart((1.0, 0.9, 0.2), (1.0, -0.6))])
    def test_quadrature_block(self, reg):
        sym = GegenbauerSymbol(-0.3, 2.2, reg)
        a = gamma_full_series(sym, -40, 40)
        q = gamma_full_quadrature(sym, -40, 40)
        assert np.max(np.abs(a - q)) < 1e-9

    def test_pointwise_ratio(self, quarter_c1):
        # partial Fourier sum at a point away from the zeros
        u = gamma_full_series(quarter_c1, -20000, 20000)
        t = 2.2
        j = np.arange(-20000, 20001)
        val = np.sum(u * np.exp(1j * j * t) * np.exp(-((j / 8000.0) ** 2)))
        assert val == pytest.approx(complex(ratio_on_circle(quarter_c1, np.array([t]))[0]), abs=1e-3)

    @pytest.mark.parametrize("reg", [RationalRegularPart(), FIVE_FOUR])
    def test_parseval(self, reg):
        sym = GegenbauerSymbol(0.25, math.pi / 3, reg)
        u = gamma_full_series(sym, -20000, 20000)
        energy = np.cumsum(np.abs(u) ** 2)
        assert energy[-1] <= 1 + 1e-6
        assert energy[-1] > 1 - 1e-4

    def test_decay(self, quarter):
        t = quarter.theta0
        seq = gamma_full_series(quarter, -4200, 0)[::-1].real
        for k in (500, 1000, 2000):
            r = window_amplitude(seq, 2 * k, t) / window_amplitude(seq, k, t)
            assert r == pytest.approx(0.5, rel=0.1)

    @pytest.mark.parametrize("alpha,theta0", [(0.25, math.pi / 3), (0.4, 2.8), (-0.25, 1.0)])
    def test_oscillation_law(self, alpha, theta0):
        # amplitude 2 sin(pi a)/(pi |k|) and phase omega' (not 2 omega')
        sym = GegenbauerSymbol(alpha, theta0)
        c = constants(sym)
        seq = gamma_full_series(sym, -4100, 0)[::-1].real  # seq[k] = u^(-k)
        fit = envelope_fit(seq, 4000, theta0, lambda k: 2 * math.sin(math.pi * alpha) / (math.pi * (k + 2 * alpha)))
        assert fit.amplitude == pytest.approx(1.0, rel=0.05)
        assert math.cos(fit.phase - c.omega_prime) > math.cos(0.01)

    def test_printed_phase_rejected(self):
        sym = GegenbauerSymbol(0.4, 2.8)
        c = constants(sym)
        seq = gamma_full_series(sym, -4100, 0)[::-1].real
        fit = envelope_fit(seq, 4000, sym.theta0)
        assert math.cos(fit.phase - 2 * c.omega_prime) < 0.6


class TestAppendixSum:
    @pytest.mark.parametrize("beta", [0.25, -0.25, 0.4])
    @pytest.mark.parametrize("theta0", [0.3, math.pi / 3, 2.5])
    def test_abel_bound(self, beta, theta0):
        norm = lambda m0, m1: (m1 if beta > 0 else m0) ** beta
        C = oscillatory_partial_sum(beta, theta0, 10, 100) / norm(10, 100)
        for m0, m1 in [(100, 1000), (1000, 10000), (10000, 100000), (37, 5000), (5, 77777)]:
            assert oscillatory_partial_sum(beta, theta0, m0, m1) <= 1.5 * C * norm(m0, m1)


class TestSeriesCache:
    def test_kinds(self, quarter):
        with pytest.raises(DomainError):
            CoefficientSeries("beta", quarter)

    def test_extend_and_read(self, quarter_c1):
        s = CoefficientSeries("beta_theta0_c1", quarter_c1).extend(20)
        assert len(s) == 21
        assert s[7] == pytest.approx(beta_theta0_c1(quarter_c1, 7))
        with pytest.raises(IndexError):
            s[21]

    def test_two_sided(self, quarter):
        s = CoefficientSeries("gamma_full", quarter).extend(10)
        assert s[-10] == pytest.approx(gamma_full(quarter, -10))
        g = CoefficientSeries("gamma_tilde", quarter).extend(3)
        assert g[-2] == pytest.approx(gamma_tilde(0.25, -2))
