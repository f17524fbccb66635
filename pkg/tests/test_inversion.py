import math

import mpmath
import numpy as np
import pytest
from scipy.special import digamma

from circinv.coefficients import gamma_full_series
from circinv.errors import DomainError, SeriesDiverging, TruncationTooSmall
from circinv.inversion import (
    Envelopes,
    HankelPair,
    TailHankelPair,
    TruncatedFourierSpace,
    abel_weights,
    apply_inversion,
    default_truncation,
    eval_F,
    f_terms,
    first_column_from_star,
    first_row_from_star,
    get_context,
    h_N_series,
    inverse_columns_series,
    inverse_entry_series,
    neumann,
)
from circinv.symbol import GegenbauerSymbol, outer_factorize
from circinv.toeplitz import DenseOracle, build_system, first_column_inverse

from conftest import FIVE_FOUR, TEST_SYMBOLS, symbol_id

SYMBOLS = TEST_SYMBOLS + [GegenbauerSymbol(0.25, math.pi / 3, FIVE_FOUR), GegenbauerSymbol(-0.25, 2.5, FIVE_FOUR)]


def dense_inverse(sym, N):
    return DenseOracle(build_system(sym, N)).inverse()


class Doubler:
    """A fake operator whose normal map doubles its input."""

    dim = 4

    def apply_normal(self, x):
        return 2 * x


class TestIdentityPath:
    def test_alpha_zero(self):
        sym = GegenbauerSymbol(0.0, 1.0)
        P = np.array([1.0, -2.0, 0.5, 3j])
        assert np.allclose(apply_inversion(sym, P, 5), np.concatenate([P, [0, 0]]), atol=1e-15)

    def test_entries(self):
        sym = GegenbauerSymbol(0.0, 1.0)
        assert inverse_entry_series(sym, 6, 2, 2) == pytest.approx(1.0)
        assert inverse_entry_series(sym, 6, 2, 4) == pytest.approx(0.0, abs=1e-15)

    def test_star_vanishes(self):
        sym = GegenbauerSymbol(0.0, 1.0)
        assert np.allclose(h_N_series(sym, 16), 0)
        # the series factor sin(pi a) makes H_N small for small alpha
        small = np.max(np.abs(h_N_series(GegenbauerSymbol(1e-4, 1.0), 16)))
        assert 0 < small < 1e-3


class TestApplyInversion:
    def test_chi_cubed(self, quarter):
        N = 16
        x = apply_inversion(quarter, np.eye(N + 1)[3], N, M=128)
        assert np.max(np.abs(x - DenseOracle(build_system(quarter, N)).column(3))) <= 1e-6

    def test_negative_alpha(self):
        sym = GegenbauerSymbol(-0.25, math.pi / 2)
        N = 16
        x = apply_inversion(sym, [1.0], N, M=128)
        assert np.max(np.abs(x - DenseOracle(build_system(sym, N)).column(0))) <= 1e-6

    @pytest.mark.parametrize("N", [8, 16, 32])
    @pytest.mark.parametrize("sym", SYMBOLS, ids=symbol_id)
    def test_all_columns(self, sym, N):
        tol = 1e-10
        inv = inverse_columns_series(sym, N, tol=tol)
        assert np.max(np.abs(inv - dense_inverse(sym, N))) <= 10 * tol

    def test_random_polynomial(self, quarter_c1, rng):
        N = 24
        P = rng.standard_normal(N + 1) + 1j * rng.standard_normal(N + 1)
        x = apply_inversion(quarter_c1, P, N, check_doubling=True)
        assert np.allclose(build_system(quarter_c1, N).matrix() @ x, P, atol=1e-8)

    def test_degree_too_high(self, quarter):
        with pytest.raises(DomainError):
            apply_inversion(quarter, np.ones(10), 8)

    def test_truncation_rule(self, quarter):
        with pytest.raises(DomainError):
            TruncatedFourierSpace(30).check(8)
        with pytest.raises(DomainError):
            apply_inversion(quarter, [1.0], 8, M=16)
        assert default_truncation(16) == 512 and default_truncation(100) == 800

    def test_unknown_method(self, quarter):
        with pytest.raises(DomainError):
            apply_inversion(quarter, [1.0], 8, method="plain")


class TestTruncation:
    def test_plain_truncation_converges_slowly(self, quarter):
        N = 8
        ref = DenseOracle(build_system(quarter, N)).column(0)
        errs = [np.max(np.abs(apply_inversion(quarter, [1.0], N, M=M, method="truncated") - ref)) for M in (32, 128, 512)]
        assert errs[0] > errs[1] > errs[2]
        assert errs[2] > 1e-8

    def test_doubling_check_flags_truncation(self, quarter):
        with pytest.raises(TruncationTooSmall):
            apply_inversion(quarter, [1.0], 8, M=32, method="truncated", check_doubling=True, doubling_tol=1e-8)

    def test_doubling_check_passes_for_tail(self, quarter):
        x = apply_inversion(quarter, [1.0], 8, check_doubling=True)
        assert np.max(np.abs(x - DenseOracle(build_system(quarter, 8)).column(0))) < 1e-9


class TestHankel:
    @pytest.mark.parametrize("sym", SYMBOLS, ids=symbol_id)
    def test_envelopes_reproduce_symbol(self, sym):
        N = 16
        outer = None if sym.regular.is_constant_one else outer_factorize(sym.regular)
        env = Envelopes(sym, N, outer)
        k = np.arange(0, 400)
        t = sym.theta0
        h = np.exp(1j * k * t) * env.A(k) + np.exp(-1j * k * t) * env.B(k)
        ref = gamma_full_series(sym, -(N + 2 + 399), -(N + 2))[::-1]
        assert np.max(np.abs(h - ref)) <= 1e-13

    def test_abel_weights(self):
        # sum_{n >= n1} z^n / (n + 1) from the log series
        z = np.exp(2.2j)
        n1, P = 512, 8
        w = abel_weights(z, n1, P)
        n = n1 + np.arange(P)
        head = sum(z**j / (j + 1) for j in range(n1))
        ref = -np.log(1 - z) / z - head
        assert np.dot(w, 1.0 / (n + 1)) == pytest.approx(ref, abs=1e-12)

    def test_truncated_matrix_is_hankel(self, quarter):
        hp = HankelPair(quarter, 8, 64)
        H = hp.dense()
        assert np.allclose(H[1:, :-1], H[:-1, 1:])
        assert H[0, 0] == pytest.approx(gamma_full_series(quarter, -10, -10)[0])

    @pytest.mark.parametrize("sym", SYMBOLS, ids=symbol_id)
    def test_norm_below_one(self, sym):
        hp = TailHankelPair(sym, 16, 512)
        rho = hp.norm_estimate()
        # the continuous operator has norm sin^2(pi a)
        assert rho == pytest.approx(math.sin(math.pi * sym.alpha) ** 2, rel=0.05)
        assert rho < 1
        assert HankelPair(sym, 16, 256).norm_estimate() < 1

    def test_adjoint(self, quarter_c1, rng):
        hp = TailHankelPair(quarter_c1, 16, 512)
        x = rng.standard_normal(hp.dim) + 1j * rng.standard_normal(hp.dim)
        y = hp.apply(x)
        assert np.allclose(hp.apply_normal(x), hp.apply_adjoint(y))


class TestNeumann:
    def test_geometric_decrease(self, quarter):
        ctx = get_context(quarter, 16)
        hist = []
        ctx.solve(np.eye(17)[0], history=hist)
        ratios = np.array(hist[3:]) / np.array(hist[2:-1])
        assert np.all(ratios < 1)
        assert np.max(ratios) < 0.6

    def test_diverging(self):
        with pytest.raises(SeriesDiverging):
            neumann(Doubler(), np.ones(4, dtype=complex), 1e-10)

    def test_term_budget(self, quarter):
        ctx = get_context(quarter, 16)
        with pytest.raises(SeriesDiverging):
            neumann(ctx.hp, ctx.residual(ctx.q_plus(np.eye(17)[0])), 1e-14, max_terms=2)


class TestEntries:
    def test_example(self, quarter):
        ref = DenseOracle(build_system(quarter, 16)).entry(3, 9)
        assert abs(inverse_entry_series(quarter, 16, 3, 9) - ref) <= 1e-6

    def test_hermitian(self, quarter_c1):
        a = inverse_entry_series(quarter_c1, 16, 3, 11)
        b = inverse_entry_series(quarter_c1, 16, 11, 3)
        assert abs(a - np.conj(b)) <= 1e-9

    def test_range(self, quarter):
        with pytest.raises(DomainError):
            inverse_entry_series(quarter, 8, 0, 9)


class TestStar:
    def test_first_row(self, quarter):
        N = 32
        row = first_row_from_star(quarter, N)
        ref = DenseOracle(build_system(quarter, N)).inverse()[0]
        for k in (5, 16, 27):
            assert abs(row[k] - ref[k]) <= 1e-5

    @pytest.mark.parametrize("sym", SYMBOLS, ids=symbol_id)
    def test_matches_levinson(self, sym):
        N = 32
        col = first_column_inverse(build_system(sym, N))
        assert np.max(np.abs(first_column_from_star(sym, N) - col)) <= 1e-5
        assert np.max(np.abs(first_row_from_star(sym, N) - np.conj(col))) <= 1e-5

    def test_shrinks_with_n(self, quarter):
        vals = [abs(h_N_series(quarter, N, N // 2)) for N in (16, 32, 64)]
        assert vals[0] > vals[1] > vals[2]

    def test_scalar_and_vector(self, quarter):
        H = h_N_series(quarter, 16)
        assert h_N_series(quarter, 16, 5) == pytest.approx(H[5])
        with pytest.raises(DomainError):
            h_N_series(quarter, 16, 17)


class TestF:
    @pytest.mark.parametrize("alpha", [0.25, 0.4])
    def test_value_at_zero(self, alpha):
        assert eval_F(512, alpha, 0.0) == pytest.approx(alpha**2, rel=0.1)

    def test_first_term_digamma(self):
        # sum_n N / ((N + 1 + n)(N + 1 + n + a)) = N (psi(N + 1 + a) - psi(N + 1)) / a
        N, a = 512, 0.25
        ref = N * (digamma(N + 1 + a) - digamma(N + 1)) / a
        assert f_terms(N, a, 0.0, m_max=0)[0] == pytest.approx(ref, abs=1e-10)

    @pytest.mark.parametrize("z", [0.5, 0.99])
    def test_first_term_partial_fractions(self, z):
        # N sum_n 1/((n + A)(n + B)) = N (psi(B) - psi(A)) / (B - A) with A = N + 1, B = N(1 - z) + 1 + a
        N, a = 128, 0.4
        mpmath.mp.dps = 30
        A, B = N + 1, N * (1 - mpmath.mpf(z)) + 1 + a
        ref = float(N * (mpmath.digamma(B) - mpmath.digamma(A)) / (B - A))
        assert f_terms(N, a, z, m_max=0)[0] == pytest.approx(ref, abs=1e-10)

    def test_first_term_brute_force(self):
        # direct summation of a million terms plus the integral of the remainder
        N, a = 64, 0.25
        n = np.arange(1_000_000, dtype=float)
        head = np.sum(N / ((N + 1 + n) * (N + 1 + a + n)))
        m = 1_000_000 - 0.5
        tail = N / a * math.log((N + 1 + a + m) / (N + 1 + m))
        assert f_terms(N, a, 0.0, m_max=0)[0] == pytest.approx(head + tail, abs=1e-10)

    @pytest.mark.parametrize("alpha", [0.25, 0.4])
    def test_log_bound(self, alpha):
        N = 512
        logterm = lambda z: 1 + abs(math.log(1 - z + (1 + alpha) / N))
        K0 = eval_F(N, alpha, 0.0) / logterm(0.0)
        for z in (0.5, 0.9, 0.99):
            assert eval_F(N, alpha, z) <= 3 * K0 * logterm(z)

    def test_increasing_in_z(self):
        vals = [eval_F(256, 0.25, z) for z in (0.0, 0.5, 0.9, 0.99)]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_continuity_modulus(self):
        zs = np.linspace(0, 0.9, 10)
        L = []
        for N in (256, 512):
            F = np.array([eval_F(N, 0.25, z) for z in zs])
            L.append(np.max(np.abs(np.diff(F)) / np.diff(zs)))
        assert L[1] / L[0] == pytest.approx(1.0, abs=0.2)

    def test_z_range(self):
        with pytest.raises(DomainError):
            eval_F(64, 0.25, 1.0)
