"""Closed-form asymptotic predictions for inverse Toeplitz entries and their baselines.

Notation: f = 2^{2a} |cos t - cos theta0|^{2a} c1(t), chi0 = e^{i theta0},
c1 = |c11|^2 with c11 outer and c11(0) > 0, x = k/N.

    K      = 2^{1-a} sin(theta0)^{-a} / sqrt(c1(chi0))
    omega  = a theta0 + arg c11(chi0) - pi a / 2

First column (k/N -> x, 0 < x < 1):

    (T_N^{-1})_{k+1,1} ~ K/Gamma(a) cos(k theta0 + omega) k^{a-1} (1 - k/N)^a / c11(0)

The printed constant omits the last factor, i.e. it assumes c11(0) = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import roots_legendre

from .coefficients import beta_theta0_c1_series, inv_gamma
from .errors import DegenerateZeros, DiagonalSingularity, DomainError
from .fourier import FourierTable, singular_fourier
from .symbol import GegenbauerSymbol, outer_factorize, point_data, wrap_angle
from .toeplitz import (
    DenseOracle,
    ToeplitzSystem,
    build_system,
    first_column_inverse,
    gs_matrix,
    orthogonal,
    predictor,
    single_zero_system,
)

DIAGONAL_GAP = 1e-6
ENVELOPE_PERIODS = 4


@dataclass(frozen=True)
class AsymptoticConstants:
    K: float
    omega: float
    omega_prime: float
    phi_alpha: float
    phi0: float
    phi0_prime: float
    beta: float
    c11_0: float = 1.0


def constants(sym: GegenbauerSymbol) -> AsymptoticConstants:
    """Constants of the first-column and coefficient asymptotics, angles in (-pi, pi]."""
    outer = outer_factorize(sym.regular)
    c1_chi0, phi0, phi0p = point_data(sym, outer)
    a, th = sym.alpha, sym.theta0
    K = 2 ** (1 - a) * math.sin(th) ** (-a) / math.sqrt(c1_chi0)
    omega = wrap_angle(a * th + phi0 - math.pi * a / 2)
    chi0 = sym.chi0
    ratio = (chi0**2 - 1) / (np.conj(chi0) ** 2 - 1)
    phi_alpha = wrap_angle(a * math.atan2(ratio.imag, ratio.real))
    omega_p = wrap_angle(phi_alpha + phi0p)
    beta = a - 0.5 if a < 0 else a
    return AsymptoticConstants(K, omega, omega_p, phi_alpha, phi0, phi0p, beta, outer.scale)


def _check_k(k, N: int) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    if np.any(k <= 0) or np.any(k >= N):
        raise DomainError("k must satisfy 0 < k < N")
    return k


def _ret(v):
    return float(v) if np.ndim(v) == 0 else v


# ---------------------------------------------------------------------------
# first column


def formula_baseline(alpha: float, k, N: int):
    """N^{a-1}/Gamma(a) x^{a-1} (1-x)^a: first column of T_N(|chi-1|^{2a})^{-1}, c(1) = 1."""
    x = np.asarray(k, dtype=float) / N
    return N ** (alpha - 1) * inv_gamma(alpha) * x ** (alpha - 1) * (1 - x) ** alpha


def predict_first_column(sym: GegenbauerSymbol, k, N: int, normalize: bool = True):
    """K/Gamma(a) cos(k theta0 + omega) k^{a-1} (1 - k/N)^a, divided by c11(0) when ``normalize``."""
    k = _check_k(k, N)
    c = constants(sym)
    v = c.K * inv_gamma(sym.alpha) * np.cos(k * sym.theta0 + c.omega) * k ** (sym.alpha - 1) * (1 - k / N) ** sym.alpha
    return _ret(v / c.c11_0 if normalize else v)


def single_zero_first_column(alpha: float, N: int) -> np.ndarray:
    """Exact first column of T_N(|chi - 1|^{2a})^{-1} by Levinson."""
    return first_column_inverse(single_zero_system(alpha, N)).real


def predict_first_column_via_baseline(sym: GegenbauerSymbol, k, N: int, baseline: str = "exact", normalize: bool = True):
    """K cos(k theta0 + omega) times the single-zero first column (exact or closed form)."""
    k = _check_k(k, N)
    c = constants(sym)
    if baseline == "formula":
        base = formula_baseline(sym.alpha, k, N)
    elif baseline == "exact":
        base = single_zero_first_column(sym.alpha, N)[k.astype(int)]
    else:
        raise DomainError(f"unknown baseline {baseline!r}")
    v = c.K * np.cos(k * sym.theta0 + c.omega) * base
    return _ret(v / c.c11_0 if normalize else v)


def predict_gegenbauer_coeff(sym: GegenbauerSymbol, j, N: int):
    """delta_j of the monic orthogonal polynomial Phi_N.

    Phi_N has delta_j = conj(a_{N-j}) with a the first column of T_N^{-1}
    divided by (T_N^{-1})_{1,1} -> 1/c11(0)^2, so the prediction is
    c11(0)^2 times the (normalized) first-column prediction at k = N - j.
    """
    j = np.asarray(j, dtype=float)
    if np.any(j <= 0) or np.any(j >= N):
        raise DomainError("j must satisfy 0 < j < N")
    c = constants(sym)
    return _ret(c.c11_0**2 * np.asarray(predict_first_column(sym, N - j, N)))


def predict_small_k(sym: GegenbauerSymbol, k: int, N: int) -> complex:
    """beta_{k,theta0,c1} (value 1 at k = 0); the entry itself is this over c11(0)^2 plus O(1/N)."""
    if k < 0 or k > N:
        raise DomainError("k must lie in 0..N")
    return complex(beta_theta0_c1_series(sym, k)[k])


def predict_half(sym: GegenbauerSymbol, k, N: int, gamma_factor: bool = False, normalize: bool = True):
    """K cos(k theta0 + omega) sqrt(1/k - 1/N) for a = 1/2.

    The printed form has no 1/Gamma(1/2); ``gamma_factor`` adds it, which
    is the a = 1/2 case of :func:`predict_first_column`.
    """
    if sym.alpha != 0.5:
        raise DomainError("predict_half needs alpha = 1/2")
    k = np.asarray(k, dtype=float)
    if np.any(k <= 0) or np.any(k > N):
        raise DomainError("k must satisfy 0 < k <= N")
    c = constants(sym)
    v = c.K * np.cos(k * sym.theta0 + c.omega) * np.sqrt(np.maximum(1 / k - 1 / N, 0.0))
    if gamma_factor:
        v = v / math.sqrt(math.pi)
    return _ret(v / c.c11_0 if normalize else v)


# ---------------------------------------------------------------------------
# kernel


def _kernel_args(alpha: float, x: float, y: float) -> tuple[float, float]:
    if not (0 < alpha <= 0.5):
        raise DomainError("kernel needs 0 < alpha <= 1/2")
    if not (0 < x < 1 and 0 < y < 1):
        raise DomainError("x and y must lie in (0, 1)")
    if abs(x - y) < DIAGONAL_GAP:
        raise DiagonalSingularity(f"|x - y| = {abs(x - y):.3g} below {DIAGONAL_GAP}")
    return max(x, y), min(x, y)


def _kernel_integrand(alpha: float, hi: float, lo: float):
    # t = hi + s^{1/a}: (t - hi)^{a-1} dt = ds / a
    def f(s):
        t = hi + s ** (1.0 / alpha)
        return (t - lo) ** (alpha - 1) * t ** (-2 * alpha) / alpha

    return f


def kernel_G(alpha: float, x: float, y: float, nodes: int | None = None, rel_tol: float = 1e-10) -> float:
    """x^a y^a / Gamma(a)^2 int_{max(x,y)}^1 (t-x)^{a-1} (t-y)^{a-1} t^{-2a} dt.

    Adaptive quadrature after the substitution t = max(x,y) + s^{1/a}; with
    ``nodes`` a fixed Gauss-Legendre rule of that size (used for the
    node-doubling stability check).
    """
    hi, lo = _kernel_args(alpha, x, y)
    f = _kernel_integrand(alpha, hi, lo)
    top = (1 - hi) ** alpha
    if nodes:
        t, w = roots_legendre(nodes)
        val = 0.5 * top * float(np.dot(w, f(0.5 * top * (t + 1))))
    else:
        val, _ = quad(f, 0.0, top, epsabs=0.0, epsrel=rel_tol, limit=400)
    return x**alpha * y**alpha * inv_gamma(alpha) ** 2 * val


def kernel_G_bruteforce(alpha: float, x: float, y: float, panels: int = 10_000_000, chunk: int = 1_000_000) -> float:
    """Midpoint rule with ``panels`` panels on the substituted integrand."""
    hi, lo = _kernel_args(alpha, x, y)
    f = _kernel_integrand(alpha, hi, lo)
    top = (1 - hi) ** alpha
    h = top / panels
    total = 0.0
    for start in range(0, panels, chunk):
        i = np.arange(start, min(start + chunk, panels), dtype=float)
        total += float(np.sum(f((i + 0.5) * h)))
    return x**alpha * y**alpha * inv_gamma(alpha) ** 2 * total * h


def baseline_toepmoinsdeux(alpha: float, x: float, y: float, N: int) -> float:
    """N^{2a-1} G_a(x, y) for the single-zero symbol; kernel_G already holds 1/Gamma(a)^2."""
    if not (0 < alpha < 0.5):
        raise DomainError("baseline needs 0 < alpha < 1/2")
    return N ** (2 * alpha - 1) * kernel_G(alpha, x, y)


def single_zero_inverse(alpha: float, N: int) -> np.ndarray:
    """Exact T_N(|chi - 1|^{2a})^{-1} via the predictor polynomial and the two-factor formula."""
    return gs_matrix(predictor(single_zero_system(alpha, N)))


def predict_inverse_entry(
    sym: GegenbauerSymbol,
    k: int,
    l: int,
    N: int,
    baseline: str = "exact",
    constant: str = "printed",
    single_inverse: np.ndarray | None = None,
) -> float:
    """|K|^2 cos(theta0 (k - l)) times the single-zero entry (exact) or N^{2a-1} G_a(k/N, l/N) (kernel).

    ``constant="printed"`` uses |K|^2 as stated; ``"halved"`` uses |K|^2/2,
    the value the exact solver supports (the product of the two cosine
    modulations averages to cos(theta0 (k - l))/2).
    """
    if not (0 < sym.alpha <= 0.5):
        raise DomainError("inverse-entry prediction needs 0 < alpha <= 1/2")
    if k == l:
        raise DiagonalSingularity("k = l")
    if not (0 < k < N and 0 < l < N):
        raise DomainError("k, l must lie in (0, N)")
    if constant not in ("printed", "halved"):
        raise DomainError(f"unknown constant convention {constant!r}")
    c = constants(sym)
    amp = c.K**2 * (0.5 if constant == "halved" else 1.0) * math.cos(sym.theta0 * (k - l))
    if baseline == "exact":
        inv = single_zero_inverse(sym.alpha, N) if single_inverse is None else single_inverse
        return amp * float(inv[k, l].real)
    if baseline == "kernel":
        return amp * N ** (2 * sym.alpha - 1) * kernel_G(sym.alpha, k / N, l / N)
    raise DomainError(f"unknown baseline {baseline!r}")


# ---------------------------------------------------------------------------
# two zeros in general position


def two_zero_system(alpha: float, theta1: float, theta2: float, N: int) -> ToeplitzSystem:
    """T_N(|chi - chi1|^{2a} |chi - chi2|^{2a}) by singular quadrature."""
    h = singular_fourier([theta1, theta2], alpha, lambda t: np.ones_like(t), N)
    return ToeplitzSystem(N, FourierTable(h, "quadrature"))


def _centering(theta1: float, theta2: float) -> tuple[float, float]:
    if theta1 == theta2 or math.isclose(math.cos(theta1 - theta2), 1.0, abs_tol=1e-14):
        raise DegenerateZeros("theta1 and theta2 coincide")
    mu = 0.5 * (theta1 + theta2)
    half = 0.5 * (theta1 - theta2)
    # centered zeros +-half; keep half in (0, pi) by swapping the roles of the zeros
    if half < 0:
        half = -half
    half = math.fmod(half, 2 * math.pi)
    if half > math.pi:
        half = 2 * math.pi - half
        mu += math.pi
    return mu, half


@dataclass(frozen=True)
class JacobiConjugation:
    """T_N^{-1}(zeros theta1, theta2) = D T_N^{-1}(zeros +-half) D^{-1}, D = diag(e^{i j mu})."""

    alpha: float
    theta1: float
    theta2: float
    N: int
    mu: float
    half: float

    @property
    def diagonal(self) -> np.ndarray:
        return np.exp(1j * self.mu * np.arange(self.N + 1))

    @property
    def centered(self) -> GegenbauerSymbol:
        return GegenbauerSymbol(self.alpha, self.half)

    def conjugate(self, inv_centered: np.ndarray) -> np.ndarray:
        d = self.diagonal
        return d[:, None] * inv_centered * np.conj(d)[None, :]

    def centered_inverse(self) -> np.ndarray:
        return DenseOracle(build_system(self.centered, self.N, method="analytic")).inverse()

    def direct_inverse(self) -> np.ndarray:
        return DenseOracle(two_zero_system(self.alpha, self.theta1, self.theta2, self.N)).inverse()

    def max_discrepancy(self) -> float:
        return float(np.max(np.abs(self.direct_inverse() - self.conjugate(self.centered_inverse()))))


def jacobi_conjugation(alpha: float, theta1: float, theta2: float, N: int) -> JacobiConjugation:
    mu, half = _centering(theta1, theta2)
    return JacobiConjugation(alpha, theta1, theta2, N, mu, half)


def predict_jacobi_coeff(alpha: float, theta1: float, theta2: float, j, N: int):
    """conj((chi1 chi2)^{1/2})^{N-j} times the Gegenbauer prediction of the centered symbol."""
    jc = jacobi_conjugation(alpha, theta1, theta2, N)
    j = np.asarray(j, dtype=float)
    phase = np.exp(-1j * jc.mu * (N - j))
    v = phase * np.asarray(predict_gegenbauer_coeff(jc.centered, j, N))
    return complex(v) if np.ndim(v) == 0 else v


def orthogonal_coeffs(sym: GegenbauerSymbol, N: int) -> np.ndarray:
    return orthogonal(build_system(sym, N, method="analytic")).coeffs


def exact_first_column(sym: GegenbauerSymbol, N: int) -> np.ndarray:
    return first_column_inverse(build_system(sym, N, method="analytic"))


# ---------------------------------------------------------------------------
# comparison protocol


def envelope_window(theta0: float) -> int:
    return math.ceil(2 * math.pi / theta0) * ENVELOPE_PERIODS


@dataclass(frozen=True)
class EnvelopeFit:
    amplitude: float
    phase: float
    start: int
    width: int


def envelope_fit(seq: np.ndarray, center: int, theta0: float, shape=None, width: int | None = None) -> EnvelopeFit:
    """Least-squares fit of seq[k]/shape(k) = A cos(k theta0 + psi) over a window around ``center``."""
    seq = np.asarray(seq)
    if np.iscomplexobj(seq):
        seq = seq.real
    W = width or envelope_window(theta0)
    start = max(1, center - W // 2)
    stop = min(seq.size, start + W)
    start = max(1, stop - W)
    k = np.arange(start, stop)
    y = seq[k] / (shape(k) if shape is not None else 1.0)
    X = np.column_stack([np.cos(k * theta0), np.sin(k * theta0)])
    (a, b), *_ = np.linalg.lstsq(X, y, rcond=None)
    return EnvelopeFit(math.hypot(a, b), math.atan2(-b, a), int(start), int(stop - start))


def relative_envelope_error(exact: np.ndarray, pred: np.ndarray, center: int, theta0: float, shape=None) -> tuple[float, float, float]:
    """(A_exact, A_pred, |A_exact - A_pred| / A_exact) over the same window."""
    ae = envelope_fit(exact, center, theta0, shape).amplitude
    ap = envelope_fit(pred, center, theta0, shape).amplitude
    if ae == 0:
        # a vanishing sequence (identity path) is matched only by a vanishing prediction
        return ae, ap, 0.0 if ap == 0 else math.inf
    return ae, ap, abs(ae - ap) / ae


def first_column_shape(alpha: float, N: int):
    return lambda k: np.asarray(k, dtype=float) ** (alpha - 1) * (1 - np.asarray(k, dtype=float) / N) ** alpha


def fft_peak_frequency(seq: np.ndarray, pad: int = 4) -> float:
    """Angular frequency in [0, pi] of the largest Hann-windowed periodogram peak (DC excluded)."""
    y = np.asarray(seq)
    y = (y.real if np.iscomplexobj(y) else y) - np.mean(y.real if np.iscomplexobj(y) else y)
    n = y.size
    spec = np.abs(np.fft.rfft(y * np.hanning(n), pad * n))
    i = int(np.argmax(spec[1:])) + 1
    return 2 * math.pi * i / (pad * n)


def fitted_power(ks: np.ndarray, amplitudes: np.ndarray) -> float:
    """Slope of log A against log k."""
    return float(np.polyfit(np.log(ks), np.log(amplitudes), 1)[0])
