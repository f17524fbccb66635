"""Finite Toeplitz systems: Levinson recursion, dense oracle, predictor polynomials.

Convention: T[i, j] = h^(j - i), indices from 0.  For a Hermitian matrix
T a = sigma e_0 with a[0] = 1 is solved by the recursion

    a_{n+1} = [a_n; 0] + kappa [0; J conj(a_n)],  kappa = -eps_n / sigma_n,
    sigma_{n+1} = sigma_n (1 - |kappa|^2),

and the first column of the inverse is a / sigma.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .errors import DomainError, IndexOutOfRange, NotPositiveDefinite, SingularMatrix
from .fourier import FourierTable, identity_table, single_zero_table, smooth_fourier, symbol_fourier
from .symbol import GegenbauerSymbol

KAPPA_GUARD = 1.0 - 1e-12
DENSE_CAP = 2048


@dataclass(frozen=True)
class ToeplitzSystem:
    N: int
    fourier: FourierTable
    hermitian: bool = True

    def __post_init__(self):
        if self.N < 0:
            raise DomainError("N must be non-negative")
        if self.fourier.n_max < self.N:
            raise DomainError(f"Fourier table covers |s| <= {self.fourier.n_max}, need {self.N}")

    @property
    def size(self) -> int:
        return self.N + 1

    @property
    def column(self) -> np.ndarray:
        """h^(0..N), i.e. the first row T[0, :]."""
        return self.fourier.values[: self.N + 1]

    def entry(self, i: int, j: int) -> complex:
        return self.fourier[j - i]

    def matrix(self) -> np.ndarray:
        r = self.column
        # scipy's toeplitz(c, r) has T[i, 0] = c[i] = h^(-i) and T[0, j] = r[j] = h^(j)
        return sla.toeplitz(np.conj(r), r)


def build_system(sym: GegenbauerSymbol, N: int, method: str = "both") -> ToeplitzSystem:
    """T_N of the Gegenbauer weight; ``method`` as in :func:`symbol_fourier`."""
    if N < 0:
        raise DomainError("N must be non-negative")
    return ToeplitzSystem(N, symbol_fourier(sym, N, method))


def system_from_table(table: FourierTable, N: int | None = None) -> ToeplitzSystem:
    return ToeplitzSystem(table.n_max if N is None else N, table)


def system_from_function(fn: Callable[[np.ndarray], np.ndarray], N: int) -> ToeplitzSystem:
    """T_N of a smooth weight through FFT coefficients (e.g. AR test symbols)."""
    return ToeplitzSystem(N, FourierTable(smooth_fourier(fn, N), "quadrature"))


def identity_system(N: int) -> ToeplitzSystem:
    return ToeplitzSystem(N, identity_table(N))


def single_zero_system(alpha: float, N: int) -> ToeplitzSystem:
    """T_N(|chi - 1|^{2 alpha}) from the exact coefficients."""
    return ToeplitzSystem(N, single_zero_table(alpha, N))


# ---------------------------------------------------------------------------
# Levinson


def levinson(sys: ToeplitzSystem) -> tuple[np.ndarray, float]:
    """Monic solution ``a`` of T a = sigma e_0 and the prediction error ``sigma``."""
    t = np.asarray(sys.column, dtype=complex)
    N = sys.N
    sigma = float(t[0].real)
    if not sigma > 0:
        raise NotPositiveDefinite(f"h^(0) = {t[0]} is not positive")
    a = np.zeros(N + 1, dtype=complex)
    a[0] = 1.0
    # tc[m] = h^(-m) = conj(h^(m))
    tc = np.conj(t)
    for n in range(N):
        # eps = sum_j T[n+1, j] a[j] = sum_j h^(j - n - 1) a[j]
        eps = np.dot(tc[n + 1 : 0 : -1], a[: n + 1])
        kappa = -eps / sigma
        if abs(kappa) >= KAPPA_GUARD:
            raise NotPositiveDefinite(f"reflection coefficient |kappa| = {abs(kappa):.15g} at order {n + 1}")
        rev = np.conj(a[n::-1])
        a[1 : n + 2] += kappa * rev
        sigma *= 1.0 - abs(kappa) ** 2
    return a, sigma


def first_column_inverse(sys: ToeplitzSystem) -> np.ndarray:
    """(T_N^{-1})[:, 0]."""
    a, sigma = levinson(sys)
    return a / sigma


def last_column_inverse(sys: ToeplitzSystem) -> np.ndarray:
    """(T_N^{-1})[:, N] through (T^{-1})_{k,N} = conj((T^{-1})_{N-k,0})."""
    return np.conj(first_column_inverse(sys)[::-1])


@dataclass(frozen=True)
class PredictorPolynomial:
    """P_N = Phi*_N sqrt((T^{-1})_{11}); coeffs[k] multiplies z^k."""

    coeffs: np.ndarray
    t11: float

    @property
    def N(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, z):
        return np.polynomial.polynomial.polyval(z, self.coeffs)

    def zeros_inside(self) -> int:
        """Number of zeros in the closed unit disk (roots for N <= 256, winding number above)."""
        if self.N == 0:
            return 0
        if self.N <= 256:
            r = np.roots(self.coeffs[::-1])
            return int(np.sum(np.abs(r) <= 1.0))
        m = 16 * (self.N + 1)
        vals = self(np.exp(2j * np.pi * np.arange(m + 1) / m))
        phase = np.unwrap(np.angle(vals))
        return int(round((phase[-1] - phase[0]) / (2 * np.pi)))


@dataclass(frozen=True)
class OrthogonalPolynomial:
    """Monic Phi_N; coeffs[j] = delta_j multiplies z^j."""

    coeffs: np.ndarray

    @property
    def N(self) -> int:
        return self.coeffs.size - 1


def predictor(sys: ToeplitzSystem) -> PredictorPolynomial:
    a, sigma = levinson(sys)
    return PredictorPolynomial(a / math.sqrt(sigma), 1.0 / sigma)


def orthogonal(sys: ToeplitzSystem) -> OrthogonalPolynomial:
    """Phi_N(z) = z^N conj(Phi*_N(1/conj z)); Phi*_N has the normalized first column as coefficients."""
    a, _ = levinson(sys)
    return OrthogonalPolynomial(np.conj(a[::-1]))


def orthogonal_from_predictor(pred: PredictorPolynomial) -> OrthogonalPolynomial:
    return OrthogonalPolynomial(np.conj(pred.coeffs[::-1]) / math.sqrt(pred.t11))


def verify_polpred(pred: PredictorPolynomial, sys: ToeplitzSystem) -> float:
    """max_{|s| <= N} |Fourier(1/|P_N|^2)(s) - h^(s)|."""
    N = sys.N

    def inv_sq(theta):
        return 1.0 / np.abs(pred(np.exp(1j * theta))) ** 2

    coef = smooth_fourier(inv_sq, N)
    return float(np.max(np.abs(coef - sys.column)))


def gs_entry(pred: PredictorPolynomial, k: int, l: int) -> complex:
    """(T_N(1/|P|^2)^{-1})_{k+1,l+1} from the predictor coefficients p.

    T^{-1} = L(p) L(p)^H - L(q) L(q)^H with q_0 = 0, q_i = conj(p_{N+1-i}),
    L(.) the lower triangular Toeplitz matrix with the given first column.
    """
    N = pred.N
    if not (0 <= k <= N and 0 <= l <= N):
        raise IndexOutOfRange(f"({k}, {l}) outside 0..{N}")
    if k > l:
        return complex(np.conj(gs_entry(pred, l, k)))
    p = np.concatenate([pred.coeffs, [0.0]])  # p_{N+1} = 0
    u = np.arange(k + 1)
    first = np.dot(p[k - u], np.conj(p[l - u]))
    second = np.dot(np.conj(p[N + 1 - k + u]), p[N + 1 - l + u])
    return complex(first - second)


def gs_matrix(pred: PredictorPolynomial) -> np.ndarray:
    """Full inverse from the same two triangular factors."""
    N = pred.N
    p = pred.coeffs
    q = np.zeros(N + 1, dtype=complex)
    q[1:] = np.conj(p[:0:-1])
    Lp = sla.toeplitz(p, np.zeros(N + 1))
    Lq = sla.toeplitz(q, np.zeros(N + 1))
    return Lp @ Lp.conj().T - Lq @ Lq.conj().T


# ---------------------------------------------------------------------------
# dense oracle


class DenseOracle:
    """Pivoted LU of T_N with one step of iterative refinement per solve."""

    def __init__(self, sys: ToeplitzSystem, cap: int = DENSE_CAP):
        if sys.N > cap:
            raise DomainError(f"dense oracle capped at N = {cap}")
        self.sys = sys
        self.T = sys.matrix()
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("error", sla.LinAlgWarning)
                self.lu = sla.lu_factor(self.T, check_finite=True)
        except (sla.LinAlgError, sla.LinAlgWarning, ValueError) as exc:
            raise SingularMatrix(str(exc)) from exc
        if np.any(np.diag(self.lu[0]) == 0):
            raise SingularMatrix("zero pivot in LU factorization")

    def solve(self, b: np.ndarray) -> np.ndarray:
        x = sla.lu_solve(self.lu, b)
        r = b - self.T @ x
        return x + sla.lu_solve(self.lu, r)

    def column(self, l: int) -> np.ndarray:
        e = np.zeros((self.sys.N + 1,) + (), dtype=complex)
        e[l] = 1.0
        return self.solve(e)

    def inverse(self) -> np.ndarray:
        return self.solve(np.eye(self.sys.N + 1, dtype=complex))

    def entry(self, k: int, l: int) -> complex:
        N = self.sys.N
        if not (0 <= k <= N and 0 <= l <= N):
            raise IndexOutOfRange(f"({k}, {l}) outside 0..{N}")
        return complex(self.column(l)[k])


def dense_inverse_entry(sys: ToeplitzSystem, k: int, l: int, cap: int = DENSE_CAP) -> complex:
    return DenseOracle(sys, cap).entry(k, l)


def is_positive_definite(sys: ToeplitzSystem) -> bool:
    try:
        np.linalg.cholesky(sys.matrix())
    except np.linalg.LinAlgError:
        return False
    return True


# ---------------------------------------------------------------------------


def perturbation_gap(sym_half: GegenbauerSymbol, alpha: float, N: int, method: str = "analytic") -> float:
    """||T_N(f_{1/2}) - T_N(f_alpha)||_F / ((1/2 - alpha) N), with the same theta0 and c1."""
    if sym_half.alpha != 0.5:
        raise DomainError("sym_half must have alpha = 1/2")
    if not (0.0 < alpha <= 0.5):
        raise DomainError("alpha must lie in (0, 1/2]")
    if alpha == 0.5:
        return 0.0
    h_half = symbol_fourier(sym_half, N, method).values
    h_alpha = symbol_fourier(sym_half.with_alpha(alpha), N, method).values
    d = h_half - h_alpha
    s = np.arange(N + 1)
    mult = np.where(s == 0, N + 1, 2 * (N + 1 - s))
    frob = math.sqrt(float(np.sum(mult * np.abs(d) ** 2)))
    return frob / ((0.5 - alpha) * N)
