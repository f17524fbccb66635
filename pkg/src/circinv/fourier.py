"""Fourier coefficients of singular weights, by two independent routes.

``analytic``  convolves the closed-form coefficients of |1 - chi|^{2a}
              (rotated to the two zeros) and sums the slowly decaying
              oscillatory tails by repeated Abel summation; the result is
              then convolved with the Laurent coefficients of c1.
``quadrature`` integrates the weight against exp(-i s theta) with a
              composite rule: Gauss-Jacobi panels absorb the algebraic
              singularity at each zero, Gauss-Legendre panels cover the
              rest.  The panel width is halved until two successive
              results agree to 1e-10.

Coefficients are normalized as h^(s) = (1/2pi) int h(theta) e^{-i s theta}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammaln, roots_jacobi, roots_legendre

from .errors import DomainError, NoConvergence, QuadratureFailure
from .symbol import GegenbauerSymbol, OuterFactor, RationalRegularPart, outer_factorize

AGREEMENT_TOL = 1e-8
REFINE_TOL = 1e-10


@dataclass(frozen=True)
class FourierTable:
    """h^(s) for 0 <= s <= n_max; negative orders follow from h^(-s) = conj(h^(s))."""

    values: np.ndarray
    method: str

    @property
    def n_max(self) -> int:
        return self.values.size - 1

    def __getitem__(self, s: int) -> complex:
        if abs(s) > self.n_max:
            raise IndexError(f"order {s} outside table of size {self.n_max}")
        v = self.values[abs(s)]
        return complex(np.conj(v)) if s < 0 else complex(v)

    def two_sided(self) -> np.ndarray:
        """Array indexed by s + n_max for s in [-n_max, n_max]."""
        return np.concatenate([np.conj(self.values[:0:-1]), self.values])

    def truncated(self, n: int) -> "FourierTable":
        return FourierTable(self.values[: n + 1].copy(), self.method)


# ---------------------------------------------------------------------------
# closed forms


def single_zero_coeffs(alpha: float, n: int) -> np.ndarray:
    """Fourier coefficients c_j, 0 <= j <= n, of |1 - chi|^{2 alpha}.

    c_0 = Gamma(2a+1)/Gamma(a+1)^2 and c_{j+1} = c_j (j - a)/(j + 1 + a);
    the sequence is even in j.
    """
    c = np.empty(n + 1)
    c[0] = math.exp(gammaln(2 * alpha + 1) - 2 * gammaln(alpha + 1))
    j = np.arange(n, dtype=float)
    c[1:] = c[0] * np.cumprod((j - alpha) / (j + 1 + alpha))
    return c


def abel_tail(phi: np.ndarray, z: complex) -> complex:
    """sum_{j >= 0} phi[j] z^j for slowly varying ``phi`` and |z| = 1, z != 1.

    Uses S(phi) = phi(0)/(1-z) + z/(1-z) S(D phi) iterated over the forward
    differences available in ``phi``; the remainder is of the order of the
    last difference.
    """
    r = z / (1.0 - z)
    total = 0j
    d = np.asarray(phi, dtype=complex)
    fac = 1.0 / (1.0 - z)
    last = math.inf
    while d.size:
        term = fac * d[0]
        # high differences are swamped by rounding once |r| > 1; stop at the smallest term
        if abs(term) >= last:
            break
        total += term
        last = abs(term)
        fac *= r
        d = np.diff(d)
    return total


def pair_coeffs(alpha: float, theta0: float, n: int, window: int | None = None, order: int = 12) -> np.ndarray:
    """Coefficients a_s, 0 <= s <= n, of |chi - chi0|^{2a} |chi - conj(chi0)|^{2a} (real, even)."""
    if alpha == 0.0:
        out = np.zeros(n + 1)
        out[0] = 1.0
        return out
    # a wider direct window when the zeros are close (|1 - z| small)
    J = window or max(2000, int(600 / abs(2 * math.sin(theta0))))
    c = single_zero_coeffs(alpha, n + 2 * J + order + 4)
    z = complex(math.cos(2 * theta0), -math.sin(2 * theta0))
    zb = z.conjugate()
    out = np.empty(n + 1)
    jj = np.arange(-J, n + J + 1)
    zpow = np.exp(-2j * theta0 * jj)
    for s in range(n + 1):
        j = jj[: s + 2 * J + 1]
        body = np.dot(c[np.abs(j)] * c[np.abs(s - j)], zpow[: j.size])
        # j > s + J: phi(j) = c_j c_{j-s}
        j0 = s + J + 1
        ja = np.arange(j0, j0 + order + 1)
        right = z**j0 * abel_tail(c[ja] * c[ja - s], z)
        # j = -m, m > J: phi(m) = c_m c_{s+m}, weight conj(z)^m
        m0 = J + 1
        ma = np.arange(m0, m0 + order + 1)
        left = zb**m0 * abel_tail(c[ma] * c[s + ma], zb)
        out[s] = (complex(math.cos(s * theta0), math.sin(s * theta0)) * (body + right + left)).real
    return out


def regular_coeffs(outer: OuterFactor, n: int) -> np.ndarray:
    """Laurent coefficients c1^(s), 0 <= s <= n, of c1 = |c11|^2."""
    t = outer.coeffs
    out = np.zeros(n + 1, dtype=complex)
    for s in range(min(n, t.size - 1) + 1):
        out[s] = np.dot(t[s:], np.conj(t[: t.size - s]))
    return out.real if np.isrealobj(t) else out


def _convolve_even(a: np.ndarray, r: np.ndarray, n: int) -> np.ndarray:
    """(a * r)(s) for 0 <= s <= n with a, r Hermitian-even two-sided sequences."""
    L = r.size - 1
    a2 = np.concatenate([np.conj(a[:0:-1]), a])  # index s + A
    r2 = np.concatenate([np.conj(r[:0:-1]), r])  # index t + L
    A = a.size - 1
    out = np.empty(n + 1, dtype=complex)
    for s in range(n + 1):
        # sum_t a(s - t) r(t), |t| <= L
        idx = s - np.arange(-L, L + 1) + A
        out[s] = np.dot(a2[idx], r2)
    return out


# ---------------------------------------------------------------------------
# composite quadrature


@lru_cache(maxsize=64)
def _jacobi_rule(order: int, a: float, b: float):
    x, w = roots_jacobi(order, a, b)
    return x, w


@lru_cache(maxsize=8)
def _legendre_rule(order: int):
    return roots_legendre(order)


def singular_rule(
    zeros: Sequence[float],
    alpha: float,
    regular: Callable[[np.ndarray], np.ndarray],
    width: float,
    order: int = 40,
):
    """Nodes and weights with sum w_q phi(t_q) ~ int_0^{2pi} f(t) phi(t) dt for smooth phi.

    f(t) = prod_z |e^{it} - e^{iz}|^{2 alpha} * regular(t).
    """
    z = np.sort(np.mod(np.asarray(zeros, dtype=float), 2 * np.pi))
    nz = z.size
    if nz == 0:
        raise DomainError("at least one zero is required")
    two_a = 2.0 * alpha
    xl, wl = _legendre_rule(order)
    xj_left, wj_left = _jacobi_rule(order, 0.0, two_a)  # weight (1+x)^{2a}
    xj_right, wj_right = _jacobi_rule(order, two_a, 0.0)  # weight (1-x)^{2a}

    def smooth_part(t, special_idx, special_at):
        val = regular(t)
        for i in range(nz):
            if i == special_idx:
                continue
            val = val * np.abs(2.0 * np.sin((t - z[i]) / 2.0)) ** two_a
        d = t - special_at
        val = val * np.abs(np.sinc(d / (2 * np.pi))) ** two_a
        return val

    nodes, weights = [], []
    for i in range(nz):
        lo = z[i]
        hi = z[i + 1] if i + 1 < nz else z[0] + 2 * np.pi
        inext = (i + 1) % nz
        L = hi - lo
        m = max(2, int(math.ceil(L / width)))
        h = L / m
        half = h / 2.0
        # left panel, singular at lo
        t = lo + half * (1.0 + xj_left)
        nodes.append(t)
        weights.append(half ** (two_a + 1) * wj_left * smooth_part(t, i, lo))
        # interior panels
        if m > 2:
            starts = lo + h * np.arange(1, m - 1)
            t = (starts[:, None] + half * (1.0 + xl[None, :])).ravel()
            full = regular(t)
            for k in range(nz):
                full = full * np.abs(2.0 * np.sin((t - z[k]) / 2.0)) ** two_a
            nodes.append(t)
            weights.append(half * np.tile(wl, m - 2) * full)
        # right panel, singular at hi
        t = hi - half * (1.0 - xj_right)
        nodes.append(t)
        weights.append(half ** (two_a + 1) * wj_right * smooth_part(t, inext, hi))
    return np.concatenate(nodes), np.concatenate(weights)


def fourier_from_rule(nodes: np.ndarray, weights: np.ndarray, n_max: int, block: int = 256) -> np.ndarray:
    """(1/2pi) sum_q w_q exp(-i s t_q) for 0 <= s <= n_max."""
    out = np.empty(n_max + 1, dtype=complex)
    b = np.arange(block)
    base = np.exp(-1j * np.outer(b, nodes))
    for s0 in range(0, n_max + 1, block):
        v = weights * np.exp(-1j * s0 * nodes)
        cnt = min(block, n_max + 1 - s0)
        out[s0 : s0 + cnt] = base[:cnt] @ v
    return out / (2 * np.pi)


def singular_fourier(
    zeros: Sequence[float],
    alpha: float,
    regular: Callable[[np.ndarray], np.ndarray],
    n_max: int,
    tol: float = REFINE_TOL,
    order: int = 40,
    max_halvings: int = 6,
) -> np.ndarray:
    """Refined composite-quadrature Fourier coefficients of a weight with algebraic zeros."""
    width = min(0.5, 16.0 / max(n_max, 1))
    prev = fourier_from_rule(*singular_rule(zeros, alpha, regular, width, order), n_max)
    for _ in range(max_halvings):
        width /= 2.0
        cur = fourier_from_rule(*singular_rule(zeros, alpha, regular, width, order), n_max)
        scale = max(1.0, abs(cur[0]))
        if np.max(np.abs(cur - prev)) <= tol * scale:
            return cur
        prev = cur
    raise NoConvergence(
        f"quadrature did not settle to {tol:g} after {max_halvings} halvings "
        f"(alpha={alpha}; the singularity may be too strong for the rule)"
    )


def smooth_fourier(fn: Callable[[np.ndarray], np.ndarray], n_max: int, tol: float = 1e-13, max_size: int = 1 << 22) -> np.ndarray:
    """FFT coefficients of a smooth periodic function, grid doubled until stable."""
    size = 1 << max(4, int(math.ceil(math.log2(16 * (n_max + 1)))))
    prev = None
    while size <= max_size:
        t = 2 * np.pi * np.arange(size) / size
        coef = np.fft.fft(fn(t)) / size
        cur = coef[: n_max + 1]
        if prev is not None and np.max(np.abs(cur - prev)) <= tol * max(1.0, abs(cur[0])):
            return cur
        prev = cur
        size *= 2
    raise QuadratureFailure(f"FFT coefficients did not stabilise below grid size {max_size}")


# ---------------------------------------------------------------------------


def symbol_fourier(sym: GegenbauerSymbol, n_max: int, method: str = "analytic") -> FourierTable:
    """Fourier table of the weight for orders 0..n_max.

    ``method='both'`` computes both routes, checks that they agree to 1e-8 and
    returns the analytic table.
    """
    if n_max < 0:
        raise DomainError("n_max must be non-negative")
    if method == "analytic":
        return FourierTable(_analytic(sym, n_max), "analytic")
    if method == "quadrature":
        vals = singular_fourier(sym.zeros, sym.alpha, sym.regular, n_max)
        # the weight is real and even, so the coefficients are real
        return FourierTable(vals.real.astype(complex), "quadrature")
    if method == "both":
        a = _analytic(sym, n_max)
        q = singular_fourier(sym.zeros, sym.alpha, sym.regular, n_max).real
        gap = float(np.max(np.abs(a - q)))
        if gap > AGREEMENT_TOL * max(1.0, abs(a[0])):
            raise NoConvergence(f"analytic and quadrature coefficients differ by {gap:.3g}")
        return FourierTable(a, "analytic")
    raise DomainError(f"unknown method {method!r}")


def _analytic(sym: GegenbauerSymbol, n_max: int) -> np.ndarray:
    reg = sym.regular
    if reg.is_constant_one:
        return pair_coeffs(sym.alpha, sym.theta0, n_max).astype(complex)
    outer = outer_factorize(reg)
    r = regular_coeffs(outer, outer.coeffs.size - 1)
    mag = np.abs(r)
    keep = np.flatnonzero(mag > 1e-17 * mag[0])
    r = r[: keep[-1] + 1]
    a = pair_coeffs(sym.alpha, sym.theta0, n_max + r.size - 1)
    return _convolve_even(a.astype(complex), r.astype(complex), n_max).real.astype(complex)


def symbol_fourier_both(sym: GegenbauerSymbol, n_max: int) -> tuple[FourierTable, FourierTable]:
    return symbol_fourier(sym, n_max, "analytic"), symbol_fourier(sym, n_max, "quadrature")


def identity_table(n_max: int) -> FourierTable:
    vals = np.zeros(n_max + 1, dtype=complex)
    vals[0] = 1.0
    return FourierTable(vals, "analytic")


def single_zero_table(alpha: float, n_max: int) -> FourierTable:
    """Fourier table of |1 - chi|^{2 alpha} (closed form)."""
    return FourierTable(single_zero_coeffs(alpha, n_max).astype(complex), "analytic")


def regular_only(reg: RationalRegularPart) -> Callable[[np.ndarray], np.ndarray]:
    return reg
