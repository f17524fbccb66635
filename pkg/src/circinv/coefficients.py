"""Coefficient families of the outer function g and of the ratio g / conj(g).

    g(chi) = (1 - chi conj(chi0))^a (1 - chi chi0)^a c11(chi)

beta_tilde      Taylor coefficients of (1 - z)^{-a}
beta_theta0     Taylor coefficients of (1 - z chi0)^{-a} (1 - z conj(chi0))^{-a}
beta_theta0_c1  Taylor coefficients of c11(0) / g, so that the k = 0 value is 1
gamma_tilde     sin(pi a) / (pi (k + a)), the order -k coefficient of (1-chi)^a/(1-conj chi)^a
gamma_full      Fourier coefficients of u = g / conj(g) (unimodular)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma as _gamma

from .errors import DomainError, PoleAtIndex, TruncationTooShort
from .fourier import fourier_from_rule, singular_rule
from .symbol import GegenbauerSymbol, OuterFactor, outer_factorize

DEFAULT_LENGTH = 8192
KINDS = ("beta_tilde", "beta_theta0", "beta_theta0_c1", "gamma_tilde", "gamma_full", "c_inv_coeffs")


def gamma_fn(x: float) -> float:
    """Gamma function, through the reflection formula for x in (-1/2, 0)."""
    if x < 0:
        return math.pi / (math.sin(math.pi * x) * _gamma(1.0 - x))
    return float(_gamma(x))


def inv_gamma(x: float) -> float:
    """1/Gamma(x), equal to 0 at x = 0."""
    return 0.0 if x == 0 else 1.0 / gamma_fn(x)


# ---------------------------------------------------------------------------
# beta family


def beta_tilde_series(alpha: float, n: int) -> np.ndarray:
    """beta~_0..beta~_n with beta~_k = beta~_{k-1} (k - 1 + a) / k."""
    k = np.arange(1, n + 1, dtype=float)
    return np.concatenate([[1.0], np.cumprod((k - 1 + alpha) / k)])


def beta_tilde(alpha: float, k: int) -> float:
    if k < 0:
        raise DomainError("k must be non-negative")
    return float(beta_tilde_series(alpha, k)[k])


def beta_theta0_series(alpha: float, theta0: float, n: int) -> np.ndarray:
    """sum_{u=0}^{k} beta~_u chi0^u beta~_{k-u} conj(chi0)^{k-u} for k = 0..n."""
    bt = beta_tilde_series(alpha, n)
    k = np.arange(n + 1)
    a = bt * np.exp(1j * theta0 * k)
    return np.convolve(a, np.conj(a))[: n + 1]


def beta_theta0(alpha: float, theta0: float, k: int) -> complex:
    if k < 0:
        raise DomainError("k must be non-negative")
    return complex(beta_theta0_series(alpha, theta0, k)[k])


def c_inv_coeffs(outer: OuterFactor, n: int, tol: float = 1e-10) -> np.ndarray:
    """Taylor coefficients of c11(0)/c11, padded with zeros up to index n."""
    inv = outer.inverse * outer.scale
    if inv.size > n + 1:
        # only indices <= n enter a length n+1 convolution
        return inv[: n + 1].copy()
    if abs(inv[-1]) > tol:
        raise TruncationTooShort(f"1/c11 coefficients still {abs(inv[-1]):.3g} at length {inv.size}")
    out = np.zeros(n + 1, dtype=inv.dtype)
    out[: inv.size] = inv
    return out


def beta_theta0_c1_series(sym: GegenbauerSymbol, n: int, outer: OuterFactor | None = None) -> np.ndarray:
    """sum_s beta_{s,theta0} c_{k-s} with c the coefficients of c11(0)/c11 (value 1 at k = 0)."""
    b = beta_theta0_series(sym.alpha, sym.theta0, n)
    if sym.regular.is_constant_one:
        return b
    outer = outer or outer_factorize(sym.regular)
    c = c_inv_coeffs(outer, n)
    return np.convolve(b, c)[: n + 1]


def beta_theta0_c1(sym: GegenbauerSymbol, k: int) -> complex:
    return complex(beta_theta0_c1_series(sym, k)[k])


def inverse_g_coeffs(sym: GegenbauerSymbol, n: int, outer: OuterFactor | None = None) -> np.ndarray:
    """Taylor coefficients of 1/g itself (unnormalized): beta_c1 / c11(0)."""
    outer = outer or outer_factorize(sym.regular)
    return beta_theta0_c1_series(sym, n, outer) / outer.scale


# ---------------------------------------------------------------------------
# gamma family


def gamma_tilde(alpha: float, k):
    """sin(pi a)/pi * 1/(k + a); vectorized over k."""
    k = np.asarray(k, dtype=float)
    den = k + alpha
    if np.any(den == 0):
        raise PoleAtIndex(f"k + alpha = 0 at alpha={alpha}")
    out = math.sin(math.pi * alpha) / math.pi / den
    return float(out) if out.ndim == 0 else out


def _gamma_pair(alpha: float, theta0: float, j: np.ndarray) -> np.ndarray:
    """Coefficients of prod (1 - chi w)^a / (1 - conj(chi w))^a over w = chi0, conj(chi0).

    On the circle this ratio is exp(2 i a theta) on (-theta0, theta0) and
    exp(2 i a (theta - pi)) on (theta0, 2 pi - theta0), which integrates to
    2 sin(pi a) cos(nu theta0 - a pi) / (pi nu) with nu = 2a - j.
    """
    j = np.asarray(j, dtype=float)
    if alpha == 0:
        return (j == 0).astype(float)
    nu = 2 * alpha - j
    small = np.abs(nu) < 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 2 * math.sin(math.pi * alpha) * np.cos(nu * theta0 - alpha * math.pi) / (math.pi * nu)
    if np.any(small):
        # nu = 0 only at a = 1/2, j = 1: integrate the two arcs directly
        out[small] = (2 * theta0 - math.pi) / math.pi
    return out


def ratio_coeffs(outer: OuterFactor, tol: float = 1e-14) -> tuple[np.ndarray, int]:
    """Coefficients of c11/conj(c11) on the circle, as (array, offset) with index m = i - offset."""
    t = outer.coeffs
    q = np.conj(outer.inverse)  # coefficients of 1/conj(c11) at orders 0, -1, -2, ...
    full = np.convolve(t, q[::-1])  # order m = i - (q.size - 1)
    offset = q.size - 1
    mag = np.abs(full)
    keep = np.flatnonzero(mag > tol * mag.max())
    lo, hi = keep[0], keep[-1]
    return full[lo : hi + 1], offset - lo


def gamma_full_series(sym: GegenbauerSymbol, jmin: int, jmax: int, outer: OuterFactor | None = None) -> np.ndarray:
    """Fourier coefficients u^(j) of g/conj(g) for jmin <= j <= jmax."""
    if jmax < jmin:
        raise DomainError("empty index range")
    if sym.regular.is_constant_one:
        return _gamma_pair(sym.alpha, sym.theta0, np.arange(jmin, jmax + 1)).astype(complex)
    outer = outer or outer_factorize(sym.regular)
    r, off = ratio_coeffs(outer)
    lo_m, hi_m = -off, r.size - 1 - off
    base = _gamma_pair(sym.alpha, sym.theta0, np.arange(jmin - hi_m, jmax - lo_m + 1))
    # u^(j) = sum_m r(m) base(j - m)
    conv = np.convolve(base, r)
    start = r.size - 1
    return conv[start : start + (jmax - jmin + 1)]


def gamma_full(sym: GegenbauerSymbol, k: int) -> complex:
    return complex(gamma_full_series(sym, k, k)[0])


def ratio_on_circle(sym: GegenbauerSymbol, theta: np.ndarray, outer: OuterFactor | None = None) -> np.ndarray:
    """g/conj(g) evaluated pointwise."""
    chi = np.exp(1j * np.asarray(theta, dtype=float))
    g = (1 - chi * np.conj(sym.chi0)) ** sym.alpha * (1 - chi * sym.chi0) ** sym.alpha
    if not sym.regular.is_constant_one:
        outer = outer or outer_factorize(sym.regular)
        g = g * outer(chi)
    return g / np.conj(g)


def gamma_full_quadrature(sym: GegenbauerSymbol, jmin: int, jmax: int, width: float = 0.02, order: int = 40) -> np.ndarray:
    """Independent oracle: piecewise Gauss-Legendre integration of g/conj(g), split at the zeros."""
    outer = None if sym.regular.is_constant_one else outer_factorize(sym.regular)
    w = min(width, 8.0 / max(abs(jmin), abs(jmax), 1))
    nodes, weights = singular_rule(sym.zeros, 0.0, lambda t: ratio_on_circle(sym, t, outer), w, order)
    # sum w e^{-i j t} for j >= 0 and the conjugate trick for j < 0
    out = {}
    if jmax >= 0:
        pos = fourier_from_rule(nodes, weights, jmax)
        out.update({j: pos[j] for j in range(max(jmin, 0), jmax + 1)})
    if jmin < 0:
        neg = np.conj(fourier_from_rule(nodes, np.conj(weights), -jmin))
        out.update({j: neg[-j] for j in range(jmin, min(jmax, -1) + 1)})
    return np.array([out[j] for j in range(jmin, jmax + 1)])


# ---------------------------------------------------------------------------
# asymptotic companions


def beta_theta0_asymptotic(alpha: float, theta0: float, k):
    """K cos((k + a) theta0 - pi a / 2) k^{a-1} / Gamma(a), K = 2^{1-a} sin(theta0)^{-a}."""
    k = np.asarray(k, dtype=float)
    K = 2 ** (1 - alpha) * math.sin(theta0) ** (-alpha)
    return K * np.cos((k + alpha) * theta0 - math.pi * alpha / 2) * k ** (alpha - 1) * inv_gamma(alpha)


def oscillatory_partial_sum(beta: float, theta0: float, m0: int, m1: int) -> float:
    """|sum_{u=m0}^{m1} u^beta e^{2 i u theta0}|."""
    u = np.arange(m0, m1 + 1, dtype=float)
    return float(abs(np.sum(u**beta * np.exp(2j * theta0 * u))))


# ---------------------------------------------------------------------------


@dataclass
class CoefficientSeries:
    """Append-only cache of one coefficient family.

    ``extend(n)`` recomputes up to index n; reads past the cached length
    raise.  For ``gamma_tilde`` and ``gamma_full`` the cache is two-sided
    with ``offset`` giving the position of index 0.
    """

    kind: str
    sym: GegenbauerSymbol
    values: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    offset: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown series kind {self.kind!r}")

    @property
    def params(self) -> tuple:
        return (self.sym.alpha, self.sym.theta0, self.sym.to_dict())

    def extend(self, n: int) -> "CoefficientSeries":
        a, t = self.sym.alpha, self.sym.theta0
        if self.kind == "beta_tilde":
            self.values = beta_tilde_series(a, n).astype(complex)
        elif self.kind == "beta_theta0":
            self.values = beta_theta0_series(a, t, n)
        elif self.kind == "beta_theta0_c1":
            self.values = beta_theta0_c1_series(self.sym, n)
        elif self.kind == "c_inv_coeffs":
            self.values = c_inv_coeffs(outer_factorize(self.sym.regular), n).astype(complex)
        elif self.kind == "gamma_tilde":
            self.values = np.asarray(gamma_tilde(a, np.arange(-n, n + 1)), dtype=complex)
            self.offset = n
        else:
            self.values = gamma_full_series(self.sym, -n, n)
            self.offset = n
        return self

    def __len__(self) -> int:
        return self.values.size - self.offset

    def __getitem__(self, k: int) -> complex:
        i = k + self.offset
        if i < 0 or i >= self.values.size:
            raise IndexError(f"index {k} not cached; call extend first")
        return complex(self.values[i])
