"""Singular weights with a conjugate pair of zeros on the unit circle.

The weight is

    f(theta) = 2^{2 alpha} |cos(theta) - cos(theta0)|^{2 alpha} c1(theta)
             = |chi - chi0|^{2 alpha} |chi - conj(chi0)|^{2 alpha} c1(theta)

with chi = exp(i theta), chi0 = exp(i theta0) and c1 = |P/Q|^2 on the circle
for real polynomials P and Q.  Polynomial coefficients are stored in
ascending order of powers: ``[2, 1]`` is ``2 + z``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from scipy.signal import lfilter

from .errors import DomainError, NotPositive, RootOnCircle, TruncationTooShort

ROOT_MARGIN = 1e-8
GRID_SIZE = 4096


def _trim(coeffs) -> np.ndarray:
    c = np.atleast_1d(np.asarray(coeffs, dtype=float))
    if c.ndim != 1 or c.size == 0:
        raise DomainError("polynomial coefficients must be a non-empty 1-d sequence")
    nz = np.flatnonzero(c)
    if nz.size == 0:
        raise DomainError("polynomial is identically zero")
    return c[: nz[-1] + 1].copy()


def _roots(coeffs: np.ndarray) -> np.ndarray:
    # np.roots wants descending powers
    if coeffs.size <= 1:
        return np.zeros(0, dtype=complex)
    return np.roots(coeffs[::-1]).astype(complex)


@dataclass(frozen=True)
class RationalRegularPart:
    """Regular factor c1 = |P/Q|^2 with P, Q real and zero-free on the circle."""

    numerator: tuple = (1.0,)
    denominator: tuple = (1.0,)

    def __post_init__(self):
        p = _trim(self.numerator)
        q = _trim(self.denominator)
        object.__setattr__(self, "numerator", tuple(float(v) for v in p))
        object.__setattr__(self, "denominator", tuple(float(v) for v in q))
        for name, c in (("numerator", p), ("denominator", q)):
            r = _roots(c)
            bad = r[np.abs(np.abs(r) - 1.0) <= ROOT_MARGIN]
            if bad.size:
                raise RootOnCircle(f"{name} has root(s) on the unit circle: {bad}")
        grid = np.linspace(0.0, 2 * np.pi, GRID_SIZE, endpoint=False)
        if not np.all(self(grid) > 0):
            raise NotPositive("c1 is not strictly positive on the sampling grid")

    @property
    def is_constant_one(self) -> bool:
        return self.numerator == (1.0,) and self.denominator == (1.0,)

    def __call__(self, theta):
        z = np.exp(1j * np.asarray(theta, dtype=float))
        p = np.polynomial.polynomial.polyval(z, self.numerator)
        q = np.polynomial.polynomial.polyval(z, self.denominator)
        return np.abs(p / q) ** 2


@dataclass(frozen=True)
class GegenbauerSymbol:
    alpha: float
    theta0: float
    regular: RationalRegularPart = field(default_factory=RationalRegularPart)

    def __post_init__(self):
        a, t = float(self.alpha), float(self.theta0)
        if not (-0.5 < a <= 0.5):
            raise DomainError(f"alpha must lie in (-1/2, 1/2], got {a}")
        if not (0.0 < t < math.pi):
            raise DomainError(f"theta0 must lie in (0, pi), got {t}")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "theta0", t)

    @property
    def chi0(self) -> complex:
        return complex(math.cos(self.theta0), math.sin(self.theta0))

    @property
    def zeros(self) -> tuple[float, float]:
        return (self.theta0, -self.theta0)

    def with_alpha(self, alpha: float) -> "GegenbauerSymbol":
        return GegenbauerSymbol(alpha, self.theta0, self.regular)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "theta0": self.theta0,
            "numerator": list(self.regular.numerator),
            "denominator": list(self.regular.denominator),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GegenbauerSymbol":
        missing = [k for k in ("alpha", "theta0") if k not in d]
        if missing:
            raise DomainError(f"symbol description lacks field(s): {', '.join(missing)}")
        reg = RationalRegularPart(d.get("numerator", [1.0]), d.get("denominator", [1.0]))
        return cls(float(d["alpha"]), float(d["theta0"]), reg)


def load_symbol(path) -> GegenbauerSymbol:
    return GegenbauerSymbol.from_dict(json.loads(Path(path).read_text()))


def save_symbol(sym: GegenbauerSymbol, path) -> None:
    Path(path).write_text(json.dumps(sym.to_dict(), indent=2) + "\n")


def eval_symbol(sym: GegenbauerSymbol, theta):
    """Value of the weight at ``theta`` (scalar or array)."""
    theta = np.asarray(theta, dtype=float)
    base = 2.0 * np.abs(np.cos(theta) - math.cos(sym.theta0))
    with np.errstate(divide="ignore"):
        # 0 ** negative -> inf, the weight's pole for alpha < 0
        sing = base ** (2.0 * sym.alpha) if sym.alpha != 0 else np.ones_like(base)
    out = sing * sym.regular(theta)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class OuterFactor:
    """Taylor coefficients of c11 with c1 = |c11|^2 and c11 zero-free in the closed disk.

    ``inverse`` holds the Taylor coefficients of 1/c11.  ``log_record`` lists
    each root of P and Q with the action taken (kept or reflected).
    """

    coeffs: np.ndarray
    inverse: np.ndarray
    scale: float
    num_factor: np.ndarray
    den_factor: np.ndarray
    log_record: tuple = ()

    def __call__(self, z):
        pz = np.polynomial.polynomial.polyval(z, self.num_factor)
        qz = np.polynomial.polynomial.polyval(z, self.den_factor)
        return self.scale * pz / qz

    def ratio_on_circle(self, theta):
        """c11 / conj(c11) evaluated at exp(i theta)."""
        v = self(np.exp(1j * np.asarray(theta, dtype=float)))
        return v / np.conj(v)


def _series_divide(num: np.ndarray, den: np.ndarray, length: int) -> np.ndarray:
    """First ``length`` Taylor coefficients of num/den (den[0] != 0)."""
    impulse = np.zeros(length)
    impulse[0] = 1.0
    return lfilter(num, den, impulse)


def _unit_factor(coeffs: np.ndarray, label: str, record: list) -> tuple[np.ndarray, float]:
    """Normalized minimum-phase polynomial with the same modulus on the circle.

    Returns ``(poly, scale)`` where ``poly(0) = 1`` and
    ``|coeffs(e^{it})| = scale * |poly(e^{it})|``.
    """
    roots = _roots(coeffs)
    scale = abs(coeffs[-1])
    poly = np.array([1.0 + 0j])
    for r in roots:
        if abs(r) > 1.0:
            scale *= abs(r)
            fac = np.array([1.0, -1.0 / r])
            record.append((label, complex(r), "kept"))
        else:
            # |e^{it} - r| = |1 - conj(r) e^{it}|
            fac = np.array([1.0, -np.conj(r)])
            record.append((label, complex(r), "reflected"))
        poly = np.convolve(poly, fac)
    return poly, float(scale)


def outer_factorize(reg: RationalRegularPart, length: int = 8192, tail_tol: float = 1e-14) -> OuterFactor:
    """Outer factor c11 of c1 = |P/Q|^2, normalized so that c11(0) > 0."""
    record: list = []
    p_poly, p_scale = _unit_factor(np.asarray(reg.numerator), "P", record)
    q_poly, q_scale = _unit_factor(np.asarray(reg.denominator), "Q", record)
    scale = p_scale / q_scale
    # real inputs give conjugate-paired roots, so the products are real up to rounding
    p_poly = p_poly.real.copy()
    q_poly = q_poly.real.copy()
    coeffs = scale * _series_divide(p_poly, q_poly, length)
    inverse = _series_divide(q_poly, p_poly, length) / scale
    coeffs = _trim_tail(coeffs, tail_tol)
    inverse = _trim_tail(inverse, tail_tol)
    return OuterFactor(coeffs, inverse, scale, p_poly, q_poly, tuple(record))


def _trim_tail(c: np.ndarray, tol: float) -> np.ndarray:
    mag = np.abs(c)
    ref = max(mag.max(), 1.0)
    if mag[-8:].max() > tol * ref:
        raise TruncationTooShort(
            f"series still has coefficients of size {mag[-8:].max():.3g} at length {c.size}"
        )
    big = np.flatnonzero(mag > 1e-3 * tol * ref)
    return c[: big[-1] + 1].copy()


def point_data(sym: GegenbauerSymbol, outer: OuterFactor | None = None) -> tuple[float, float, float]:
    """``(c1(chi0), phi0, phi0_prime)`` with phi0 = arg c11(chi0) and phi0' = 2 phi0 mod 2 pi."""
    outer = outer or outer_factorize(sym.regular)
    v = complex(outer(sym.chi0))
    c1 = abs(v) ** 2
    phi0 = math.atan2(v.imag, v.real)
    return c1, phi0, wrap_angle(2.0 * phi0)


def wrap_angle(x: float) -> float:
    """Reduce an angle to (-pi, pi]."""
    y = math.fmod(x + math.pi, 2 * math.pi)
    if y <= 0:
        y += 2 * math.pi
    return y - math.pi
