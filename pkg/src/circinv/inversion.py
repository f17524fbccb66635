"""Inversion of T_N(f), f = |g|^2, through Hankel operators of u = g / conj(g).

Writing f x - P = chi^{N+1} A + B with A analytic and B of negative orders,
the unknown a1 = chi^{N+1} A / g (orders > N) solves

    a1 = r + H^* H a1,     r = -pi_{>N}(conj(u) pi_+(P/conj g)),

where H = pi_- u : (orders > N) -> (orders < 0).  In the bases chi^{N+1+n}
and chi^{-1-m} the operator H is the Hankel matrix h(m + n) = u^(-(N+2+m+n)).
Then x = (1/g) pi_+(P/conj(g) + u a1), and Neumann summation of a1 gives
the series form of the inverse.

Two discretizations of the semi-infinite index range are provided:

truncated  keep n < M and drop the rest (errors decay like M^{-(1-2|a|)})
tail       keep n < M exactly and represent n >= M through two smooth
           envelopes, a1(n) = e^{i n theta0} p(n) + e^{-i n theta0} q(n),
           sampled at a few junction integers and on a log-spaced
           Gauss-Legendre grid.  This works because h itself splits as
           e^{ik theta0} A(k) + e^{-ik theta0} B(k) with A, B sums of 1/(k + c).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.linalg import matmul_toeplitz, toeplitz
from scipy.special import roots_legendre

from .coefficients import beta_theta0_c1_series, gamma_full_series, inverse_g_coeffs, ratio_coeffs
from .errors import DomainError, SeriesDiverging, TruncationTooSmall
from .symbol import GegenbauerSymbol, OuterFactor, outer_factorize

DEFAULT_TOL = 1e-10
METHODS = ("tail", "truncated")
JUNCTION = 8


def default_truncation(N: int) -> int:
    return max(8 * N, 512)


@dataclass(frozen=True)
class TruncatedFourierSpace:
    """Modes kept exactly on each side of the Hankel operators."""

    M: int
    tol: float = DEFAULT_TOL

    def check(self, N: int) -> None:
        if self.M < 4 * N:
            raise DomainError(f"truncation M = {self.M} is below 4N = {4 * N}")


# ---------------------------------------------------------------------------
# envelopes of the Hankel symbol


class Envelopes:
    """h(k) = u^(-(N+2+k)) = e^{ik theta0} A(k) + e^{-ik theta0} B(k).

    With a = 2 alpha + N + 2 and r the coefficients of c11/conj(c11),

        A(k) = s e^{i Phi} sum_t r(t) e^{i t theta0} / (a + k + t),
        B(k) = s e^{-i Phi} sum_t r(t) e^{-i t theta0} / (a + k + t),

    s = sin(pi alpha)/pi, Phi = (2 alpha + N + 2) theta0 - alpha pi.  With
    ``conj`` the envelopes of conj(h) are returned instead (A' = conj B,
    B' = conj A).
    """

    def __init__(self, sym: GegenbauerSymbol, N: int, ratio_outer: OuterFactor | None = None, conj: bool = False):
        al, th = sym.alpha, sym.theta0
        self.a = 2 * al + N + 2
        s = math.sin(math.pi * al) / math.pi
        phi = (2 * al + N + 2) * th - al * math.pi
        self._pa, self._pb = s * np.exp(1j * phi), s * np.exp(-1j * phi)
        if sym.regular.is_constant_one:
            r, t = np.ones(1, dtype=complex), np.zeros(1)
        else:
            r, off = ratio_coeffs(ratio_outer or outer_factorize(sym.regular))
            t = np.arange(r.size) - off
        self._t = t
        self._ra = r * np.exp(1j * t * th)
        self._rb = r * np.exp(-1j * t * th)
        self.conj = conj

    def _sum(self, c: np.ndarray, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        if c.size == 1:
            return c[0] / (self.a + k)
        out = np.empty(k.shape, dtype=complex)
        flat, o = k.ravel(), out.reshape(-1)
        step = max(1, 2_000_000 // c.size)
        for i in range(0, flat.size, step):
            o[i : i + step] = (c / (self.a + flat[i : i + step, None] + self._t)).sum(-1)
        return out

    def A(self, k) -> np.ndarray:
        if self.conj:
            return np.conj(self._pb * self._sum(self._rb, k))
        return self._pa * self._sum(self._ra, k)

    def B(self, k) -> np.ndarray:
        if self.conj:
            return np.conj(self._pa * self._sum(self._ra, k))
        return self._pb * self._sum(self._rb, k)


def abel_weights(z: complex, n1: int, P: int) -> np.ndarray:
    """w with sum_{n >= n1} z^n F(n) ~ sum_i w_i F(n1 + i) for smooth F, |z| = 1, z != 1.

    Euler transform: sum_{n>=0} z^n F(n) = 1/(1-z) sum_p rho^p Delta^p F(0),
    rho = z/(1-z), truncated after P - 1 forward differences.
    """
    rho = z / (1 - z)
    w = np.zeros(P, dtype=complex)
    for p in range(P):
        for i in range(p + 1):
            w[i] += rho**p * (-1) ** (p - i) * comb(p, i)
    return w * z**n1 / (1 - z)


class TailGrid:
    """Composite index space [exact n < n1 | p at tail points | q at tail points].

    Tail points are the junction integers n1..n1+P-1 followed by a
    Gauss-Legendre rule in tau = log(x / (n1 + P - 1/2)) on [0, tau_max].
    Non-oscillatory tail sums use the junction values plus the midpoint
    integral (with its first end correction); sums carrying e^{+-2 i n theta0}
    use Abel weights on the junction values.
    """

    def __init__(self, theta0: float, alpha: float, n1: int, P: int = JUNCTION, G: int | None = None, tau_max: float | None = None):
        if math.sin(theta0) == 0:
            raise DomainError("theta0 must lie strictly inside (0, pi)")
        tau_max = tau_max or min(36.0 / (1 - 2 * abs(alpha)), 400.0)
        G = G or int(64 + tau_max)
        self.n1, self.P, self.G, self.theta0 = n1, P, G, theta0
        t, w = roots_legendre(G)
        tau = 0.5 * tau_max * (t + 1)
        self.x = (n1 + P - 0.5) * np.exp(tau)
        self.wx = self.x * 0.5 * tau_max * w
        self.J = n1 + np.arange(P)
        self.points = np.concatenate([self.J.astype(float), self.x])
        self.wJ = np.ones(P)
        self.wJ[-1] += 1 / 24
        self.wJ[-2] -= 1 / 24
        z = np.exp(2j * theta0)
        self.wz = abel_weights(z, n1, P)
        self.wzb = abel_weights(np.conj(z), n1, P)
        self.n_tail = P + G
        self.dim = n1 + 2 * self.n_tail

    def envelope_rows(self, env: Envelopes, m) -> tuple[np.ndarray, np.ndarray]:
        """(RP, RQ) with sum_n h(m + n) a1(n) = e^{i m theta0} RP a + e^{-i m theta0} RQ a."""
        n1, th, nt = self.n1, self.theta0, self.n_tail
        m = np.asarray(m, dtype=float)[:, None]
        n = np.arange(n1)[None, :]
        RP = np.empty((m.shape[0], self.dim), dtype=complex)
        RQ = np.empty_like(RP)
        RP[:, :n1] = np.exp(1j * n * th) * env.A(m + n)
        RQ[:, :n1] = np.exp(-1j * n * th) * env.B(m + n)
        J, x = self.J[None, :], self.x[None, :]
        AJ, BJ = env.A(m + J), env.B(m + J)
        Ax, Bx = env.A(m + x), env.B(m + x)
        zero = np.zeros_like(Ax)
        ip, iq = slice(n1, n1 + nt), slice(n1 + nt, self.dim)
        RP[:, ip] = np.concatenate([AJ * self.wz, zero], 1)
        RP[:, iq] = np.concatenate([AJ * self.wJ, Ax * self.wx], 1)
        RQ[:, ip] = np.concatenate([BJ * self.wJ, Bx * self.wx], 1)
        RQ[:, iq] = np.concatenate([BJ * self.wzb, zero], 1)
        return RP, RQ

    def value_rows(self, env: Envelopes, m) -> np.ndarray:
        """Rows of sum_n h(m + n) a1(n) at integer m."""
        m = np.asarray(m, dtype=float)
        RP, RQ = self.envelope_rows(env, m)
        return np.exp(1j * m * self.theta0)[:, None] * RP + np.exp(-1j * m * self.theta0)[:, None] * RQ

    def operator(self, env: Envelopes) -> np.ndarray:
        TP, TQ = self.envelope_rows(env, self.points)
        return np.vstack([self.value_rows(env, np.arange(self.n1)), TP, TQ])

    def values(self, a: np.ndarray) -> np.ndarray:
        """a1 at the exact integers and junction integers 0..n1+P-1."""
        n1, nt, P = self.n1, self.n_tail, self.P
        J = self.J
        tail = np.exp(1j * J * self.theta0) * a[n1 : n1 + P] + np.exp(-1j * J * self.theta0) * a[n1 + nt : n1 + nt + P]
        return np.concatenate([a[:n1], tail])


# ---------------------------------------------------------------------------
# Hankel operators


class HankelPair:
    """Plain truncation: H[m, n] = u^(-(N+2+m+n)) for 0 <= m, n < M, applied by FFT."""

    method = "truncated"

    def __init__(self, sym: GegenbauerSymbol, N: int, M: int, ratio_outer: OuterFactor | None = None):
        self.sym, self.N, self.M = sym, N, M
        self.dim = M
        vals = gamma_full_series(sym, -(N + 2 + 2 * M - 2), -(N + 2), ratio_outer)
        self.h = vals[::-1].copy()  # h[i] = u^(-(N+2+i))
        # Toeplitz T[m, j] = h(m + M-1-j), so that H x = T x[::-1]
        self._col = self.h[M - 1 : 2 * M - 1]
        self._row = self.h[M - 1 :: -1]
        # u^(o) for -(N+M) <= o <= -1, position o + N + M
        self._u = gamma_full_series(sym, -(N + M), -1, ratio_outer)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return matmul_toeplitz((self._col, self._row), x[::-1], check_finite=False)

    def apply_adjoint(self, y: np.ndarray) -> np.ndarray:
        # H^H y = conj(H conj(y)) because H is symmetric
        return np.conj(self.apply(np.conj(y)))

    def dense(self) -> np.ndarray:
        i = np.arange(self.M)
        return self.h[i[:, None] + i[None, :]]

    def residual_matrix(self) -> np.ndarray:
        """R with r = R Q: R[n, j] = -conj(u^(-(N+1+n-j)))."""
        N, M = self.N, self.M
        n = np.arange(M)[:, None]
        j = np.arange(N + 1)[None, :]
        return -np.conj(self._u[(N + M) - (N + 1 + n - j)])

    def output_rows(self) -> np.ndarray:
        """U[j, n] = u^(j - N - 1 - n): coefficient j of pi_+(u a1)."""
        N, M = self.N, self.M
        j = np.arange(N + 1)[:, None]
        n = np.arange(M)[None, :]
        return self._u[(j - N - 1 - n) + (N + M)]

    def norm_estimate(self, iters: int = 400, seed: int = 0) -> float:
        return _power_norm(self, iters, seed)


class TailHankelPair:
    """H and H^* on the composite exact-plus-envelope space of :class:`TailGrid`."""

    method = "tail"

    def __init__(self, sym: GegenbauerSymbol, N: int, M: int, ratio_outer: OuterFactor | None = None, grid: TailGrid | None = None):
        self.sym, self.N, self.M = sym, N, M
        self.grid = grid or TailGrid(sym.theta0, sym.alpha, M)
        self.dim = self.grid.dim
        self.env = Envelopes(sym, N, ratio_outer)
        self.env_c = Envelopes(sym, N, ratio_outer, conj=True)
        self._ratio_outer = ratio_outer
        if sym.alpha == 0:
            self.H = np.zeros((self.dim, self.dim), dtype=complex)
            self.Hs = self.H
        else:
            self.H = self.grid.operator(self.env)
            self.Hs = self.grid.operator(self.env_c)
        self._K = None

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.H @ x

    def apply_adjoint(self, y: np.ndarray) -> np.ndarray:
        return self.Hs @ y

    def apply_normal(self, x: np.ndarray) -> np.ndarray:
        """H^* H x through the product assembled once."""
        if self._K is None:
            self._K = self.Hs @ self.H
        return self._K @ x

    def residual_matrix(self) -> np.ndarray:
        """R with r = R Q; exact on n < M, envelopes beyond."""
        N, M, th, g = self.N, self.M, self.sym.theta0, self.grid
        R = np.zeros((self.dim, N + 1), dtype=complex)
        if self.sym.alpha == 0:
            return R
        j = np.arange(N + 1)
        n = np.arange(M)[:, None]
        u = gamma_full_series(self.sym, -(N + M), -1, self._ratio_outer)
        R[:M] = -np.conj(u[(N + M) - (N + 1 + n - j[None, :])])
        x = g.points[:, None]
        nt = g.n_tail
        R[M : M + nt] = -np.exp(-1j * (j + 1) * th) * np.conj(self.env.B(x - j - 1))
        R[M + nt :] = -np.exp(1j * (j + 1) * th) * np.conj(self.env.A(x - j - 1))
        return R

    def output_rows(self) -> np.ndarray:
        """U[j, :] gives coefficient j of pi_+(u a1), i.e. sum_n h(n - j - 1) a1(n)."""
        if self.sym.alpha == 0:
            return np.zeros((self.N + 1, self.dim), dtype=complex)
        return self.grid.value_rows(self.env, -(np.arange(self.N + 1) + 1.0))

    def norm_estimate(self, iters: int = 400, seed: int = 0) -> float:
        return _power_norm(self, iters, seed)


def _normal(op, x: np.ndarray) -> np.ndarray:
    f = getattr(op, "apply_normal", None)
    return f(x) if f is not None else op.apply_adjoint(op.apply(x))


def _power_norm(op, iters: int, seed: int) -> float:
    """Power iteration for the spectral radius of H^* H.

    The growth is averaged over the second half of the iterations, which is
    robust to transient growth when the discretized operator is not normal.
    """
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(op.dim) + 1j * rng.standard_normal(op.dim)
    v /= np.linalg.norm(v)
    logs = []
    for _ in range(iters):
        w = _normal(op, v)
        lam = float(np.linalg.norm(w))
        if lam == 0:
            return 0.0
        logs.append(math.log(lam))
        v = w / lam
    return math.exp(float(np.mean(logs[iters // 2 :])))


def neumann(op, r: np.ndarray, tol: float, max_terms: int = 5000, history: list | None = None) -> np.ndarray:
    """sum_s (H^* H)^s r, stopped when the increment norm drops below tol.

    ``r`` may hold several right-hand sides as columns.  Raises
    SeriesDiverging when the increment norm fails to decrease over three
    consecutive terms.
    """
    total = r.copy()
    term = r
    norms = [float(np.linalg.norm(r))] if history is None else history
    if history is not None:
        norms.append(float(np.linalg.norm(r)))
    for _ in range(max_terms):
        if norms[-1] < tol:
            return total
        term = _normal(op, term)
        total += term
        norms.append(float(np.linalg.norm(term)))
        if len(norms) >= 4 and norms[-1] >= norms[-2] >= norms[-3] >= norms[-4] > 0:
            raise SeriesDiverging(f"Neumann increments not decreasing: {norms[-4:]}")
    raise SeriesDiverging(f"Neumann series not below {tol:g} after {max_terms} terms")


# ---------------------------------------------------------------------------
# solver


class InversionContext:
    """Operators and coefficient tables shared by every right-hand side of one (sym, N, M)."""

    def __init__(self, sym: GegenbauerSymbol, N: int, M: int | None = None, tol: float = DEFAULT_TOL, outer: OuterFactor | None = None, method: str = "tail"):
        if method not in METHODS:
            raise DomainError(f"unknown method {method!r}; expected one of {METHODS}")
        if N < 0:
            raise DomainError("N must be non-negative")
        M = M or default_truncation(N)
        TruncatedFourierSpace(M, tol).check(N)
        self.sym, self.N, self.M, self.tol, self.method = sym, N, M, tol, method
        self.outer = outer or outer_factorize(sym.regular)
        ratio_outer = None if sym.regular.is_constant_one else self.outer
        # b = coefficients of 1/g, orders 0..N
        self.b = inverse_g_coeffs(sym, N, self.outer)
        cls = TailHankelPair if method == "tail" else HankelPair
        self.hp = cls(sym, N, M, ratio_outer)
        self.R = self.hp.residual_matrix()
        self.U0 = self.hp.output_rows()
        i = np.arange(N + 1)
        idx = i[None, :] - i[:, None]
        # (P/conj g)(j) = sum_{i >= j} P_i conj(b_{i-j})
        self._Bq = np.where(idx >= 0, np.conj(self.b)[np.clip(idx, 0, N)], 0)
        self._L = toeplitz(self.b, np.zeros_like(self.b))

    def q_plus(self, P: np.ndarray) -> np.ndarray:
        """pi_+(P / conj g) on orders 0..N (a polynomial, since 1/conj g has orders <= 0)."""
        return self._Bq @ P

    def residual(self, Q: np.ndarray) -> np.ndarray:
        """r = -pi_{>N}(conj(u) Q) for Q supported on orders 0..N."""
        return self.R @ Q

    def analytic_part(self, P: np.ndarray, history: list | None = None) -> np.ndarray:
        """Y = pi_+(P/conj g) + pi_+(u a1) on orders 0..N, so that x = Y / g."""
        Q = self.q_plus(P)
        a1 = neumann(self.hp, self.residual(Q), self.tol, history=history)
        return Q + self.U0 @ a1

    def solve(self, P: np.ndarray, history: list | None = None) -> np.ndarray:
        """T_N^{-1} P for one polynomial (1-d) or several (columns of a 2-d array)."""
        P = _pad(np.asarray(P, dtype=complex), self.N)
        return self._L @ self.analytic_part(P, history)

    def entry(self, k: int, l: int) -> complex:
        """<Y_l | pi_+(chi^k / conj g)> with Y_l the analytic part for P = chi^l."""
        N = self.N
        if not (0 <= k <= N and 0 <= l <= N):
            raise DomainError(f"({k}, {l}) outside 0..{N}")
        e = np.eye(N + 1, dtype=complex)
        return complex(np.dot(self.analytic_part(e[:, l]), np.conj(self.q_plus(e[:, k]))))


def _pad(P: np.ndarray, N: int) -> np.ndarray:
    if P.shape[0] > N + 1:
        raise DomainError("P must have degree at most N")
    if P.shape[0] < N + 1:
        pad = np.zeros((N + 1 - P.shape[0],) + P.shape[1:], dtype=complex)
        P = np.concatenate([P, pad])
    return P


_CONTEXTS: dict = {}


def get_context(sym: GegenbauerSymbol, N: int, M: int | None = None, tol: float = DEFAULT_TOL, method: str = "tail") -> InversionContext:
    """Cached :class:`InversionContext` (the operators are immutable after assembly)."""
    M = M or default_truncation(N)
    key = (json.dumps(sym.to_dict(), sort_keys=True), N, M, tol, method)
    ctx = _CONTEXTS.get(key)
    if ctx is None:
        if len(_CONTEXTS) > 16:
            _CONTEXTS.clear()
        ctx = _CONTEXTS[key] = InversionContext(sym, N, M, tol, method=method)
    return ctx


def apply_inversion(
    sym: GegenbauerSymbol,
    P,
    N: int,
    M: int | None = None,
    tol: float = DEFAULT_TOL,
    method: str = "tail",
    check_doubling: bool = False,
    doubling_tol: float | None = None,
) -> np.ndarray:
    """Coefficients of T_N(f)^{-1} P for polynomial(s) P (ascending coefficients, columns for several).

    ``check_doubling`` recomputes with 2M and raises TruncationTooSmall when
    the two results differ by more than ``doubling_tol`` (default 100 tol);
    the 2M result is returned.
    """
    x = get_context(sym, N, M, tol, method).solve(P)
    if not check_doubling:
        return x
    M = M or default_truncation(N)
    x2 = get_context(sym, N, 2 * M, tol, method).solve(P)
    gap = float(np.max(np.abs(x2 - x)))
    limit = 100 * tol if doubling_tol is None else doubling_tol
    if gap > limit:
        raise TruncationTooSmall(f"result moves by {gap:.3g} when M doubles from {M}")
    return x2


def inverse_columns_series(sym: GegenbauerSymbol, N: int, cols=None, **kw) -> np.ndarray:
    """Columns of T_N^{-1} from the series formula (all columns by default)."""
    cols = list(range(N + 1)) if cols is None else list(cols)
    E = np.zeros((N + 1, len(cols)), dtype=complex)
    E[cols, np.arange(len(cols))] = 1.0
    return apply_inversion(sym, E, N, **kw)


def inverse_entry_series(sym: GegenbauerSymbol, N: int, k: int, l: int, M: int | None = None, tol: float = DEFAULT_TOL, method: str = "tail") -> complex:
    """(T_N^{-1})_{k+1,l+1} = <pi_+(chi^l/conj g) + pi_+(u a1) | pi_+(chi^k/conj g)>.

    The analytic function Y = pi_+(chi^l/conj g) + pi_+(u a1) satisfies x = Y/g,
    and <Y/g, chi^k> = <Y, pi_+(chi^k/conj g)>.
    """
    if not (0 <= k <= N and 0 <= l <= N):
        raise DomainError(f"({k}, {l}) outside 0..{N}")
    return get_context(sym, N, M, tol, method).entry(k, l)


# ---------------------------------------------------------------------------
# first-column representation


def h_N_series(sym: GegenbauerSymbol, N: int, u=None, m_max: int = 5000, trunc: int | None = None, tol: float = 1e-12, method: str = "tail"):
    """H_N(u) for 0 <= u <= N (or the requested u values).

    H_N(u) = sum_j u^(u - N - 1 - j) S_j with S = sum_m (H^* H)^m c and
    c_n = conj(u^(-(N+1+n))); the first column of the inverse is then
    c11(0)^{-2} (beta_k - sum_u beta_{k-u} H_N(u)) with beta normalized.
    """
    us = np.arange(N + 1) if u is None else np.atleast_1d(np.asarray(u, dtype=int))
    if np.any(us < 0) or np.any(us > N):
        raise DomainError("u must lie in 0..N")
    ctx = get_context(sym, N, trunc, tol, method)
    c = -ctx.R[:, 0]
    S = neumann(ctx.hp, c, tol, m_max)
    out = ctx.U0[us] @ S
    return out if u is None or np.ndim(u) else complex(out[0])


def first_column_from_star(sym: GegenbauerSymbol, N: int, trunc: int | None = None, H: np.ndarray | None = None, method: str = "tail") -> np.ndarray:
    """(T_N^{-1})_{k+1,1} = c11(0)^{-2} (beta_k - sum_u beta_{k-u} H_N(u)), beta normalized."""
    outer = outer_factorize(sym.regular)
    beta = beta_theta0_c1_series(sym, N, outer)
    H = h_N_series(sym, N, trunc=trunc, method=method) if H is None else H
    return (beta - np.convolve(beta, H)[: N + 1]) / outer.scale**2


def first_row_from_star(sym: GegenbauerSymbol, N: int, trunc: int | None = None, method: str = "tail") -> np.ndarray:
    """(T_N^{-1})_{1,k+1}, the conjugate of the first column."""
    return np.conj(first_column_from_star(sym, N, trunc, method=method))


# the nested-sum function F_{N, alpha}


def _f_nodes(N: int, n_exact: int | None, n_tail: int):
    """Integer nodes 0..n1-1 (weight 1) followed by a mapped Gauss-Legendre rule on [n1 - 1/2, inf)."""
    n1 = n_exact or 4 * N
    x, w = roots_legendre(n_tail)
    t = 0.5 * (x + 1.0)
    wt = 0.5 * w
    a = n1 - 0.5
    L = float(N + n1)
    nodes = a + L * (1.0 / t - 1.0)
    weights = L * wt / t**2
    ones = np.ones(n1)
    # midpoint end correction F'(n1 - 1/2)/24, F' extrapolated from the last three integers
    ones[-3:] += np.array([1.0, -3.0, 2.0]) / 24
    return np.concatenate([np.arange(n1, dtype=float), nodes]), np.concatenate([ones, weights])


def f_terms(N: int, alpha: float, z: float, m_max: int = 200, n_exact: int | None = None, n_tail: int = 256, tol: float = 1e-14) -> np.ndarray:
    """F_{m,N,alpha}(z) for m = 0, 1, ... (nested sums as printed, no sin factors)."""
    if not (0.0 <= z < 1.0):
        raise DomainError("z must lie in [0, 1)")
    n, w = _f_nodes(N, n_exact, n_tail)
    first = 1.0 / (N + 1 + n)
    bound = 1.0 / (1.0 + (1.0 + alpha) / N + n / N - z)
    kern = 1.0 / (N + 1 + n[:, None] + n[None, :] + alpha)
    KW = kern * w[None, :]
    s2 = (math.sin(math.pi * alpha) / math.pi) ** 2
    left = first * w
    vec = bound.copy()
    terms = [float(left @ vec)]
    for _ in range(m_max):
        vec = KW @ (KW @ vec)
        terms.append(float(left @ vec))
        if s2 ** (len(terms) - 1) * abs(terms[-1]) < tol * max(abs(terms[0]), 1.0):
            break
    return np.array(terms)


def eval_F(N: int, alpha: float, z: float, m_max: int = 200, trunc: int | None = None, n_tail: int = 256) -> float:
    """F_{N,alpha}(z) in the normalization where F_{N,alpha}(0) -> alpha^2.

    Returns s^2 sum_m s^{2m} F_{m,N,alpha}(z), s = sin(pi alpha)/pi: the
    printed nested sums carry the extra s^2 of H_{m,N}(u).
    """
    s2 = (math.sin(math.pi * alpha) / math.pi) ** 2
    terms = f_terms(N, alpha, z, m_max, trunc, n_tail)
    ratios = s2 * terms[1:] / np.where(terms[:-1] == 0, 1, terms[:-1])
    if ratios.size >= 3 and np.all(ratios[-3:] >= 1.0):
        raise SeriesDiverging("terms of the F series are not decreasing")
    weights = s2 ** np.arange(terms.size)
    return float(s2 * np.dot(weights, terms))
