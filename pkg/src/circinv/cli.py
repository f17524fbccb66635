"""Command-line front end and experiment runner.

Every command reads symbols in the JSON form
{"alpha": a, "theta0": t, "numerator": [...], "denominator": [...]}.
Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import asymptotics as asy
from .errors import CircinvError, ConfigError
from .fourier import symbol_fourier, symbol_fourier_both
from .inversion import METHODS, apply_inversion, eval_F
from .symbol import GegenbauerSymbol, load_symbol
from .toeplitz import DenseOracle, build_system, first_column_inverse, gs_matrix, last_column_inverse, predictor, verify_polpred

HEADER = ["N", "k", "l", "exact_re", "exact_im", "pred", "env_exact", "env_pred", "rel_env_err", "status", "ms"]
FORMULAS = ("deux", "coef", "coef2", "demi", "toep1", "toep2", "gegen")
DEFAULT_TOLERANCES = {"deux": 0.10, "coef": 0.10, "gegen": 0.10, "demi": 0.15, "toep1": 0.10, "toep2": 0.15, "coef2": 5e-3}
EXIT_CONFIG, EXIT_NUMERIC = 2, 3


def fmt(x) -> str:
    """17 significant digits, the round-trip precision of a double."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# experiment configuration


@dataclass
class ExperimentConfig:
    symbol: dict
    sizes: list
    formula: str = "deux"
    x: list = field(default_factory=lambda: [0.5])
    y: list | None = None
    ks: list | None = None
    random_pairs: int = 0
    constant: str = "printed"
    gamma_factor: bool = False
    normalize: bool = True
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    threads: int = 1
    seed: int = 0
    name: str = "converge"
    timing: bool = False

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        problems = []
        known = set(cls.__dataclass_fields__)
        for key in d:
            if key not in known:
                problems.append(f"{key}: unknown field")
        for key in ("symbol", "sizes"):
            if key not in d:
                problems.append(f"{key}: required")
        if problems:
            raise ConfigError(problems)
        cfg = cls(**d)
        cfg.tolerances = {**DEFAULT_TOLERANCES, **(d.get("tolerances") or {})}
        cfg.validate()
        return cfg

    def validate(self) -> None:
        p = []
        try:
            self.sym
        except (CircinvError, TypeError, ValueError) as exc:
            p.append(f"symbol: {exc}")
        s = self.sizes
        if not isinstance(s, list) or not s or not all(isinstance(n, int) and n > 0 for n in s):
            p.append("sizes: must be a non-empty list of positive integers")
        elif any(b <= a for a, b in zip(s, s[1:])):
            p.append("sizes: must be strictly increasing")
        if self.formula not in FORMULAS:
            p.append(f"formula: must be one of {', '.join(FORMULAS)}")
        if self.formula == "coef2":
            if not self.ks or not all(isinstance(k, int) and k >= 0 for k in self.ks):
                p.append("ks: coef2 needs a list of non-negative integers")
        else:
            if not self.x or not all(isinstance(v, (int, float)) and 0 < v < 1 for v in self.x):
                p.append("x: fractions must lie in (0, 1)")
        if self.formula in ("toep1", "toep2") and not self.random_pairs:
            if not self.y or not all(isinstance(v, (int, float)) and 0 < v < 1 for v in self.y):
                p.append("y: fractions must lie in (0, 1)")
            elif self.x and len(self.y) != len(self.x):
                p.append("y: must have the same length as x")
            elif self.x and any(a == b for a, b in zip(self.x, self.y)):
                p.append("y: x != y required for pair rules")
        if self.constant not in ("printed", "halved"):
            p.append("constant: must be 'printed' or 'halved'")
        if not isinstance(self.threads, int) or self.threads < 1:
            p.append("threads: must be a positive integer")
        if not isinstance(self.seed, int):
            p.append("seed: must be an integer")
        if p:
            raise ConfigError(p)

    @property
    def sym(self) -> GegenbauerSymbol:
        return GegenbauerSymbol.from_dict(self.symbol)


def load_config(path) -> ExperimentConfig:
    try:
        d = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError([f"config: {exc}"]) from exc
    if not isinstance(d, dict):
        raise ConfigError(["config: top level must be an object"])
    return ExperimentConfig.from_dict(d)


# ---------------------------------------------------------------------------
# rows


@dataclass
class ResultRow:
    N: int
    k: int
    l: int
    exact_re: float = math.nan
    exact_im: float = math.nan
    pred: float = math.nan
    env_exact: float = math.nan
    env_pred: float = math.nan
    rel_env_err: float = math.nan
    status: str = "ok"
    ms: float = 0.0

    def cells(self) -> list[str]:
        return [fmt(getattr(self, h)) if h != "status" else self.status for h in HEADER]

    def check(self) -> None:
        if self.status == "ok":
            if not (math.isfinite(self.exact_re) and math.isfinite(self.exact_im)):
                raise ValueError(f"row {self.N},{self.k},{self.l}: exact value not finite")
            if not self.rel_env_err >= 0:
                raise ValueError(f"row {self.N},{self.k},{self.l}: negative relative error")


def _index_rows(cfg: ExperimentConfig, N: int) -> list[tuple[int, int]]:
    if cfg.formula == "coef2":
        return [(k, 0) for k in cfg.ks]
    if cfg.formula in ("toep1", "toep2"):
        if cfg.random_pairs:
            rng = np.random.default_rng([cfg.seed, N])
            pairs = set()
            while len(pairs) < cfg.random_pairs:
                k, l = (int(v) for v in rng.integers(N // 8, 7 * N // 8, 2))
                if k != l:
                    pairs.add((k, l))
            return sorted(pairs)
        return [(int(round(a * N)), int(round(b * N))) for a, b in zip(cfg.x, cfg.y)]
    return [(int(round(a * N)), -1) for a in cfg.x]


class _SizeData:
    """Exact sequences/matrices shared by the rows of one N."""

    def __init__(self, cfg: ExperimentConfig, N: int):
        sym, f = cfg.sym, cfg.formula
        self.N = N
        if f in ("deux", "coef", "demi", "coef2"):
            self.col = first_column_inverse(build_system(sym, N, method="analytic"))
        elif f == "gegen":
            self.col = asy.orthogonal_coeffs(sym, N)
        else:
            self.two = gs_matrix(predictor(build_system(sym, N, method="analytic")))
            self.one = asy.single_zero_inverse(sym.alpha, N) if f == "toep1" else None


def _row(cfg: ExperimentConfig, data: _SizeData, k: int, l: int) -> ResultRow:
    sym, f, N = cfg.sym, cfg.formula, data.N
    row = ResultRow(N, k, l)
    t0 = time.perf_counter()
    try:
        th, a = sym.theta0, sym.alpha
        if f == "coef2":
            c = asy.constants(sym)
            ex = complex(data.col[k])
            pred = asy.predict_small_k(sym, k, N).real / c.c11_0**2
            row.exact_re, row.exact_im, row.pred = ex.real, ex.imag, pred
            row.env_exact, row.env_pred = abs(ex), abs(pred)
            row.rel_env_err = abs(ex - pred)
        elif f in ("toep1", "toep2"):
            ex = complex(data.two[k, l])
            pred = asy.predict_inverse_entry(
                sym, k, l, N, baseline="exact" if f == "toep1" else "kernel", constant=cfg.constant, single_inverse=data.one
            )
            cs = math.cos(th * (k - l))
            row.exact_re, row.exact_im, row.pred = ex.real, ex.imag, pred
            row.env_exact, row.env_pred = ex.real / cs, pred / cs
            row.rel_env_err = abs(row.env_exact - row.env_pred) / abs(row.env_exact)
            if abs(cs) <= 0.5:
                row.status = "cosine-node"
        else:
            ks = np.arange(1, N)
            if f == "deux":
                pred_seq = asy.predict_first_column(sym, ks, N, normalize=cfg.normalize)
                shape = asy.first_column_shape(a, N)
            elif f == "coef":
                pred_seq = asy.predict_first_column_via_baseline(sym, ks, N, "exact", normalize=cfg.normalize)
                shape = asy.first_column_shape(a, N)
            elif f == "demi":
                pred_seq = asy.predict_half(sym, ks, N, gamma_factor=cfg.gamma_factor, normalize=cfg.normalize)
                shape = lambda kk: np.sqrt(1 / np.asarray(kk, float) - 1 / N)  # noqa: E731
            else:
                pred_seq = asy.predict_gegenbauer_coeff(sym, ks, N)
                shape = lambda j: (N - np.asarray(j, float)) ** (a - 1) * (np.asarray(j, float) / N) ** a  # noqa: E731
            pred_seq = np.concatenate([[0.0], pred_seq])
            ex = complex(data.col[k])
            row.exact_re, row.exact_im, row.pred = ex.real, ex.imag, float(pred_seq[k])
            row.env_exact, row.env_pred, row.rel_env_err = asy.relative_envelope_error(data.col, pred_seq, k, th, shape)
    except (CircinvError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        row.status = type(exc).__name__
    if cfg.timing:
        row.ms = round((time.perf_counter() - t0) * 1e3, 3)
    return row


def _size_rows(cfg: ExperimentConfig, N: int) -> list[ResultRow]:
    idx = _index_rows(cfg, N)
    try:
        data = _SizeData(cfg, N)
    except (CircinvError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        return [ResultRow(N, k, l, status=type(exc).__name__) for k, l in idx]
    return [_row(cfg, data, k, l) for k, l in idx]


def run(cfg: ExperimentConfig, threads: int | None = None) -> list[ResultRow]:
    """All rows of the sweep, sorted by (N, k, l); independent of the worker count."""
    workers = threads or cfg.threads
    with ThreadPoolExecutor(max_workers=workers) as pool:
        chunks = list(pool.map(lambda n: _size_rows(cfg, n), cfg.sizes))
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=lambda r: (r.N, r.k, r.l))
    return rows


def write_rows(rows: list[ResultRow], path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HEADER)
        for r in rows:
            w.writerow(r.cells())
    mirror = [{h: (getattr(r, h) if isinstance(getattr(r, h), str) else fmt(getattr(r, h))) for h in HEADER} for r in rows]
    path.with_suffix(".json").write_text(json.dumps(mirror, indent=1) + "\n")


def read_rows(path) -> list[ResultRow]:
    """Re-read a results CSV and re-validate its row invariants."""
    with Path(path).open() as fh:
        reader = csv.reader(fh)
        head = next(reader)
        if head != HEADER:
            raise ValueError(f"unexpected header {head}")
        rows = []
        for cells in reader:
            v = dict(zip(HEADER, cells))
            r = ResultRow(
                int(v["N"]),
                int(v["k"]),
                int(v["l"]),
                *(float(v[h]) for h in HEADER[3:9]),
                status=v["status"],
                ms=float(v["ms"]),
            )
            r.check()
            rows.append(r)
    return rows


# ---------------------------------------------------------------------------
# commands


def _symbol(path) -> GegenbauerSymbol:
    try:
        return load_symbol(path)
    except (OSError, json.JSONDecodeError, CircinvError, TypeError) as exc:
        raise ConfigError([f"symbol: {exc}"]) from exc


def cmd_fourier(args) -> int:
    sym = _symbol(args.symbol)
    n = args.nmax
    out = Path(args.out)
    with out.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if args.method == "both":
            an, qu = symbol_fourier_both(sym, n)
            w.writerow(["s", "analytic_re", "analytic_im", "quadrature_re", "quadrature_im", "abs_diff"])
            for s in range(n + 1):
                a, q = complex(an[s]), complex(qu[s])
                w.writerow([s, fmt(a.real), fmt(a.imag), fmt(q.real), fmt(q.imag), fmt(abs(a - q))])
        else:
            tab = symbol_fourier(sym, n, args.method)
            w.writerow(["s", "re", "im"])
            for s in range(n + 1):
                v = complex(tab[s])
                w.writerow([s, fmt(v.real), fmt(v.imag)])
    return 0


def cmd_solve(args) -> int:
    sym = _symbol(args.symbol)
    system = build_system(sym, args.N, method=args.method)
    col = first_column_inverse(system) if args.column == "first" else last_column_inverse(system)
    with Path(args.out).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "re", "im"])
        for k, v in enumerate(col):
            w.writerow([k, fmt(v.real), fmt(v.imag)])
    return 0


def cmd_polpred(args) -> int:
    sym = _symbol(args.symbol)
    system = build_system(sym, args.N, method="analytic")
    pred = predictor(system)
    err = verify_polpred(pred, system)
    zin = pred.zeros_inside()
    print(f"N={args.N} max_abs_err={fmt(err)} zeros_in_closed_disk={zin}")
    return 0 if err <= args.tol and zin == 0 else EXIT_NUMERIC


def cmd_predict(args) -> int:
    sym = _symbol(args.symbol)
    d = {"symbol": sym.to_dict(), "sizes": [args.N], "formula": args.formula, "constant": args.constant, "gamma_factor": args.gamma_factor}
    if args.formula == "coef2":
        d["ks"] = [args.k if args.k is not None else int(round(args.x))]
    else:
        d["x"] = [args.x]
        if args.y is not None:
            d["y"] = [args.y]
    cfg = ExperimentConfig.from_dict(d)
    rows = run(cfg)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(HEADER)
    for r in rows:
        w.writerow(r.cells())
    return 0 if all(r.status in ("ok", "cosine-node") for r in rows) else EXIT_NUMERIC


def cmd_kernel(args) -> int:
    print(fmt(asy.kernel_G(args.alpha, args.x, args.y)))
    return 0


def cmd_series(args) -> int:
    sym = _symbol(args.symbol)
    N = args.N
    X = apply_inversion(sym, np.eye(N + 1), N, M=args.M, tol=args.tol, method=args.method)
    ref = DenseOracle(build_system(sym, N, method="analytic")).inverse()
    err = float(np.max(np.abs(X - ref)))
    print(f"N={N} M={args.M} method={args.method} max_abs_diff_vs_dense={fmt(err)}")
    if args.out:
        with Path(args.out).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", "l", "re", "im"])
            for k in range(N + 1):
                for l in range(N + 1):
                    w.writerow([k, l, fmt(X[k, l].real), fmt(X[k, l].imag)])
    return 0


def cmd_ffun(args) -> int:
    print(fmt(eval_F(args.N, args.alpha, args.z, m_max=args.m_max, trunc=args.trunc)))
    return 0


def cmd_jacobi(args) -> int:
    sym = _symbol(args.symbol)
    jc = asy.jacobi_conjugation(sym.alpha, args.theta1, args.theta2, args.N)
    print(f"N={args.N} mu={fmt(jc.mu)} half_gap={fmt(jc.half)} max_abs_diff={fmt(jc.max_discrepancy())}")
    return 0


def cmd_converge(args) -> int:
    cfg = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = run(cfg, args.threads)
    path = out / f"{cfg.name}.csv"
    write_rows(rows, path)
    read_rows(path)
    print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="circinv", description="Inverse Toeplitz matrices of Gegenbauer-type symbols.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("fourier", help="Fourier coefficients of the symbol")
    s.add_argument("--symbol", required=True)
    s.add_argument("--nmax", type=int, required=True)
    s.add_argument("--method", choices=["analytic", "quadrature", "both"], default="both")
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_fourier)

    s = sub.add_parser("solve", help="first or last column of the inverse by Levinson")
    s.add_argument("--symbol", required=True)
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--column", choices=["first", "last"], default="first")
    s.add_argument("--method", choices=["analytic", "quadrature", "both"], default="analytic")
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_solve)

    s = sub.add_parser("polpred-check", help="check Fourier(1/|P_N|^2) against the symbol")
    s.add_argument("--symbol", required=True)
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--tol", type=float, default=1e-7)
    s.set_defaults(fn=cmd_polpred)

    s = sub.add_parser("predict", help="one asymptotic prediction with its exact counterpart")
    s.add_argument("--symbol", required=True)
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--formula", choices=FORMULAS, required=True)
    s.add_argument("--x", type=float, default=0.5)
    s.add_argument("--y", type=float)
    s.add_argument("--k", type=int, help="index for coef2")
    s.add_argument("--constant", choices=["printed", "halved"], default="printed")
    s.add_argument("--gamma-factor", action="store_true")
    s.set_defaults(fn=cmd_predict)

    s = sub.add_parser("kernel", help="the limiting kernel G_alpha(x, y)")
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--x", type=float, required=True)
    s.add_argument("--y", type=float, required=True)
    s.set_defaults(fn=cmd_kernel)

    s = sub.add_parser("series-invert", help="inverse from the Hankel/Neumann series, compared with dense")
    s.add_argument("--symbol", required=True)
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--M", type=int)
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--method", choices=METHODS, default="tail")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_series)

    s = sub.add_parser("f-function", help="the nested-sum function F_{N,alpha}(z)")
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--z", type=float, required=True)
    s.add_argument("--m-max", type=int, default=200)
    s.add_argument("--trunc", type=int)
    s.set_defaults(fn=cmd_ffun)

    s = sub.add_parser("jacobi", help="two-zero inverse versus conjugated centered inverse")
    s.add_argument("--symbol", required=True)
    s.add_argument("--theta1", type=float, required=True)
    s.add_argument("--theta2", type=float, required=True)
    s.add_argument("--N", type=int, required=True)
    s.set_defaults(fn=cmd_jacobi)

    s = sub.add_parser("converge", help="run a sweep described by a JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--threads", type=int)
    s.set_defaults(fn=cmd_converge)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        for msg in exc.problems:
            print(f"config error: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    except (CircinvError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
