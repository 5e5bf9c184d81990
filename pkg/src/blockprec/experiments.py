"""Random-matrix preconditioning studies and CSV artifacts.

Builds the calibrated symmetric test pair (positive- and negative-definite
(2,2) block), runs iteration-count tables and approximate-Schur-complement
sweeps with left-preconditioned GMRES, and tabulates the closed-form
eigenvalue-magnitude curves.  Every solve is seeded and reproducible; CSV
output is byte-deterministic for a fixed configuration.
"""

import math
import sys as _sys
import warnings
from dataclasses import dataclass, field

import numpy as np

from .blocks import BlockSystem, Kind, make_preconditioner
from .krylov import SolveResult, gmres
from .linalg import symmetric_eigenvalues
from .rng import GENERATOR_NAME, Xoshiro256pp, random_uniform_matrix
from .spectra import map_generalized_to_preconditioned

__all__ = [
    "ExperimentConfig",
    "TableRow",
    "KIND_TOKENS",
    "gen_MN",
    "calibrate_rho",
    "min_magnitude_eigenvalue",
    "approx_schur_star",
    "approx_schur_cross",
    "average_entry_magnitude",
    "run_table",
    "ratio_sweep",
    "spectrum_curves",
    "write_csv",
    "CSV_FIELDS",
]

# CLI/CSV tokens for preconditioner variants; hat variants read a22 in place
# of the exact Schur complement.
KIND_TOKENS = {
    "L": (Kind.LOWER_TRI, False),
    "U": (Kind.UPPER_TRI, False),
    "M": (Kind.LDU, False),
    "Lhat": (Kind.LOWER_TRI, True),
    "Uhat": (Kind.UPPER_TRI, True),
    "D+": (Kind.DIAG_PLUS, False),
    "D-": (Kind.DIAG_MINUS, False),
    "Dhat+": (Kind.DIAG_HAT_PLUS, False),
    "Dhat-": (Kind.DIAG_HAT_MINUS, False),
}

CSV_FIELDS = ["experiment", "matrix_tag", "n", "c_o", "c_1", "c_2", "seed",
              "kind", "schur_mode", "epsilon", "iterations", "converged",
              "final_relres"]


@dataclass(frozen=True)
class ExperimentConfig:
    """Knobs for the random-matrix studies (defaults follow the studies' setup)."""

    n: int = 250
    c_o: float = 1.0
    c_1: float = 1.0
    c_2: float = 1.0
    seed: int = 0
    rel_tol: float = 1e-16
    kinds: tuple = ("L", "Lhat", "D+", "Dhat+", "D-", "Dhat-")
    epsilon_star: float = 0.0
    epsilon_cross: float = 0.0
    max_iters: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if min(self.c_o, self.c_1, self.c_2) <= 0.0:
            raise ValueError("constants c_o, c_1, c_2 must be positive")
        if self.epsilon_star < 0.0 or self.epsilon_cross < 0.0:
            raise ValueError("epsilon parameters must be nonnegative")
        for token in self.kinds:
            if token not in KIND_TOKENS:
                raise ValueError(f"unknown preconditioner token {token!r}")


def min_magnitude_eigenvalue(a: np.ndarray) -> float:
    """Smallest |eigenvalue| of a symmetric matrix."""
    return float(np.abs(symmetric_eigenvalues(a)).min())


def _raw_blocks(config: ExperimentConfig):
    stream = Xoshiro256pp(config.seed)
    n = config.n
    a11 = stream.uniform_matrix(n, n, -1.0, 1.0)
    a12 = stream.uniform_matrix(n, n, -1.0, 1.0)
    a22 = stream.uniform_matrix(n, n, -1.0, 1.0)
    w = a11.T @ a11 / config.c_1
    x = a12 / config.c_o
    z = a22.T @ a22 / config.c_2
    return w, x, z


def calibrate_rho(m11: np.ndarray, m12: np.ndarray, z22: np.ndarray,
                  grid_points: int = 64, match_rtol: float = 1e-6) -> float:
    """Shift rho making the negative-definite variant share the smallest
    magnitude eigenvalue with the positive one.

    Constraint: rho <= lambda_min(z22) so that (rho I - z22) stays negative
    semidefinite.  A 64-point bracket scan over (-||M||_F, lambda_min]
    precedes bisection (Frobenius norm: the matching shift often sits well
    below -max|eigenvalue|); when no match exists in range, the constraint
    boundary is returned with a warning.
    """
    n1 = m11.shape[0]
    n2 = z22.shape[0]
    m_mono = np.block([[m11, m12], [m12.T, z22]])
    target = min_magnitude_eigenvalue(m_mono)
    bound = float(symmetric_eigenvalues(z22)[0])
    norm_m = float(np.sqrt((m_mono * m_mono).sum()))

    n_mono = m_mono.copy()

    def f(rho: float) -> float:
        n_mono[n1:, n1:] = rho * np.eye(n2) - z22
        return min_magnitude_eigenvalue(n_mono) - target

    tol_f = match_rtol * max(target, 1e-300)
    lo = -norm_m
    grid = np.linspace(lo, bound, grid_points)
    fs = np.array([f(r) for r in grid])
    if abs(fs[-1]) <= tol_f:
        return bound
    sign_right = math.copysign(1.0, fs[-1])

    def matches(val: float) -> bool:
        return abs(val) <= tol_f or math.copysign(1.0, val) != sign_right

    bracket = None
    for i in range(grid_points - 2, -1, -1):
        if matches(fs[i]):
            bracket = (grid[i], grid[i + 1])
            break
    if bracket is None:
        warnings.warn("no rho matching the minimal-magnitude eigenvalue in "
                      "range; returning the semidefiniteness boundary")
        return bound

    a, b = bracket
    fa = None
    for _ in range(60):
        if b - a <= 1e-7 * max(1.0, abs(a), abs(b)):
            break
        mid = 0.5 * (a + b)
        fm = f(mid)
        if matches(fm):
            a, fa = mid, fm
        else:
            b = mid
    if fa is None:
        fa = f(a)
    if abs(fa) > tol_f:
        warnings.warn(f"rho calibration residual {fa:.3e} exceeds the match "
                      "tolerance (flat or steep eigenvalue curve)")
    return float(a)


def gen_MN(config: ExperimentConfig):
    """The calibrated pair of symmetric systems and the shift rho.

    Both systems share the Gram (1,1) block and scaled off-diagonal blocks;
    the first carries a positive-semidefinite (2,2) block, the second the
    calibrated negative-semidefinite one.
    """
    w, x, z = _raw_blocks(config)
    m_sys = BlockSystem(w, x, x.T, z)
    rho = calibrate_rho(w, x, z)
    n_sys = BlockSystem(w, x, x.T, rho * np.eye(config.n) - z)
    return m_sys, n_sys, rho


def average_entry_magnitude(sys: BlockSystem) -> float:
    """Mean |entry| over the monolithic matrix (the error-scale eta)."""
    total = (np.abs(sys.a11).sum() + np.abs(sys.a12).sum()
             + np.abs(sys.a21).sum() + np.abs(sys.a22).sum())
    return float(total) / (sys.n * sys.n)


def approx_schur_star(sys: BlockSystem, eps_star: float) -> np.ndarray:
    """Interpolated Schur complement a22 - (1 - eps) a21 a11^{-1} a12.

    eps = 0 recovers the exact complement, eps = 1 gives a22.
    """
    if eps_star < 0.0:
        raise ValueError("eps_star must be nonnegative")
    return eps_star * sys.a22 + (1.0 - eps_star) * sys.s22


def approx_schur_cross(sys: BlockSystem, eps_cross: float, seed: int) -> np.ndarray:
    """Exact Schur complement plus eps times a random error matrix.

    The error is uniform on [-eta, eta] with eta the mean entry magnitude of
    the monolithic system, freshly drawn from ``seed``.
    """
    if eps_cross < 0.0:
        raise ValueError("eps_cross must be nonnegative")
    if eps_cross == 0.0:
        return sys.s22.copy()
    eta = average_entry_magnitude(sys)
    err = random_uniform_matrix(sys.n2, sys.n2, -eta, eta, seed)
    return sys.s22 + eps_cross * err


@dataclass
class TableRow:
    experiment: str
    matrix_tag: str
    config: ExperimentConfig
    kind: str
    schur_mode: str
    epsilon: float | None
    iterations: int
    converged: bool
    final_relres: float
    rho: float | None = None

    def csv_record(self) -> dict:
        c = self.config
        return {
            "experiment": self.experiment, "matrix_tag": self.matrix_tag,
            "n": c.n, "c_o": c.c_o, "c_1": c.c_1, "c_2": c.c_2,
            "seed": c.seed, "kind": self.kind, "schur_mode": self.schur_mode,
            "epsilon": "" if self.epsilon is None else repr(self.epsilon),
            "iterations": self.iterations,
            "converged": "true" if self.converged else "false",
            "final_relres": repr(self.final_relres),
        }


def _solve(sys: BlockSystem, kind_token: str, config: ExperimentConfig,
           schur: np.ndarray | None = None) -> tuple[SolveResult, str]:
    kind, hat = KIND_TOKENS[kind_token]
    if hat:
        p = make_preconditioner(sys, kind, schur=sys.a22)
        mode = "a22"
    else:
        p = make_preconditioner(sys, kind, schur=schur)
        mode = p.schur_mode
    b = np.ones(sys.n)
    res = gmres(sys.apply, p.apply, b, x0=None, rel_tol=config.rel_tol,
                max_iters=config.max_iters)
    return res, mode


def run_table(config: ExperimentConfig, matrix_tags=("M", "N"),
              kinds=None) -> list[TableRow]:
    """Iteration-count table over (matrix tag, preconditioner kind) cells.

    Right-hand side is the ones vector, x0 = 0; non-convergence is recorded
    per cell and the run continues.
    """
    kinds = tuple(kinds) if kinds is not None else config.kinds
    m_sys, n_sys, rho = gen_MN(config)
    systems = {"M": m_sys, "N": n_sys}
    rows = []
    for tag in matrix_tags:
        sys_ = systems[tag]
        for token in kinds:
            res, mode = _solve(sys_, token, config)
            rows.append(TableRow("table", tag, config, token, mode, None,
                                 res.iterations, res.converged,
                                 res.final_relres, rho))
    return rows


def ratio_sweep(config: ExperimentConfig, eps_grid, mode: str) -> list[TableRow]:
    """Block-diagonal vs block-lower-triangular iteration ratio sweep.

    ``mode``: 'star' interpolates toward a22, 'cross' adds a random error to
    the exact complement, 'cross_saddle' additionally zeroes the (2,2) block.
    The sweep reuses one seeded system (rho = 0 variant) across epsilons so
    counts are directly comparable.
    """
    if mode not in ("star", "cross", "cross_saddle"):
        raise ValueError(f"unknown sweep mode {mode!r}")
    w, x, z = _raw_blocks(config)
    if mode == "cross_saddle":
        sys_ = BlockSystem(w, x, x.T, np.zeros_like(z))
    else:
        sys_ = BlockSystem(w, x, x.T, -z)
    rows = []
    for eps in eps_grid:
        eps = float(eps)
        if mode == "star":
            schur = approx_schur_star(sys_, eps)
        else:
            schur = approx_schur_cross(sys_, eps, config.seed)
        for token, kind in (("D+", Kind.DIAG_PLUS), ("L", Kind.LOWER_TRI)):
            p = make_preconditioner(sys_, kind, schur=schur)
            res = gmres(sys_.apply, p.apply, np.ones(sys_.n), x0=None,
                        rel_tol=config.rel_tol, max_iters=config.max_iters)
            rows.append(TableRow(f"ratio_{mode}", "N0", config, token,
                                 "provided", eps, res.iterations,
                                 res.converged, res.final_relres))
    return rows


def ratios_from_rows(rows: list[TableRow]) -> dict[float, float]:
    """epsilon -> (diagonal iterations / lower-triangular iterations)."""
    d = {r.epsilon: r.iterations for r in rows if r.kind == "D+"}
    l = {r.epsilon: r.iterations for r in rows if r.kind == "L"}
    return {eps: d[eps] / l[eps] for eps in d if eps in l and l[eps] > 0}


def spectrum_curves(lambda_grid, kinds=("D+", "D-", "Dhat+", "Dhat-")) -> list[dict]:
    """Magnitudes of both mapped eigenvalues over a real generalized-eigenvalue
    grid, for plotting the preconditioned-spectrum curves."""
    records = []
    for token in kinds:
        kind, hat = KIND_TOKENS[token]
        if hat or kind not in (Kind.DIAG_PLUS, Kind.DIAG_MINUS,
                               Kind.DIAG_HAT_PLUS, Kind.DIAG_HAT_MINUS):
            raise ValueError(f"spectrum curves need a diagonal kind, got {token!r}")
        for lam in lambda_grid:
            lam = float(lam)
            lp, lm = map_generalized_to_preconditioned(lam, kind)
            records.append({"kind": token, "lambda": lam,
                            "mag_plus": abs(lp), "mag_minus": abs(lm)})
    return records


def write_csv(rows: list[TableRow], out=None, metadata: dict | None = None) -> str:
    """Render table rows as CSV (deterministic bytes for fixed inputs).

    Metadata key=value pairs go into leading comment lines; ``out`` may be a
    path, a file object, or None (string only).
    """
    meta = {"x0": "0", "rhs": "ones", "prng": GENERATOR_NAME}
    if metadata:
        meta.update(metadata)
    lines = [f"# {k}={v}" for k, v in meta.items()]
    lines.append(",".join(CSV_FIELDS))
    for row in rows:
        rec = row.csv_record()
        lines.append(",".join(str(rec[f]) for f in CSV_FIELDS))
    text = "\n".join(lines) + "\n"
    if out is None:
        return text
    if hasattr(out, "write"):
        out.write(text)
    elif out == "-":
        _sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)
    return text
