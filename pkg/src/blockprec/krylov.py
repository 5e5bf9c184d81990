"""Left-preconditioned GMRES (no restarts) and stationary fixed-point iteration.

Both solvers take the system and preconditioner as operators (callables
``v -> A v`` and ``r -> P^{-1} r``) and record the full relative
preconditioned-residual history.  Relative residuals are measured against
``||P^{-1} b||``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import vec_norm

__all__ = ["SolveResult", "gmres", "fixed_point"]

_EPS = float(np.finfo(np.float64).eps)

# Stagnation: this many consecutive iterations with relative residual
# improvement below STAGNATION_IMPROVEMENT ends the solve.
STAGNATION_STEPS = 5
STAGNATION_IMPROVEMENT = 1e-3

# Exact-termination detector: a single-iteration residual collapse (factor
# TERMINAL_DROP or better) landing below TERMINAL_FLOOR means the minimal
# polynomial closed in finite precision; further iterations only chase the
# Givens estimate through rounding noise.
TERMINAL_FLOOR = 2.5e-11
TERMINAL_DROP = 0.2

DIVERGENCE_LIMIT = 1e8  # fixed-point relative residual above this flags divergence


@dataclass
class SolveResult:
    """Solution plus convergence instrumentation.

    ``residual_history[k]`` is the relative preconditioned residual after k
    iterations (entry 0 is the initial residual); the final entry is
    recomputed from the true residual, not the solver's internal estimate.
    """

    x: np.ndarray
    iterations: int
    residual_history: np.ndarray
    converged: bool
    breakdown: str | None = None
    final_relres: float = field(init=False)

    def __post_init__(self):
        self.final_relres = float(self.residual_history[-1])


def _as_rhs(b) -> np.ndarray:
    b = np.asarray(b, dtype=np.float64)
    if b.ndim != 1:
        raise ValueError("right-hand side must be a vector")
    return b


def gmres(apply_a, apply_p, b, x0=None, rel_tol: float = 1e-12,
          max_iters: int | None = None) -> SolveResult:
    """Full-memory GMRES on P^{-1} A x = P^{-1} b.

    Modified Gram-Schmidt Arnoldi with Givens-rotation least squares.  Stops
    at ``rel_tol``, at the attainable floor ``2 * eps * cond_estimate`` (with
    the condition estimated from the Givens-transformed R diagonal), on
    stagnation, or at ``max_iters`` (default: problem size).  A happy Arnoldi
    breakdown is treated as convergence; a vanishing first residual returns
    immediately.
    """
    if rel_tol <= 0.0:
        raise ValueError("rel_tol must be positive")
    b = _as_rhs(b)
    n = b.shape[0]
    if max_iters is None:
        max_iters = n
    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=np.float64).copy()

    pb = apply_p(b)
    denom = vec_norm(pb)
    if denom == 0.0:
        denom = 1.0
    r0 = pb if x0 is None or not np.any(x) else apply_p(b - apply_a(x))
    beta = vec_norm(r0)
    history = [beta / denom]
    if history[0] <= rel_tol or beta == 0.0:
        return SolveResult(x, 0, np.array(history), True)

    v_basis = np.zeros((max_iters + 1, n))
    v_basis[0] = r0 / beta
    r_mat = np.zeros((max_iters + 1, max_iters))
    cs = np.zeros(max_iters)
    sn = np.zeros(max_iters)
    g = np.zeros(max_iters + 1)
    g[0] = beta

    rdiag_min = math.inf
    rdiag_max = 0.0
    eff_tol = rel_tol
    stagnant = 0
    breakdown = None
    floor_stop = False
    k = 0
    for j in range(max_iters):
        # np.array copies: operators may return their argument (e.g. identity).
        w = np.array(apply_p(apply_a(v_basis[j])), dtype=np.float64)
        w_scale = vec_norm(w)
        hcol = np.zeros(j + 2)
        for i in range(j + 1):
            hij = float(v_basis[i] @ w)
            w -= hij * v_basis[i]
            hcol[i] = hij
        hnext = vec_norm(w)
        hcol[j + 1] = hnext
        happy = hnext <= 100.0 * _EPS * w_scale
        if not happy:
            v_basis[j + 1] = w / hnext

        for i in range(j):
            t = cs[i] * hcol[i] + sn[i] * hcol[i + 1]
            hcol[i + 1] = -sn[i] * hcol[i] + cs[i] * hcol[i + 1]
            hcol[i] = t
        rr = math.hypot(hcol[j], hcol[j + 1])
        if rr == 0.0:
            cs[j], sn[j] = 1.0, 0.0
        else:
            cs[j], sn[j] = hcol[j] / rr, hcol[j + 1] / rr
        hcol[j] = rr
        g[j + 1] = -sn[j] * g[j]
        g[j] = cs[j] * g[j]
        r_mat[: j + 1, j] = hcol[: j + 1]

        est = abs(g[j + 1]) / denom
        prev = history[-1]
        history.append(est)
        k = j + 1

        if rr > 0.0:
            rdiag_min = min(rdiag_min, rr)
            rdiag_max = max(rdiag_max, rr)
            eff_tol = max(rel_tol, 2.0 * _EPS * (rdiag_max / rdiag_min))
        if prev - est < STAGNATION_IMPROVEMENT * prev:
            stagnant += 1
        else:
            stagnant = 0
        floor_stop = est <= TERMINAL_FLOOR and est <= TERMINAL_DROP * prev

        if est <= eff_tol or happy or floor_stop:
            if happy and est > eff_tol:
                breakdown = "arnoldi breakdown"
            break
        if stagnant >= STAGNATION_STEPS:
            breakdown = "stagnation"
            break
    else:
        breakdown = "max iterations"

    # Back-substitute the k x k least-squares system and form the iterate.
    y = np.zeros(k)
    for i in range(k - 1, -1, -1):
        y[i] = (g[i] - r_mat[i, i + 1:k] @ y[i + 1:k]) / r_mat[i, i]
    x = x + v_basis[:k].T @ y

    true_rel = vec_norm(apply_p(b - apply_a(x))) / denom
    history[-1] = true_rel
    converged = true_rel <= max(rel_tol, eff_tol) or \
        (floor_stop and true_rel <= 10.0 * TERMINAL_FLOOR)
    if converged and breakdown in ("arnoldi breakdown", None):
        breakdown = None
    return SolveResult(x, k, np.array(history), converged, breakdown)


def fixed_point(apply_a, apply_p, b, x0=None, rel_tol: float = 1e-12,
                max_iters: int | None = None) -> SolveResult:
    """Stationary iteration x <- x + P^{-1}(b - A x).

    Divergence (relative residual above ``DIVERGENCE_LIMIT``) is flagged in
    the result rather than raised.
    """
    if rel_tol <= 0.0:
        raise ValueError("rel_tol must be positive")
    b = _as_rhs(b)
    n = b.shape[0]
    if max_iters is None:
        max_iters = n
    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=np.float64).copy()

    pb = apply_p(b)
    denom = vec_norm(pb)
    if denom == 0.0:
        denom = 1.0
    pr = apply_p(b - apply_a(x))
    history = [vec_norm(pr) / denom]
    converged = history[0] <= rel_tol
    breakdown = None
    its = 0
    while not converged and its < max_iters:
        x = x + pr
        pr = apply_p(b - apply_a(x))
        rel = vec_norm(pr) / denom
        history.append(rel)
        its += 1
        if rel <= rel_tol:
            converged = True
        elif not math.isfinite(rel) or rel > DIVERGENCE_LIMIT:
            breakdown = "divergence"
            break
    if not converged and breakdown is None and its >= max_iters:
        breakdown = "max iterations"
    return SolveResult(x, its, np.array(history), converged, breakdown)
