"""Self-contained dense real linear algebra.

Factorization, solves, eigenvalues, and rank/nullspace are implemented here
directly (numpy supplies array storage and vectorized arithmetic only; nothing
is delegated to numpy.linalg or LAPACK).  All public routines operate on
float64 2-D ndarrays.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import (
    hessenberg_eigvals,
    solve_unit_lower,
    solve_upper,
    symmetric_tridiag,
    tridiag_eigvals,
)

__all__ = [
    "DimensionError",
    "SingularMatrixError",
    "EigenConvergenceError",
    "LUFactors",
    "as_matrix",
    "lu_factor",
    "lu_solve",
    "eigenvalues_dense",
    "symmetric_eigenvalues",
    "rank_and_nullspace",
    "vec_norm",
    "is_conjugate_closed",
    "multiset_distance",
    "hausdorff_distance",
]

_EPS = float(np.finfo(np.float64).eps)

PIVOT_RTOL = 1e-14  # pivot magnitude below PIVOT_RTOL * max|A| flags singularity


class DimensionError(ValueError):
    """Operands have incompatible or invalid shapes."""


class SingularMatrixError(ValueError):
    """A matrix required to be nonsingular is (numerically) singular."""


class EigenConvergenceError(RuntimeError):
    """QR iteration failed to deflate within the sweep budget."""

    def __init__(self, lo: int, hi: int, max_sweeps: int):
        self.lo = lo
        self.hi = hi
        super().__init__(
            f"eigenvalue iteration stuck on submatrix [{lo}:{hi + 1}] "
            f"after {max_sweeps} sweeps"
        )


def as_matrix(a) -> np.ndarray:
    """Validate a dense real matrix: 2-D, float64, all entries finite."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got ndim={m.ndim}")
    if not np.isfinite(m).all():
        raise ValueError("matrix entries must be finite")
    return m


def vec_norm(x) -> float:
    x = np.asarray(x)
    if np.iscomplexobj(x):
        return math.sqrt(float(np.vdot(x, x).real))
    return math.sqrt(float(np.dot(x.ravel(), x.ravel())))


# ---------------------------------------------------------------------------
# LU factorization with partial pivoting
# ---------------------------------------------------------------------------

@dataclass
class LUFactors:
    """Packed L\\U factors with row pivoting: A[perm] = L @ U."""

    lu: np.ndarray
    perm: np.ndarray
    sign: int
    singular: bool

    @property
    def n(self) -> int:
        return self.lu.shape[0]


def _panel_factor(lu, perm, k, kend, tiny, sign, singular):
    """Unblocked pivoted elimination of columns k..kend-1 (full row swaps)."""
    for j in range(k, kend):
        p = j + int(np.argmax(np.abs(lu[j:, j])))
        piv = lu[p, j]
        if abs(piv) <= tiny:
            singular = True
            piv = tiny if piv >= 0.0 else -tiny
            if piv == 0.0:
                piv = 1.0
            lu[p, j] = piv
        if p != j:
            lu[[j, p], :] = lu[[p, j], :]
            perm[j], perm[p] = perm[p], perm[j]
            sign = -sign
        lu[j + 1:, j] /= lu[j, j]
        if j + 1 < kend:
            lu[j + 1:, j + 1:kend] -= np.outer(lu[j + 1:, j], lu[j, j + 1:kend])
    return sign, singular


def lu_factor(a, pivot_rtol: float = PIVOT_RTOL) -> LUFactors:
    """Partial-pivoting LU of a square matrix, blocked for large n.

    The singular flag is set when any pivot magnitude falls below
    ``pivot_rtol * max|A|``; the factorization still completes (with the
    offending pivot replaced by a tiny safe value) so callers can inspect it.
    """
    a = as_matrix(a)
    n, m = a.shape
    if n != m:
        raise DimensionError(f"LU needs a square matrix, got {n}x{m}")
    lu = np.ascontiguousarray(a.copy())
    perm = np.arange(n)
    scale = float(np.abs(a).max()) if n else 0.0
    tiny = pivot_rtol * scale
    sign = 1
    singular = scale == 0.0 and n > 0

    nb = 64
    if n <= 96:
        sign, singular = _panel_factor(lu, perm, 0, n, tiny, sign, singular)
        return LUFactors(lu, perm, sign, singular)

    for k in range(0, n, nb):
        kend = min(k + nb, n)
        sign, singular = _panel_factor(lu, perm, k, kend, tiny, sign, singular)
        if kend == n:
            break
        # U12 block: L11^{-1} applied to the panel's trailing columns.
        for i in range(k + 1, kend):
            lu[i, kend:] -= lu[i, k:i] @ lu[k:i, kend:]
        # Trailing Schur update.
        lu[kend:, kend:] -= lu[kend:, k:kend] @ lu[k:kend, kend:]
    return LUFactors(lu, perm, sign, singular)


def lu_solve(factors: LUFactors, b) -> np.ndarray:
    """Solve A x = b from packed LU factors; b may be a vector or matrix.

    Complex right-hand sides are handled by solving real and imaginary parts.
    """
    if factors.singular:
        raise SingularMatrixError("matrix flagged singular during factorization")
    b = np.asarray(b)
    if np.iscomplexobj(b):
        return lu_solve(factors, b.real) + 1j * lu_solve(factors, b.imag)
    vector = b.ndim == 1
    if vector:
        b = b[:, None]
    if b.ndim != 2 or b.shape[0] != factors.n:
        raise DimensionError(
            f"rhs has {b.shape[0]} rows, expected {factors.n}")
    x = np.ascontiguousarray(b[factors.perm], dtype=np.float64)
    solve_unit_lower(factors.lu, x)
    solve_upper(factors.lu, x)
    return x[:, 0] if vector else x


# Complex LU (internal: shifted inverse iteration needs solves with T - sigma*I).

def complex_lu_factor(a: np.ndarray):
    a = np.array(a, dtype=np.complex128)
    n = a.shape[0]
    perm = np.arange(n)
    scale = float(np.abs(a).max()) if n else 0.0
    tiny = PIVOT_RTOL * scale
    singular = False
    for j in range(n):
        p = j + int(np.argmax(np.abs(a[j:, j])))
        if abs(a[p, j]) <= tiny:
            singular = True
            a[p, j] = tiny if tiny > 0.0 else 1.0
        if p != j:
            a[[j, p], :] = a[[p, j], :]
            perm[j], perm[p] = perm[p], perm[j]
        a[j + 1:, j] /= a[j, j]
        a[j + 1:, j + 1:] -= np.outer(a[j + 1:, j], a[j, j + 1:])
    return a, perm, singular


def complex_lu_solve(lu: np.ndarray, perm: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = lu.shape[0]
    x = np.array(b[perm], dtype=np.complex128)
    for i in range(1, n):
        x[i] -= lu[i, :i] @ x[:i]
    for i in range(n - 1, -1, -1):
        x[i] = (x[i] - lu[i, i + 1:] @ x[i + 1:]) / lu[i, i]
    return x


# ---------------------------------------------------------------------------
# Eigenvalues
# ---------------------------------------------------------------------------

def hessenberg_reduce(a: np.ndarray) -> np.ndarray:
    """Householder similarity reduction to upper Hessenberg form."""
    h = np.ascontiguousarray(as_matrix(a).copy())
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1:, k]
        nx = vec_norm(x)
        if nx == 0.0:
            continue
        v = x.copy()
        v[0] += math.copysign(nx, x[0])
        vn = vec_norm(v)
        if vn == 0.0:
            continue
        v /= vn
        h[k + 1:, k:] -= 2.0 * np.outer(v, v @ h[k + 1:, k:])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v)
        h[k + 2:, k] = 0.0
    return h


def eigenvalues_dense(a, max_sweeps: int = 40) -> np.ndarray:
    """All eigenvalues of a real square matrix as a complex multiset.

    Householder reduction to upper Hessenberg followed by Francis double-shift
    QR with deflation.  Non-real eigenvalues appear in conjugate pairs; the
    returned array is sorted by (real, imag) for reproducibility.
    """
    a = as_matrix(a)
    n, m = a.shape
    if n != m:
        raise DimensionError(f"eigensolver needs a square matrix, got {n}x{m}")
    if n == 0:
        return np.zeros(0, dtype=np.complex128)
    h = hessenberg_reduce(a)
    wr, wi, status, lo, hi = hessenberg_eigvals(h, max_sweeps)
    if status != 0:
        raise EigenConvergenceError(lo, hi, max_sweeps)
    vals = wr + 1j * wi
    order = np.lexsort((vals.imag, vals.real))
    return vals[order]


def symmetric_tridiagonalize(a: np.ndarray):
    """Householder reduction of a symmetric matrix to tridiagonal (d, e)."""
    t = np.ascontiguousarray(as_matrix(a).copy())
    n = t.shape[0]
    d = np.zeros(n)
    e = np.zeros(max(n - 1, 0))
    if n == 1:
        d[0] = t[0, 0]
        return d, e
    symmetric_tridiag(t, d, e)
    return d, e


def symmetric_eigenvalues(a, max_sweeps: int = 50) -> np.ndarray:
    """Eigenvalues of a symmetric matrix, ascending (tridiagonal QL path)."""
    d, e = symmetric_tridiagonalize(a)
    n = d.shape[0]
    if n <= 1:
        return d
    ework = np.zeros(n)
    ework[: n - 1] = e
    status = tridiag_eigvals(d, ework, max_sweeps)
    if status != 0:
        raise EigenConvergenceError(status - 1, n - 1, max_sweeps)
    return np.sort(d)


# ---------------------------------------------------------------------------
# Rank and nullspace via column-pivoted QR
# ---------------------------------------------------------------------------

def _back_substitute(r: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = r.shape[0]
    x = b.astype(np.float64).copy()
    for i in range(n - 1, -1, -1):
        if i + 1 < n:
            x[i] -= r[i, i + 1:] @ x[i + 1:]
        x[i] /= r[i, i]
    return x


def rank_and_nullspace(a, tol_scale: float = 1.0):
    """Numerical rank and an orthonormal nullspace basis.

    Column-pivoted Householder QR; rank counts leading diagonal entries of R
    above ``max(rows, cols) * eps * |R[0,0]| * tol_scale``.  Returns
    ``(rank, basis)`` where basis is (cols, cols - rank) with orthonormal
    columns spanning ker(A).
    """
    if tol_scale <= 0.0:
        raise ValueError("tol_scale must be positive")
    a = as_matrix(a)
    m, n = a.shape
    r = np.ascontiguousarray(a.copy())
    perm = np.arange(n)
    kmax = min(m, n)
    for k in range(kmax):
        norms = np.sqrt(np.einsum("ij,ij->j", r[k:, k:], r[k:, k:]))
        j = k + int(np.argmax(norms))
        if j != k:
            r[:, [k, j]] = r[:, [j, k]]
            perm[k], perm[j] = perm[j], perm[k]
        x = r[k:, k]
        nx = vec_norm(x)
        if nx == 0.0:
            break
        v = x.copy()
        v[0] += math.copysign(nx, x[0])
        vn = vec_norm(v)
        if vn == 0.0:
            continue
        v /= vn
        r[k:, k:] -= 2.0 * np.outer(v, v @ r[k:, k:])
        r[k + 1:, k] = 0.0

    big = abs(r[0, 0]) if kmax else 0.0
    threshold = max(m, n) * _EPS * big * tol_scale
    rank = 0
    for k in range(kmax):
        if abs(r[k, k]) > threshold:
            rank += 1
        else:
            break

    nn = n - rank
    if nn == 0:
        return rank, np.zeros((n, 0))
    w = np.zeros((n, nn))
    if rank > 0:
        z = _back_substitute(r[:rank, :rank], -r[:rank, rank:n])
        w[perm[:rank], :] = z
    w[perm[rank:], :] = np.eye(nn)
    # Orthonormalize (modified Gram-Schmidt, one reorthogonalization pass).
    for j in range(nn):
        v = w[:, j]
        for _ in range(2):
            for i in range(j):
                v -= (w[:, i] @ v) * w[:, i]
        w[:, j] = v / vec_norm(v)
    return rank, w


# ---------------------------------------------------------------------------
# Complex multiset helpers
# ---------------------------------------------------------------------------

def is_conjugate_closed(values, tol: float = 1e-9) -> bool:
    """True when every non-real value has its conjugate in the multiset."""
    vals = np.asarray(values, dtype=np.complex128)
    used = np.zeros(len(vals), dtype=bool)
    for i, v in enumerate(vals):
        if used[i] or abs(v.imag) <= tol:
            continue
        d = np.abs(vals - np.conj(v))
        d[used] = np.inf
        d[i] = np.inf
        j = int(np.argmin(d))
        if d[j] > tol * max(1.0, abs(v)):
            return False
        used[i] = used[j] = True
    return True


def multiset_distance(a, b) -> float:
    """Greedy pairing distance between two equal-size complex multisets."""
    a = np.asarray(a, dtype=np.complex128).ravel()
    b = np.asarray(b, dtype=np.complex128).ravel().copy()
    if a.shape != b.shape:
        raise DimensionError("multisets must have equal cardinality")
    used = np.zeros(len(b), dtype=bool)
    worst = 0.0
    order = np.argsort(-np.abs(a))
    for i in order:
        d = np.abs(b - a[i])
        d[used] = np.inf
        j = int(np.argmin(d))
        used[j] = True
        worst = max(worst, float(d[j]))
    return worst


def hausdorff_distance(a, b) -> float:
    """Symmetric Hausdorff distance between the supports of two point sets."""
    a = np.asarray(a, dtype=np.complex128).ravel()
    b = np.asarray(b, dtype=np.complex128).ravel()
    if len(a) == 0 or len(b) == 0:
        return 0.0 if len(a) == len(b) else math.inf
    d_ab = max(float(np.min(np.abs(b - x))) for x in a)
    d_ba = max(float(np.min(np.abs(a - x))) for x in b)
    return max(d_ab, d_ba)
