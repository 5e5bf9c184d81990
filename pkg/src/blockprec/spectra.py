"""Closed-form spectra of block-diagonally preconditioned operators.

For the four diagonal preconditioner kinds, every eigenvalue of P^{-1}A is a
nonlinear image of a generalized eigenvalue of the pencil (a22, s22) or
(s22, a22), plus +/-1 eigenvalues carried by the nullspaces of the
off-diagonal blocks.  This module maps generalized eigenpairs to predicted
spectra with eigenvectors, synthesizes systems with prescribed generalized
spectra, and verifies predictions against the dense eigensolver.
"""

import cmath
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .blocks import (
    DIAGONAL_KINDS,
    HAT_KINDS,
    BlockSystem,
    Kind,
    make_preconditioner,
)
from .linalg import (
    DimensionError,
    SingularMatrixError,
    complex_lu_factor,
    complex_lu_solve,
    eigenvalues_dense,
    hausdorff_distance,
    lu_factor,
    lu_solve,
    rank_and_nullspace,
    vec_norm,
)
from .rng import Xoshiro256pp

__all__ = [
    "Pencil",
    "GeneralizedEigenpair",
    "PredictedPair",
    "SpectrumPrediction",
    "VerificationReport",
    "UnsupportedKindError",
    "DegenerateEigenvalueError",
    "generalized_eigenpairs",
    "map_generalized_to_preconditioned",
    "build_eigenvector",
    "predict_spectrum",
    "synthesize_prescribed",
    "verify_prediction",
    "preconditioned_dense",
]


class UnsupportedKindError(ValueError):
    """Spectral formulas exist only for the diagonal preconditioner kinds."""


class DegenerateEigenvalueError(ValueError):
    """The closed-form eigenvector formula breaks at this eigenvalue."""


class Pencil(Enum):
    A22_VS_S22 = "A22_vs_S22"  # a22 y = lambda_tilde * s22 y
    S22_VS_A22 = "S22_vs_A22"  # s22 y = lambda_hat * a22 y


@dataclass
class GeneralizedEigenpair:
    value: complex
    vector: np.ndarray | None
    pencil: Pencil
    residual: float  # relative pencil residual; inf when no vector converged

    @property
    def has_vector(self) -> bool:
        return self.vector is not None


@dataclass
class PredictedPair:
    value: complex
    vector: np.ndarray | None
    origin: str  # formula_plus | formula_minus | kernel_a12 | kernel_a21


@dataclass
class SpectrumPrediction:
    pairs: list[PredictedPair]
    kernel_mult_a12: int
    kernel_mult_a21: int
    complete: bool

    @property
    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.pairs], dtype=np.complex128)


@dataclass
class VerificationReport:
    kind: Kind
    max_residual: float
    spectrum_distance: float
    residual_ok: bool
    spectrum_ok: bool
    passed: bool
    prediction: SpectrumPrediction = field(repr=False)
    actual: np.ndarray = field(repr=False)


_MAXABS = lambda m: float(np.abs(m).max()) if m.size else 0.0


def _inverse_iteration(t: np.ndarray, lam: complex, rng: Xoshiro256pp,
                       max_sweeps: int):
    """Eigenvector of t for eigenvalue lam by shifted inverse iteration."""
    n = t.shape[0]
    scale = _MAXABS(t)
    shift = lam + 1e-8 * max(1.0, abs(lam))
    real_path = abs(complex(lam).imag) == 0.0
    if real_path:
        f = lu_factor(t - shift.real * np.eye(n), pivot_rtol=0.0)
        v = rng.uniform(n) - 0.5
    else:
        lu, perm, _ = complex_lu_factor(t - shift * np.eye(n))
        v = (rng.uniform(n) - 0.5) + 1j * (rng.uniform(n) - 0.5)
    v /= vec_norm(v)
    best = None
    best_res = np.inf
    for _ in range(max_sweeps):
        if real_path:
            v = lu_solve(f, v)
        else:
            v = complex_lu_solve(lu, perm, v)
        v /= vec_norm(v)
        res = vec_norm(t @ v - lam * v) / max(scale, 1e-300)
        if res < best_res:
            best_res = res
            best = v.copy()
        if res <= 1e-13:
            break
    return best, best_res


def generalized_eigenpairs(sys: BlockSystem, pencil: Pencil,
                           residual_tol: float = 1e-8,
                           max_sweeps: int = 50) -> list[GeneralizedEigenpair]:
    """Generalized eigenpairs of (a22, s22) or (s22, a22).

    Eigenvalues come from the dense eigensolver applied to the reduced
    operator (right matrix inverted into the left); eigenvectors are recovered
    by shifted inverse iteration.  Pairs whose iteration fails the pencil
    residual test are returned eigenvalue-only.
    """
    if pencil is Pencil.A22_VS_S22:
        left, right, right_name = sys.a22, sys.s22, "schur"
    else:
        left, right, right_name = sys.s22, sys.a22, "a22"
    fr = lu_factor(right)
    if fr.singular:
        raise SingularMatrixError(
            f"pencil right matrix ({right_name}) is singular")
    t = lu_solve(fr, left)
    vals = eigenvalues_dense(t)

    norm_l = _MAXABS(left)
    norm_r = _MAXABS(right)
    rng = Xoshiro256pp(0x5EED5EED)
    pairs: list[GeneralizedEigenpair] = []
    pending_conj: dict[int, GeneralizedEigenpair] = {}
    for idx, lam in enumerate(vals):
        lam = complex(lam)
        if lam.imag < 0.0:
            # conjugate twin: reuse the computed vector for +imag partner
            twin = None
            for p in pairs:
                if p.pencil is pencil and abs(p.value - lam.conjugate()) <= \
                        1e-12 * max(1.0, abs(lam)) and id(p) not in pending_conj:
                    twin = p
                    pending_conj[id(p)] = p
                    break
            if twin is not None:
                vec = None if twin.vector is None else np.conj(twin.vector)
                pairs.append(GeneralizedEigenpair(lam, vec, pencil, twin.residual))
                continue
        vec, _ = _inverse_iteration(t, lam, rng, max_sweeps)
        if vec is not None:
            scale = max(norm_l + abs(lam) * norm_r, 1e-300)
            pres = vec_norm(left @ vec - lam * (right @ vec)) / (
                scale * max(vec_norm(vec), 1e-300))
            if lam.imag == 0.0 and np.iscomplexobj(vec):
                vec = vec.real if vec_norm(vec.imag) < 1e-8 else vec
        else:
            pres = np.inf
        if pres > residual_tol:
            vec = None
            pres = np.inf
        pairs.append(GeneralizedEigenpair(lam, vec, pencil, float(pres)))
    return pairs


def map_generalized_to_preconditioned(lam, kind: Kind):
    """The two preconditioned eigenvalues produced by one generalized eigenvalue.

    D-plus/minus take a (a22, s22) eigenvalue; hat kinds take a (s22, a22)
    eigenvalue.  Square roots use the principal branch, so real inputs with a
    negative radicand map to a conjugate pair.
    """
    lam = complex(lam)
    if kind is Kind.DIAG_PLUS:
        mid = 0.5 * (lam + 1.0)
        half = 0.5 * cmath.sqrt((lam - 1.0) * (lam + 3.0))
    elif kind is Kind.DIAG_MINUS:
        mid = -0.5 * (lam - 1.0)
        half = 0.5 * cmath.sqrt((lam - 1.0) ** 2 + 4.0)
    elif kind is Kind.DIAG_HAT_PLUS:
        mid = 1.0
        half = cmath.sqrt(1.0 - lam)
    elif kind is Kind.DIAG_HAT_MINUS:
        mid = 0.0
        half = cmath.sqrt(lam)
    else:
        raise UnsupportedKindError(
            f"no spectral formula for kind {kind}; diagonal kinds only")
    return mid + half, mid - half


def build_eigenvector(sys: BlockSystem, kind: Kind, lam, y) -> np.ndarray:
    """Closed-form eigenvector (x; y) of P^{-1}A for a mapped eigenvalue.

    All four diagonal kinds share x = (lam - 1)^{-1} a11^{-1} a12 y; the
    formula degenerates at lam = 1, where kernel-origin vectors take over.
    """
    if kind not in DIAGONAL_KINDS:
        raise UnsupportedKindError(f"eigenvector formula needs a diagonal kind, got {kind}")
    lam = complex(lam)
    if abs(lam - 1.0) <= 1e-12:
        raise DegenerateEigenvalueError(
            "eigenvalue within 1e-12 of 1; closed form is singular")
    y = np.asarray(y)
    x = lu_solve(sys.a11_factors, sys.a12 @ y) / (lam - 1.0)
    v = np.concatenate([x, y])
    if abs(lam.imag) == 0.0 and not np.iscomplexobj(np.asarray(y)):
        v = v.real
    return v / vec_norm(v)


def predict_spectrum(sys: BlockSystem, kind: Kind,
                     residual_tol: float = 1e-8) -> SpectrumPrediction:
    """Full predicted spectrum (with eigenvectors where available) of P^{-1}A.

    Each generalized eigenpair outside ker(a12) yields two formula eigenpairs;
    the nullspaces of a12 and a21 contribute +/-1 eigenvalues: ker(a21) maps
    to +1 for every kind, ker(a12) to +1 for the plus kinds and -1 for the
    minus kinds.
    """
    if kind not in DIAGONAL_KINDS:
        raise UnsupportedKindError(f"spectrum prediction needs a diagonal kind, got {kind}")
    pencil = Pencil.S22_VS_A22 if kind in HAT_KINDS else Pencil.A22_VS_S22
    gen = generalized_eigenpairs(sys, pencil, residual_tol=residual_tol)

    rank12, basis12 = rank_and_nullspace(sys.a12)
    rank21, basis21 = rank_and_nullspace(sys.a21)
    k12 = sys.a12.shape[1] - rank12
    k21 = sys.a21.shape[1] - rank21
    norm12 = _MAXABS(sys.a12)

    eig12 = 1.0 if kind in (Kind.DIAG_PLUS, Kind.DIAG_HAT_PLUS) else -1.0
    right = sys.a22 if kind in HAT_KINDS else sys.s22
    _, left_null_21 = rank_and_nullspace(sys.a21.T)  # range(a21) complement

    def twin_realized(y) -> bool:
        # A kernel pair's second branch needs a mixed partner vector solving
        # a21 x = c * right @ y; that requires right @ y in range(a21).
        if left_null_21.shape[1] == 0:
            return True
        ry = right @ y
        return vec_norm(left_null_21.T @ ry) <= 1e-8 * max(vec_norm(ry), 1e-300)

    pairs: list[PredictedPair] = []
    for gp in gen:
        lam_p, lam_m = map_generalized_to_preconditioned(gp.value, kind)
        branches = ((lam_p, "formula_plus"), (lam_m, "formula_minus"))
        if k12 > 0 and gp.has_vector:
            rel = vec_norm(sys.a12 @ gp.vector) / max(norm12 * vec_norm(gp.vector), 1e-300)
            if rel <= 1e-8:
                # The eigenvector sits in ker(a12): the kernel entries below
                # carry its eig12 image; the pair's twin branch is a genuine
                # (but closed-form-less) eigenvalue exactly when the partner
                # equation is solvable.
                if twin_realized(gp.vector):
                    twin = max(branches, key=lambda b: abs(b[0] - eig12))
                    pairs.append(PredictedPair(complex(twin[0]), None, twin[1]))
                continue
        for lam, origin in branches:
            vec = None
            if gp.has_vector and abs(lam - 1.0) > 1e-12:
                vec = build_eigenvector(sys, kind, lam, gp.vector)
            pairs.append(PredictedPair(complex(lam), vec, origin))
    for j in range(k12):
        v = np.concatenate([np.zeros(sys.n1), basis12[:, j]])
        pairs.append(PredictedPair(complex(eig12), v, "kernel_a12"))
    for j in range(k21):
        v = np.concatenate([basis21[:, j], np.zeros(sys.n2)])
        pairs.append(PredictedPair(complex(1.0), v, "kernel_a21"))

    return SpectrumPrediction(pairs, k12, k21, complete=len(pairs) == sys.n)


def synthesize_prescribed(n1: int, n2: int, lambda_tilde_list,
                          seed: int) -> BlockSystem:
    """Block system whose pencil (a22, s22) has exactly the prescribed spectrum.

    Construction: s22 diagonally dominant random, t = v diag(l) v^{-1} with a
    random well-conditioned v, a22 = s22 t, a11 = a12 = identity,
    a21 = s22 (t - identity); then the assembled Schur complement equals s22.
    Requires n1 == n2 (a12 is taken square full-rank).
    """
    if n1 != n2:
        raise DimensionError("synthesis requires n1 == n2")
    lam = np.asarray(lambda_tilde_list, dtype=np.float64)
    if lam.shape != (n2,):
        raise DimensionError(
            f"need exactly n2={n2} prescribed eigenvalues, got {lam.shape}")
    stream = Xoshiro256pp(seed)

    def dominant(n):
        r = stream.uniform_matrix(n, n, -1.0, 1.0)
        return r + (1.0 + np.abs(r).sum(axis=1).max()) * np.eye(n)

    s22 = dominant(n2)
    v = dominant(n2)
    v_inv = lu_solve(lu_factor(v), np.eye(n2))
    t = (v * lam) @ v_inv
    a22 = s22 @ t
    a21 = s22 @ (t - np.eye(n2))
    return BlockSystem(np.eye(n1), np.eye(n1, n2), a21, a22)


def preconditioned_dense(sys: BlockSystem, kind: Kind,
                         schur: np.ndarray | None = None) -> np.ndarray:
    """Dense P^{-1}A, column by column (verification only)."""
    p = make_preconditioner(sys, kind, schur)
    a = sys.monolithic()
    out = np.empty_like(a)
    for j in range(a.shape[1]):
        out[:, j] = p.apply(a[:, j])
    return out


def verify_prediction(sys: BlockSystem, kind: Kind, tol: float = 1e-7,
                      residual_tol: float = 1e-8) -> VerificationReport:
    """End-to-end check of the predicted spectrum against the dense eigensolver.

    Reports the worst eigenpair residual ||P^{-1}A v - lam v|| / ||v|| over
    predicted pairs carrying eigenvectors, and the Hausdorff distance between
    the predicted and computed eigenvalue sets.  Failures are data, not
    exceptions.
    """
    prediction = predict_spectrum(sys, kind, residual_tol=residual_tol)
    pa = preconditioned_dense(sys, kind)
    actual = eigenvalues_dense(pa)

    max_res = 0.0
    for pair in prediction.pairs:
        if pair.vector is None:
            continue
        res = vec_norm(pa @ pair.vector - pair.value * pair.vector)
        max_res = max(max_res, res / vec_norm(pair.vector))

    dist = hausdorff_distance(prediction.values, actual)
    residual_ok = max_res <= residual_tol
    spectrum_ok = dist <= tol
    return VerificationReport(kind, max_res, dist, residual_ok, spectrum_ok,
                              residual_ok and spectrum_ok, prediction, actual)
