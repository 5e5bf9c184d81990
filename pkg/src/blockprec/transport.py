"""1D slab discrete-ordinates transport: sweeps and the Eddington closure.

The angular flux is advanced per ordinate by step characteristics (exact
exponential on each cell with a flat scattering+source term), which keeps the
sweep cheap and positive; only the Eddington ratio feeds the moment system.
Angular normalization uses 1/2 (mu-integration over [-1, 1]).
"""

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

__all__ = [
    "ClosureBreakdownError",
    "TransportProblem",
    "AngularFlux",
    "EddingtonField",
    "gauss_legendre",
    "element_quadrature",
    "transport_sweep",
    "eddington",
]

N_ELEMENT_QPOINTS = 4  # per-element Gauss rule shared by sweep and assembly


class ClosureBreakdownError(RuntimeError):
    """Scalar flux nonpositive where the Eddington ratio is needed."""


def gauss_legendre(n: int):
    """Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].

    Newton iteration on the Legendre recurrence; weights sum to 2.
    """
    if n < 1:
        raise ValueError("quadrature order must be positive")
    x = np.zeros(n)
    w = np.zeros(n)
    for i in range((n + 1) // 2):
        t = math.cos(math.pi * (4 * i + 3) / (4 * n + 2))
        for _ in range(100):
            p0, p1 = 1.0, t
            for k in range(2, n + 1):
                p0, p1 = p1, ((2 * k - 1) * t * p1 - (k - 1) * p0) / k
            dp = n * (t * p1 - p0) / (t * t - 1.0)
            dt = p1 / dp
            t -= dt
            if abs(dt) < 1e-15:
                break
        x[i] = -t
        x[n - 1 - i] = t
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp)
    return x, w


def element_quadrature():
    """Reference-element rule on [0, 1] used for all FEM integrals."""
    x, w = gauss_legendre(N_ELEMENT_QPOINTS)
    return 0.5 * (x + 1.0), 0.5 * w


def _as_field(f):
    return f if callable(f) else (lambda x, v=float(f): np.full_like(x, v))


@dataclass
class TransportProblem:
    """Slab problem data: total/absorption cross sections, isotropic source,
    Gauss-Legendre angular quadrature, and prescribed inflow."""

    n_elements: int
    length: float = 1.0
    sigma_t: Union[float, Callable] = 1.0
    sigma_a: float = 0.0
    source: Union[float, Callable] = 1.0
    n_angles: int = 8
    psi_left: float = 0.0
    psi_right: float = 0.0

    def __post_init__(self):
        if self.n_elements < 1:
            raise ValueError("need at least one element")
        if self.length <= 0.0:
            raise ValueError("domain length must be positive")
        if self.n_angles < 2 or self.n_angles % 2:
            raise ValueError("angular quadrature order must be even (no mu = 0)")
        if self.sigma_a < 0.0:
            raise ValueError("absorption must be nonnegative")
        self.mu, self.weights = gauss_legendre(self.n_angles)
        self.h = self.length / self.n_elements
        self.nodes = np.linspace(0.0, self.length, self.n_elements + 1)
        qx, qw = element_quadrature()
        self.qx_ref = qx
        self.qw_ref = qw
        # global quadrature coordinates, (n_elements, nq)
        self.qpoints = self.nodes[:-1, None] + self.h * qx[None, :]
        self._sigma_t = _as_field(self.sigma_t)
        self._source = _as_field(self.source)

    def sigma_t_at(self, x):
        st = self._sigma_t(np.asarray(x, dtype=np.float64))
        if np.any(st <= 0.0):
            raise ValueError("sigma_t must be positive")
        if np.any(st < self.sigma_a):
            raise ValueError("sigma_a may not exceed sigma_t")
        return st

    def sigma_a_at(self, x):
        return np.full_like(np.asarray(x, dtype=np.float64), self.sigma_a)

    def sigma_s_at(self, x):
        return self.sigma_t_at(x) - self.sigma_a_at(x)

    def source_at(self, x):
        return self._source(np.asarray(x, dtype=np.float64))

    @property
    def n_flux_dofs(self) -> int:
        return 2 * self.n_elements  # discontinuous linear scalar flux


@dataclass
class AngularFlux:
    """Per-ordinate flux at element quadrature points and cell faces."""

    psi_q: np.ndarray     # (n_angles, n_elements, nq)
    psi_face: np.ndarray  # (n_angles, n_elements + 1)
    mu: np.ndarray
    weights: np.ndarray


@dataclass
class EddingtonField:
    """Second-to-zeroth angular moment ratio at quadrature points and walls."""

    values: np.ndarray  # (n_elements, nq)
    left: float
    right: float

    @classmethod
    def isotropic(cls, n_elements: int, nq: int = N_ELEMENT_QPOINTS):
        return cls(np.full((n_elements, nq), 1.0 / 3.0), 1.0 / 3.0, 1.0 / 3.0)


def _cell_average_flux(problem: TransportProblem, phi) -> np.ndarray:
    if phi is None:
        return np.zeros(problem.n_elements)
    phi = np.asarray(phi, dtype=np.float64)
    if phi.shape != (problem.n_flux_dofs,):
        raise ValueError(
            f"scalar flux has shape {phi.shape}, expected ({problem.n_flux_dofs},)")
    return 0.5 * (phi[0::2] + phi[1::2])


def transport_sweep(problem: TransportProblem, phi=None) -> AngularFlux:
    """One sweep of all ordinates against a given scalar-flux iterate.

    Solves mu dpsi/dx + sigma_t psi = (sigma_s phi + Q)/2 per angle, marching
    left to right for mu > 0 and right to left for mu < 0, with the exact
    exponential solution on each cell (flat cell-averaged source).
    """
    ne = problem.n_elements
    nq = len(problem.qx_ref)
    h = problem.h
    centers = 0.5 * (problem.nodes[:-1] + problem.nodes[1:])
    st = problem.sigma_t_at(centers)
    ss = problem.sigma_s_at(centers)
    qext = problem.source_at(centers)
    phi_bar = _cell_average_flux(problem, phi)
    src = 0.5 * (ss * phi_bar + qext)  # flat emission density per cell
    sat = src / st                      # saturation value psi_inf per cell

    psi_q = np.zeros((problem.n_angles, ne, nq))
    psi_face = np.zeros((problem.n_angles, ne + 1))
    for d, mu in enumerate(problem.mu):
        if mu > 0.0:
            cells = range(ne)
            face_in, face_out = 0, 1
            offs = problem.qx_ref * h
            psi_face[d, 0] = problem.psi_left
        else:
            cells = range(ne - 1, -1, -1)
            face_in, face_out = 1, 0
            offs = (1.0 - problem.qx_ref) * h
            psi_face[d, ne] = problem.psi_right
        amu = abs(mu)
        for c in cells:
            pin = psi_face[d, c + face_in]
            decay = np.exp(-st[c] * offs / amu)
            psi_q[d, c] = sat[c] + (pin - sat[c]) * decay
            psi_face[d, c + face_out] = sat[c] + (pin - sat[c]) * math.exp(
                -st[c] * h / amu)
    return AngularFlux(psi_q, psi_face, problem.mu.copy(),
                       problem.weights.copy())


def eddington(flux: AngularFlux) -> EddingtonField:
    """Eddington factor E = <mu^2 psi> / <psi> at quadrature points and walls."""
    w = flux.weights
    mu2w = flux.mu ** 2 * w
    zeroth = np.tensordot(w, flux.psi_q, axes=(0, 0))
    second = np.tensordot(mu2w, flux.psi_q, axes=(0, 0))
    if np.any(zeroth <= 0.0):
        raise ClosureBreakdownError("nonpositive scalar flux in the closure")
    zeroth_face = flux.psi_face.T @ w
    if zeroth_face[0] <= 0.0 or zeroth_face[-1] <= 0.0:
        raise ClosureBreakdownError("nonpositive scalar flux at a boundary")
    second_face = flux.psi_face.T @ mu2w
    return EddingtonField(second / zeroth,
                          float(second_face[0] / zeroth_face[0]),
                          float(second_face[-1] / zeroth_face[-1]))
