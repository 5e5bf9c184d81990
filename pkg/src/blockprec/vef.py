"""Mixed finite-element moment system with Eddington closure, and its block
preconditioners.

The current J lives in continuous piecewise quadratics (2*elements + 1 nodes),
the scalar flux phi in discontinuous piecewise linears (2*elements unknowns).
The block system is

    [m_t  -g ] [J  ]   [rhs_g]
    [b    m_a] [phi] = [rhs_f]

with m_t the sigma_t-weighted current mass matrix plus the Marshak boundary
closure (boundary Eddington factor 1/2: phi_b = 2 J.n + 4 J_in, folded into
the (1,1) block and the right-hand side), b the divergence matrix, m_a the
absorption mass matrix, and g the Eddington gradient matrix
g[i,j] = integral( v_i' E u_j ).  With E = 1/3 the system scaled by -1/3 in
the second row is symmetric.
"""

from dataclasses import dataclass, field

import numpy as np

from .blocks import BlockSystem, Kind, make_preconditioner
from .krylov import SolveResult, gmres
from .linalg import lu_factor, vec_norm
from .transport import (
    EddingtonField,
    TransportProblem,
    eddington,
    element_quadrature,
    transport_sweep,
)

__all__ = [
    "VefDiscretization",
    "VEF_KINDS",
    "h1_mass_matrix",
    "assemble_vef",
    "vef_preconditioner",
    "vef_solve",
    "vef_driver",
    "VefDriverResult",
    "first_flight_eddington",
]

VEF_KINDS = ("D", "L", "Dt", "Lt")  # t = lumped mass in the Schur complement

# Reference quadratic H1 basis on [0, 1], nodes at 0, 1/2, 1.
_QX, _QW = element_quadrature()
_H1 = np.column_stack([(2 * _QX - 1) * (_QX - 1), 4 * _QX * (1 - _QX),
                       _QX * (2 * _QX - 1)])
_H1D = np.column_stack([4 * _QX - 3, 4 - 8 * _QX, 4 * _QX - 1])
_L2 = np.column_stack([1 - _QX, _QX])


def _banded_factor(a: np.ndarray, bw: int) -> np.ndarray:
    """Unpivoted LU of a banded matrix in dense storage (diagonally dominant
    SPD use only)."""
    lu = a.copy()
    n = lu.shape[0]
    for k in range(n - 1):
        end = min(k + bw, n - 1)
        piv = lu[k, k]
        if piv == 0.0:
            raise ZeroDivisionError("zero pivot in banded factorization")
        for i in range(k + 1, end + 1):
            l = lu[i, k] / piv
            if l != 0.0:
                lu[i, k + 1:end + 1] -= l * lu[k, k + 1:end + 1]
            lu[i, k] = l
    return lu


def _banded_solve(lu: np.ndarray, bw: int, b: np.ndarray) -> np.ndarray:
    x = np.array(b, dtype=np.float64)
    vector = x.ndim == 1
    if vector:
        x = x[:, None]
    n = lu.shape[0]
    for i in range(1, n):
        k0 = max(0, i - bw)
        x[i] -= lu[i, k0:i] @ x[k0:i]
    for i in range(n - 1, -1, -1):
        k1 = min(n, i + bw + 1)
        if i + 1 < k1:
            x[i] -= lu[i, i + 1:k1] @ x[i + 1:k1]
        x[i] /= lu[i, i]
    return x[:, 0] if vector else x


def h1_mass_matrix(problem: TransportProblem, weight="sigma_t") -> np.ndarray:
    """sigma_t-weighted quadratic mass matrix, no boundary closure."""
    ne = problem.n_elements
    n1 = 2 * ne + 1
    m = np.zeros((n1, n1))
    for el in range(ne):
        xq = problem.qpoints[el]
        wt = problem.sigma_t_at(xq) if weight == "sigma_t" else np.ones_like(xq)
        mel = (_H1 * (_QW * wt)[:, None]).T @ _H1 * problem.h
        sl = slice(2 * el, 2 * el + 3)
        m[sl, sl] += mel
    return m


@dataclass
class VefDiscretization:
    """Assembled blocks, right-hand side, and Eddington data for one solve."""

    problem: TransportProblem
    e_field: EddingtonField
    m_t: np.ndarray          # (1,1) block: weighted mass + Marshak closure
    m_a: np.ndarray          # (2,2) block: absorption mass (block diagonal)
    b_div: np.ndarray        # (2,1) block
    g_edd: np.ndarray        # minus the (1,2) block
    m_t_lumped: np.ndarray   # row-sum diagonal of m_t
    rhs_g: np.ndarray
    rhs_f: np.ndarray
    lumped: bool
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n1(self) -> int:
        return self.m_t.shape[0]

    @property
    def n2(self) -> int:
        return self.m_a.shape[0]

    def system(self, symmetrized: bool = False):
        """Block system and right-hand side; the symmetrized variant scales
        the second row by -1/3 (sensible with an isotropic 1/3 field)."""
        key = ("sys", symmetrized)
        if key not in self._cache:
            if symmetrized:
                sys_ = BlockSystem(self.m_t, -self.g_edd, -self.b_div / 3.0,
                                   -self.m_a / 3.0)
                rhs = np.concatenate([self.rhs_g, -self.rhs_f / 3.0])
            else:
                sys_ = BlockSystem(self.m_t, -self.g_edd, self.b_div, self.m_a)
                rhs = np.concatenate([self.rhs_g, self.rhs_f])
            self._cache[key] = (sys_, rhs)
        return self._cache[key]

    def _b_times(self, x: np.ndarray) -> np.ndarray:
        """b_div @ x exploiting the element-local support of b_div's rows."""
        ne = self.problem.n_elements
        out = np.zeros((self.n2, x.shape[1]))
        for el in range(ne):
            sl1 = slice(2 * el, 2 * el + 3)
            sl2 = slice(2 * el, 2 * el + 2)
            out[sl2] = self.b_div[sl2, sl1] @ x[sl1]
        return out

    def exact_schur(self, symmetrized: bool = False) -> np.ndarray:
        """m_a + b m_t^{-1} g, via banded solves with the m_t factorization
        (scaled by -1/3 for the symmetrized row)."""
        key = ("schur", symmetrized)
        if key not in self._cache:
            if ("mt_banded",) not in self._cache:
                self._cache[("mt_banded",)] = _banded_factor(self.m_t, 2)
            x = _banded_solve(self._cache[("mt_banded",)], 2, self.g_edd)
            s = self.m_a + self._b_times(x)
            self._cache[key] = -s / 3.0 if symmetrized else s
        return self._cache[key]

    def lumped_schur(self, symmetrized: bool = False) -> np.ndarray:
        """m_a + b diag(m_t)^{-1} g with the row-sum lumped mass."""
        key = ("schur_lumped", symmetrized)
        if key not in self._cache:
            s = self.m_a + self._b_times(self.g_edd / self.m_t_lumped[:, None])
            self._cache[key] = -s / 3.0 if symmetrized else s
        return self._cache[key]

    def schur_factors(self, kind: str, symmetrized: bool = False):
        s = (self.lumped_schur(symmetrized) if kind in ("Dt", "Lt")
             else self.exact_schur(symmetrized))
        key = ("slu", kind in ("Dt", "Lt"), symmetrized)
        if key not in self._cache:
            self._cache[key] = lu_factor(s)
        return s, self._cache[key]


def assemble_vef(problem: TransportProblem, e_field,
                 lumped: bool = False) -> VefDiscretization:
    """Assemble the moment-system blocks for a given Eddington field.

    ``e_field`` may be an EddingtonField or a scalar (isotropic shortcut).
    ``lumped`` marks the discretization for lumped-Schur preconditioning; the
    row-sum diagonal is stored either way.
    """
    ne = problem.n_elements
    nq = len(_QX)
    if not isinstance(e_field, EddingtonField):
        e_field = EddingtonField(np.full((ne, nq), float(e_field)),
                                 float(e_field), float(e_field))
    if e_field.values.shape != (ne, nq):
        raise ValueError("Eddington field does not match the mesh/quadrature")
    n1 = 2 * ne + 1
    n2 = 2 * ne
    h = problem.h

    m_t = h1_mass_matrix(problem)
    m_a = np.zeros((n2, n2))
    b_div = np.zeros((n2, n1))
    g_edd = np.zeros((n1, n2))
    rhs_f = np.zeros(n2)
    for el in range(ne):
        xq = problem.qpoints[el]
        sa = problem.sigma_a_at(xq)
        qs = problem.source_at(xq)
        eq = e_field.values[el]
        sl1 = slice(2 * el, 2 * el + 3)
        sl2 = slice(2 * el, 2 * el + 2)
        # jacobians cancel in the first-derivative couplings
        m_a[sl2, sl2] += (_L2 * (_QW * sa)[:, None]).T @ _L2 * h
        b_div[sl2, sl1] += (_L2 * _QW[:, None]).T @ _H1D
        g_edd[sl1, sl2] += (_H1D * (_QW * eq)[:, None]).T @ _L2
        rhs_f[sl2] += (_L2 * (_QW * qs)[:, None]).T.sum(axis=1) * h

    # Marshak closure: phi_b = 2 J.n + 4 J_in with boundary factor 1/2.
    rhs_g = np.zeros(n1)
    mu, w = problem.mu, problem.weights
    j_in_left = float((mu * w)[mu > 0.0].sum()) * problem.psi_left
    j_in_right = float((-mu * w)[mu < 0.0].sum()) * problem.psi_right
    m_t[0, 0] += 2.0 * e_field.left
    m_t[-1, -1] += 2.0 * e_field.right
    rhs_g[0] += 4.0 * e_field.left * j_in_left
    rhs_g[-1] -= 4.0 * e_field.right * j_in_right

    return VefDiscretization(problem, e_field, m_t, m_a, b_div, g_edd,
                             m_t.sum(axis=1), rhs_g, rhs_f, lumped)


def vef_preconditioner(disc: VefDiscretization, kind: str,
                       symmetrized: bool = False):
    """One of the four block preconditioners: D/L with the exact Schur
    complement, Dt/Lt with the lumped-mass approximation."""
    if kind not in VEF_KINDS:
        raise ValueError(f"unknown preconditioner kind {kind!r}; use {VEF_KINDS}")
    sys_, _ = disc.system(symmetrized)
    s, factors = disc.schur_factors(kind, symmetrized)
    block_kind = Kind.DIAG_PLUS if kind.startswith("D") else Kind.LOWER_TRI
    return make_preconditioner(sys_, block_kind, schur=s, schur_factors=factors)


def vef_solve(disc: VefDiscretization, kind: str, rel_tol: float = 1e-10,
              symmetrized: bool = False, max_iters: int | None = None) -> SolveResult:
    """Left-preconditioned GMRES on the assembled moment system, x0 = 0."""
    sys_, rhs = disc.system(symmetrized)
    p = vef_preconditioner(disc, kind, symmetrized)
    return gmres(sys_.apply, p.apply, rhs, x0=None, rel_tol=rel_tol,
                 max_iters=max_iters)


def first_flight_eddington(problem: TransportProblem) -> EddingtonField:
    """Eddington field of the uncollided flux (one sweep against phi = 0)."""
    return eddington(transport_sweep(problem, None))


@dataclass
class VefDriverResult:
    phi: np.ndarray
    current: np.ndarray
    e_field: EddingtonField
    outer_iterations: int
    converged: bool
    change_history: list
    linear_iterations: list


def vef_driver(problem: TransportProblem, outer_tol: float = 1e-8,
               max_outer: int = 100, kind: str = "L", rel_tol: float = 1e-10,
               lumped: bool = False) -> VefDriverResult:
    """Nonlinear fixed point: solve the moment system, sweep, update the
    Eddington field, repeat until the scalar flux settles.

    Starts from the isotropic field E = 1/3.  Exceeding ``max_outer`` is
    flagged in the result, not raised.
    """
    e_field = EddingtonField.isotropic(problem.n_elements)
    phi_prev = None
    changes = []
    lin_iters = []
    n1 = 2 * problem.n_elements + 1
    converged = False
    outer = 0
    phi = np.zeros(problem.n_flux_dofs)
    current = np.zeros(n1)
    for outer in range(1, max_outer + 1):
        disc = assemble_vef(problem, e_field, lumped)
        res = vef_solve(disc, kind, rel_tol)
        lin_iters.append(res.iterations)
        current, phi = res.x[:n1], res.x[n1:]
        if phi_prev is not None:
            change = vec_norm(phi - phi_prev) / max(vec_norm(phi), 1e-300)
            changes.append(change)
            if change <= outer_tol:
                converged = True
                break
        flux = transport_sweep(problem, phi)
        e_field = eddington(flux)
        phi_prev = phi
    return VefDriverResult(phi, current, e_field, outer, converged,
                           changes, lin_iters)
