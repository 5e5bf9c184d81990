"""2x2 block systems, the (2,2) Schur complement, and block preconditioners.

A block system holds the four dense blocks of

    [a11  a12] [x1]   [b1]
    [a21  a22] [x2] = [b2]

with a11 square nonsingular.  Preconditioners are applied through block
forward/backward substitution against cached LU factors; the inverse is never
formed densely.
"""

from enum import Enum

import numpy as np

from .linalg import (
    DimensionError,
    SingularMatrixError,
    as_matrix,
    lu_factor,
    lu_solve,
)

__all__ = [
    "Kind",
    "DIAGONAL_KINDS",
    "HAT_KINDS",
    "SingularBlockError",
    "BlockSystem",
    "Preconditioner",
    "assemble_schur",
    "make_preconditioner",
    "apply_preconditioner",
    "apply_block",
]


class Kind(Enum):
    """Preconditioner structure tags."""

    LOWER_TRI = "L"
    UPPER_TRI = "U"
    LDU = "M"
    DIAG_PLUS = "D+"
    DIAG_MINUS = "D-"
    DIAG_HAT_PLUS = "Dhat+"
    DIAG_HAT_MINUS = "Dhat-"


DIAGONAL_KINDS = frozenset({Kind.DIAG_PLUS, Kind.DIAG_MINUS,
                            Kind.DIAG_HAT_PLUS, Kind.DIAG_HAT_MINUS})
HAT_KINDS = frozenset({Kind.DIAG_HAT_PLUS, Kind.DIAG_HAT_MINUS})


class SingularBlockError(SingularMatrixError):
    """A diagonal block required by a preconditioner is singular."""

    def __init__(self, block: str):
        self.block = block
        super().__init__(f"block '{block}' is singular")


class BlockSystem:
    """Four dense blocks with cached a11 factors and lazily assembled Schur
    complement s22 = a22 - a21 a11^{-1} a12."""

    def __init__(self, a11, a12, a21, a22):
        self.a11 = as_matrix(a11)
        self.a12 = as_matrix(a12)
        self.a21 = as_matrix(a21)
        self.a22 = as_matrix(a22)
        n1, n1b = self.a11.shape
        n2, n2b = self.a22.shape
        if n1 != n1b or n2 != n2b:
            raise DimensionError("diagonal blocks must be square")
        if self.a12.shape != (n1, n2) or self.a21.shape != (n2, n1):
            raise DimensionError(
                f"off-diagonal blocks must be {n1}x{n2} and {n2}x{n1}")
        self.n1 = n1
        self.n2 = n2
        self._a11_factors = None
        self._s22 = None

    @property
    def n(self) -> int:
        return self.n1 + self.n2

    @property
    def is_saddle_point(self) -> bool:
        return self.a22.size == 0 or float(np.abs(self.a22).max()) == 0.0

    @property
    def a11_factors(self):
        if self._a11_factors is None:
            f = lu_factor(self.a11)
            if f.singular:
                raise SingularBlockError("a11")
            self._a11_factors = f
        return self._a11_factors

    @property
    def s22(self) -> np.ndarray:
        if self._s22 is None:
            self._s22 = self.a22 - self.a21 @ lu_solve(self.a11_factors, self.a12)
        return self._s22

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Monolithic matvec y = A x through four block products."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n,):
            raise DimensionError(f"vector has length {x.shape}, expected {self.n}")
        x1, x2 = x[:self.n1], x[self.n1:]
        y = np.empty(self.n)
        y[:self.n1] = self.a11 @ x1 + self.a12 @ x2
        y[self.n1:] = self.a21 @ x1 + self.a22 @ x2
        return y

    def monolithic(self) -> np.ndarray:
        return np.block([[self.a11, self.a12], [self.a21, self.a22]])

    def split(self, x: np.ndarray):
        return x[:self.n1], x[self.n1:]


def assemble_schur(sys: BlockSystem) -> np.ndarray:
    """S22 = a22 - a21 a11^{-1} a12, cached on the system."""
    return sys.s22


class Preconditioner:
    """A block preconditioner applied as z = P^{-1} r via block solves."""

    def __init__(self, kind: Kind, sys: BlockSystem, schur: np.ndarray | None,
                 schur_factors=None):
        self.kind = kind
        self.sys = sys
        self.n1 = sys.n1
        self.n2 = sys.n2
        self._f11 = sys.a11_factors
        if kind in HAT_KINDS:
            # Hat kinds read a22 directly and ignore any provided Schur matrix.
            self.schur_mode = "a22"
            self._s = sys.a22
            schur_factors = None
        else:
            if schur is None:
                self.schur_mode = "exact"
                self._s = sys.s22
            else:
                self.schur_mode = "provided"
                self._s = as_matrix(schur)
                if self._s.shape != (sys.n2, sys.n2):
                    raise DimensionError("provided Schur matrix has wrong shape")
        if schur_factors is None:
            schur_factors = lu_factor(self._s)
        if schur_factors.singular:
            raise SingularBlockError("a22" if kind in HAT_KINDS else "schur")
        self._fs = schur_factors

    @property
    def n(self) -> int:
        return self.n1 + self.n2

    def apply(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r)
        if r.shape != (self.n,):
            raise DimensionError(f"vector has length {r.shape}, expected {self.n}")
        if np.iscomplexobj(r):
            return self.apply(r.real) + 1j * self.apply(r.imag)
        r1, r2 = r[:self.n1], r[self.n1:]
        kind = self.kind
        if kind is Kind.LOWER_TRI:
            z1 = lu_solve(self._f11, r1)
            z2 = lu_solve(self._fs, r2 - self.sys.a21 @ z1)
        elif kind is Kind.UPPER_TRI:
            z2 = lu_solve(self._fs, r2)
            z1 = lu_solve(self._f11, r1 - self.sys.a12 @ z2)
        elif kind is Kind.LDU:
            y1 = lu_solve(self._f11, r1)
            z2 = lu_solve(self._fs, r2 - self.sys.a21 @ y1)
            z1 = y1 - lu_solve(self._f11, self.sys.a12 @ z2)
        elif kind is Kind.DIAG_PLUS:
            z1 = lu_solve(self._f11, r1)
            z2 = lu_solve(self._fs, r2)
        elif kind is Kind.DIAG_MINUS:
            z1 = lu_solve(self._f11, r1)
            z2 = -lu_solve(self._fs, r2)
        elif kind is Kind.DIAG_HAT_PLUS:
            z1 = lu_solve(self._f11, r1)
            z2 = lu_solve(self._fs, r2)
        else:  # DIAG_HAT_MINUS
            z1 = lu_solve(self._f11, r1)
            z2 = -lu_solve(self._fs, r2)
        return np.concatenate([z1, z2])

    def dense(self) -> np.ndarray:
        """Explicit dense assembly of P (tests and spectra only)."""
        sys = self.sys
        z12 = np.zeros((self.n1, self.n2))
        z21 = np.zeros((self.n2, self.n1))
        kind = self.kind
        if kind is Kind.LOWER_TRI:
            return np.block([[sys.a11, z12], [sys.a21, self._s]])
        if kind is Kind.UPPER_TRI:
            return np.block([[sys.a11, sys.a12], [z21, self._s]])
        if kind is Kind.LDU:
            s22_plus = self._s + sys.a21 @ lu_solve(self._f11, sys.a12)
            return np.block([[sys.a11, sys.a12], [sys.a21, s22_plus]])
        sign = -1.0 if kind in (Kind.DIAG_MINUS, Kind.DIAG_HAT_MINUS) else 1.0
        return np.block([[sys.a11, z12], [z21, sign * self._s]])


def make_preconditioner(sys: BlockSystem, kind: Kind,
                        schur: np.ndarray | None = None,
                        schur_factors=None) -> Preconditioner:
    """Build a preconditioner instance.

    ``schur`` substitutes the exact Schur complement for L/U/LDU/D-plus/minus
    kinds (the single hook used for approximate and lumped Schur complements);
    hat kinds always read a22.  ``schur_factors`` lets callers reuse an LU of
    the (2,2) solve block across instances with the same Schur matrix.
    """
    return Preconditioner(kind, sys, schur, schur_factors)


def apply_preconditioner(p: Preconditioner, r: np.ndarray) -> np.ndarray:
    return p.apply(r)


def apply_block(sys: BlockSystem, x: np.ndarray) -> np.ndarray:
    return sys.apply(x)
