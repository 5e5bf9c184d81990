"""Block preconditioning of 2x2 block linear systems.

Library and CLI for building, applying, and analyzing block-diagonal,
block-triangular, and block-LDU preconditioners with exact or approximate
Schur complements, plus a 1D discrete-ordinates transport application.
"""

from .linalg import (
    DimensionError,
    EigenConvergenceError,
    LUFactors,
    SingularMatrixError,
    eigenvalues_dense,
    lu_factor,
    lu_solve,
    rank_and_nullspace,
    symmetric_eigenvalues,
)
from .rng import random_uniform_matrix

__version__ = "0.1.0"
