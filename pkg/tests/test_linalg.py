import numpy as np
import pytest

from blockprec.linalg import (
    DimensionError,
    EigenConvergenceError,
    SingularMatrixError,
    eigenvalues_dense,
    hausdorff_distance,
    is_conjugate_closed,
    lu_factor,
    lu_solve,
    multiset_distance,
    rank_and_nullspace,
    symmetric_eigenvalues,
)
from blockprec.rng import random_uniform_matrix


def well_conditioned(n, seed, shift=3.0):
    return random_uniform_matrix(n, n, -1.0, 1.0, seed) + shift * np.eye(n)


def reconstruct(f):
    n = f.n
    low = np.tril(f.lu, -1) + np.eye(n)
    return low @ np.triu(f.lu)


# -- LU ---------------------------------------------------------------------

def test_lu_identity():
    f = lu_factor(np.eye(3))
    assert not f.singular
    assert f.sign == 1
    assert np.array_equal(f.perm, np.arange(3))
    assert np.array_equal(f.lu, np.eye(3))


def test_lu_permutation_swap_sign():
    f = lu_factor(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert f.sign == -1
    assert not f.singular
    assert np.array_equal(f.perm, np.array([1, 0]))


def test_lu_reconstruction_seeded():
    a = random_uniform_matrix(50, 50, -1.0, 1.0, seed=42)
    f = lu_factor(a)
    err = np.abs(a[f.perm] - reconstruct(f)).max()
    assert err <= 1e-12 * np.abs(a).max()


@pytest.mark.parametrize("n", [90, 97, 130, 260])
def test_lu_blocked_path_reconstruction(n):
    # sizes straddling the blocking threshold share pivoting semantics
    a = well_conditioned(n, seed=n)
    f = lu_factor(a)
    err = np.abs(a[f.perm] - reconstruct(f)).max()
    assert err <= 1e-11 * np.abs(a).max()


def test_lu_solve_identity_and_diagonal():
    f = lu_factor(np.eye(4))
    b = np.arange(4.0)
    assert np.array_equal(lu_solve(f, b), b)
    f = lu_factor(np.diag([2.0, 4.0]))
    assert np.allclose(lu_solve(f, np.array([2.0, 4.0])), [1.0, 1.0])


def test_lu_solve_residual_and_matrix_rhs():
    a = well_conditioned(50, seed=3)
    f = lu_factor(a)
    b = random_uniform_matrix(50, 4, -1.0, 1.0, seed=4)
    x = lu_solve(f, b)
    assert np.abs(a @ x - b).max() <= 1e-10 * np.abs(a).max() * np.abs(x).max()


def test_lu_roundtrip_property():
    # 100 seeded well-conditioned systems up to n = 100
    for seed in range(100):
        n = 2 + (seed * 7) % 99
        a = well_conditioned(n, seed)
        f = lu_factor(a)
        b = random_uniform_matrix(n, 1, -1.0, 1.0, seed + 1000)[:, 0]
        x = lu_solve(f, b)
        norm_x = max(np.abs(x).max(), 1e-300)
        assert np.abs(a @ x - b).max() <= 1e-9 * np.abs(a).max() * norm_x


def test_lu_solve_complex_rhs():
    a = well_conditioned(12, seed=6)
    f = lu_factor(a)
    b = (random_uniform_matrix(12, 1, -1.0, 1.0, 7)[:, 0]
         + 1j * random_uniform_matrix(12, 1, -1.0, 1.0, 8)[:, 0])
    x = lu_solve(f, b)
    assert np.abs(a @ x - b).max() <= 1e-11


def test_lu_singular_flag_and_solve_refusal():
    f = lu_factor(np.array([[1.0, 2.0], [2.0, 4.0]]))
    assert f.singular
    with pytest.raises(SingularMatrixError):
        lu_solve(f, np.ones(2))


def test_lu_shape_errors():
    with pytest.raises(DimensionError):
        lu_factor(np.ones((2, 3)))
    f = lu_factor(np.eye(3))
    with pytest.raises(DimensionError):
        lu_solve(f, np.ones(4))


def test_lu_rejects_nonfinite():
    with pytest.raises(ValueError):
        lu_factor(np.array([[1.0, np.nan], [0.0, 1.0]]))


# -- eigenvalues ------------------------------------------------------------

def test_eigenvalues_diagonal():
    vals = eigenvalues_dense(np.diag([1.0, 2.0, 3.0]))
    assert np.allclose(vals, [1.0, 2.0, 3.0])


def test_eigenvalues_rotation_generator():
    vals = eigenvalues_dense(np.array([[0.0, -1.0], [1.0, 0.0]]))
    assert np.allclose(sorted(vals, key=lambda z: z.imag), [-1j, 1j])


def test_eigenvalues_2x2_charpoly():
    # trace 4, det 1 -> 2 +/- sqrt(3)
    vals = np.sort(eigenvalues_dense(np.array([[1.0, 1.0], [2.0, 3.0]])).real)
    assert np.allclose(vals, [2.0 - np.sqrt(3.0), 2.0 + np.sqrt(3.0)], atol=1e-12)


def charpoly_roots(a):
    n = a.shape[0]
    if n == 2:
        tr = a[0, 0] + a[1, 1]
        det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        disc = np.sqrt(complex(tr * tr - 4.0 * det))
        return np.array([(tr + disc) / 2.0, (tr - disc) / 2.0])
    # cubic via companion-free closed form (numpy roots as the test oracle)
    c2 = -np.trace(a)
    c1 = 0.5 * (np.trace(a) ** 2 - np.trace(a @ a))
    c0 = -np.linalg.det(a)
    return np.roots([1.0, c2, c1, c0])


@pytest.mark.parametrize("seed", range(12))
@pytest.mark.parametrize("n", [2, 3])
def test_eigenvalues_vs_characteristic_polynomial(n, seed):
    a = np.round(random_uniform_matrix(n, n, -3.0, 3.0, seed) * 2.0) / 2.0
    mine = eigenvalues_dense(a)
    ref = charpoly_roots(a)
    assert multiset_distance(mine, ref) <= 1e-10


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_eigenvalues_similarity_invariance(seed):
    n = 6 + 8 * seed  # up to 30
    a = random_uniform_matrix(n, n, -1.0, 1.0, seed)
    t = well_conditioned(n, seed + 50)
    f = lu_factor(t)
    b = lu_solve(f, a @ t)  # t^{-1} a t
    assert multiset_distance(eigenvalues_dense(a), eigenvalues_dense(b)) <= 1e-8


def test_eigenvalues_symmetric_input_real():
    for n in [5, 30, 80]:
        r = random_uniform_matrix(n, n, -1.0, 1.0, 3 * n)
        a = r + r.T
        vals = eigenvalues_dense(a)
        assert np.abs(vals.imag).max() <= 1e-10 * np.abs(a).max()


def test_eigenvalues_conjugate_closure():
    for seed in range(8):
        a = random_uniform_matrix(11, 11, -1.0, 1.0, seed)
        assert is_conjugate_closed(eigenvalues_dense(a))


def test_eigenvalues_vs_lapack_oracle():
    for seed, n in [(0, 7), (1, 23), (2, 61)]:
        a = random_uniform_matrix(n, n, -1.0, 1.0, seed)
        assert multiset_distance(eigenvalues_dense(a),
                                 np.linalg.eigvals(a)) <= 1e-9


def test_eigenvalues_nonconvergence_reports_window():
    a = random_uniform_matrix(8, 8, -1.0, 1.0, seed=5)
    with pytest.raises(EigenConvergenceError) as exc:
        eigenvalues_dense(a, max_sweeps=0)
    assert exc.value.hi >= exc.value.lo


def test_symmetric_eigenvalues_vs_general_path():
    r = random_uniform_matrix(40, 40, -1.0, 1.0, 9)
    a = r + r.T
    fast = symmetric_eigenvalues(a)
    general = np.sort(eigenvalues_dense(a).real)
    assert np.abs(fast - general).max() <= 1e-9 * np.abs(a).max()
    assert np.abs(fast - np.linalg.eigvalsh(a)).max() <= 1e-10 * np.abs(a).max()


# -- rank and nullspace -----------------------------------------------------

def test_rank_zero_matrix():
    rank, basis = rank_and_nullspace(np.zeros((3, 3)))
    assert rank == 0
    assert np.array_equal(basis, np.eye(3))


def test_rank_identity():
    rank, basis = rank_and_nullspace(np.eye(3))
    assert rank == 3
    assert basis.shape == (3, 0)


def test_rank_one_example():
    rank, basis = rank_and_nullspace(np.array([[1.0, 2.0], [2.0, 4.0]]))
    assert rank == 1
    v = np.array([2.0, -1.0]) / np.sqrt(5.0)
    assert abs(abs(basis[:, 0] @ v) - 1.0) <= 1e-12


@pytest.mark.parametrize("seed", range(15))
def test_rank_plus_nullity_and_basis_quality(seed):
    m = 3 + seed % 5 * 6
    n = 3 + (seed * 3) % 25
    r_true = min(m, n) * (seed % 3) // 2
    if r_true == 0:
        a = np.zeros((m, n))
    else:
        a = (random_uniform_matrix(m, r_true, -1.0, 1.0, seed)
             @ random_uniform_matrix(r_true, n, -1.0, 1.0, seed + 100))
    rank, basis = rank_and_nullspace(a)
    assert rank == r_true
    assert rank + basis.shape[1] == n
    if basis.size:
        assert np.abs(basis.T @ basis - np.eye(n - rank)).max() <= 1e-12
        norm_a = max(np.abs(a).max(), 1.0)
        assert np.abs(a @ basis).max() <= 1e-9 * norm_a


def test_rank_tol_scale_validation():
    with pytest.raises(ValueError):
        rank_and_nullspace(np.eye(2), tol_scale=0.0)


# -- multiset helpers -------------------------------------------------------

def test_multiset_and_hausdorff_helpers():
    assert multiset_distance([1.0, 2.0], [2.0, 1.0]) == 0.0
    with pytest.raises(DimensionError):
        multiset_distance([1.0], [1.0, 2.0])
    assert hausdorff_distance([1 + 1j], [1 + 1j, 1 + 1j]) == 0.0
    assert abs(hausdorff_distance([0.0], [3.0 + 4.0j]) - 5.0) <= 1e-15
    assert not is_conjugate_closed([1 + 2j, 3.0])
