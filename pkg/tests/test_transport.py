import numpy as np
import pytest

from blockprec.transport import (
    AngularFlux,
    ClosureBreakdownError,
    EddingtonField,
    TransportProblem,
    eddington,
    gauss_legendre,
    transport_sweep,
)


def test_gauss_legendre_moments():
    for n in [2, 4, 8, 16]:
        x, w = gauss_legendre(n)
        assert abs(w.sum() - 2.0) <= 1e-14
        assert abs((w * x).sum()) <= 1e-14
        assert abs((w * x * x).sum() - 2.0 / 3.0) <= 1e-13
        assert np.all(np.diff(x) > 0)


def test_gauss_legendre_vs_numpy():
    x, w = gauss_legendre(8)
    xr, wr = np.polynomial.legendre.leggauss(8)
    assert np.abs(x - xr).max() <= 1e-14
    assert np.abs(w - wr).max() <= 1e-14


def test_problem_validation():
    with pytest.raises(ValueError):
        TransportProblem(n_elements=0)
    with pytest.raises(ValueError):
        TransportProblem(n_elements=4, length=-1.0)
    with pytest.raises(ValueError):
        TransportProblem(n_elements=4, n_angles=5)  # odd order hits mu = 0
    p = TransportProblem(n_elements=4, sigma_t=1.0, sigma_a=2.0)
    with pytest.raises(ValueError):
        p.sigma_s_at(np.array([0.5]))


def test_homogeneous_problem_zero_flux():
    p = TransportProblem(n_elements=6, source=0.0)
    flux = transport_sweep(p, None)
    assert np.abs(flux.psi_q).max() == 0.0
    assert np.abs(flux.psi_face).max() == 0.0


def test_infinite_medium_balance():
    # constant-flux balance: psi = (sigma_s phi + Q) / (2 sigma_t) for every angle
    p = TransportProblem(n_elements=7, sigma_t=1.0, sigma_a=0.5, source=1.0)
    phi_inf = 2.0  # Q / sigma_a
    psi_const = (0.5 * phi_inf + 1.0) / 2.0
    p.psi_left = psi_const
    p.psi_right = psi_const
    flux = transport_sweep(p, np.full(p.n_flux_dofs, phi_inf))
    assert np.abs(flux.psi_q - psi_const).max() <= 1e-14
    assert np.abs(flux.psi_face - psi_const).max() <= 1e-14


def test_pure_absorber_attenuation():
    # step characteristics reproduce exp(-sigma_t x / mu) exactly at interfaces
    p = TransportProblem(n_elements=32, sigma_t=1.0, sigma_a=1.0, source=0.0,
                         psi_left=1.0)
    flux = transport_sweep(p, None)
    for d, mu in enumerate(p.mu):
        if mu <= 0:
            assert np.abs(flux.psi_face[d]).max() == 0.0
            continue
        expected = np.exp(-p.nodes / mu)
        assert np.abs(flux.psi_face[d] - expected).max() <= 1e-12


def test_eddington_isotropic_is_one_third():
    p = TransportProblem(n_elements=5, sigma_t=1.0, sigma_a=0.5, source=1.0,
                         psi_left=1.0, psi_right=1.0)
    p.psi_left = p.psi_right = 1.0
    flux = transport_sweep(p, np.full(p.n_flux_dofs, 2.0))
    e = eddington(flux)
    assert np.abs(e.values - 1.0 / 3.0).max() <= 1e-13
    assert abs(e.left - 1.0 / 3.0) <= 1e-13
    assert abs(e.right - 1.0 / 3.0) <= 1e-13


def test_eddington_beam_limit():
    p = TransportProblem(n_elements=3)
    flux = transport_sweep(p, None)
    # concentrate the flux on the most grazing ordinates
    psi_q = np.zeros_like(flux.psi_q)
    psi_q[-1] = 1.0
    psi_face = np.zeros_like(flux.psi_face)
    psi_face[-1] = 1.0
    beam = AngularFlux(psi_q, psi_face, flux.mu, flux.weights)
    e = eddington(beam)
    assert np.all(e.values > 0.9)
    assert np.all(e.values <= 1.0)


def test_eddington_two_angle_hand_value():
    # S2 with psi = (1, 3): E = mu_1^2 = 1/3 at the Gauss points +-1/sqrt(3)
    x, w = gauss_legendre(2)
    psi_q = np.array([[[1.0]], [[3.0]]])
    psi_face = np.array([[1.0, 1.0], [3.0, 3.0]])
    e = eddington(AngularFlux(psi_q, psi_face, x, w))
    assert np.abs(e.values - 1.0 / 3.0).max() <= 1e-14


def test_eddington_breakdown():
    p = TransportProblem(n_elements=3)
    flux = transport_sweep(p, None)
    zero = AngularFlux(np.zeros_like(flux.psi_q), np.zeros_like(flux.psi_face),
                       flux.mu, flux.weights)
    with pytest.raises(ClosureBreakdownError):
        eddington(zero)


def test_sweep_rejects_bad_flux_shape():
    p = TransportProblem(n_elements=3)
    with pytest.raises(ValueError):
        transport_sweep(p, np.zeros(5))


def test_isotropic_field_constructor():
    e = EddingtonField.isotropic(4)
    assert e.values.shape == (4, 4)
    assert np.all(e.values == 1.0 / 3.0)
