import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xyqst import ModelParams, build_quadratic_form, diagonalize
from xyqst.freefermion import (Propagators, _spectral_propagators, endpoint_amplitudes, ground_energy,
                               many_body_spectrum, propagator_derivative, propagators)
from xyqst.model import QuadraticForm
from xyqst.oracle import dense_spectrum, heisenberg_amplitudes

from strategies import model_params


def _solve(params):
    form = build_quadratic_form(params)
    return form, diagonalize(form)


@settings(max_examples=60, deadline=None)
@given(model_params(max_sites=16))
def test_solution_is_canonical_and_reconstructs(params):
    form, sol = _solve(params)
    assert sol.canonicity_error() < 1e-10
    assert np.all(sol.energies >= 0) and np.all(np.diff(sol.energies) >= 0)
    P, Q = sol.reconstruct()
    np.testing.assert_allclose(P, form.hopping, atol=1e-9)
    np.testing.assert_allclose(Q, form.pairing, atol=1e-9)


def test_isotropic_case_is_plain_eigenproblem():
    params = ModelParams(8, 3, 1.2, 0.0, 0.4)
    form, sol = _solve(params)
    np.testing.assert_allclose(sol.energies, np.sort(np.abs(np.linalg.eigvalsh(form.hopping))), atol=1e-12)
    # no pairing: each quasiparticle is a pure particle or a pure hole
    mixed = (np.abs(sol.amp_a).sum(1) > 1e-10) & (np.abs(sol.amp_b).sum(1) > 1e-10)
    assert not mixed.any()


def test_uniform_nearest_neighbour_chain():
    form, sol = _solve(ModelParams(10, 1, 0.0, 0.0, 0.0))
    np.testing.assert_allclose(sol.energies, np.sort(np.abs(np.linalg.eigvalsh(form.hopping))), atol=1e-12)
    k = np.arange(1, 11)
    np.testing.assert_allclose(sol.energies, np.sort(np.abs(np.cos(np.pi * k / 11))), atol=1e-12)


def test_decoupled_field_only_form():
    form = QuadraticForm(-1.3 * np.eye(3), np.zeros((3, 3)), 1.95)
    sol = diagonalize(form)
    np.testing.assert_allclose(sol.energies, 1.3)


@pytest.mark.parametrize("params", [
    ModelParams(6, 2, 1.5, 0.7, 0.4),
    ModelParams(6, 3, 0.5, 1.0, 1.7),
    ModelParams(5, 4, 0.0, 1.3, -0.6, 1.7),
])
def test_many_body_spectrum_matches_dense(params):
    form, sol = _solve(params)
    np.testing.assert_allclose(many_body_spectrum(sol, form), dense_spectrum(params), atol=1e-10)


def test_ground_energy_is_lowest_level():
    params = ModelParams(7, 3, 1.0, 0.6, 0.9)
    form, sol = _solve(params)
    assert ground_energy(sol, form) == pytest.approx(dense_spectrum(params)[0], abs=1e-10)


def test_spectrum_enumeration_guard():
    form, sol = _solve(ModelParams(22, 1))
    with pytest.raises(ValueError):
        many_body_spectrum(sol, form)


def test_initial_propagators():
    _, sol = _solve(ModelParams(9, 4, 0.8, 0.9, 1.1))
    prop = propagators(sol, 0.0)
    np.testing.assert_allclose(prop.phi, np.eye(9), atol=1e-12)
    np.testing.assert_allclose(prop.psi, 0.0, atol=1e-12)


def test_negative_time_rejected():
    _, sol = _solve(ModelParams(4))
    with pytest.raises(ValueError):
        propagators(sol, -1.0)


def test_derivative_against_finite_difference():
    params = ModelParams(8, 3, 1.1, 0.8, 0.5)
    form, sol = _solve(params)
    h = 1e-5
    for t in (0.0, 2.3):
        dphi, dpsi = propagator_derivative(sol, t)
        plus, minus = _spectral_propagators(sol, t + h), _spectral_propagators(sol, t - h)
        np.testing.assert_allclose(dphi, (plus.phi - minus.phi) / (2 * h), atol=1e-7)
        np.testing.assert_allclose(dpsi, (plus.psi - minus.psi) / (2 * h), atol=1e-7)
    dphi0, dpsi0 = propagator_derivative(sol, 0.0)
    np.testing.assert_allclose(dphi0, -1j * form.hopping, atol=1e-10)
    np.testing.assert_allclose(dpsi0, -1j * form.pairing, atol=1e-10)


@settings(max_examples=50, deadline=None)
@given(model_params(max_sites=14), st.floats(0.0, 200.0))
def test_evolution_stays_canonical(params, t):
    _, sol = _solve(params)
    prop = propagators(sol, t)
    assert prop.unitarity_error() < 1e-10
    # the anomalous part must also respect {f_i(t), f_j(t)} = 0
    anti = prop.phi @ prop.psi.T + prop.psi @ prop.phi.T
    assert np.abs(anti).max() < 1e-10


@settings(max_examples=30, deadline=None)
@given(model_params(max_sites=10), st.floats(0.0, 20.0), st.floats(0.0, 20.0))
def test_composition_law(params, t1, t2):
    _, sol = _solve(params)
    a, b = propagators(sol, t1).full_matrix(), propagators(sol, t2).full_matrix()
    np.testing.assert_allclose(b @ a, propagators(sol, t1 + t2).full_matrix(), atol=1e-9)


def test_time_reversal():
    _, sol = _solve(ModelParams(7, 2, 1.0, 0.5, 0.2))
    fwd = _spectral_propagators(sol, 3.0).full_matrix()
    back = _spectral_propagators(sol, -3.0).full_matrix()
    np.testing.assert_allclose(back @ fwd, np.eye(14), atol=1e-10)


def test_degenerate_spectrum_propagators_are_basis_independent():
    # g = 0 isotropic chain of even length has a +-eps pair folded into a doubly degenerate level
    params = ModelParams(6, 1, 0.0, 0.0, 0.0)
    form, sol = _solve(params)
    t = 1.7
    w, v = np.linalg.eigh(form.hopping)
    exact = v @ np.diag(np.exp(-1j * w * t)) @ v.T
    np.testing.assert_allclose(propagators(sol, t).phi, exact, atol=1e-12)


def test_endpoint_amplitudes_match_full_propagators():
    _, sol = _solve(ModelParams(11, 5, 0.9, 0.7, 1.2))
    times = np.linspace(0, 30, 7)
    phi, psi = endpoint_amplitudes(sol, times)
    for t, a, b in zip(times, phi, psi):
        prop = propagators(sol, t)
        assert a == pytest.approx(prop.phi[-1, 0], abs=1e-12)
        assert b == pytest.approx(prop.psi[-1, 0], abs=1e-12)


@pytest.mark.parametrize("t", [3.7, 5.0])
def test_amplitudes_match_dense_heisenberg_evolution(t):
    params = ModelParams(6, 2, 1.5, 0.7, 0.4)
    _, sol = _solve(params)
    prop = propagators(sol, t)
    phi, psi = heisenberg_amplitudes(params, t)
    assert abs(prop.phi[-1, 0] - phi) < 1e-9
    assert abs(prop.psi[-1, 0] - psi) < 1e-9


def test_full_matrix_layout():
    prop = Propagators(0.0, np.eye(2, dtype=complex), np.zeros((2, 2), dtype=complex))
    np.testing.assert_array_equal(prop.full_matrix(), np.eye(4))
