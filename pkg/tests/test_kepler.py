import numpy as np
import pytest

from fourbody.errors import DomainError, NonElliptic
from fourbody.kepler import (
    EllipseElements,
    action_from_elements,
    elements_from_state,
    kepler_energy,
    kepler_residual,
    planar_state,
    semimajor_axis_from_action,
    solve_kepler,
    true_anomaly,
    wrap_angle,
)


def test_solver_matches_bisection(frozen):
    E = solve_kepler(0.5, 1.0)
    assert abs(E - frozen["kepler"]["E_e05_l1"]) < 1e-13


def test_solver_residual_on_grid():
    e = np.linspace(0.0, 0.99, 100)[:, None]
    ell = np.linspace(-10, 10, 201)[None, :]
    E = solve_kepler(e, ell)
    assert np.max(np.abs(kepler_residual(e, ell, E))) < 1e-13


def test_circular_orbit_is_identity():
    ell = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    assert np.allclose(solve_kepler(0.0, ell), ell, atol=1e-15)


def test_rejects_bad_eccentricity():
    for e in (1.0, -0.1, 1.5, np.nan):
        with pytest.raises(DomainError):
            solve_kepler(e, 0.3)


def test_true_anomaly_second_law(frozen):
    v = true_anomaly(0.5, 1.0)
    assert abs(v - frozen["kepler"]["v_e05_l1"]) < 1e-12


def test_vis_viva():
    el = EllipseElements(1.0, 0.3, 0.7)
    q, p = planar_state(el, 1.0, 1.0)
    assert abs(kepler_energy(q, p, 1.0, 1.0) + 0.5) < 1e-14


def test_action_round_trip():
    a = np.array([0.3, 1.0, 25.0])
    L = action_from_elements(a, 2e-3, 1.7)
    assert np.allclose(semimajor_axis_from_action(L, 2e-3, 1.7), a, rtol=1e-14)


@pytest.mark.parametrize("e", [0.0, 0.1, 0.6, 0.95])
def test_state_elements_round_trip(e):
    el = EllipseElements(2.5, e, 2.0)
    q, p = planar_state(el, 0.3, 1.3)
    out = elements_from_state(np.r_[q, 0.0], np.r_[p, 0.0], 0.3, 1.3)
    assert abs(out["a"] - 2.5) < 1e-12
    assert abs(out["e"] - e) < 1e-12
    if e > 0:
        assert abs(np.angle(np.exp(1j * (out["mean_anomaly"] - 2.0)))) < 1e-10


def test_unbound_state_rejected():
    with pytest.raises(NonElliptic):
        elements_from_state(np.array([1.0, 0, 0]), np.array([0, 2.0, 0]), 1.0, 1.0)


def test_wrap_angle_range():
    x = wrap_angle(np.array([-1e-300, -7.0, 0.0, 13.0]))
    assert np.all((x >= 0) & (x < 2 * np.pi))
