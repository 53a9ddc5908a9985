import numpy as np
import pytest

from fourbody.errors import OutOfRange
from fourbody.hamiltonians import (
    SecularModel,
    TermParams,
    grad_h0_12,
    h0_12,
    hamilton_field,
)
from fourbody.separatrix import (
    gamma1_sq_integral_closed,
    gamma1_sq_integral_numeric,
    h012_flow,
    phase_shift_gamma2,
    phase_shift_psi1,
    phase_shift_psi1_numeric,
    saddle,
    separatrix_point,
    separatrix_relation,
    shadow_separatrix,
)

G_EDGE = np.sqrt(3.0 / 5.0)


def test_saddle_constants():
    sd = saddle(0.3, 1.0)
    assert sd.gamma1_max == np.pi - sd.gamma1_min
    assert np.sin(sd.gamma1_min) ** 2 == pytest.approx(2.0 / (5.0 * (1 - 0.09)), rel=1e-14)
    small = saddle(1e-8, 1.0)
    assert np.sin(small.gamma1_min) ** 2 == pytest.approx(0.4, rel=1e-12)
    assert small.chi < 1e-7
    assert saddle(G_EDGE * (1 - 1e-10), 1.0).A2 < 1e-4


@pytest.mark.parametrize("G2", [0.0, G_EDGE, 0.9, -0.1])
def test_saddle_out_of_range(G2):
    with pytest.raises(OutOfRange):
        saddle(G2, 1.0)


@pytest.mark.parametrize("G2", np.linspace(0.02, 0.75, 20))
def test_energy_pinned_on_curve(G2):
    sd = saddle(G2, 1.0)
    t = np.linspace(-10 / sd.A2, 10 / sd.A2, 1000)
    p = separatrix_point(t, G2, 0.4, 1.0)
    assert np.max(np.abs(h0_12(p.gamma1, p.Gamma1, G2, 1.0) - sd.energy)) < 1e-12
    assert np.max(np.abs(separatrix_relation(p.gamma1, p.Gamma1, G2) - 0.4)) < 1e-12


def test_curve_endpoints():
    G2 = 0.3
    sd = saddle(G2, 1.0)
    p0 = separatrix_point(0.0, G2, 0.0, 1.0)
    assert p0.gamma1 == pytest.approx(np.pi / 2, abs=1e-15)
    assert p0.Gamma1 == pytest.approx(G2 * np.sqrt(5 / 3), rel=1e-15)
    far = separatrix_point(np.array([-40.0, 40.0]) / sd.A2, G2, 0.0, 1.0)
    assert np.allclose(far.Gamma1, 1.0, atol=1e-12)
    assert np.allclose(far.gamma1, [sd.gamma1_max, sd.gamma1_min], atol=1e-12)


def test_phase_is_odd_with_bounded_limits():
    G2 = 0.25
    sd = saddle(G2, 1.0)
    t = np.linspace(0.1, 30, 50) / sd.A2
    lin = 2 * G2 * t
    up = separatrix_point(t, G2, 0.0, 1.0).gamma2 - lin
    dn = separatrix_point(-t, G2, 0.0, 1.0).gamma2 + lin
    assert np.allclose(up, -dn, atol=1e-15)
    assert up[-1] == pytest.approx(np.arctan(1 / sd.chi), abs=1e-12)


def test_closed_form_satisfies_hamilton_equations():
    G2, L1 = 0.35, 1.0
    sd = saddle(G2, L1)
    t = np.linspace(-4, 4, 41) / sd.A2
    h = 1e-5 / sd.A2
    p = separatrix_point(t, G2, 0.0, L1)
    pp, pm = separatrix_point(t + h, G2, 0.0, L1), separatrix_point(t - h, G2, 0.0, L1)
    dg, dG, dT = h012_flow(p.gamma1, p.Gamma1, G2, L1)
    assert np.max(np.abs((pp.gamma1 - pm.gamma1) / (2 * h) - dg)) < 1e-7
    assert np.max(np.abs((pp.Gamma1 - pm.Gamma1) / (2 * h) - dG)) < 1e-7
    assert np.max(np.abs((pp.gamma2 - pm.gamma2) / (2 * h) - dT)) < 1e-7


def test_flow_fixed_points_and_model_consistency():
    sd = saddle(0.3, 1.0)
    assert np.allclose(h012_flow(sd.gamma1_min, 1.0, 0.3, 1.0)[:2], 0.0, atol=1e-14)
    assert h012_flow(np.pi / 2, 0.6, 0.3, 1.0)[1] == pytest.approx(0.0, abs=1e-15)
    model = SecularModel([("H0_12", 1.0)], TermParams(0.5, 0.5, 0.2, 1.0))
    v = np.array([1.1, 0.7, 0.4, 0.3, 0.0, 0.0, 0.0, 0.0])
    f = hamilton_field(model, v)
    a, b, c = h012_flow(1.1, 0.7, 0.3, 1.0)
    assert np.allclose([f[0], f[1], f[2]], [a, b, c], atol=1e-12)
    assert np.allclose(grad_h0_12(1.1, 0.7, 0.3, 1.0)[0], -b)


@pytest.mark.parametrize("G2", [0.1, 0.4, 0.7])
def test_numerical_flow_shadows_curve(G2):
    err, *_ = shadow_separatrix(G2, 1.0)
    assert err < 1e-6


def test_gamma1_sq_integral(frozen):
    ref = frozen["separatrix"]
    for G2, val in zip(ref["Gamma2"], ref["gamma1_sq_integral"]):
        assert gamma1_sq_integral_closed(G2, 1.0) == pytest.approx(val, rel=1e-12)
        assert abs(gamma1_sq_integral_numeric(G2, 1.0) - val) < 1e-9


@pytest.mark.parametrize("G2", [0.05, 0.3, 0.6, 0.77])
def test_psi_phase_shift(G2):
    assert abs(phase_shift_psi1(G2, 1.3, 0.7) - phase_shift_psi1_numeric(G2, 1.3, 0.7)) < 1e-8


def test_phase_shift_limits():
    assert phase_shift_psi1(1e-9, 1.0) < 1e-9
    assert phase_shift_psi1(G_EDGE * (1 - 1e-12), 1.0) < 1e-6
    assert phase_shift_gamma2(1e-9, 1.0) == pytest.approx(np.pi, abs=1e-8)
