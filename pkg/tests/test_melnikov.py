import numpy as np
import pytest

from fourbody.melnikov import (
    critical_times,
    kappa,
    kappa_at,
    l2_12_coefficient,
    melnikov_curve,
    melnikov_L1_numeric,
    melnikov_L2_12,
    melnikov_L2_12_numeric,
    melnikov_L2_23,
    melnikov_L2_23_numeric,
    melnikov_L5_23,
)
from fourbody.separatrix import saddle

G_EDGE = np.sqrt(3.0 / 5.0)


def test_kappa_limits_and_monotone():
    assert kappa(0.0, 0.4, 1.0) == 0.0
    assert kappa(80.0, 0.4, 1.0) == pytest.approx(np.sqrt(2 / 3) / 0.4, rel=1e-14)
    x = np.linspace(1e-6, 30, 2000)
    k = kappa(x, 0.4, 1.0)
    assert np.all(np.diff(k) > 0) and np.all(k > 0)
    # series branch joins the direct branch smoothly
    assert kappa(1.0001e-4, 0.4, 1.0) == pytest.approx(kappa(0.9999e-4, 0.4, 1.0), rel=1e-3)


def test_kappa_matches_independent_quadrature(frozen):
    for G2, val in zip(frozen["kappa"]["Gamma2"], frozen["kappa"]["value"]):
        assert kappa_at(G2, 1.0) == pytest.approx(val, rel=1e-10)


@pytest.mark.parametrize("G2", np.linspace(0.05, 0.75, 20) * G_EDGE)
def test_first_potential_real_axis_quadrature(G2):
    L = melnikov_L1_numeric(G2, 1.0)
    assert abs(L.real - 0.5 * kappa_at(G2, 1.0)) < 1e-7
    assert abs(L.imag) < 1e-9


def test_contour_shift_factor():
    G2, L1 = 0.3, 1.0
    sd = saddle(G2, L1)
    w = 2 * G2 / (sd.A2 * L1**2)
    tau = np.array([0.3, -1.2, 2.0]) + 0.1j
    for s in (+1, -1):
        f = lambda z: (np.tanh(z) - s) * np.exp(1j * w * z)
        assert np.allclose(f(tau + 1j * np.pi), np.exp(-np.pi * w) * f(tau), rtol=1e-12)


def test_L2_23_closed_form_values():
    assert melnikov_L2_23(0.0, np.pi / 2, 0.3, 0.5, 1.0) == pytest.approx(0.0, abs=1e-16)
    g3 = 2 * np.pi * np.arange(32) / 32
    vals = melnikov_L5_23(0.7, 1.1, g3, 0.3, 0.5, 0.2, 1.0)
    assert abs(np.mean(vals)) < 1e-12 * np.max(np.abs(vals))


def test_outer_potentials_zero_mean_on_grid():
    g = 2 * np.pi * np.arange(8) / 8
    a = melnikov_L2_23(g[:, None], g[None, :], 0.3, 0.5, 1.0)
    b = melnikov_L5_23(g[:, None], g[None, :], 0.4, 0.3, 0.5, 0.2, 1.0)
    assert abs(a.mean()) < 1e-12 and abs(b.mean()) < 1e-12


def test_octupole_matches_independent_quadrature(frozen):
    ref = frozen["octupole"]
    for g0, val in zip(ref["gamma2_0"], ref["value"]):
        assert melnikov_L2_12(g0, ref["Gamma2"], 1.0) == pytest.approx(val, abs=1e-10)
        assert melnikov_L2_12_numeric(g0, ref["Gamma2"], 1.0) == pytest.approx(val, abs=1e-8)


def test_octupole_coefficient_keeps_sign():
    G = np.linspace(0.01, 0.999, 60) * G_EDGE
    c = np.array([l2_12_coefficient(x, 1.0) for x in G])
    assert np.all(c > 0)
    assert melnikov_L2_12(0.0, 0.3, 1.0) == 0.0


@pytest.mark.parametrize("name", ["L2_23", "L5_23", "L2_12"])
@pytest.mark.parametrize("G2", [0.1, 0.45])
def test_direct_quadrature_matches_closed_form(name, G2):
    curve = melnikov_curve(name, G2, 1.0, n=8)
    assert curve.relative_deviation < 1e-6
    assert curve.numeric.shape == curve.closed.shape


def test_truncation_insensitive():
    sd = saddle(0.3, 1.0)
    a = melnikov_L2_23_numeric(0.4, 0.9, 0.3, 0.5, 1.0, T=40 / sd.A2)
    b = melnikov_L2_23_numeric(0.4, 0.9, 0.3, 0.5, 1.0, T=80 / sd.A2)
    assert abs(a - b) < 1e-10


def test_critical_times():
    G2, L1 = 0.3, 1.0
    w0 = 2 * G2 / L1**2
    tp, tm = critical_times(0.0, G2, L1)
    assert w0 * tp == pytest.approx(np.pi / 2) and w0 * tm == pytest.approx(-np.pi / 2)
    tp2, _ = critical_times(2 * np.pi, G2, L1)
    assert tp2 - tp == pytest.approx(2 * np.pi / w0)
    g2 = 0.7
    f = lambda tau: melnikov_L2_12(g2 - w0 * tau, G2, L1)
    h = 1e-4
    for tau in critical_times(g2, G2, L1):
        assert abs(f(tau + h) - f(tau - h)) / (2 * h) < 1e-7
        assert abs(f(tau + h) - 2 * f(tau) + f(tau - h)) / h**2 > 1e-3
    with pytest.raises(ValueError):
        critical_times(0.0, 0.0, 1.0)


def test_curve_csv(tmp_path):
    curve = melnikov_curve("L2_12", 0.3, 1.0, n=4)
    path = tmp_path / "c.csv"
    curve.write_csv(str(path))
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# ") and lines[1] == "gamma2,numeric,closed,abs_dev"
    assert len(lines) == 6
