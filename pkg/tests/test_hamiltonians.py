import itertools

import numpy as np
import pytest

from fourbody.errors import DomainError, NumericalError
from fourbody.frames import (
    convert,
    deprit_to_tilde,
    derive_masses,
    jacobi_to_deprit,
    jacobian_fd,
)
from fourbody.hamiltonians import (
    TERMS,
    AverageSpec,
    SecularModel,
    TermParams,
    average_2angles,
    average_2angles_adaptive,
    closed_form_inputs,
    f_kep,
    f_oct12_closed,
    f_per_exact,
    f_per_legendre,
    f_per_pair_exact,
    f_quad12_closed,
    grad_h0_12,
    h0_12,
    h2_23,
    h3_23,
    kbar_coefficients,
    kepler_energies_jacobi,
    nu_constants,
    pair_integrand,
    reduced_hamiltonian,
    secular_value_and_gradient,
    term_gradient,
    term_value,
)
from fourbody.simulate import OrbitElements, hierarchical_state

from .conftest import random_system


def _oracle_state(case):
    m = derive_masses(1.0, 1e-3, 1e-3, 1e-3)
    inner = OrbitElements(**case["inner"], mean_anomaly=0.0)
    outer = OrbitElements(**case["outer"], mean_anomaly=0.0)
    cart = hierarchical_state(m, [inner, outer, OrbitElements(1000.0, 0.1, 0.3, 1.0, 1.0, 0.0)])
    return m, convert(cart, "deprit", m)


def test_kepler_energy_matches_jacobi_side(system):
    m, _, jac = system
    d = jacobi_to_deprit(jac, m)
    assert abs(f_kep(d, m) - kepler_energies_jacobi(jac, m).sum()) < 1e-12 * abs(f_kep(d, m))


def test_kepler_energy_scaling(system):
    m, _, jac = system
    d = jacobi_to_deprit(jac, m)
    d2 = d.__class__.from_vector(d.vector())
    d2.L[:] *= 2.0
    assert np.isclose(f_kep(d2, m), f_kep(d, m) / 4.0, rtol=1e-14)


@pytest.mark.parametrize("seed", range(10))
def test_full_hamiltonian_splits(seed):
    m, cart, jac = random_system(seed)
    H = reduced_hamiltonian(cart, m)
    split = kepler_energies_jacobi(jac, m).sum() + f_per_exact(jac, m)
    assert abs(H - split) < 1e-12 * abs(H)


def test_perturbation_is_small_for_hierarchy(system):
    m, _, jac = system
    assert abs(f_per_exact(jac, m)) < 1e-2 * abs(kepler_energies_jacobi(jac, m).sum())


def test_legendre_series_converges_geometrically():
    m = derive_masses(1.0, 1e-3, 2e-3, 3e-3)
    q = np.zeros((4, 3))
    q[1] = [1.0, 0.2, 0.1]
    q[2] = [3.0, 9.5, 1.0]
    q[3] = [200.0, -40.0, 10.0]
    p = np.zeros((4, 3))
    from fourbody.frames import JacobiState

    jac = JacobiState(q, p)
    exact = f_per_pair_exact(12, jac, m)
    errs = [abs(f_per_legendre(12, jac, m, n)[0] - exact) for n in range(2, 9)]
    ratio = np.linalg.norm(q[1]) / np.linalg.norm(q[2])
    assert errs[-1] < errs[0] * ratio**5
    assert all(b < a for a, b in itertools.pairwise(errs))


def test_legendre_quadrupole_vanishes_at_root():
    m = derive_masses(1.0, 1e-3, 2e-3, 3e-3)
    from fourbody.frames import JacobiState

    q = np.zeros((4, 3))
    c = 1.0 / np.sqrt(3.0)
    q[1] = [c, np.sqrt(1 - c * c), 0.0]
    q[2] = [10.0, 0.0, 0.0]
    q[3] = [0.0, 0.0, 300.0]
    _, terms = f_per_legendre(12, JacobiState(q, np.zeros((4, 3))), m, 4)
    assert abs(terms[2]) < 1e-18


def test_legendre_rejects_crossed_orbits():
    m = derive_masses(1.0, 1e-3, 2e-3, 3e-3)
    from fourbody.frames import JacobiState

    q = np.zeros((4, 3))
    q[1] = [5.0, 0, 0]
    q[2] = [1.0, 0, 0]
    q[3] = [100.0, 0, 0]
    with pytest.raises(DomainError):
        f_per_legendre(12, JacobiState(q, np.zeros((4, 3))), m, 3)


def test_average_trivial_integrands():
    spec = AverageSpec(32, 32)
    assert average_2angles(lambda a, b: 3.5 + 0 * a * b, spec) == pytest.approx(3.5, abs=1e-15)
    assert abs(average_2angles(lambda a, b: np.cos(a) + 0 * b, spec)) < 1e-14
    with pytest.raises(NumericalError), np.errstate(divide="ignore"):
        average_2angles(lambda a, b: 1.0 / np.sin(a) + 0 * b, spec)
    with pytest.raises(DomainError):
        AverageSpec(4, 64)


@pytest.mark.parametrize("k", range(3))
def test_averages_match_independent_quadrature(frozen, k):
    case = frozen["averages"][k]
    m, d = _oracle_state(case)
    x = closed_form_inputs(d, m)
    quad = f_quad12_closed(x["e1"], x["e2"], x["gamma1"], x["i12"], x["a1"], x["a2"])
    oct_ = f_oct12_closed(x["e1"], x["e2"], x["gamma1"], x["gamma2"], x["i12"], x["a1"], x["a2"])
    assert abs(quad - case["P2"]) < 1e-10 * abs(case["P2"])
    assert abs(oct_ - case["P3"]) < 1e-9 * abs(case["P3"])
    val, _ = average_2angles_adaptive(pair_integrand(d, m, 2))
    assert abs(val - case["P2"]) < 1e-10 * abs(case["P2"])


def test_closed_forms_circular_inner():
    a1, a2, e2, i = 1.0, 10.0, 0.2, 0.7
    ref = a1**2 / (8 * a2**3 * (1 - e2**2) ** 1.5) * (2 - 3 * np.sin(i) ** 2)
    assert f_quad12_closed(0.0, e2, 0.3, i, a1, a2) == pytest.approx(ref, rel=1e-14)
    assert f_oct12_closed(0.0, e2, 0.3, 1.1, i, a1, a2) == 0.0


def test_h0_12_special_values():
    G2, L1 = 0.3, 1.0
    assert np.allclose(h0_12(np.linspace(0, 3, 7), L1, G2, L1), G2**2 / L1**2, atol=1e-15)
    G1 = 0.8
    assert h0_12(0.0, G1, G2, L1) == pytest.approx(2 * (1 - G1**2) + G2**2, abs=1e-15)


def test_h0_12_gradient_matches_fd():
    rng = np.random.default_rng(3)
    for _ in range(20):
        g1, G2 = rng.uniform(0, 2 * np.pi), rng.uniform(0.05, 0.5)
        G1 = rng.uniform(G2 + 0.05, 0.99)
        an = np.array(grad_h0_12(g1, G1, G2, 1.0))
        fd = jacobian_fd(lambda z: np.array([h0_12(z[0], z[1], z[2], 1.0)]), np.array([g1, G1, G2]), 1e-5)[0]
        assert np.allclose(an, fd, rtol=1e-6, atol=1e-9)


def test_outer_terms_structure():
    psi = 2 * np.pi * np.arange(64) / 64
    for d1, d3 in [(0.5, 0.2), (0.3, 0.7), (0.8, 0.1)]:
        scale = sum(abs(n) for n in nu_constants(d1, d3))
        assert abs(np.mean(h3_23(0.4, psi, d1, d3))) < 1e-14 * scale
    assert nu_constants(0.4, 0.4)[0] == 0.0
    assert h2_23(0.3, 0.5, 0.5, 1.2, 0.5) == 0.0


def _random_tilde(rng):
    G2 = rng.uniform(0.05, 0.4)
    return np.array(
        [
            rng.uniform(0, 2 * np.pi),
            rng.uniform(G2 + 0.1, 0.95),
            rng.uniform(0, 2 * np.pi),
            G2,
            rng.uniform(0, 2 * np.pi),
            rng.uniform(-0.2, 0.2),
            rng.uniform(0, 2 * np.pi),
            rng.uniform(-0.2, 0.2),
        ]
    )


def test_term_gradients_match_fd():
    p = TermParams(0.5, 0.6, 0.2, 1.0)
    rng = np.random.default_rng(11)
    for _ in range(10):
        v = _random_tilde(rng)
        for name in TERMS:
            g = term_gradient(name, v, p)
            fd = jacobian_fd(lambda w: np.array([term_value(name, w, p)]), v, 1e-5)[0]
            assert np.allclose(g, fd, rtol=1e-6, atol=1e-8), name


def test_model_value_and_gradient():
    p = TermParams(0.5, 0.6, 0.2, 1.0)
    rng = np.random.default_rng(5)
    only = SecularModel([("H0_12", 1.0)], p)
    v = _random_tilde(rng)
    assert only.value(v) == h0_12(v[0], v[1], v[3], 1.0)
    _val, g = secular_value_and_gradient(only, v)
    assert g[4] == 0.0 and g[5] == 0.0 and g[2] == 0.0
    full = SecularModel([(n, 0.1 * (k + 1)) for k, n in enumerate(TERMS)], p)
    for _ in range(100):
        v = _random_tilde(rng)
        _, g = secular_value_and_gradient(full, v)
        fd = jacobian_fd(lambda w: np.array([full.value(w)]), v, 1e-5)[0]
        assert np.allclose(g, fd, rtol=1e-6, atol=1e-8)
    assert SecularModel.from_dict(full.to_dict()).terms == full.terms


def test_model_rejects_empty_and_unknown():
    p = TermParams(0.5, 0.6, 0.2, 1.0)
    with pytest.raises(DomainError):
        SecularModel([], p)
    with pytest.raises(DomainError):
        SecularModel([("H9_99", 1.0)], p)


def test_quadrupole_independent_of_outer_angles(system):
    m, _, jac = system
    d = jacobi_to_deprit(jac, m)
    t = deprit_to_tilde(d, 0.6, None, 0.2)
    g = term_gradient("H0_12", t.vector(), TermParams.from_tilde(t))
    assert g[2] == 0.0 and g[4] == 0.0


def test_kbar_constant_and_linearity():
    d1, d2 = 0.5, 0.6
    K = kbar_coefficients(0.0, 0.0, 0.0, d1, d2, 0.0, 1.0)
    assert K[0, 0] == pytest.approx((6 * d1**4 - 10 * d1**2) / (3 * d1**2 * d2**3), rel=1e-14)
    assert K[0, 1] == 0.0
    a = np.array([0.1, -0.2, 0.3])
    b = np.array([0.05, 0.04, -0.1])
    f = lambda x: kbar_coefficients(*x, d1, d2, 0.3, 1.0)[0, 1]
    assert f(a + b) == pytest.approx(f(a) + f(b), abs=1e-14)
    assert f(2 * a) == pytest.approx(2 * f(a), abs=1e-14)
