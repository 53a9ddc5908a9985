"""Acceptance checks, one per criterion.

Each check appends a ``PASS``/``FAIL`` line to :data:`REPORT`; the lines are
printed in the pytest terminal summary and when the module runs as a script.
"""

import time

import numpy as np
import pytest

from fourbody.errors import EmptyWindow
from fourbody.frames import (
    cartesian_to_jacobi,
    deprit_to_jacobi,
    deprit_to_tilde,
    jacobi_to_cartesian,
    jacobi_to_deprit,
    tilde_to_deprit,
    verify_deprit_symplectic,
)
from fourbody.hamiltonians import (
    average_2angles_adaptive,
    closed_form_inputs,
    f_oct12_closed,
    f_quad12_closed,
    h0_12,
    pair_integrand,
)
from fourbody.kepler import (
    EllipseElements,
    elements_from_state,
    kepler_residual,
    planar_state,
    solve_kepler,
)
from fourbody.melnikov import kappa_at, melnikov_curve, melnikov_L1_numeric
from fourbody.scattering import (
    ScatteringConstants,
    compose,
    find_jump_windows,
    jumps_hat,
    jumps_tilde,
    phi_corrections,
    twist_determinant_sign_profile,
    twist_matrix,
)
from fourbody.separatrix import (
    gamma1_sq_integral_closed,
    gamma1_sq_integral_numeric,
    phase_shift_psi1,
    phase_shift_psi1_numeric,
    saddle,
    separatrix_point,
    shadow_separatrix,
)
from fourbody.simulate import compare_direct_secular

try:
    from .conftest import random_system
except ImportError:  # run as a script
    from conftest import random_system

REPORT: list[str] = []
G_EDGE = np.sqrt(3.0 / 5.0)


def _record(n: int, name: str, ok: bool, detail: str, t0: float, limit: float) -> bool:
    wall = time.perf_counter() - t0
    ok = ok and wall < limit
    REPORT.append(f"{'PASS' if ok else 'FAIL'} [{n}] {name}: {detail} ({wall:.1f}s, limit {limit:g}s)")
    return ok


def check_1_deprit_brackets():
    t0 = time.perf_counter()
    worst, bad = 0.0, 0
    for seed in range(100):
        m, _, jac = random_system(1000 + seed)
        rep = verify_deprit_symplectic(jac, m)
        worst = max(worst, rep.max_error)
        bad += not rep.passed
    return _record(1, "Deprit bracket table on 100 states", bad == 0 and worst < 1e-5, f"max error {worst:.2e} (tol 1e-5), failures {bad}", t0, 60)


def check_2_averages():
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(20):
        m, _, jac = random_system(2000 + seed)
        d = jacobi_to_deprit(jac, m)
        inp = closed_form_inputs(d, m)
        q2, _ = average_2angles_adaptive(pair_integrand(d, m, 2))
        q3, _ = average_2angles_adaptive(pair_integrand(d, m, 3))
        c2 = f_quad12_closed(inp["e1"], inp["e2"], inp["gamma1"], inp["i12"], inp["a1"], inp["a2"])
        c3 = f_oct12_closed(inp["e1"], inp["e2"], inp["gamma1"], inp["gamma2"], inp["i12"], inp["a1"], inp["a2"])
        worst = max(worst, abs(q2 - c2) / abs(c2), abs(q3 - c3) / abs(c3))
    return _record(2, "P2/P3 averages vs closed forms on 20 states", worst < 1e-8, f"max rel dev {worst:.2e} (tol 1e-8)", t0, 120)


def check_3_separatrix():
    t0 = time.perf_counter()
    pinned = 0.0
    for G2 in np.linspace(0.02, 0.98, 20) * G_EDGE:
        sd = saddle(G2, 1.0)
        t = np.linspace(-10 / sd.A2, 10 / sd.A2, 1000)
        p = separatrix_point(t, G2, 0.4, 1.0)
        pinned = max(pinned, float(np.max(np.abs(h0_12(p.gamma1, p.Gamma1, G2, 1.0) - sd.energy))))
    shadow = max(shadow_separatrix(G2, 1.0)[0] for G2 in (0.1, 0.4, 0.7))
    ok = pinned < 1e-12 and shadow < 1e-6
    return _record(3, "separatrix energy and shadowing", ok, f"pinned {pinned:.2e} (tol 1e-12), shadowing {shadow:.2e} over |t|<=5/A2 (tol 1e-6)", t0, 30)


def check_4_melnikov():
    t0 = time.perf_counter()
    first = 0.0
    for G2 in np.linspace(0.05, 0.95, 20) * G_EDGE:
        L = melnikov_L1_numeric(G2, 1.0)
        first = max(first, abs(L - 0.5 * kappa_at(G2, 1.0)))
    direct = max(melnikov_curve(name, G2, 1.0, n=8).relative_deviation for name in ("L2_23", "L5_23", "L2_12") for G2 in (0.1, 0.3, 0.6))
    ok = first < 1e-7 and direct < 1e-6
    return _record(4, "Melnikov potentials", ok, f"L1* vs kappa/2 {first:.2e} (tol 1e-7), direct quadratures {direct:.2e} rel (tol 1e-6)", t0, 120)


def check_5_phase_integrals():
    t0 = time.perf_counter()
    grid = np.linspace(0.05, 0.95, 10) * G_EDGE
    integ = max(abs(gamma1_sq_integral_closed(G2, 1.0) - gamma1_sq_integral_numeric(G2, 1.0)) for G2 in grid)
    dpsi = max(abs(phase_shift_psi1(G2, 1.0) - phase_shift_psi1_numeric(G2, 1.0)) for G2 in grid)
    ok = integ < 1e-9 and dpsi < 1e-8
    return _record(5, "separatrix integrals", ok, f"int(Gamma1^2-L1^2) {integ:.2e} (tol 1e-9), dpsi {dpsi:.2e} (tol 1e-8)", t0, 10)


def check_6_scattering():
    t0 = time.perf_counter()
    c = ScatteringConstants(delta1=0.5, delta3=0.2)
    grid = 2 * np.pi * np.arange(64) / 64
    P, G = np.meshgrid(grid, grid, indexing="ij")
    mean_err = asm_err = 0.0
    missing = []
    for branch in ("+", "-"):
        hj = jumps_hat(P, G, 0.5, branch, c)
        scale = max(np.max(np.abs(hj.S1)), np.max(np.abs(hj.S3)))
        mean_err = max(mean_err, np.max(np.abs(hj.S1.mean(axis=0))) / scale, np.max(np.abs(hj.S3.mean(axis=1))) / scale)
        comp = compose(jumps_tilde(P, G, 0.5, branch, c), phi_corrections(P, G, 0.5, c))
        asm_err = max(asm_err, np.max(np.abs(hj.S1 - comp.S1)), np.max(np.abs(hj.S3 - comp.S3)))
        try:
            missing += [f"{branch}{m}" for m in find_jump_windows(0.5, branch, c, strict=True).missing]
        except EmptyWindow as exc:
            missing.append(str(exc))
    ok = mean_err < 1e-12 and asm_err < 1e-12 and not missing
    detail = f"zero-mean {mean_err:.1e}, assembly {asm_err:.1e} (tol 1e-12), windows U1-U4 on both branches {'found' if not missing else 'missing ' + ','.join(missing)}"
    return _record(6, "scattering map jumps", ok, detail, t0, 30)


def check_7_twist():
    t0 = time.perf_counter()
    _, det = twist_determinant_sign_profile(1.0, 0.5, 0.6, 0.2)
    const = bool(np.all(det != 0) and len(set(np.sign(det))) == 1)
    edge = twist_matrix(1 / np.sqrt(3.0), 0.0, 0.0, 0.5, 0.6, 0.2, 1.0).det_leading.coeff
    # the edge value is a roundoff of 1 - 3 Gamma2^2 / L1^2
    rel = abs(edge) / np.max(np.abs(det))
    vanish = rel < 1e-12
    return _record(7, "twist determinant", const and vanish, f"constant sign on (0.05,0.99)L1/sqrt3: {const}, |det| at L1/sqrt3 relative to max {rel:.1e}", t0, 5)


def check_8_direct_vs_secular():
    t0 = time.perf_counter()
    rep = compare_direct_secular()
    mon = rep.monitors
    ok = rep.e1_deviation < 0.05 and rep.i12_deviation < 0.05 and mon["rel_energy_error"] < 1e-6 and mon["rel_angular_momentum_error"] < 1e-10
    detail = (
        f"one Kozai period ({rep.kozai_period:.0f}) at a1/a2 = 0.05 with the 4th-order leapfrog composition (yoshida4, dt = P1/800): "
        f"e1 {100 * rep.e1_deviation:.2f}%, i12 {100 * rep.i12_deviation:.2f}% (tol 5%), H {mon['rel_energy_error']:.1e} (tol 1e-6), C {mon['rel_angular_momentum_error']:.1e} (tol 1e-10)"
    )
    return _record(8, "direct vs secular", ok, detail, t0, 600)


def check_9_kepler():
    t0 = time.perf_counter()
    e = np.linspace(0.0, 0.99, 100)[:, None]
    ell = np.linspace(-10, 10, 201)[None, :]
    res = float(np.max(np.abs(kepler_residual(e, ell, solve_kepler(e, ell)))))
    trip = 0.0
    for ecc in (0.0, 0.3, 0.9):
        q, p = planar_state(EllipseElements(2.0, ecc, 1.0), 0.3, 1.3)
        out = elements_from_state(np.r_[q, 0.0], np.r_[p, 0.0], 0.3, 1.3)
        trip = max(trip, abs(out["a"] - 2.0) / 2.0, abs(out["e"] - ecc))
    for seed in range(10):
        m, cart, jac = random_system(3000 + seed)
        back = jacobi_to_cartesian(deprit_to_jacobi(jacobi_to_deprit(jac, m), m, jac.q[0], jac.p[0]), m)
        trip = max(trip, np.max(np.abs(back.x - cart.x)) / np.max(np.abs(cart.x)), np.max(np.abs(back.y - cart.y)) / np.max(np.abs(cart.y)))
        d = jacobi_to_deprit(cartesian_to_jacobi(cart, m), m)
        trip = max(trip, np.max(np.abs(tilde_to_deprit(deprit_to_tilde(d, 0.7, None, 0.3)).vector() - d.vector())) / np.max(np.abs(d.vector())))
    ok = res < 1e-13 and trip < 1e-10
    return _record(9, "Kepler solver and round trips", ok, f"residual {res:.1e} (tol 1e-13), round trips {trip:.1e} rel (tol 1e-10)", t0, 10)


CHECKS = [
    check_1_deprit_brackets,
    check_2_averages,
    check_3_separatrix,
    check_4_melnikov,
    check_5_phase_integrals,
    check_6_scattering,
    check_7_twist,
    check_8_direct_vs_secular,
    check_9_kepler,
]


@pytest.mark.parametrize("check", CHECKS, ids=[f"criterion_{k + 1}" for k in range(len(CHECKS))])
def test_criterion(check):
    assert check(), REPORT[-1]


if __name__ == "__main__":
    for check in CHECKS:
        check()
        print(REPORT[-1], flush=True)
