"""Exact, expanded and averaged Hamiltonians of the four-body problem.

Three layers live here:

* the full Hamiltonian split as ``F_Kep + F_per`` and the Legendre series of
  the pairwise perturbing functions;
* numerical double averaging over two mean anomalies together with the
  closed-form quadrupolar/octupolar averages of the inner pair;
* the explicit terms of the secular expansion in the localized variables,
  bundled into :class:`SecularModel`.

Closed-form averages are normalized, i.e. ``(2 pi)^-2`` times the integral
over the torus, without mass prefactors.
"""

from __future__ import annotations

import json
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre as npleg

from .errors import CollisionDetected, DomainError, NumericalError, OutOfRange
from .frames import (
    CartesianState,
    DepritState,
    JacobiState,
    MassSet,
    TildeState,
    cartesian_to_jacobi,
    inclinations,
    jacobian_fd,
    orbit_frames,
)
from .kepler import semimajor_axis_from_action, solve_kepler

# index of each localized variable in the 8-vector
G1, GAM1, G2, GAM2, P1, PSI1, G3, GAM3 = range(8)


# ---------------------------------------------------------------------------
# full Hamiltonian


def f_kep(state: DepritState, masses: MassSet) -> float:
    """``-sum mu_j^3 M_j^2 / (2 L_j^2)``."""
    L = np.asarray(state.L, dtype=float)
    if np.any(L <= 0.0):
        raise DomainError("L_j must be positive")
    mu = np.array(masses.mu[1:])
    M = np.array(masses.M[1:])
    return float(-np.sum(mu**3 * M**2 / (2.0 * L**2)))


def kepler_energies_jacobi(state: JacobiState, masses: MassSet) -> np.ndarray:
    return np.array(
        [
            state.p[j] @ state.p[j] / (2.0 * masses.mu[j]) - masses.mu[j] * masses.M[j] / np.linalg.norm(state.q[j])
            for j in (1, 2, 3)
        ]
    )


def _inv_dist(v: np.ndarray) -> float:
    r = float(np.linalg.norm(v))
    if r == 0.0:
        raise CollisionDetected("zero separation")
    return 1.0 / r


def f_per_exact(state: JacobiState, masses: MassSet) -> float:
    """Perturbing function: Newtonian potential minus the three Kepler parts."""
    m0, m1, m2, m3 = masses.m
    s01, s11 = masses.sigma(0, 1), masses.sigma(1, 1)
    s22 = masses.sigma(2, 2)
    q1, q2, q3 = state.q[1], state.q[2], state.q[3]
    mu, M = masses.mu, masses.M
    return (
        mu[2] * M[2] * _inv_dist(q2)
        + mu[3] * M[3] * _inv_dist(q3)
        - m0 * m2 * _inv_dist(q2 + s11 * q1)
        - m0 * m3 * _inv_dist(q3 + s22 * q2 + s11 * q1)
        - m1 * m2 * _inv_dist(q2 - s01 * q1)
        - m1 * m3 * _inv_dist(q3 + s22 * q2 + (s11 - 1.0) * q1)
        - m2 * m3 * _inv_dist(q3 + (s22 - 1.0) * q2)
    )


def inertial_hamiltonian(state: CartesianState, masses: MassSet) -> float:
    """``sum |y_j|^2 / (2 m_j) - sum_{i<j} m_i m_j / |x_i - x_j|``."""
    m = masses.m
    T = sum(state.y[j] @ state.y[j] / (2.0 * m[j]) for j in range(4))
    V = 0.0
    for i in range(4):
        for j in range(i + 1, 4):
            V -= m[i] * m[j] * _inv_dist(state.x[i] - state.x[j])
    return float(T + V)


def reduced_hamiltonian(state: CartesianState, masses: MassSet) -> float:
    """Inertial Hamiltonian minus the kinetic energy of the centre of mass."""
    jac = cartesian_to_jacobi(state, masses)
    return inertial_hamiltonian(state, masses) - float(jac.p[0] @ jac.p[0]) / (2.0 * masses.M[3])


def f_per_pair_exact(pair: int, state: JacobiState, masses: MassSet) -> float:
    """Exact interaction of the pair (1,2) or (2,3) that the Legendre series expands.

    For pair 23 the inner pair is collapsed (``q1 = 0``), which is the limit
    the series in ``|q2|/|q3|`` describes.
    """
    m0, m1, m2, m3 = masses.m
    mu, M = masses.mu, masses.M
    if pair == 12:
        q1, q2 = state.q[1], state.q[2]
        return (
            mu[2] * M[2] * _inv_dist(q2)
            - m0 * m2 * _inv_dist(q2 + masses.sigma(1, 1) * q1)
            - m1 * m2 * _inv_dist(q2 - masses.sigma(0, 1) * q1)
        )
    if pair == 23:
        q2, q3 = state.q[2], state.q[3]
        s22 = masses.sigma(2, 2)
        return mu[3] * M[3] * _inv_dist(q3) - M[1] * m3 * _inv_dist(q3 + s22 * q2) - m2 * m3 * _inv_dist(q3 + (s22 - 1.0) * q2)
    raise DomainError("pair must be 12 or 23")


def legendre_p(n: int, x):
    """Legendre polynomial ``P_n(x)``."""
    c = np.zeros(n + 1)
    c[n] = 1.0
    return npleg.legval(x, c)


def f_per_legendre(pair: int, state: JacobiState, masses: MassSet, nmax: int) -> tuple[float, dict[int, float]]:
    """Legendre truncation ``-(mu_j m_{j+1}/r) sum_{n=2}^{nmax} s_n P_n(cos z) (r'/r)^n``.

    Returns the total and the individual terms keyed by ``n``.
    """
    if pair == 12:
        qi, qo, pref, st = state.q[1], state.q[2], masses.mu[1] * masses.m[2], masses.sigma_tilde[1]
    elif pair == 23:
        qi, qo, pref, st = state.q[2], state.q[3], masses.mu[2] * masses.m[3], masses.sigma_tilde[2]
    else:
        raise DomainError("pair must be 12 or 23")
    if nmax > masses.nmax:
        raise DomainError(f"nmax {nmax} exceeds the mass set's {masses.nmax}")
    ri, ro = np.linalg.norm(qi), np.linalg.norm(qo)
    ratio = ri / ro
    if not ratio < 1.0:
        raise DomainError("Legendre series needs |q_inner| < |q_outer|")
    cz = float(qi @ qo / (ri * ro))
    terms = {n: float(-pref / ro * st[n] * legendre_p(n, cz) * ratio**n) for n in range(2, nmax + 1)}
    return float(sum(terms.values())), terms


# ---------------------------------------------------------------------------
# averaging


@dataclass(frozen=True)
class AverageSpec:
    """Quadrature nodes per angle, integrand label and normalization flag."""

    N1: int = 64
    N2: int = 64
    integrand: str = "custom"
    normalized: bool = True

    def __post_init__(self) -> None:
        if self.N1 < 8 or self.N2 < 8:
            raise DomainError("need at least 8 nodes per angle")


def average_2angles(integrand: Callable[[np.ndarray, np.ndarray], np.ndarray], spec: AverageSpec) -> float:
    """Trapezoid average of a doubly periodic function over ``T^2``.

    ``integrand`` receives broadcastable arrays of the two angles.  With
    ``spec.normalized`` false the result is multiplied by ``(2 pi)^2``.
    """
    t1 = 2.0 * np.pi * np.arange(spec.N1) / spec.N1
    t2 = 2.0 * np.pi * np.arange(spec.N2) / spec.N2
    vals = np.asarray(integrand(t1[:, None], t2[None, :]), dtype=float)
    vals = np.broadcast_to(vals, (spec.N1, spec.N2))
    if not np.all(np.isfinite(vals)):
        raise NumericalError("non-finite integrand sample")
    avg = float(np.sum(vals) / vals.size)
    return avg if spec.normalized else avg * (2.0 * np.pi) ** 2


def average_2angles_adaptive(
    integrand: Callable[[np.ndarray, np.ndarray], np.ndarray],
    n0: int = 16,
    tol: float = 1e-11,
    nmax: int = 1024,
    normalized: bool = True,
) -> tuple[float, int]:
    """Double the node count until successive averages differ by less than ``tol`` (relative).

    Returns the value and the final per-angle node count.
    """
    n = n0
    prev = average_2angles(integrand, AverageSpec(n, n, normalized=normalized))
    while n < nmax:
        n *= 2
        cur = average_2angles(integrand, AverageSpec(n, n, normalized=normalized))
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur, n
        prev = cur
    raise NumericalError("averaging did not converge")


def _orbit_positions(a: float, e: float, P: np.ndarray, Q: np.ndarray, ell: np.ndarray) -> np.ndarray:
    E = solve_kepler(e, np.asarray(ell, dtype=float))
    x = a * (np.cos(E) - e)
    y = a * np.sqrt(1.0 - e * e) * np.sin(E)
    return x[..., None] * P + y[..., None] * Q


def orbit_geometry(state: DepritState, masses: MassSet) -> list[dict]:
    """Semi-major axis, eccentricity and in-plane basis of each orbit."""
    out = []
    for j, (P, Q) in enumerate(orbit_frames(state)):
        a = float(semimajor_axis_from_action(state.L[j], masses.mu[j + 1], masses.M[j + 1]))
        e = float(np.sqrt(max(0.0, 1.0 - (state.G[j] / state.L[j]) ** 2)))
        out.append({"a": a, "e": e, "P": P, "Q": Q})
    return out


def pair_integrand(state: DepritState, masses: MassSet, n: int, pair: int = 12):
    """``P_n(cos zeta) r_in^n / r_out^(n+1)`` as a function of the two mean anomalies.

    Positions come from the actual orbit geometry of ``state``; the inner
    body of the pair has the first mean anomaly.
    """
    geo = orbit_geometry(state, masses)
    gi, go = (geo[0], geo[1]) if pair == 12 else (geo[1], geo[2])

    def f(l1: np.ndarray, l2: np.ndarray) -> np.ndarray:
        qi = _orbit_positions(gi["a"], gi["e"], gi["P"], gi["Q"], np.broadcast_to(l1, np.broadcast(l1, l2).shape))
        qo = _orbit_positions(go["a"], go["e"], go["P"], go["Q"], np.broadcast_to(l2, np.broadcast(l1, l2).shape))
        ri = np.linalg.norm(qi, axis=-1)
        ro = np.linalg.norm(qo, axis=-1)
        cz = np.sum(qi * qo, axis=-1) / (ri * ro)
        return legendre_p(n, cz) * ri**n / ro ** (n + 1)

    return f


def closed_form_inputs(state: DepritState, masses: MassSet) -> dict:
    """Elements used by the closed-form averages of the inner pair."""
    a1 = float(semimajor_axis_from_action(state.L[0], masses.mu[1], masses.M[1]))
    a2 = float(semimajor_axis_from_action(state.L[1], masses.mu[2], masses.M[2]))
    e = np.sqrt(np.maximum(0.0, 1.0 - (state.G / state.L) ** 2))
    i12, _ = inclinations(state)
    return {"e1": float(e[0]), "e2": float(e[1]), "gamma1": float(state.g[0]), "gamma2": float(state.g[1]), "i12": i12, "a1": a1, "a2": a2}


def f_quad12_closed(e1, e2, gamma1, i12, a1, a2):
    """Averaged quadrupolar interaction of the inner pair."""
    s2 = np.sin(i12) ** 2
    core = (15.0 * e1**2 * np.cos(gamma1) ** 2 - 12.0 * e1**2 - 3.0) * s2 + 3.0 * e1**2 + 2.0
    return a1**2 / (8.0 * a2**3 * (1.0 - e2**2) ** 1.5) * core


def f_oct12_closed(e1, e2, gamma1, gamma2, i12, a1, a2):
    """Averaged octupolar interaction of the inner pair."""
    k = 1.0 - e1**2
    s = np.sin(i12) ** 2
    c2 = np.cos(gamma1) ** 2
    sn2 = np.sin(gamma1) ** 2
    X = k * (5.0 * s * (6.0 - 7.0 * c2) - 3.0) - 35.0 * sn2 * s + 7.0
    Y = k * (5.0 * s * (4.0 - 7.0 * c2) - 3.0) - 35.0 * sn2 * s + 7.0
    brace = np.cos(gamma1) * np.cos(gamma2) * X + np.sin(gamma1) * np.sin(gamma2) * np.cos(i12) * Y
    return -15.0 / 64.0 * a1**3 / a2**4 * e1 * e2 / (1.0 - e2**2) ** 2.5 * brace


# ---------------------------------------------------------------------------
# expansion terms in the localized variables


@dataclass(frozen=True)
class TermParams:
    delta1: float
    delta2: float
    delta3: float
    L1: float
    L2: float = 1.0
    L3: float = 1.0

    @classmethod
    def from_tilde(cls, t: TildeState) -> TermParams:
        return cls(t.delta1, t.delta2, t.delta3, t.L1, t.L2, t.L3)


def _sqrt_checked(x, what: str):
    x = np.asarray(x, dtype=float)
    if np.any(x < -1e-12):
        raise DomainError(f"square-root argument negative in {what}")
    return np.sqrt(np.maximum(x, 0.0))


def h0_12(gamma1, Gamma1, Gamma2, L1):
    """Leading Kozai term ``(1 - G1^2/L1^2)[2 - 5(1 - G2^2/G1^2) sin^2 g1] + G2^2/L1^2``."""
    k = 1.0 - Gamma2**2 / Gamma1**2
    return (1.0 - Gamma1**2 / L1**2) * (2.0 - 5.0 * k * np.sin(gamma1) ** 2) + Gamma2**2 / L1**2


def grad_h0_12(gamma1, Gamma1, Gamma2, L1):
    """Partials of :func:`h0_12` with respect to ``(gamma1, Gamma1, Gamma2)``."""
    s2 = np.sin(gamma1) ** 2
    k = 1.0 - Gamma2**2 / Gamma1**2
    e2 = 1.0 - Gamma1**2 / L1**2
    d_g = -5.0 * e2 * k * np.sin(2.0 * gamma1)
    d_G = -2.0 * Gamma1 / L1**2 * (2.0 - 5.0 * k * s2) - 10.0 * e2 * Gamma2**2 / Gamma1**3 * s2
    d_T = 10.0 * e2 * Gamma2 / Gamma1**2 * s2 + 2.0 * Gamma2 / L1**2
    return d_g, d_G, d_T


def h1_12(gamma1, Gamma1, Gamma2, Psi1, L1):
    h0 = h0_12(gamma1, Gamma1, Gamma2, L1)
    return (3.0 * h0 - 1.0) * Psi1 - 4.0 * Gamma2 * h0 + 3.0 * Gamma2 - Gamma1**2 * Gamma2 / L1**2


def grad_h1_12(gamma1, Gamma1, Gamma2, Psi1, L1):
    """Partials with respect to ``(gamma1, Gamma1, Gamma2, Psi1)``."""
    h0 = h0_12(gamma1, Gamma1, Gamma2, L1)
    d_g, d_G, d_T = grad_h0_12(gamma1, Gamma1, Gamma2, L1)
    w = 3.0 * Psi1 - 4.0 * Gamma2
    return (
        w * d_g,
        w * d_G - 2.0 * Gamma1 * Gamma2 / L1**2,
        w * d_T - 4.0 * h0 + 3.0 - Gamma1**2 / L1**2,
        3.0 * h0 - 1.0,
    )


def h2_tilde(gamma1, Gamma1, Gamma2, Psi1, L1, corrected: bool = True):
    """Second-order quadrupolar term of the inner pair.

    The default includes a ``-(105/4) G2^2 sin^2 g1`` contribution that the
    series of :func:`f_quad12_closed` requires; ``corrected=False`` omits it.
    """
    h0 = h0_12(gamma1, Gamma1, Gamma2, L1)
    G2, T2, L2_ = Gamma1**2, Gamma2**2, L1**2
    bracket = (
        np.sin(gamma1) ** 2 * (5.0 * G2 - 5.0 * G2**2 / L2_ + 210.0 * G2 * T2 / L2_ - 205.0 * T2**2 / L2_ + 205.0 * T2**2 / G2)
        + G2**2 / L2_
        - 66.0 * G2 * T2 / L2_
        + 41.0 * T2**2 / L2_
        + 40.0 * T2
    )
    out = (3.0 * h0 - 1.0) * Psi1**2 + (6.0 - 8.0 * h0 - 2.0 * G2 / L2_) * Gamma2 * Psi1 + bracket / 8.0
    if corrected:
        out = out - 105.0 / 4.0 * T2 * np.sin(gamma1) ** 2
    return out


def h2_12(gamma1, Gamma1, gamma2, Gamma2, L1, cross_sign: float = -1.0, ecc=None):
    """Leading octupolar term of the inner pair.

    ``cross_sign`` multiplies the ``(G2/G1) sin g1 sin g2`` part.  The default
    ``-1`` is the limit of the averaged octupole for the geometric mutual
    inclination (``cos i12 -> +G2/G1``); ``+1`` gives the variant obtained
    from the supplementary angle.  ``ecc`` overrides
    ``sqrt(1 - G1^2/L1^2)`` when the caller knows it more accurately.
    """
    k = 1.0 - Gamma2**2 / Gamma1**2
    c2 = np.cos(gamma1) ** 2
    s2 = np.sin(gamma1) ** 2
    r = Gamma1**2 / L1**2
    X = r * (5.0 * k * (6.0 - 7.0 * c2) - 3.0) - 35.0 * s2 * k + 7.0
    Y = r * (5.0 * k * (4.0 - 7.0 * c2) - 3.0) - 35.0 * s2 * k + 7.0
    if ecc is None:
        ecc = _sqrt_checked(1.0 - Gamma1**2 / L1**2, "h2_12")
    return ecc * (np.cos(gamma1) * np.cos(gamma2) * X + cross_sign * Gamma2 / Gamma1 * np.sin(gamma1) * np.sin(gamma2) * Y)


def h0_23_leading(psi1):
    return np.cos(psi1) ** 2


def h1_23_leading(psi1):
    return np.sin(psi1) ** 2


def c_constants(delta1: float) -> tuple[float, float]:
    """``(c1, c2) = (delta1^2, -(5 - 4 delta1^2))``."""
    return delta1**2, -(5.0 - 4.0 * delta1**2)


def h2_23(gamma2, Gamma1, Gamma2, psi1, delta1):
    c1, c2 = c_constants(delta1)
    root = _sqrt_checked(Gamma1**2 - Gamma2**2, "h2_23")
    return root * (c1 * np.cos(psi1) * np.cos(gamma2) + c2 * np.sin(psi1) * np.sin(gamma2))


def grad_h2_23(gamma2, Gamma1, Gamma2, psi1, delta1):
    """Partials with respect to ``(Gamma1, gamma2, Gamma2, psi1)``."""
    c1, c2 = c_constants(delta1)
    root = _sqrt_checked(Gamma1**2 - Gamma2**2, "h2_23")
    trig = c1 * np.cos(psi1) * np.cos(gamma2) + c2 * np.sin(psi1) * np.sin(gamma2)
    inv = np.where(root > 0.0, 1.0 / np.where(root > 0.0, root, 1.0), 0.0)
    return (
        Gamma1 * inv * trig,
        root * (-c1 * np.cos(psi1) * np.sin(gamma2) + c2 * np.sin(psi1) * np.cos(gamma2)),
        -Gamma2 * inv * trig,
        root * (-c1 * np.sin(psi1) * np.cos(gamma2) + c2 * np.cos(psi1) * np.sin(gamma2)),
    )


def h3_tilde(psi1, Psi1, Gamma2, Gamma3, delta1, delta3):
    c2 = np.cos(psi1) ** 2
    d1, d3 = delta1, delta3
    return (
        Psi1 * (5.0 * (d3**2 - d1**4) * c2 - 5.0 * d3**2 + 3.0 * d1**4)
        + Gamma2 * (5.0 * (d1**4 - d1**2 * d3**2) * c2 + 4.0 * d1**2 * d3**2 - 3.0 * d1**4)
        + Gamma3 * (5.0 * (d1**3 * d3 - d1 * d3) * c2 + 5.0 * d1 * d3 - 4.0 * d1**3 * d3)
    )


def nu_constants(delta1: float, delta3: float) -> tuple[float, float, float, float]:
    """Amplitudes ``nu0..nu3`` of the four harmonics of :func:`h3_23`."""
    d1, d3 = delta1, delta3
    n0 = 35.0 / (8.0 * d1**3) * (d1**2 - 1.0) * (d3 - d1) * (d3 + d1) ** 2
    n1 = -1.0 / (8.0 * d1**3) * (3.0 * d1**2 - 7.0) * (d3 + d1) * (15.0 * d3**2 - 10.0 * d1 * d3 - d1**2)
    n2 = 1.0 / (8.0 * d1**3) * (3.0 * d1**2 - 7.0) * (d3 - d1) * (15.0 * d3**2 + 10.0 * d1 * d3 - d1**2)
    n3 = -35.0 / (8.0 * d1**3) * (d1**2 - 1.0) * (d3 + d1) * (d3 - d1) ** 2
    return n0, n1, n2, n3


_H3_MULT = (3.0, 1.0, -1.0, -3.0)


def h3_23(gamma3, psi1, delta1, delta3, nu=None):
    nu = nu_constants(delta1, delta3) if nu is None else nu
    return sum(n * np.cos(gamma3 + m * psi1) for n, m in zip(nu, _H3_MULT))


def grad_h3_23(gamma3, psi1, delta1, delta3, nu=None):
    """Partials with respect to ``(psi1, gamma3)``."""
    nu = nu_constants(delta1, delta3) if nu is None else nu
    d_psi = -sum(m * n * np.sin(gamma3 + m * psi1) for n, m in zip(nu, _H3_MULT))
    d_g3 = -sum(n * np.sin(gamma3 + m * psi1) for n, m in zip(nu, _H3_MULT))
    return d_psi, d_g3


def j_functions(psi1, gamma3, delta1, delta3):
    """The trigonometric polynomials ``(J1, J2)`` multiplying ``cos g2`` and ``sin g2`` in :func:`h5_23`."""
    d1, d3 = delta1, delta3
    cp, sp = np.cos(psi1), np.sin(psi1)
    cg, sg = np.cos(gamma3), np.sin(gamma3)
    J1 = 30.0 * d3**2 * sg * cp * sp - 10.0 * d1**2 * sg * cp * sp - 20.0 * d1 * d3 * cg * cp**2 + 10.0 * d1 * d3 * cg
    J2 = (
        -50.0 * d1 * d3 * cg * cp * sp
        + 70.0 * d3 / d1 * cg * cp * sp
        + 105.0 * d3**2 / d1**2 * sg * cp**2
        - 75.0 * d3**2 * sg * cp**2
        + 25.0 * d1**2 * sg * cp**2
        - 35.0 * sg * cp**2
        - 105.0 * d3**2 / d1**2 * sg
        + 60.0 * d3**2 * sg
        - 17.0 * d1**2 * sg
        + 28.0 * sg
    )
    return J1, J2


def dj2_dgamma3(psi1, gamma3, delta1, delta3):
    """Analytic ``dJ2/dgamma3``."""
    d1, d3 = delta1, delta3
    cp, sp = np.cos(psi1), np.sin(psi1)
    cg, sg = np.cos(gamma3), np.sin(gamma3)
    return (
        (50.0 * d1 * d3 - 70.0 * d3 / d1) * sg * cp * sp
        + (105.0 * d3**2 / d1**2 - 75.0 * d3**2 + 25.0 * d1**2 - 35.0) * cg * cp**2
        + (-105.0 * d3**2 / d1**2 + 60.0 * d3**2 - 17.0 * d1**2 + 28.0) * cg
    )


def h5_23(gamma2, Gamma1, Gamma2, psi1, gamma3, delta1, delta3):
    J1, J2 = j_functions(psi1, gamma3, delta1, delta3)
    root = _sqrt_checked(Gamma1**2 - Gamma2**2, "h5_23")
    return root * (J1 * np.cos(gamma2) + J2 * np.sin(gamma2))


# registry on the 8-vector ---------------------------------------------------


def _v_h0_12(v, p):
    return h0_12(v[G1], v[GAM1], v[GAM2], p.L1)


def _g_h0_12(v, p):
    g = np.zeros(8)
    g[G1], g[GAM1], g[GAM2] = grad_h0_12(v[G1], v[GAM1], v[GAM2], p.L1)
    return g


def _v_h1_12(v, p):
    return h1_12(v[G1], v[GAM1], v[GAM2], v[PSI1], p.L1)


def _g_h1_12(v, p):
    g = np.zeros(8)
    g[G1], g[GAM1], g[GAM2], g[PSI1] = grad_h1_12(v[G1], v[GAM1], v[GAM2], v[PSI1], p.L1)
    return g


def _v_h2_23(v, p):
    return h2_23(v[G2], v[GAM1], v[GAM2], v[P1], p.delta1)


def _g_h2_23(v, p):
    g = np.zeros(8)
    g[GAM1], g[G2], g[GAM2], g[P1] = grad_h2_23(v[G2], v[GAM1], v[GAM2], v[P1], p.delta1)
    return g


def _v_h3_23(v, p):
    return h3_23(v[G3], v[P1], p.delta1, p.delta3)


def _g_h3_23(v, p):
    g = np.zeros(8)
    g[P1], g[G3] = grad_h3_23(v[G3], v[P1], p.delta1, p.delta3)
    return g


def _g_h0_23(v, p):
    g = np.zeros(8)
    g[P1] = -np.sin(2.0 * v[P1])
    return g


def _g_h1_23(v, p):
    g = np.zeros(8)
    g[P1] = np.sin(2.0 * v[P1])
    return g


TERMS: dict[str, tuple[Callable, Callable | None]] = {
    "H0_12": (_v_h0_12, _g_h0_12),
    "H1_12": (_v_h1_12, _g_h1_12),
    "H2tilde": (lambda v, p: h2_tilde(v[G1], v[GAM1], v[GAM2], v[PSI1], p.L1), None),
    "H2_12": (lambda v, p: h2_12(v[G1], v[GAM1], v[G2], v[GAM2], p.L1), None),
    "H0_23": (lambda v, p: h0_23_leading(v[P1]), _g_h0_23),
    "H1_23": (lambda v, p: h1_23_leading(v[P1]), _g_h1_23),
    "H2_23": (_v_h2_23, _g_h2_23),
    "H3tilde": (lambda v, p: h3_tilde(v[P1], v[PSI1], v[GAM2], v[GAM3], p.delta1, p.delta3), None),
    "H3_23": (_v_h3_23, _g_h3_23),
    "H5_23": (lambda v, p: h5_23(v[G2], v[GAM1], v[GAM2], v[P1], v[G3], p.delta1, p.delta3), None),
}

# each term's order as (i, j) in eps^i mu^j with eps = 1/L2, mu = L2/L3
SCALE_EXPONENTS: dict[str, tuple[int, int]] = {
    "H0_12": (6, 0),
    "H1_12": (7, 0),
    "H2tilde": (8, 0),
    "H2_12": (8, 0),
    "H0_23": (2, 6),
    "H1_23": (2, 7),
    "H2_23": (3, 6),
    "H3tilde": (3, 6),
    "H3_23": (2, 8),
    "H5_23": (3, 8),
}

ANGLE_SLOTS = np.array([True, False] * 4)


def term_value(term: str, v: np.ndarray, p: TermParams) -> float:
    if term not in TERMS:
        raise DomainError(f"unknown term {term!r}")
    return float(TERMS[term][0](np.asarray(v, dtype=float), p))


def term_gradient(term: str, v: np.ndarray, p: TermParams, h: float = 1e-5) -> np.ndarray:
    """Analytic gradient where available, Richardson central differences otherwise."""
    fn, grad = TERMS[term]
    v = np.asarray(v, dtype=float)
    if grad is not None:
        return np.asarray(grad(v, p), dtype=float)
    return jacobian_fd(lambda w: np.array([fn(w, p)]), v, h)[0]


def alpha_constants(masses: MassSet, delta1: float, L1: float) -> dict[str, float]:
    """The mass/delta prefactors of the inner-pair terms."""
    M1, M2 = masses.M[1], masses.M[2]
    mu1, mu2 = masses.mu[1], masses.mu[2]
    base = 3.0 * L1**4 * M2**3 * mu2**6 / (8.0 * M1**2 * mu1**4)
    return {
        "alpha0_12": base / delta1**3,
        "alpha1_12": -base / delta1**4,
        "alpha2tilde": 2.0 * base / delta1**5,
        "alpha2_12": -15.0 / 64.0 * L1**6 * mu2**8 * M2**4 / (mu1**6 * M1**3) * np.sqrt(1.0 - delta1**2) / delta1**5,
    }


_ALPHA_KEY = {"H0_12": "alpha0_12", "H1_12": "alpha1_12", "H2tilde": "alpha2tilde", "H2_12": "alpha2_12"}


@dataclass
class SecularModel:
    """Weighted sum of expansion terms, evaluable with its gradient."""

    terms: list[tuple[str, float]]
    params: TermParams
    masses: dict | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.terms:
            raise DomainError("a secular model needs at least one term")
        for name, pref in self.terms:
            if name not in TERMS:
                raise DomainError(f"unknown term {name!r}")
            if not np.isfinite(pref):
                raise DomainError(f"non-finite prefactor for {name}")

    @classmethod
    def scaled(
        cls,
        names: list[str],
        params: TermParams,
        masses: MassSet | None = None,
        free_constants: dict[str, float] | None = None,
    ) -> SecularModel:
        """Prefactors ``alpha * eps^i * mu^j`` from :data:`SCALE_EXPONENTS`.

        Inner-pair alphas come from the masses when given; the outer-pair
        constants are free and default to 1.
        """
        free = dict(free_constants or {})
        alphas = alpha_constants(masses, params.delta1, params.L1) if masses is not None else {}
        eps, mu = 1.0 / params.L2, params.L2 / params.L3
        terms = []
        for n in names:
            i, j = SCALE_EXPONENTS[n]
            a = free.get(n, alphas.get(_ALPHA_KEY.get(n, ""), 1.0))
            terms.append((n, float(a * eps**i * mu**j)))
        return cls(terms, params, masses.to_dict() if masses is not None else None)

    def value(self, v: np.ndarray) -> float:
        return float(sum(c * term_value(n, v, self.params) for n, c in self.terms))

    def gradient(self, v: np.ndarray) -> np.ndarray:
        return sum(c * term_gradient(n, v, self.params) for n, c in self.terms)

    def to_dict(self) -> dict:
        return {
            "terms": [[n, c] for n, c in self.terms],
            "params": self.params.__dict__.copy(),
            "masses": self.masses,
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, d: dict) -> SecularModel:
        return cls([(str(n), float(c)) for n, c in d["terms"]], TermParams(**d["params"]), d.get("masses"), d.get("meta", {}))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def secular_value_and_gradient(model: SecularModel, state: TildeState | np.ndarray) -> tuple[float, np.ndarray]:
    """Value and gradient (in :data:`TILDE_NAMES` order) of a model at a localized state."""
    v = state.vector() if isinstance(state, TildeState) else np.asarray(state, dtype=float)
    return model.value(v), model.gradient(v)


def hamilton_field(model: SecularModel, v: np.ndarray) -> np.ndarray:
    """``dq/dt = dH/dp``, ``dp/dt = -dH/dq`` for the pairs ``(angle, action)``."""
    g = model.gradient(v)
    out = np.empty(8)
    out[0::2] = g[1::2]
    out[1::2] = -g[0::2]
    return out


# ---------------------------------------------------------------------------
# averaged outer-pair coefficients


def kbar_coefficients(Gamma2, Psi1, Gamma3, delta1, delta2, delta3, L1) -> dict[tuple[int, int], float]:
    """Coefficients of the angle-averaged outer quadrupole on the cylinder, keyed ``(i, j)``."""
    T, P, G = Gamma2, Psi1, Gamma3
    d1, d2, d3 = delta1, delta2, delta3
    if not (0.0 < d1 < 1.0 and 0.0 < d2 < 1.0):
        raise OutOfRange("delta1 and delta2 must lie in (0, 1)")
    L2_ = L1**2
    K = {}
    K[0, 0] = -((18 * d1**2 - 30) * d3**2 - 6 * d1**4 + 10 * d1**2) / (3 * d1**2 * d2**3)
    K[0, 1] = ((12 * T * d1**2 - 20 * P) * d3**2 + (-12 * G * d1**3 + 20 * G * d1) * d3 + (4 * P - 4 * T) * d1**4) / (d1**3 * d2**3)
    K[0, 2] = -(
        ((12 * T * P - 9 * L2_ + 15 * T**2) * d1**2 - 30 * P**2 + 15 * L2_ - 15 * T**2) * d3**2
        + (-24 * T * G * d1**3 + 40 * G * P * d1) * d3
        + (-2 * P**2 + 4 * T * P + 3 * L2_ + 6 * G**2 - 5 * T**2) * d1**4
        + (-5 * L2_ - 10 * G**2 + 5 * T**2) * d1**2
    ) / (d1**4 * d2**3)
    K[1, 0] = -((24 * d1**2 - 40) * d3**3 + (-12 * d1**4 + 20 * d1**2) * d3) / (d1**2 * d2**4)
    K[1, 1] = (
        (48 * T * d1**2 - 80 * P) * d3**3
        + (-72 * G * d1**3 + 120 * G * d1) * d3**2
        + (24 * P - 24 * T) * d1**4 * d3
        + 12 * G * d1**5
        - 20 * G * d1**3
    ) / (d1**3 * d2**4)
    K[1, 2] = -(
        ((48 * T * P - 36 * L2_ + 60 * T**2) * d1**2 - 120 * P**2 + 60 * L2_ - 60 * T**2) * d3**3
        + (-144 * T * G * d1**3 + 240 * G * P * d1) * d3**2
        + ((-12 * P**2 + 24 * T * P + 18 * L2_ + 72 * G**2 - 30 * T**2) * d1**4 + (-30 * L2_ - 120 * G**2 + 30 * T**2) * d1**2) * d3
        + (-24 * G * P + 24 * T * G) * d1**5
    ) / (d1**4 * d2**4)
    K[2, 0] = -((123 * d1**2 - 205) * d3**4 + (-78 * d1**4 + 130 * d1**2) * d3**2 + 3 * d1**6 - 5 * d1**4) / (2 * d1**2 * d2**5)
    K[2, 1] = (
        (123 * T * d1**2 - 205 * P) * d3**4
        + (-246 * G * d1**3 + 410 * G * d1) * d3**3
        + (78 * P - 78 * T) * d1**4 * d3**2
        + (78 * G * d1**5 - 130 * G * d1**3) * d3
        + (-6 * P + 3 * T) * d1**6
        + 5 * P * d1**4
    ) / (d1**3 * d2**5)
    K[2, 2] = -(
        ((492 * T * P - 369 * L2_ + 615 * T**2) * d1**2 - 1230 * P**2 + 615 * L2_ - 615 * T**2) * d3**4
        + (-1968 * T * G * d1**3 + 3280 * G * P * d1) * d3**3
        + ((-156 * P**2 + 312 * T * P + 234 * L2_ + 1476 * G**2 - 390 * T**2) * d1**4 + (-390 * L2_ - 2460 * G**2 + 390 * T**2) * d1**2) * d3**2
        + (-624 * G * P + 624 * T * G) * d1**5 * d3
        + (36 * P**2 - 36 * T * P - 9 * L2_ - 156 * G**2 + 15 * T**2) * d1**6
        + (-10 * P**2 + 15 * L2_ + 260 * G**2 - 15 * T**2) * d1**4
    ) / (4 * d1**4 * d2**5)
    return {k: float(v) for k, v in K.items()}


def k2_series(Gamma2, Psi1, Gamma3, delta1, delta2, delta3, L1, eps: float, mu: float) -> float:
    """Truncated series ``eps^2 mu^6 sum mu^i eps^j Kbar_ij`` (with the outer constant set to 1)."""
    K = kbar_coefficients(Gamma2, Psi1, Gamma3, delta1, delta2, delta3, L1)
    return eps**2 * mu**6 * sum(mu**i * eps**j * K[i, j] for i in range(3) for j in range(3))


