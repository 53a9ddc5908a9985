"""Kozai saddle of the leading inner Hamiltonian and its explicit separatrix.

For ``0 < G2 < L1 sqrt(3/5)`` (``G2`` the localized action ``Gamma2~``)
the flow of :func:`fourbody.hamiltonians.h0_12` in ``(gamma1, Gamma1)`` has
two hyperbolic equilibria on the circular orbit ``Gamma1 = L1`` joined by a
heteroclinic orbit with a closed-form time parametrization.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad, solve_ivp

from .errors import NumericalError, OutOfRange
from .hamiltonians import grad_h0_12


@dataclass(frozen=True)
class SaddleData:
    gamma1_min: float
    gamma1_max: float
    chi: float
    A2: float
    Gamma2: float
    L1: float

    @property
    def energy(self) -> float:
        """Value of ``h0_12`` on the saddles and the separatrix."""
        return self.Gamma2**2 / self.L1**2


@dataclass(frozen=True)
class SeparatrixPoint:
    t: np.ndarray | float
    gamma1: np.ndarray | float
    Gamma1: np.ndarray | float
    gamma2: np.ndarray | float
    Gamma2: float
    gamma2_0: float


def saddle_exists(Gamma2: float, L1: float) -> bool:
    return 0.0 < Gamma2 < L1 * np.sqrt(3.0 / 5.0)


def saddle(Gamma2: float, L1: float) -> SaddleData:
    """Equilibria ``sin^2 g1 = 2 / (5 (1 - G2^2/L1^2))`` and the constants ``chi``, ``A2``.

    Raises:
        OutOfRange: ``Gamma2`` outside ``(0, L1 sqrt(3/5))``.
    """
    if not saddle_exists(Gamma2, L1):
        raise OutOfRange(f"no saddle for Gamma2={Gamma2} (need 0 < Gamma2 < L1 sqrt(3/5))")
    r = Gamma2 / L1
    w = np.sqrt(1.0 - 5.0 * r * r / 3.0)
    chi = np.sqrt(2.0 / 3.0) * r / w
    A2 = 6.0 / L1 * np.sqrt(2.0 / 3.0) * w
    gmin = float(np.arcsin(np.sqrt(2.0 / (5.0 * (1.0 - r * r)))))
    return SaddleData(gmin, float(np.pi - gmin), float(chi), float(A2), float(Gamma2), float(L1))


def separatrix_profile(t, sd: SaddleData):
    """``(gamma1, Gamma1, phase)`` along the separatrix; ``gamma2 = gamma2_0 + phase``."""
    t = np.asarray(t, dtype=float)
    sh = np.sinh(sd.A2 * t)
    ch = np.cosh(sd.A2 * t)
    cos_g1 = np.sqrt(3.0 / 5.0) * sh / np.sqrt(sd.chi**2 + (1.0 + sd.chi**2) * sh**2)
    gamma1 = np.arccos(np.clip(cos_g1, -1.0, 1.0))
    with np.errstate(over="ignore", invalid="ignore"):
        Gamma1 = sd.Gamma2 * np.sqrt(5.0 / 3.0) * np.sqrt(1.0 + 0.6 * (sd.L1 / sd.Gamma2) ** 2 * sh**2) / ch
    # cosh overflow far out: the limit is the circular orbit
    Gamma1 = np.where(np.isfinite(Gamma1), Gamma1, sd.L1)
    phase = 2.0 * sd.Gamma2 * t / sd.L1**2 + np.arctan(np.tanh(sd.A2 * t) / sd.chi)
    return gamma1, Gamma1, phase


def separatrix_eccentricity(t, sd: SaddleData):
    """``sqrt(1 - Gamma1^2/L1^2) = sqrt(1 - 5 G2^2/(3 L1^2)) / cosh(A2 t)`` without cancellation."""
    with np.errstate(over="ignore"):
        return np.sqrt(1.0 - 5.0 * sd.Gamma2**2 / (3.0 * sd.L1**2)) / np.cosh(sd.A2 * np.asarray(t, dtype=float))


def separatrix_point(t, Gamma2: float, gamma2_0: float, L1: float) -> SeparatrixPoint:
    """Point(s) of the heteroclinic orbit at time ``t`` (scalar or array).

    At ``t = 0`` the orbit crosses ``gamma1 = pi/2``; it leaves the
    ``gamma1_max`` saddle as ``t -> -inf`` and reaches ``gamma1_min``.
    """
    sd = saddle(Gamma2, L1)
    t_arr = np.asarray(t, dtype=float)
    gamma1, Gamma1, phase = separatrix_profile(t_arr, sd)
    g2 = gamma2_0 + phase
    if np.ndim(t) == 0:
        return SeparatrixPoint(float(t_arr), float(gamma1), float(Gamma1), float(g2), Gamma2, gamma2_0)
    return SeparatrixPoint(t_arr, gamma1, Gamma1, g2, Gamma2, gamma2_0)


def separatrix_relation(gamma1, Gamma1, Gamma2):
    """``(1 - G2^2/G1^2) sin^2 g1``; equals ``2/5`` on the separatrix."""
    return (1.0 - Gamma2**2 / np.asarray(Gamma1) ** 2) * np.sin(gamma1) ** 2


def h012_flow(gamma1, Gamma1, Gamma2, L1):
    """Hamilton's equations of ``h0_12``: ``(dgamma1/dt, dGamma1/dt, dgamma2/dt)``."""
    d_g, d_G, d_T = grad_h0_12(gamma1, Gamma1, Gamma2, L1)
    return d_G, -d_g, d_T


def shadow_separatrix(Gamma2: float, L1: float, T: float | None = None, rtol: float = 1e-12, gamma2_0: float = 0.0):
    """Integrate the ``h0_12`` flow from ``separatrix_point(-T)`` to ``+T``.

    Returns ``(max_error, times, numeric, exact)`` where the error is the
    largest deviation of ``(gamma1, Gamma1, gamma2)`` from the closed form
    over the sampled times.  ``T`` defaults to ``5 / A2``.
    """
    sd = saddle(Gamma2, L1)
    T = 5.0 / sd.A2 if T is None else T
    p0 = separatrix_point(-T, Gamma2, gamma2_0, L1)

    def rhs(_t, y):
        a, b, c = h012_flow(y[0], y[1], Gamma2, L1)
        return [a, b, c]

    ts = np.linspace(-T, T, 201)
    sol = solve_ivp(rhs, (-T, T), [p0.gamma1, p0.Gamma1, p0.gamma2], method="DOP853", rtol=rtol, atol=rtol * 1e-2, t_eval=ts)
    if not sol.success:
        raise NumericalError(sol.message)
    ex = separatrix_point(ts, Gamma2, gamma2_0, L1)
    exact = np.vstack([ex.gamma1, ex.Gamma1, ex.gamma2])
    err = float(np.max(np.abs(sol.y - exact)))
    return err, ts, sol.y, exact


def phase_shift_gamma2(Gamma2: float, L1: float) -> float:
    """Total phase gained by ``gamma2`` along the separatrix: ``2 arctan(1/chi)``."""
    sd = saddle(Gamma2, L1)
    return float(2.0 * np.arctan(1.0 / sd.chi))


def phase_shift_psi1(Gamma2: float, L1: float, prefactor: float = 1.0) -> float:
    """``(L1/6) sqrt(3/2) G2 sqrt(1 - 5 G2^2 / (3 L1^2))`` times ``prefactor`` (the ``C12 beta2`` constant)."""
    saddle(Gamma2, L1)
    return float(prefactor * L1 / 6.0 * np.sqrt(1.5) * Gamma2 * np.sqrt(1.0 - 5.0 * Gamma2**2 / (3.0 * L1**2)))


def gamma1_sq_integral_closed(Gamma2: float, L1: float) -> float:
    """``int (Gamma1(t)^2 - L1^2) dt = (5/3 G2^2 - L1^2) * 2 / A2``."""
    sd = saddle(Gamma2, L1)
    return float((5.0 / 3.0 * Gamma2**2 - L1**2) * 2.0 / sd.A2)


def gamma1_sq_integral_numeric(Gamma2: float, L1: float, T: float | None = None) -> float:
    """Quadrature of ``Gamma1(t)^2 - L1^2`` along the separatrix, truncated at ``|t| = T``.

    The integrand decays like ``exp(-2 A2 |t|)``; the default ``T = 40/A2``
    leaves a tail far below double precision.
    """
    sd = saddle(Gamma2, L1)
    T = 40.0 / sd.A2 if T is None else T

    def f(t):
        return separatrix_point(t, Gamma2, 0.0, L1).Gamma1 ** 2 - L1**2

    edges = [-T, -5.0 / sd.A2, 0.0, 5.0 / sd.A2, T]
    total = 0.0
    for a, b in itertools.pairwise(edges):
        v, _ = quad(f, a, b, epsabs=1e-15, epsrel=1e-12, limit=200)
        total += v
    return float(total)


def phase_shift_psi1_numeric(Gamma2: float, L1: float, prefactor: float = 1.0, T: float | None = None) -> float:
    """``-(1/2) (G2/L1^2) * prefactor * int (Gamma1^2 - L1^2) dt`` by quadrature."""
    return float(-0.5 * Gamma2 / L1**2 * prefactor * gamma1_sq_integral_numeric(Gamma2, L1, T))


def sample_separatrix(Gamma2: float, L1: float, n: int = 401, span: float = 10.0, gamma2_0: float = 0.0) -> np.ndarray:
    """Rows ``(t, gamma1, Gamma1, gamma2)`` for ``t`` uniform in ``[-span/A2, span/A2]``."""
    sd = saddle(Gamma2, L1)
    t = np.linspace(-span / sd.A2, span / sd.A2, n)
    p = separatrix_point(t, Gamma2, gamma2_0, L1)
    return np.column_stack([t, p.gamma1, p.Gamma1, p.gamma2])
