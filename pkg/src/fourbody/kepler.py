"""Two-body primitives: Kepler's equation, anomalies, planar ellipse states.

The Kepler problem used throughout is ``H = p^2/(2 mu) - mu M / |q|`` with a
reduced mass ``mu`` and an attracting mass ``M``; its action is
``L = mu sqrt(M a)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from .errors import DomainError

TWO_PI = 2.0 * np.pi


def wrap_angle(x: ArrayLike) -> np.ndarray | float:
    """Reduce angles to ``[0, 2 pi)``."""
    r = np.mod(x, TWO_PI)
    # np.mod can return exactly 2 pi for tiny negative inputs
    r = np.where(r >= TWO_PI, 0.0, r)
    return float(r) if np.ndim(r) == 0 else r


def _check_ecc(e: np.ndarray) -> None:
    if not np.all(np.isfinite(e)):
        raise DomainError("eccentricity must be finite")
    if np.any(e < 0.0) or np.any(e >= 1.0):
        raise DomainError("eccentricity must satisfy 0 <= e < 1")


def solve_kepler(e: ArrayLike, ell: ArrayLike, tol: float = 1e-15, maxiter: int = 100):
    """Solve ``E - e sin E = ell`` for the eccentric anomaly.

    Newton's method seeded at ``ell + e sin ell``, with every iterate kept
    inside the bracket ``[M - e, M + e]`` (``M`` the reduced mean anomaly) by
    falling back to bisection. Works elementwise on arrays.

    Returns:
        Eccentric anomaly in ``[0, 2 pi)`` (scalar in, scalar out).
    """
    e_arr = np.asarray(e, dtype=float)
    ell_arr = np.asarray(ell, dtype=float)
    _check_ecc(e_arr)
    if not np.all(np.isfinite(ell_arr)):
        raise DomainError("mean anomaly must be finite")
    e_b, m = np.broadcast_arrays(e_arr, np.mod(ell_arr, TWO_PI))
    e_b = e_b.astype(float)
    m = m.astype(float)
    lo = m - e_b
    hi = m + e_b
    x = m + e_b * np.sin(m)
    for _ in range(maxiter):
        f = x - e_b * np.sin(x) - m
        lo = np.where(f < 0.0, x, lo)
        hi = np.where(f > 0.0, x, hi)
        step = f / (1.0 - e_b * np.cos(x))
        xn = x - step
        bad = (xn <= lo) | (xn >= hi) | ~np.isfinite(xn)
        xn = np.where(bad, 0.5 * (lo + hi), xn)
        done = np.abs(xn - x) <= tol * (1.0 + np.abs(xn))
        x = xn
        if np.all(done):
            break
    # one polishing Newton step
    x = x - (x - e_b * np.sin(x) - m) / (1.0 - e_b * np.cos(x))
    out = wrap_angle(x)
    return float(out) if np.ndim(out) == 0 else out


def kepler_residual(e: ArrayLike, ell: ArrayLike, E: ArrayLike) -> np.ndarray:
    """Residual of Kepler's equation, reduced to ``(-pi, pi]``."""
    r = np.asarray(E) - np.asarray(e) * np.sin(E) - np.asarray(ell)
    return np.angle(np.exp(1j * r))


def true_from_eccentric(e: ArrayLike, E: ArrayLike):
    """True anomaly from the eccentric anomaly, on the branch that tracks ``E``."""
    e = np.asarray(e, dtype=float)
    E = np.asarray(E, dtype=float)
    half = np.arctan2(np.sqrt(1.0 + e) * np.sin(0.5 * E), np.sqrt(1.0 - e) * np.cos(0.5 * E))
    v = 2.0 * half
    # keep v within pi of E so the branch follows E continuously
    v = v + TWO_PI * np.round((E - v) / TWO_PI)
    return float(v) if np.ndim(v) == 0 else v


def true_anomaly(e: ArrayLike, ell: ArrayLike):
    """True anomaly corresponding to the mean anomaly ``ell``.

    Uses ``tan(v/2) = sqrt((1+e)/(1-e)) tan(E/2)``; the result lies in
    ``[0, 2 pi)`` together with ``E`` and is monotone in ``ell`` over a period.
    """
    E = solve_kepler(e, ell)
    v = true_from_eccentric(e, E)
    return wrap_angle(v)


def mean_from_eccentric(e: ArrayLike, E: ArrayLike):
    return wrap_angle(np.asarray(E) - np.asarray(e) * np.sin(E))


@dataclass(frozen=True)
class EllipseElements:
    """Semimajor axis, eccentricity and mean anomaly of a Kepler ellipse."""

    a: float
    e: float
    mean_anomaly: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.a) and self.a > 0.0):
            raise DomainError("semimajor axis must be positive")
        _check_ecc(np.asarray(self.e))
        if not np.isfinite(self.mean_anomaly):
            raise DomainError("mean anomaly must be finite")
        object.__setattr__(self, "mean_anomaly", wrap_angle(self.mean_anomaly))


@dataclass(frozen=True)
class KeplerAction:
    """Action ``L = mu sqrt(M a)`` of a Kepler problem."""

    L: float
    mu: float
    M: float

    def __post_init__(self) -> None:
        if not (self.L > 0.0 and self.mu > 0.0 and self.M > 0.0):
            raise DomainError("L, mu and M must be positive")

    @property
    def semimajor_axis(self) -> float:
        return semimajor_axis_from_action(self.L, self.mu, self.M)

    @classmethod
    def from_elements(cls, el: EllipseElements, mu: float, M: float) -> KeplerAction:
        return cls(action_from_elements(el.a, mu, M), mu, M)


def action_from_elements(a: ArrayLike, mu: ArrayLike, M: ArrayLike):
    """Kepler action ``L = mu sqrt(M a)``."""
    return np.asarray(mu) * np.sqrt(np.asarray(M) * np.asarray(a)) * 1.0


def angular_momentum_from_elements(a, e, mu, M):
    """Norm of the angular momentum, ``L sqrt(1 - e^2)``."""
    return action_from_elements(a, mu, M) * np.sqrt(1.0 - np.asarray(e) ** 2)


def semimajor_axis_from_action(L: ArrayLike, mu: ArrayLike, M: ArrayLike):
    """Inverse of :func:`action_from_elements`: ``a = L^2 / (mu^2 M)``."""
    return np.asarray(L) ** 2 / (np.asarray(mu) ** 2 * np.asarray(M)) * 1.0


def eccentricity_from_actions(L: ArrayLike, G: ArrayLike):
    """Eccentricity ``sqrt(1 - G^2/L^2)`` from the action ``L`` and ``G = |C|``."""
    L = np.asarray(L, dtype=float)
    G = np.asarray(G, dtype=float)
    if np.any(G <= 0.0) or np.any(G > L):
        raise DomainError("need 0 < G <= L")
    e = np.sqrt(np.maximum(0.0, 1.0 - (G / L) ** 2))
    return float(e) if np.ndim(e) == 0 else e


def planar_state(el: EllipseElements, mu: float, M: float) -> tuple[np.ndarray, np.ndarray]:
    """Position and momentum in the orbital plane, pericenter on the first axis.

    The motion is counter-clockwise, so the angular momentum points along the
    positive normal of the plane.
    """
    a, e = el.a, el.e
    E = solve_kepler(e, el.mean_anomaly)
    cE, sE = np.cos(E), np.sin(E)
    b = a * np.sqrt(1.0 - e * e)
    q = np.array([a * (cE - e), b * sE])
    n = np.sqrt(M / a**3)
    Edot = n / (1.0 - e * cE)
    v = np.array([-a * sE * Edot, b * cE * Edot])
    return q, mu * v


def kepler_energy(q: np.ndarray, p: np.ndarray, mu: float, M: float) -> float:
    return float(p @ p / (2.0 * mu) - mu * M / np.linalg.norm(q))


def elements_from_state(q: np.ndarray, p: np.ndarray, mu: float, M: float) -> dict:
    """Osculating elements of a 3D Kepler state.

    Returns a dict with ``a, e, mean_anomaly, true_anomaly, C`` (angular
    momentum vector) and ``pericenter`` (unit vector, or ``None`` when the
    orbit is circular to rounding).
    """
    from .errors import NonElliptic

    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    r = np.linalg.norm(q)
    v = p / mu
    h_energy = 0.5 * v @ v - M / r
    if h_energy >= 0.0:
        raise NonElliptic("Kepler energy is non-negative")
    a = -M / (2.0 * h_energy)
    h = np.cross(q, v)
    evec = np.cross(v, h) / M - q / r
    e = float(np.linalg.norm(evec))
    C = mu * h
    if e > 1e-14:
        cosE = (1.0 - r / a) / e
        sinE = (q @ v) / (e * np.sqrt(M * a))
        E = np.arctan2(sinE, cosE)
        ell = wrap_angle(E - e * np.sin(E))
        nu = wrap_angle(true_from_eccentric(e, E))
        peri = evec / e
    else:
        ell = nu = float("nan")
        peri = None
    return {"a": a, "e": e, "mean_anomaly": ell, "true_anomaly": nu, "C": C, "pericenter": peri}
