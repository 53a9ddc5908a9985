"""Poincaré-Melnikov potentials along the Kozai separatrix.

Every potential is available twice: as a regularized time integral of a
secular term along :func:`fourbody.separatrix.separatrix_point`, and as a
closed form built from :func:`kappa`.  :func:`melnikov_curve` tabulates both
on a uniform angle grid.
"""

from __future__ import annotations

import csv
import itertools
import json
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad, quad_vec

from .hamiltonians import c_constants, h2_12, h2_23, h5_23, j_functions
from .separatrix import saddle, separatrix_eccentricity, separatrix_profile


def kappa(x, chi: float, L1: float):
    """``sqrt(2/3) (L1^2/chi) (1 - x / sinh x)``, continuous at ``x = 0``."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    xs = np.where(small, 1.0, x)
    ratio = np.where(small, 1.0 - x * x / 6.0 + 7.0 * x**4 / 360.0, xs / np.sinh(xs))
    out = np.sqrt(2.0 / 3.0) * L1**2 / chi * (1.0 - ratio)
    return float(out) if out.ndim == 0 else out


def kappa_at(Gamma2: float, L1: float) -> float:
    """``kappa(pi G2 / (A2 L1^2))`` for the saddle at ``Gamma2``."""
    sd = saddle(Gamma2, L1)
    return kappa(np.pi * Gamma2 / (sd.A2 * L1**2), sd.chi, L1)


def _frequency(Gamma2: float, L1: float) -> float:
    sd = saddle(Gamma2, L1)
    return 2.0 * Gamma2 / (sd.A2 * L1**2)


def melnikov_L1_numeric(Gamma2: float, L1: float, T: float = 40.0, N: int = 400) -> complex:
    """Real-axis quadrature of the first separatrix potential coefficient.

    Evaluates ``(i/2) sqrt(2/3) (G2/(A2 chi)) [int_0^T f+ + int_-T^0 f-]``
    with ``f(tau) = (tanh tau -+ 1) exp(i w tau)`` and
    ``w = 2 G2 / (A2 L1^2)``.  ``T`` is in units of ``tau = A2 t``; ``N``
    bounds the number of adaptive subintervals per half-line.
    """
    sd = saddle(Gamma2, L1)
    w = _frequency(Gamma2, L1)
    pref = 0.5 * np.sqrt(2.0 / 3.0) * Gamma2 / (sd.A2 * sd.chi)

    def half(sign: int, weight: str) -> float:
        # sign=+1: int_0^T (tanh - 1) trig(w tau); sign=-1: int_-T^0 (tanh + 1) trig
        g = (lambda s: np.tanh(s) - 1.0) if sign > 0 else (lambda s: np.tanh(s) + 1.0)
        lo, hi = (0.0, T) if sign > 0 else (-T, 0.0)
        v, _ = quad(g, lo, hi, weight=weight, wvar=w, epsabs=1e-15, epsrel=1e-13, limit=N)
        return v

    re_int = half(+1, "cos") + half(-1, "cos")
    im_int = half(+1, "sin") + half(-1, "sin")
    # (i/2) K (re + i im) = -(K/2) im + i (K/2) re, with pref = K/2
    return complex(-pref * im_int, pref * re_int)


def melnikov_L2_23(gamma2, psi1, Gamma2: float, delta1: float, L1: float):
    """``kappa(pi G2/(A2 L1^2)) [c1 cos g2 cos psi1 + c2 sin g2 sin psi1]``."""
    c1, c2 = c_constants(delta1)
    return kappa_at(Gamma2, L1) * (c1 * np.cos(gamma2) * np.cos(psi1) + c2 * np.sin(gamma2) * np.sin(psi1))


def melnikov_L5_23(gamma2, psi1, gamma3, Gamma2: float, delta1: float, delta3: float, L1: float):
    """``kappa(...) (J1 cos g2 + J2 sin g2)``."""
    J1, J2 = j_functions(psi1, gamma3, delta1, delta3)
    return kappa_at(Gamma2, L1) * (J1 * np.cos(gamma2) + J2 * np.sin(gamma2))


def l2_12_coefficient(Gamma2: float, L1: float, A_oct: float = 1.0) -> float:
    """Amplitude multiplying ``sin g2`` in :func:`melnikov_L2_12`."""
    sd = saddle(Gamma2, L1)
    x = np.pi * Gamma2 / (sd.A2 * L1**2)
    # e^x / (1 + e^{2x}) = 1 / (2 cosh x)
    return float(np.sqrt(1.5) * np.pi * A_oct / (12.0 * np.sqrt(15.0) * L1 * np.cosh(x)) * (24.0 * L1**2 - 37.0 * Gamma2**2))


def melnikov_L2_12(gamma2, Gamma2: float, L1: float, A_oct: float = 1.0):
    """Octupolar inner-pair potential, proportional to ``sin g2``."""
    return l2_12_coefficient(Gamma2, L1, A_oct) * np.sin(gamma2)


# direct regularized quadratures ---------------------------------------------


def regularized_integral(
    term: Callable[..., np.ndarray],
    Gamma2: float,
    L1: float,
    gamma2_0,
    T: float | None = None,
) -> np.ndarray | float:
    """``int [term(separatrix) - term(saddle)] dt`` over ``|t| <= T``.

    ``term(gamma1, Gamma1, gamma2, ecc)`` must broadcast over ``gamma2_0``
    (any shape); ``ecc`` is the inner eccentricity, passed separately because
    ``1 - Gamma1^2/L1^2`` cancels badly near the saddle.  The saddle comparison uses ``Gamma1 = L1``, the saddle angle of
    the half-line (``gamma1_min`` for ``t > 0``) and the phase
    ``gamma2_0 + 2 G2 t / L1^2 +- arctan(1/chi)``.  Adaptive Gauss-Kronrod
    on four segments; ``T`` defaults to ``40 / A2``.
    """
    sd = saddle(Gamma2, L1)
    T = 40.0 / sd.A2 if T is None else T
    g0 = np.asarray(gamma2_0, dtype=float)
    delta = np.arctan(1.0 / sd.chi)

    def f(t):
        g1, G1, phase = separatrix_profile(t, sd)
        if t >= 0.0:
            g1s, shift = sd.gamma1_min, delta
        else:
            g1s, shift = sd.gamma1_max, -delta
        lin = 2.0 * Gamma2 * t / L1**2
        ecc = separatrix_eccentricity(t, sd)
        return np.asarray(term(g1, G1, g0 + phase, ecc) - term(g1s, L1, g0 + lin + shift, 0.0), dtype=float)

    cut = min(5.0 / sd.A2, T)
    edges = [-T, -cut, 0.0, cut, T]
    f0 = f(0.0)
    total = np.zeros(f0.shape)
    # absolute floor tied to the integrand size so roundoff does not stall refinement
    epsabs = 1e-12 * max(1.0, float(np.max(np.abs(f0))))
    for a, b in itertools.pairwise(edges):
        if b > a:
            v, _ = quad_vec(f, a, b, epsabs=epsabs, epsrel=1e-10, limit=2000)
            total = total + v
    return float(total) if total.ndim == 0 else total


def melnikov_L2_23_numeric(gamma2, psi1, Gamma2: float, delta1: float, L1: float, T: float | None = None):
    psi1 = np.asarray(psi1, dtype=float)
    term = lambda g1, G1, g2, e: h2_23(g2, G1, Gamma2, psi1, delta1)
    return regularized_integral(term, Gamma2, L1, np.broadcast_to(gamma2, np.broadcast(gamma2, psi1).shape), T)


def melnikov_L5_23_numeric(gamma2, psi1, gamma3, Gamma2: float, delta1: float, delta3: float, L1: float, T: float | None = None):
    psi1 = np.asarray(psi1, dtype=float)
    term = lambda g1, G1, g2, e: h5_23(g2, G1, Gamma2, psi1, gamma3, delta1, delta3)
    return regularized_integral(term, Gamma2, L1, np.broadcast_to(gamma2, np.broadcast(gamma2, psi1, gamma3).shape), T)


def melnikov_L2_12_numeric(gamma2, Gamma2: float, L1: float, A_oct: float = 1.0, T: float | None = None):
    term = lambda g1, G1, g2, e: h2_12(g1, G1, g2, Gamma2, L1, ecc=e)
    return A_oct * regularized_integral(term, Gamma2, L1, gamma2, T)


def critical_times(gamma2, Gamma2: float, L1: float, alpha0: float = 1.0) -> tuple[float, float]:
    """Leading-order critical times ``(tau+, tau-)`` with ``w0 tau = g2 +- pi/2``, ``w0 = 2 alpha0 G2 / L1^2``."""
    if Gamma2 <= 0.0:
        raise ValueError("Gamma2 must be positive")
    w0 = 2.0 * alpha0 * Gamma2 / L1**2
    return (gamma2 + np.pi / 2.0) / w0, (gamma2 - np.pi / 2.0) / w0


# curves ---------------------------------------------------------------------


@dataclass
class MelnikovCurve:
    name: str
    Gamma2: float
    grids: dict[str, np.ndarray]
    numeric: np.ndarray
    closed: np.ndarray
    params: dict = field(default_factory=dict)

    @property
    def deviation(self) -> np.ndarray:
        return np.abs(self.numeric - self.closed)

    @property
    def max_deviation(self) -> float:
        return float(np.max(self.deviation))

    @property
    def relative_deviation(self) -> float:
        scale = float(np.max(np.abs(self.closed)))
        return self.max_deviation / scale if scale > 0.0 else self.max_deviation

    def rows(self) -> list[tuple]:
        names = list(self.grids)
        mesh = np.meshgrid(*[self.grids[k] for k in names], indexing="ij")
        flat = [m.ravel() for m in mesh]
        return [tuple(float(f[i]) for f in flat) + (float(n), float(c), float(abs(n - c))) for i, (n, c) in enumerate(zip(self.numeric.ravel(), self.closed.ravel()))]

    def header(self) -> list[str]:
        return list(self.grids) + ["numeric", "closed", "abs_dev"]

    def summary(self) -> dict:
        return {
            "name": self.name,
            "Gamma2": self.Gamma2,
            "params": self.params,
            "max_deviation": self.max_deviation,
            "relative_deviation": self.relative_deviation,
        }

    def write_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("# " + json.dumps(self.summary()) + "\n")
            w = csv.writer(fh)
            w.writerow(self.header())
            w.writerows(self.rows())


def uniform_torus_grid(n: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(n) / n


def melnikov_curve(
    name: str,
    Gamma2: float,
    L1: float,
    n: int = 8,
    delta1: float = 0.5,
    delta3: float = 0.2,
    gamma3: float = 0.3,
    A_oct: float = 1.0,
) -> MelnikovCurve:
    """Tabulate a potential (``"L2_23"``, ``"L5_23"`` or ``"L2_12"``) both ways.

    The two-angle potentials use an ``n x n`` grid in ``(gamma2, psi1)``;
    ``L2_12`` depends on ``gamma2`` only.
    """
    g = uniform_torus_grid(n)
    params = {"L1": L1, "delta1": delta1, "delta3": delta3, "gamma3": gamma3, "A_oct": A_oct}
    if name == "L2_12":
        num = np.asarray(melnikov_L2_12_numeric(g, Gamma2, L1, A_oct))
        clo = melnikov_L2_12(g, Gamma2, L1, A_oct)
        return MelnikovCurve(name, Gamma2, {"gamma2": g}, num, np.asarray(clo), params)
    if name == "L2_23":
        num = melnikov_L2_23_numeric(g[:, None], g[None, :], Gamma2, delta1, L1)
        clo = melnikov_L2_23(g[:, None], g[None, :], Gamma2, delta1, L1)
    elif name == "L5_23":
        num = melnikov_L5_23_numeric(g[:, None], g[None, :], gamma3, Gamma2, delta1, delta3, L1)
        clo = melnikov_L5_23(g[:, None], g[None, :], gamma3, Gamma2, delta1, delta3, L1)
    else:
        raise ValueError(f"unknown potential {name!r}")
    return MelnikovCurve(name, Gamma2, {"gamma2": g, "psi1": g}, num, np.asarray(clo), params)
