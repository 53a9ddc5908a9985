"""Coordinate systems of the four-body problem and the maps between them.

Inertial positions/momenta are reduced by translations with Jacobi
coordinates, then by rotations with Deprit's action-angle variables.  The
localized "tilde" variables, Poincare variables for the inner eccentricity,
inclination and angular-momentum reporting, and finite-difference Poisson
brackets live here as well.

Index conventions: bodies are 0..3, Jacobi vectors 0..3 (0 is the centre of
mass row), Deprit variables are indexed 1..3 in names and 0..2 in arrays.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegenerateNode, DomainError
from .kepler import (
    EllipseElements,
    elements_from_state,
    planar_state,
    semimajor_axis_from_action,
    wrap_angle,
)

DEPRIT_ANGLES = ("l1", "l2", "l3", "g1", "g2", "g3", "psi1", "psi2", "psi3")
DEPRIT_ACTIONS = ("L1", "L2", "L3", "G1", "G2", "G3", "Psi1", "Psi2", "Psi3")
DEPRIT_NAMES = DEPRIT_ANGLES + DEPRIT_ACTIONS
TILDE_NAMES = ("gamma1", "Gamma1", "gamma2", "Gamma2", "psi1", "Psi1", "gamma3", "Gamma3")

NODE_TOL = 1e-9


# ---------------------------------------------------------------------------
# masses


@dataclass(frozen=True)
class MassSet:
    """Four masses and the constants derived from them.

    ``M[j] = m0 + ... + mj``, ``sigma(i, j) = m_i / M_j`` and the reduced
    masses satisfy ``1/mu_j = 1/M_{j-1} + 1/m_j`` (``mu[0]`` is unused and set
    to ``nan``).  ``sigma_tilde[j][n]`` holds the Legendre coefficients of the
    pair (j, j+1) for ``n = 0..nmax``.
    """

    m: tuple[float, float, float, float]
    M: tuple[float, float, float, float]
    mu: tuple[float, float, float, float]
    sigma_tilde: dict[int, tuple[float, ...]]
    nmax: int

    def sigma(self, i: int, j: int) -> float:
        return self.m[i] / self.M[j]

    def to_dict(self) -> dict:
        return {"m0": self.m[0], "m1": self.m[1], "m2": self.m[2], "m3": self.m[3]}


def derive_masses(m0: float, m1: float, m2: float, m3: float, nmax: int = 12) -> MassSet:
    """Build a :class:`MassSet`; all masses must be positive and finite."""
    m = tuple(float(x) for x in (m0, m1, m2, m3))
    if not all(np.isfinite(x) and x > 0.0 for x in m):
        raise DomainError("all masses must be positive")
    M = tuple(float(np.sum(m[: j + 1])) for j in range(4))
    mu = (float("nan"),) + tuple(1.0 / (1.0 / M[j - 1] + 1.0 / m[j]) for j in (1, 2, 3))
    s01, s11 = m[0] / M[1], m[1] / M[1]
    s02, s12, s22 = m[0] / M[2], m[1] / M[2], m[2] / M[2]
    st1 = tuple(s01 ** (n - 1) + (-1) ** n * s11 ** (n - 1) if n >= 1 else float("nan") for n in range(nmax + 1))
    st2 = tuple((s02 + s12) ** (n - 1) + (-1) ** n * s22 ** (n - 1) if n >= 1 else float("nan") for n in range(nmax + 1))
    return MassSet(m=m, M=M, mu=mu, sigma_tilde={1: st1, 2: st2}, nmax=nmax)


# ---------------------------------------------------------------------------
# states


@dataclass
class CartesianState:
    """Inertial positions ``x`` and momenta ``y``, both shaped (4, 3)."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        self.x = np.asarray(self.x, dtype=float).reshape(4, 3)
        self.y = np.asarray(self.y, dtype=float).reshape(4, 3)
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.y))):
            raise DomainError("non-finite Cartesian state")


@dataclass
class JacobiState:
    """Jacobi vectors ``q`` and conjugate momenta ``p``, shaped (4, 3).

    Row 0 carries the translation part (``q0 = x0``, ``p0`` = total momentum);
    rows 1..3 are the relative vectors used by the reduced problem.
    """

    q: np.ndarray
    p: np.ndarray

    def __post_init__(self) -> None:
        self.q = np.asarray(self.q, dtype=float).reshape(4, 3)
        self.p = np.asarray(self.p, dtype=float).reshape(4, 3)

    def flat(self) -> np.ndarray:
        """The reduced 18-vector ``(q1, q2, q3, p1, p2, p3)``."""
        return np.concatenate([self.q[1:].ravel(), self.p[1:].ravel()])

    def with_flat(self, z: np.ndarray) -> JacobiState:
        q = self.q.copy()
        p = self.p.copy()
        q[1:] = np.asarray(z[:9]).reshape(3, 3)
        p[1:] = np.asarray(z[9:]).reshape(3, 3)
        return JacobiState(q, p)

    def angular_momenta(self) -> np.ndarray:
        return np.cross(self.q[1:], self.p[1:])


@dataclass
class DepritState:
    """Deprit variables ``(l_j, L_j, g_j, G_j, psi_j, Psi_j)``, j = 1..3.

    Each field is a length-3 array.  ``g`` and ``G`` hold the arguments of the
    pericentres and the norms of the partial angular momenta.
    """

    l: np.ndarray
    L: np.ndarray
    g: np.ndarray
    G: np.ndarray
    psi: np.ndarray
    Psi: np.ndarray

    def __post_init__(self) -> None:
        for name in ("l", "L", "g", "G", "psi", "Psi"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float).reshape(3).copy())

    def vector(self) -> np.ndarray:
        """Angles then actions, in the order of :data:`DEPRIT_NAMES`."""
        return np.concatenate([self.l, self.g, self.psi, self.L, self.G, self.Psi])

    @classmethod
    def from_vector(cls, v: np.ndarray) -> DepritState:
        v = np.asarray(v, dtype=float)
        return cls(l=v[0:3], g=v[3:6], psi=v[6:9], L=v[9:12], G=v[12:15], Psi=v[15:18])

    def check(self) -> None:
        """Validate the action inequalities of the chart."""
        L, G, P = self.L, self.G, self.Psi
        tol = 1e-12 * max(1.0, float(np.max(np.abs(L))))
        if np.any(G <= 0.0) or np.any(G > L + tol):
            raise DomainError("need 0 < G_j <= L_j")
        if not (abs(G[0] - G[1]) - tol <= P[0] <= G[0] + G[1] + tol):
            raise DomainError("Psi1 violates the triangle inequality")
        if not (abs(P[0] - G[2]) - tol <= P[1] <= P[0] + G[2] + tol):
            raise DomainError("Psi2 violates the triangle inequality")
        if abs(P[2]) > P[1] + tol:
            raise DomainError("|Psi3| must not exceed Psi2")


@dataclass
class TildeState:
    """Localized secular variables and the parameters that define them.

    ``Psi1 = Psi1_deprit - delta1 L2`` and ``Gamma3 = Psi2 - G3 - delta3 L2``
    are centred actions; ``Gamma2 = Psi1_deprit - G2``.  ``extras`` keeps the
    Deprit variables the reduction discards (mean anomalies, ``psi2``,
    ``psi3``, ``Psi3``) so the map can be inverted exactly.
    """

    gamma1: float
    Gamma1: float
    gamma2: float
    Gamma2: float
    psi1: float
    Psi1: float
    gamma3: float
    Gamma3: float
    delta1: float
    delta2: float
    delta3: float
    L1: float
    L2: float
    L3: float
    extras: dict = field(default_factory=dict)

    def vector(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in TILDE_NAMES], dtype=float)

    def with_vector(self, v: np.ndarray) -> TildeState:
        return replace(self, **{n: float(x) for n, x in zip(TILDE_NAMES, v)})

    def params(self) -> dict:
        return {k: getattr(self, k) for k in ("delta1", "delta2", "delta3", "L1", "L2", "L3")}


# ---------------------------------------------------------------------------
# inertial <-> Jacobi


def _jacobi_matrix(masses: MassSet) -> np.ndarray:
    s = masses.sigma
    return np.array(
        [
            [1.0, 0.0, 0.0, 0.0],
            [-1.0, 1.0, 0.0, 0.0],
            [-s(0, 1), -s(1, 1), 1.0, 0.0],
            [-s(0, 2), -s(1, 2), -s(2, 2), 1.0],
        ]
    )


def cartesian_to_jacobi(state: CartesianState, masses: MassSet) -> JacobiState:
    """Positions map by a lower-triangular matrix A, momenta by A^{-T}."""
    A = _jacobi_matrix(masses)
    q = A @ state.x
    p = np.linalg.solve(A.T, state.y)
    return JacobiState(q, p)


def jacobi_to_cartesian(state: JacobiState, masses: MassSet) -> CartesianState:
    A = _jacobi_matrix(masses)
    x = np.linalg.solve(A, state.q)
    y = A.T @ state.p
    return CartesianState(x, y)


# ---------------------------------------------------------------------------
# Deprit


def oriented_angle(z: np.ndarray, u: np.ndarray, v: np.ndarray) -> float:
    """Angle from ``u`` to ``v`` measured counter-clockwise about ``z``."""
    zn = z / np.linalg.norm(z)
    return float(wrap_angle(np.arctan2(zn @ np.cross(u, v), u @ v)))


def _rotate(v: np.ndarray, axis: np.ndarray, theta: float) -> np.ndarray:
    k = axis / np.linalg.norm(axis)
    return v * np.cos(theta) + np.cross(k, v) * np.sin(theta) + k * (k @ v) * (1.0 - np.cos(theta))


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def node_vectors(C: np.ndarray) -> dict[str, np.ndarray]:
    """Nodes ``nu1 = nu2 = C1 x C2``, ``nu3 = (C1+C2) x C3``, ``nu4 = k3 x C``."""
    C12 = C[0] + C[1]
    Ct = C12 + C[2]
    n12 = np.cross(C[0], C[1])
    return {"nu1": n12, "nu2": n12, "nu3": np.cross(C12, C[2]), "nu4": np.cross(np.array([0.0, 0.0, 1.0]), Ct)}


def node_margins(C: np.ndarray) -> np.ndarray:
    """Node norms relative to the products of the vectors that define them."""
    nodes = node_vectors(C)
    C12 = C[0] + C[1]
    Ct = C12 + C[2]
    k3 = np.array([0.0, 0.0, 1.0])
    return np.array(
        [
            np.linalg.norm(nodes["nu1"]) / (np.linalg.norm(C[0]) * np.linalg.norm(C[1])),
            np.linalg.norm(nodes["nu3"]) / (np.linalg.norm(C12) * np.linalg.norm(C[2])),
            np.linalg.norm(nodes["nu4"]) / (np.linalg.norm(k3) * np.linalg.norm(Ct)),
        ]
    )


def jacobi_to_deprit(state: JacobiState, masses: MassSet, node_tol: float = NODE_TOL) -> DepritState:
    """Deprit variables of a Jacobi state.

    Raises:
        NonElliptic: a Kepler energy is non-negative.
        DegenerateNode: a node vector is (relatively) shorter than ``node_tol``.
        DomainError: an orbit is circular, leaving its pericentre undefined.
    """
    els = [elements_from_state(state.q[j], state.p[j], masses.mu[j], masses.M[j]) for j in (1, 2, 3)]
    C = np.array([el["C"] for el in els])
    margins = node_margins(C)
    names = ("nu1", "nu3", "nu4")
    for name, mg in zip(names, margins):
        if not mg >= node_tol:
            raise DegenerateNode(f"node {name} vanishes (relative norm {mg:.3e})")
    nodes = node_vectors(C)
    C12 = C[0] + C[1]
    Ct = C12 + C[2]
    k1 = np.array([1.0, 0.0, 0.0])
    k3 = np.array([0.0, 0.0, 1.0])
    l = np.empty(3)
    L = np.empty(3)
    g = np.empty(3)
    G = np.empty(3)
    for j, el in enumerate(els):
        if el["pericenter"] is None:
            raise DomainError(f"orbit {j + 1} is circular; pericentre undefined")
        l[j] = el["mean_anomaly"]
        L[j] = masses.mu[j + 1] * np.sqrt(masses.M[j + 1] * el["a"])
        G[j] = np.linalg.norm(C[j])
        node = nodes["nu1"] if j < 2 else nodes["nu3"]
        g[j] = oriented_angle(C[j], node, el["pericenter"])
    psi = np.array(
        [
            oriented_angle(C12, nodes["nu3"], nodes["nu2"]),
            oriented_angle(Ct, nodes["nu4"], nodes["nu3"]),
            oriented_angle(k3, k1, nodes["nu4"]),
        ]
    )
    Psi = np.array([np.linalg.norm(C12), np.linalg.norm(Ct), Ct @ k3])
    return DepritState(l=l, L=L, g=g, G=G, psi=psi, Psi=Psi)


def _split(total: np.ndarray, node_dir: np.ndarray, n_first: float, n_second: float) -> tuple[np.ndarray, np.ndarray]:
    """Split ``total`` into ``A + B`` with given norms and ``A x B`` along ``node_dir``."""
    T = np.linalg.norm(total)
    t = total / T
    a = (n_first**2 + T**2 - n_second**2) / (2.0 * T)
    b2 = n_first**2 - a**2
    if b2 < -1e-12 * n_first**2:
        raise DomainError("actions violate a triangle inequality")
    b = -np.sqrt(max(b2, 0.0))
    A = a * t + b * np.cross(node_dir, t)
    return A, total - A


def angular_momenta_from_deprit(state: DepritState) -> np.ndarray:
    """The three partial angular momentum vectors ``C1, C2, C3`` (rows)."""
    k3 = np.array([0.0, 0.0, 1.0])
    P1, P2, P3 = state.Psi
    nu4 = np.array([np.cos(state.psi[2]), np.sin(state.psi[2]), 0.0])
    horiz = np.sqrt(max(P2**2 - P3**2, 0.0))
    Ct = P3 * k3 + horiz * np.cross(nu4, k3)
    nu3 = _rotate(nu4, Ct, state.psi[1])
    C12, C3 = _split(Ct, _unit(nu3), P1, state.G[2])
    nu2 = _rotate(nu3, C12, state.psi[0])
    C1, C2 = _split(C12, _unit(nu2), state.G[0], state.G[1])
    return np.array([C1, C2, C3])


def orbit_frames(state: DepritState) -> list[tuple[np.ndarray, np.ndarray]]:
    """Orthonormal in-plane bases ``(P, Q)`` of the three orbits.

    ``P`` points to the pericentre and ``Q = C/|C| x P``.
    """
    C = angular_momenta_from_deprit(state)
    nodes = node_vectors(C)
    out = []
    for j in range(3):
        node = nodes["nu1"] if j < 2 else nodes["nu3"]
        kz = _unit(C[j])
        e1 = _rotate(_unit(node), kz, state.g[j])
        out.append((e1, np.cross(kz, e1)))
    return out


def deprit_to_jacobi(state: DepritState, masses: MassSet, q0=None, p0=None) -> JacobiState:
    """Rebuild Jacobi vectors from Deprit variables (inverse of :func:`jacobi_to_deprit`)."""
    q = np.zeros((4, 3))
    p = np.zeros((4, 3))
    if q0 is not None:
        q[0] = q0
    if p0 is not None:
        p[0] = p0
    for j, (e1, e2) in enumerate(orbit_frames(state)):
        mu, M = masses.mu[j + 1], masses.M[j + 1]
        a = semimajor_axis_from_action(state.L[j], mu, M)
        e = np.sqrt(max(0.0, 1.0 - (state.G[j] / state.L[j]) ** 2))
        qq, pp = planar_state(EllipseElements(a, e, state.l[j]), mu, M)
        q[j + 1] = qq[0] * e1 + qq[1] * e2
        p[j + 1] = pp[0] * e1 + pp[1] * e2
    return JacobiState(q, p)


# ---------------------------------------------------------------------------
# Poisson brackets


def _angle_aware_diff(fp: np.ndarray, fm: np.ndarray, angle_mask: np.ndarray | None) -> np.ndarray:
    d = np.asarray(fp, dtype=float) - np.asarray(fm, dtype=float)
    if angle_mask is not None:
        d = np.where(angle_mask, np.angle(np.exp(1j * d)), d)
    return d


def jacobian_fd(
    func: Callable[[np.ndarray], np.ndarray],
    z: np.ndarray,
    h: float = 1e-4,
    angle_mask: np.ndarray | None = None,
    richardson: bool = True,
    scale: np.ndarray | None = None,
) -> np.ndarray:
    """Central-difference Jacobian with one Richardson extrapolation step.

    The step in coordinate ``k`` is ``h * scale[k]`` (default
    ``max(1, |z_k|)``).  ``angle_mask`` marks outputs that are angles; their
    differences are wrapped to ``(-pi, pi]`` before dividing by the step.
    """
    z = np.asarray(z, dtype=float)
    f0 = np.atleast_1d(func(z))
    J = np.empty((f0.size, z.size))
    scale = np.maximum(1.0, np.abs(z)) if scale is None else np.asarray(scale, dtype=float)
    for k in range(z.size):
        hk = h * scale[k]

        def d(step: float) -> np.ndarray:
            zp = z.copy()
            zm = z.copy()
            zp[k] += step
            zm[k] -= step
            return _angle_aware_diff(np.atleast_1d(func(zp)), np.atleast_1d(func(zm)), angle_mask) / (2.0 * step)

        if richardson:
            J[:, k] = (4.0 * d(0.5 * hk) - d(hk)) / 3.0
        else:
            J[:, k] = d(hk)
    return J


def bracket_matrix(Jf: np.ndarray, Jg: np.ndarray) -> np.ndarray:
    """Brackets ``{f_i, g_k} = df/dp . dg/dq - df/dq . dg/dp`` from Jacobians.

    Columns of the Jacobians are ordered ``(q, p)`` with equal halves.
    """
    n = Jf.shape[1] // 2
    return Jf[:, n:] @ Jg[:, :n].T - Jf[:, :n] @ Jg[:, n:].T


def jacobi_step_scale(state: JacobiState) -> np.ndarray:
    """Per-coordinate step scale: the norm of the 3-vector each entry belongs to."""
    blocks = np.concatenate([np.linalg.norm(state.q[1:], axis=1), np.linalg.norm(state.p[1:], axis=1)])
    return np.repeat(blocks, 3)


def poisson_bracket(
    f: Callable[[JacobiState], float],
    g: Callable[[JacobiState], float],
    state: JacobiState,
    h: float = 1e-4,
    f_is_angle: bool = False,
    g_is_angle: bool = False,
) -> float:
    """Numerical bracket of two observables of the reduced Jacobi state.

    With this convention ``{L1, l1} = 1`` (action first, angle second).
    """
    z = state.flat()
    sc = jacobi_step_scale(state)
    Jf = jacobian_fd(lambda w: np.array([f(state.with_flat(w))]), z, h, np.array([f_is_angle]), scale=sc)
    Jg = jacobian_fd(lambda w: np.array([g(state.with_flat(w))]), z, h, np.array([g_is_angle]), scale=sc)
    return float(bracket_matrix(Jf, Jg)[0, 0])


def canonical_deprit_table() -> np.ndarray:
    """Exact bracket table of the Deprit variables in :data:`DEPRIT_NAMES` order."""
    B = np.zeros((18, 18))
    for k in range(9):
        B[9 + k, k] = 1.0
        B[k, 9 + k] = -1.0
    return B


@dataclass
class SymplecticReport:
    max_error: float
    brackets: np.ndarray
    node_margins: np.ndarray
    ill_conditioned: bool
    passed: bool
    tolerance: float

    def to_dict(self) -> dict:
        return {
            "max_error": self.max_error,
            "node_margins": self.node_margins.tolist(),
            "ill_conditioned": self.ill_conditioned,
            "passed": self.passed,
            "tolerance": self.tolerance,
            "names": list(DEPRIT_NAMES),
            "brackets": self.brackets.tolist(),
        }


def verify_deprit_symplectic(
    state: JacobiState,
    masses: MassSet,
    h: float = 1e-4,
    tol: float = 1e-5,
    margin: float = 1e-3,
) -> SymplecticReport:
    """Compare the numerical 18x18 bracket table of the Deprit map with the canonical one.

    States whose node margins fall below ``margin`` are flagged as
    ill-conditioned and never reported as passing.
    """
    C = state.angular_momenta()
    margins = node_margins(C)
    ill = bool(np.any(margins < margin))
    mask = np.array([True] * 9 + [False] * 9)

    def dep(w: np.ndarray) -> np.ndarray:
        return jacobi_to_deprit(state.with_flat(w), masses, node_tol=0.0).vector()

    try:
        J = jacobian_fd(dep, state.flat(), h, mask, scale=jacobi_step_scale(state))
        B = bracket_matrix(J, J)
        err = float(np.max(np.abs(B - canonical_deprit_table())))
    except DomainError:
        B = np.full((18, 18), np.nan)
        err = float("inf")
        ill = True
    passed = (not ill) and err < tol
    return SymplecticReport(err, B, margins, ill, passed, tol)


def symplectic_defect(J: np.ndarray) -> float:
    """``max |J^T Omega J - Omega|`` for a Jacobian ordered ``(q, p)``."""
    n = J.shape[0] // 2
    Om = np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])
    return float(np.max(np.abs(J.T @ Om @ J - Om)))


# ---------------------------------------------------------------------------
# tilde variables


def deprit_to_tilde(state: DepritState, delta1: float, delta2: float | None, delta3: float) -> TildeState:
    """Localized variables around ``Psi1 = delta1 L2`` and ``Psi2 - G3 = delta3 L2``.

    ``delta2`` is the fixed ratio ``Psi2 / L3``; pass ``None`` to read it off
    the state.  A value inconsistent with the state is rejected.
    """
    L1, L2, L3 = state.L
    d2 = state.Psi[1] / L3
    if delta2 is not None and abs(delta2 - d2) > 1e-9 * max(1.0, abs(d2)):
        raise DomainError("delta2 must equal Psi2 / L3")
    Psi1, Psi2 = state.Psi[0], state.Psi[1]
    return TildeState(
        gamma1=float(state.g[0]),
        Gamma1=float(state.G[0]),
        gamma2=float(wrap_angle(-state.g[1])),
        Gamma2=float(Psi1 - state.G[1]),
        psi1=float(wrap_angle(state.psi[0] + state.g[1])),
        Psi1=float(Psi1 - delta1 * L2),
        gamma3=float(wrap_angle(-state.g[2])),
        Gamma3=float(Psi2 - state.G[2] - delta3 * L2),
        delta1=float(delta1),
        delta2=float(d2),
        delta3=float(delta3),
        L1=float(L1),
        L2=float(L2),
        L3=float(L3),
        extras={
            "l1": float(state.l[0]),
            "l2": float(state.l[1]),
            "l3": float(state.l[2]),
            "psi2": float(state.psi[1]),
            "psi3": float(state.psi[2]),
            "Psi3": float(state.Psi[2]),
        },
    )


def tilde_to_deprit(t: TildeState) -> DepritState:
    """Inverse of :func:`deprit_to_tilde`; missing extras default to zero."""
    ex = t.extras or {}
    Psi2 = t.delta2 * t.L3
    Psi1 = t.delta1 * t.L2 + t.Psi1
    G2 = Psi1 - t.Gamma2
    G3 = Psi2 - t.Gamma3 - t.delta3 * t.L2
    g2 = wrap_angle(-t.gamma2)
    return DepritState(
        l=[ex.get("l1", 0.0), ex.get("l2", 0.0), ex.get("l3", 0.0)],
        L=[t.L1, t.L2, t.L3],
        g=[t.gamma1, g2, wrap_angle(-t.gamma3)],
        G=[t.Gamma1, G2, G3],
        psi=[wrap_angle(t.psi1 + t.gamma2), ex.get("psi2", 0.0), ex.get("psi3", 0.0)],
        Psi=[Psi1, Psi2, ex.get("Psi3", 0.0)],
    )


def tilde_vector_map(v: np.ndarray, delta1: float, delta3: float, L2: float, Psi2: float) -> np.ndarray:
    """The tilde change on ``(g1, G1, g2, G2, psi1, Psi1, g3, G3)`` with ``Psi2`` frozen.

    Returned in :data:`TILDE_NAMES` order; used by the two-form check.
    """
    g1, G1, g2, G2, p1, P1, g3, G3 = v
    return np.array([g1, G1, -g2, P1 - G2, p1 + g2, P1 - delta1 * L2, -g3, Psi2 - G3 - delta3 * L2])


# ---------------------------------------------------------------------------
# Poincare variables, inclinations, reporting


def poincare_from_polar(gamma1, Gamma1, L1):
    """``xi = sqrt(2(L1-G1)) cos g1``, ``eta = -sqrt(2(L1-G1)) sin g1``."""
    gamma1 = np.asarray(gamma1, dtype=float)
    Gamma1 = np.asarray(Gamma1, dtype=float)
    if np.any(Gamma1 > L1 * (1.0 + 1e-15)):
        raise DomainError("Gamma1 must not exceed L1")
    r = np.sqrt(np.maximum(0.0, 2.0 * (L1 - Gamma1)))
    xi = r * np.cos(gamma1)
    eta = -r * np.sin(gamma1)
    if np.ndim(xi) == 0:
        return float(xi), float(eta)
    return xi, eta


def polar_from_poincare(xi, eta, L1):
    """Inverse of :func:`poincare_from_polar`; the angle is ``0`` at the origin."""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    Gamma1 = L1 - 0.5 * (xi**2 + eta**2)
    gamma1 = wrap_angle(np.arctan2(-eta, xi))
    if np.ndim(Gamma1) == 0:
        return float(gamma1), float(Gamma1)
    return gamma1, Gamma1


def _acos_checked(c: float, what: str, tol: float = 1e-9) -> float:
    if not np.isfinite(c) or abs(c) > 1.0 + tol:
        raise DomainError(f"inconsistent state: cos {what} = {c}")
    return float(np.arccos(np.clip(c, -1.0, 1.0)))


def inclinations(state: DepritState) -> tuple[float, float]:
    """Mutual inclinations ``(i12, i23)`` from the Deprit actions.

    ``i12`` is the angle between ``C1`` and ``C2`` and ``i23`` the angle
    between ``C1 + C2`` and ``C3``, so aligned momenta give zero:
    ``cos i12 = (Psi1^2 - G1^2 - G2^2) / (2 G1 G2)`` and
    ``cos i23 = (Psi2^2 - Psi1^2 - G3^2) / (2 G3 Psi1)``.
    """
    G1, G2, G3 = state.G
    P1, P2 = state.Psi[0], state.Psi[1]
    if min(G1, G2, G3, P1) <= 0.0:
        raise DomainError("actions must be positive")
    c12 = (P1**2 - G1**2 - G2**2) / (2.0 * G1 * G2)
    c23 = (P2**2 - P1**2 - G3**2) / (2.0 * G3 * P1)
    return _acos_checked(c12, "i12"), _acos_checked(c23, "i23")


def eccentricities(state: DepritState) -> np.ndarray:
    return np.sqrt(np.maximum(0.0, 1.0 - (state.G / state.L) ** 2))


def normalized_c2(state: DepritState, masses: MassSet) -> np.ndarray:
    """``C2`` scaled by ``sqrt(m0+m1+m2) / (m2 (m0+m1) sqrt(a2))``; its norm is ``sqrt(1-e2^2)``."""
    C = angular_momenta_from_deprit(state)
    m0, m1, m2, _ = masses.m
    a2 = semimajor_axis_from_action(state.L[1], masses.mu[2], masses.M[2])
    return np.sqrt(m0 + m1 + m2) / (m2 * (m0 + m1) * np.sqrt(a2)) * C[1]


def planetary_rescale(state: DepritState, rho: float) -> tuple[DepritState, float]:
    """Divide every action by ``rho``; angles are unchanged.

    Returns the rescaled state and the factor ``rho**-2`` by which secular
    time scales grow.
    """
    if not (np.isfinite(rho) and rho > 0.0):
        raise DomainError("rho must be positive")
    out = DepritState(l=state.l, L=state.L / rho, g=state.g, G=state.G / rho, psi=state.psi, Psi=state.Psi / rho)
    return out, rho**-2


# ---------------------------------------------------------------------------
# JSON records


def state_to_record(state) -> dict:
    """Serialize a state as a flat dict keyed by variable name."""
    if isinstance(state, CartesianState):
        rec = {"coordinate_system": "cartesian"}
        for j in range(4):
            rec[f"x{j}"] = state.x[j].tolist()
            rec[f"y{j}"] = state.y[j].tolist()
        return rec
    if isinstance(state, JacobiState):
        rec = {"coordinate_system": "jacobi"}
        for j in range(4):
            rec[f"q{j}"] = state.q[j].tolist()
            rec[f"p{j}"] = state.p[j].tolist()
        return rec
    if isinstance(state, DepritState):
        rec = {"coordinate_system": "deprit"}
        rec.update({n: float(v) for n, v in zip(DEPRIT_NAMES, state.vector())})
        return rec
    if isinstance(state, TildeState):
        rec = {"coordinate_system": "tilde"}
        rec.update({n: float(v) for n, v in zip(TILDE_NAMES, state.vector())})
        rec.update(state.params())
        rec["extras"] = dict(state.extras)
        return rec
    raise TypeError(f"unsupported state type {type(state).__name__}")


def state_from_record(rec: dict):
    """Inverse of :func:`state_to_record`."""
    kind = rec.get("coordinate_system")
    try:
        if kind == "cartesian":
            return CartesianState([rec[f"x{j}"] for j in range(4)], [rec[f"y{j}"] for j in range(4)])
        if kind == "jacobi":
            return JacobiState([rec[f"q{j}"] for j in range(4)], [rec[f"p{j}"] for j in range(4)])
        if kind == "deprit":
            return DepritState.from_vector(np.array([rec[n] for n in DEPRIT_NAMES], dtype=float))
        if kind == "tilde":
            kw = {n: float(rec[n]) for n in TILDE_NAMES}
            kw.update({k: float(rec[k]) for k in ("delta1", "delta2", "delta3", "L1", "L2", "L3")})
            return TildeState(**kw, extras=dict(rec.get("extras", {})))
    except KeyError as exc:
        raise DomainError(f"missing field {exc} in {kind} record") from None
    raise DomainError(f"unknown coordinate_system {kind!r}")


def convert(state, target: str, masses: MassSet, deltas: tuple[float, float | None, float] | None = None):
    """Convert between ``cartesian``, ``jacobi``, ``deprit`` and ``tilde``.

    Cartesian/Jacobi row 0 (centre of mass) is lost when passing through the
    Deprit chart and comes back as zero.
    """
    order = ["cartesian", "jacobi", "deprit", "tilde"]
    kinds = {CartesianState: "cartesian", JacobiState: "jacobi", DepritState: "deprit", TildeState: "tilde"}
    src = kinds[type(state)]
    if target not in order:
        raise DomainError(f"unknown target {target!r}")
    i, k = order.index(src), order.index(target)
    cur = state
    while i < k:
        if i == 0:
            cur = cartesian_to_jacobi(cur, masses)
        elif i == 1:
            cur = jacobi_to_deprit(cur, masses)
        else:
            if deltas is None:
                raise DomainError("tilde conversion needs (delta1, delta2, delta3)")
            cur = deprit_to_tilde(cur, *deltas)
        i += 1
    while i > k:
        if i == 3:
            cur = tilde_to_deprit(cur)
        elif i == 2:
            cur = deprit_to_jacobi(cur, masses)
        else:
            cur = jacobi_to_cartesian(cur, masses)
        i -= 1
    return cur
