"""First-order scattering maps on the inner cylinder.

Jumps are given in the tilde variables (:func:`jumps_tilde`), corrected by
the averaging generators (:func:`phi_corrections`) and assembled into the
hat-variable jumps ``S1``, ``S3`` (:func:`jumps_hat`).  The module also holds
the leading derivatives of the averaged inner Hamiltonian, the twist matrix
of its return map and a grid search for regions where both jumps have a
prescribed sign.

Unknown prefactors (``alpha``'s, ``beta2``, ``alpha_tilde``, ``C12``,
``C23``) are inputs defaulting to 1.  All checks done here are independent
of their values.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import EmptyWindow, OutOfRange, ResonantDenominator
from .hamiltonians import c_constants, dj2_dgamma3, j_functions, nu_constants
from .melnikov import kappa_at
from .separatrix import phase_shift_gamma2, phase_shift_psi1, saddle

RESONANCE_TOL = 1e-9

# (power of L2, power of L3) multiplying each first-order jump
JUMP_SCALES = {
    "dPsi1": (9, -6),
    "dGamma2": (8, -6),
    "dGamma3": (11, -8),
    "dpsi1": (-2, 0),
    "dgamma2": (0, 0),
}
PHI_SCALES = {"Phi1": (11, -6), "Phi3": (13, -8)}


@dataclass(frozen=True)
class ScatteringConstants:
    L1: float = 1.0
    delta1: float = 0.5
    delta3: float = 0.2
    alpha0_23: float = 1.0
    alpha1_12: float = 1.0
    alpha2_23: float = 1.0
    alpha5_23: float = 1.0
    beta2: float = 1.0
    alpha_tilde: float = 1.0
    nu: tuple[float, float, float, float] | None = None

    def nus(self) -> tuple[float, float, float, float]:
        return tuple(self.nu) if self.nu is not None else nu_constants(self.delta1, self.delta3)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["nu"] = list(self.nus())
        return d


def _branch_sign(branch: str) -> float:
    if branch not in ("+", "-"):
        raise ValueError("branch must be '+' or '-'")
    return 1.0 if branch == "+" else -1.0


def _denominator(Gamma2, L1: float):
    D = 3.0 * np.asarray(Gamma2, dtype=float) ** 2 / L1**2 - 1.0
    if np.any(np.abs(D) < RESONANCE_TOL):
        raise ResonantDenominator("3 Gamma2^2 = L1^2: averaging denominator vanishes")
    return D


@dataclass
class ScatteringJump:
    branch: str
    dPsi1: np.ndarray | float
    dGamma2: np.ndarray | float
    dGamma3: np.ndarray | float
    dgamma2: float
    dpsi1: float
    scales: dict = field(default_factory=lambda: dict(JUMP_SCALES))


def jumps_tilde(psi1, gamma3, Gamma2: float, branch: str = "+", c: ScatteringConstants = ScatteringConstants()) -> ScatteringJump:
    """Action jumps ``Theta1..3`` and phase shifts ``Delta1, Delta2`` of the tilde scattering map."""
    s = _branch_sign(branch)
    k = kappa_at(Gamma2, c.L1)
    _, c2 = c_constants(c.delta1)
    cp = np.cos(psi1)
    th1 = -s * c.alpha2_23 * k * c2 * cp
    th2 = s * c.alpha1_12 * c.alpha2_23 * k * c2 * (3.0 * Gamma2**2 / c.L1**2 - 1.0) * c.L1**2 / (2.0 * Gamma2) * cp
    th3 = -s * c.alpha5_23 * k * dj2_dgamma3(psi1, gamma3, c.delta1, c.delta3)
    return ScatteringJump(
        branch,
        th1,
        th2,
        th3,
        phase_shift_gamma2(Gamma2, c.L1),
        phase_shift_psi1(Gamma2, c.L1, c.beta2),
    )


@dataclass
class PhiCorrections:
    phi1: np.ndarray | float
    phi3: np.ndarray | float
    dphi1_dpsi1: np.ndarray | float
    dphi3_dpsi1: np.ndarray | float


def _phi3_harmonics(psi1, gamma3, nus):
    n0, n1, n2, n3 = nus
    cos_part = n0 / 3.0 * np.cos(gamma3 + 3 * psi1) + n1 * np.cos(gamma3 + psi1) - n2 * np.cos(gamma3 - psi1) - n3 / 3.0 * np.cos(gamma3 - 3 * psi1)
    sin_deriv = -(n0 * np.sin(gamma3 + 3 * psi1) + n1 * np.sin(gamma3 + psi1) + n2 * np.sin(gamma3 - psi1) + n3 * np.sin(gamma3 - 3 * psi1))
    return cos_part, sin_deriv


def phi_corrections(psi1, gamma3, Gamma2: float, c: ScatteringConstants = ScatteringConstants()) -> PhiCorrections:
    """First-order action corrections of the averaging step and their ``psi1`` derivatives.

    Raises:
        ResonantDenominator: at ``3 Gamma2^2 = L1^2``.
    """
    D = _denominator(Gamma2, c.L1)
    ratio = c.alpha0_23 / c.alpha1_12
    phi1 = -ratio * np.cos(2.0 * psi1) / (2.0 * D)
    dphi1 = ratio * np.sin(2.0 * psi1) / D
    cos_part, dcos = _phi3_harmonics(psi1, gamma3, c.nus())
    return PhiCorrections(phi1, c.alpha_tilde / D * cos_part, dphi1, c.alpha_tilde / D * dcos)


def averaging_generators(psi1, gamma3, Gamma2: float, c: ScatteringConstants = ScatteringConstants()):
    """Generators ``(K2, K3)`` whose ``psi1``/``gamma3`` derivatives give ``-Phi1`` and ``-Phi3``.

    ``K3 = alpha_tilde * K~`` with the sine series of the averaging lemma.
    """
    D = _denominator(Gamma2, c.L1)
    K2 = c.alpha0_23 / c.alpha1_12 * np.sin(2.0 * psi1) / (4.0 * D)
    n0, n1, n2, n3 = c.nus()
    Kt = -(n0 / 3.0 * np.sin(gamma3 + 3 * psi1) + n1 * np.sin(gamma3 + psi1) - n2 * np.sin(gamma3 - psi1) - n3 / 3.0 * np.sin(gamma3 - 3 * psi1)) / D
    return K2, c.alpha_tilde * Kt


def restricted_h1(Gamma2, Psi1, L1: float):
    """``H1_12`` on the circular inner orbit ``Gamma1 = L1`` (where ``h0_12 = G2^2/L1^2``)."""
    h0 = Gamma2**2 / L1**2
    return (3.0 * h0 - 1.0) * Psi1 - 4.0 * Gamma2 * h0 + 2.0 * Gamma2


@dataclass
class HatJump:
    branch: str
    S1: np.ndarray | float
    S3: np.ndarray | float
    scales: dict = field(default_factory=lambda: {"S1": (9, -6), "S3": (11, -8)})


def jumps_hat(psi1, gamma3, Gamma2: float, branch: str = "+", c: ScatteringConstants = ScatteringConstants(), cosine: bool = False) -> HatJump:
    """Closed-form first-order jumps ``S1``, ``S3`` of the hat scattering maps.

    ``cosine=True`` uses cosine harmonics ``nu_k cos(gamma3 + k psi1)`` for the
    averaging part of ``S3``; the default is the ``psi1`` derivative of
    ``Phi3`` times ``Delta1`` (a sine series).
    """
    s = _branch_sign(branch)
    L1 = c.L1
    D = _denominator(Gamma2, L1)
    k = kappa_at(Gamma2, L1)
    _, c2 = c_constants(c.delta1)
    shift = L1 / 6.0 * np.sqrt(1.5) * c.beta2 * Gamma2 * np.sqrt(1.0 - 5.0 / 3.0 * Gamma2**2 / L1**2)
    S1 = -s * c.alpha2_23 * k * c2 * np.cos(psi1) + c.alpha0_23 / c.alpha1_12 * shift * np.sin(2.0 * psi1) / D
    g3, p = gamma3, psi1
    d1, d3 = c.delta1, c.delta3
    bracket = (
        50.0 * d1 * d3 * np.sin(g3) * np.cos(p) * np.sin(p)
        - 70.0 * d3 / d1 * np.sin(g3) * np.cos(p) * np.sin(p)
        + (105.0 * d3**2 / d1**2 - 75.0 * d3**2 + 25.0 * d1**2 - 35.0) * np.cos(g3) * np.cos(p) ** 2
        + (-105.0 * d3**2 / d1**2 + 60.0 * d3**2 - 17.0 * d1**2 + 28.0) * np.cos(g3)
    )
    n0, n1, n2, n3 = c.nus()
    if cosine:
        harm = n0 * np.cos(g3 + 3 * p) + n1 * np.cos(g3 + p) + n2 * np.cos(g3 - p) + n3 * np.cos(g3 - 3 * p)
    else:
        harm = -(n0 * np.sin(g3 + 3 * p) + n1 * np.sin(g3 + p) + n2 * np.sin(g3 - p) + n3 * np.sin(g3 - 3 * p))
    S3 = -s * c.alpha5_23 * k * bracket + shift * c.alpha_tilde / D * harm
    return HatJump(branch, S1, S3)


def compose(jump: ScatteringJump, phi: PhiCorrections) -> HatJump:
    """``S1 = Theta1 + dPhi1/dpsi1 * Delta1`` and ``S3 = Theta3 + dPhi3/dpsi1 * Delta1``."""
    return HatJump(jump.branch, jump.dPsi1 + phi.dphi1_dpsi1 * jump.dpsi1, jump.dGamma3 + phi.dphi3_dpsi1 * jump.dpsi1)


def jump_derivatives(psi1, gamma3, Gamma2: float, branch: str = "+", c: ScatteringConstants = ScatteringConstants()):
    """``(dS1/dpsi1, dS3/dgamma3)`` of the default :func:`jumps_hat`."""
    s = _branch_sign(branch)
    L1 = c.L1
    D = _denominator(Gamma2, L1)
    k = kappa_at(Gamma2, L1)
    _, c2 = c_constants(c.delta1)
    shift = L1 / 6.0 * np.sqrt(1.5) * c.beta2 * Gamma2 * np.sqrt(1.0 - 5.0 / 3.0 * Gamma2**2 / L1**2)
    dS1 = s * c.alpha2_23 * k * c2 * np.sin(psi1) + 2.0 * c.alpha0_23 / c.alpha1_12 * shift * np.cos(2.0 * psi1) / D
    n0, n1, n2, n3 = c.nus()
    g3, p = gamma3, psi1
    # the kappa bracket is dJ2/dgamma3, and J2 is first-degree in (cos g3, sin g3)
    _, J2 = j_functions(p, g3, c.delta1, c.delta3)
    harm = -(n0 * np.cos(g3 + 3 * p) + n1 * np.cos(g3 + p) + n2 * np.cos(g3 - p) + n3 * np.cos(g3 - 3 * p))
    dS3 = s * c.alpha5_23 * k * J2 + shift * c.alpha_tilde / D * harm
    return dS1, dS3


# inner derivatives and twist -------------------------------------------------


@dataclass(frozen=True)
class Monomial:
    """``coeff * eps**i * mu**j``."""

    coeff: float
    eps: int
    mu: int

    def value(self, eps: float, mu: float) -> float:
        return self.coeff * eps**self.eps * mu**self.mu

    def __mul__(self, other: Monomial) -> Monomial:
        return Monomial(self.coeff * other.coeff, self.eps + other.eps, self.mu + other.mu)


@dataclass
class InnerDerivatives:
    gradient: list[Monomial]
    hessian: list[list[Monomial]]

    def numeric(self, eps: float, mu: float) -> tuple[np.ndarray, np.ndarray]:
        g = np.array([m.value(eps, mu) for m in self.gradient])
        H = np.array([[m.value(eps, mu) for m in row] for row in self.hessian])
        return g, H


def inner_derivatives(Gamma2, Psi1, Gamma3, delta1, delta2, delta3, L1, C12: float = 1.0, C23: float = 1.0) -> InnerDerivatives:
    """Leading monomials of the first and second action derivatives of the averaged inner Hamiltonian.

    Index order ``(Gamma2, Psi1, Gamma3)``.  ``Psi1`` and ``Gamma3`` do not
    enter at leading order; they are accepted for a uniform signature.
    """
    if not (0.0 < delta1 < 1.0 and 0.0 < delta2 < 1.0):
        raise OutOfRange("delta1 and delta2 must lie in (0, 1)")
    T, L2_ = Gamma2, L1**2
    d1, d2, d3 = delta1, delta2, delta3
    q23 = C23 * (20.0 - 12.0 * d1**2) / (d1**2 * d2**3)
    grad = [
        Monomial(C12 * 6.0 * T / (L2_ * d1**3), 6, 0),
        Monomial(3.0 * C12 * (L2_ - 3.0 * T**2) / (L2_ * d1**4), 7, 0),
        Monomial(q23 * d3, 3, 6),
    ]
    h00 = Monomial(C12 * 6.0 / (L2_ * d1**3), 6, 0)
    h11 = Monomial(12.0 * C12 * (3.0 * T**2 - L2_) / (L2_ * d1**5), 8, 0)
    h22 = Monomial(q23, 4, 6)
    h01 = Monomial(-C12 * 18.0 * T / (L2_ * d1**4), 7, 0)
    h02 = Monomial(C23 * 24.0 * d3 / (d1 * d2**3), 4, 6)
    h12 = Monomial(-C23 * 40.0 * d3 / (d1**3 * d2**3), 4, 6)
    hess = [[h00, h01, h02], [h01, h11, h12], [h02, h12, h22]]
    return InnerDerivatives(grad, hess)


def _leading(terms: list[Monomial], theta: float = 2.0 / 3.0 + 1e-3) -> Monomial:
    """Sum of the lowest-order terms, sizing ``eps^i mu^j`` as ``eps^(i + theta j)``.

    ``theta`` slightly above 2/3 encodes the working regime ``mu^6 << eps^4``.
    """
    size = [m.eps + theta * m.mu for m in terms]
    low = min(size)
    keep = [m for m, s in zip(terms, size) if abs(s - low) < 1e-9]
    return Monomial(sum(m.coeff for m in keep), keep[0].eps, keep[0].mu)


@dataclass
class TwistReport:
    Gamma2: float
    omega0_cubed_Dg: list[list[Monomial]]
    omega0: Monomial
    method: str

    def Dg(self, eps: float, mu: float) -> np.ndarray:
        w3 = self.omega0.value(eps, mu) ** 3
        return np.array([[m.value(eps, mu) for m in row] for row in self.omega0_cubed_Dg]) / w3

    @property
    def det_leading(self) -> Monomial:
        """Leading part of ``omega0^6 det Dg``: the product of the diagonal entries."""
        return self.omega0_cubed_Dg[0][0] * self.omega0_cubed_Dg[1][1]

    @property
    def eigen_order_tags(self) -> tuple[tuple[int, int], tuple[int, int]]:
        """``(eps, mu)`` exponents of the top and bottom eigenvalues of ``Dg``."""
        w = self.omega0
        a, b = self.omega0_cubed_Dg[0][0], self.omega0_cubed_Dg[1][1]
        return (a.eps - 3 * w.eps, a.mu - 3 * w.mu), (b.eps - 3 * w.eps, b.mu - 3 * w.mu)

    def to_dict(self) -> dict:
        return {
            "Gamma2": self.Gamma2,
            "method": self.method,
            "omega0_cubed_Dg": [[asdict(m) for m in row] for row in self.omega0_cubed_Dg],
            "omega0": asdict(self.omega0),
            "det_leading": asdict(self.det_leading),
            "eigen_order_tags": self.eigen_order_tags,
        }


def twist_matrix(
    Gamma2, Psi1, Gamma3, delta1, delta2, delta3, L1, C12: float = 1.0, C23: float = 1.0, method: str = "closed"
) -> TwistReport:
    """Leading ``omega0^3 Dg`` of the return map on ``{gamma2 = 0}``.

    ``method="closed"`` uses the closed forms; ``"derivatives"`` assembles
    ``-F0 Fj F0i + F0^2 Fij + Fi Fj F00 - F0 Fi F0j`` from
    :func:`inner_derivatives` and keeps the lowest-order terms.
    """
    d = inner_derivatives(Gamma2, Psi1, Gamma3, delta1, delta2, delta3, L1, C12, C23)
    F, H = d.gradient, d.hessian
    if method == "derivatives":
        M = [[None, None], [None, None]]
        for i in (1, 2):
            for j in (1, 2):
                terms = [
                    Monomial(-1.0, 0, 0) * F[0] * F[j] * H[0][i],
                    F[0] * F[0] * H[j][i],
                    F[i] * F[j] * H[0][0],
                    Monomial(-1.0, 0, 0) * F[0] * F[i] * H[j][0],
                ]
                M[i - 1][j - 1] = _leading(terms)
    elif method == "closed":
        T, L, d1, d2, d3 = Gamma2, L1, delta1, delta2, delta3
        m11 = Monomial(C12**3 * 54.0 * (L**2 - 3 * T**2) * (L**2 + T**2) / (L**6 * d1**11), 20, 0)
        m12 = Monomial(
            -(C12**2) * C23 * 72.0 * (3 * L**2 * d1**2 + 9 * T**2 * d1**2 - 5 * L**2 + 5 * T**2) * d3 / (L**4 * d1**9 * d2**3), 16, 6
        )
        m22 = Monomial(-(C12**2) * C23 * 36.0 * T**2 * (12 * d1**2 - 20) / (L**4 * d1**8 * d2**3), 16, 6)
        M = [[m11, m12], [m12, m22]]
    else:
        raise ValueError("method must be 'closed' or 'derivatives'")
    return TwistReport(float(Gamma2), M, F[0], method)


def twist_determinant_sign_profile(L1: float, delta1: float, delta2: float, delta3: float, n: int = 200, lo: float = 0.05, hi: float = 0.99):
    """Leading determinant coefficient over ``Gamma2 in (lo, hi) * L1/sqrt(3)``."""
    g = np.linspace(lo, hi, n) * L1 / np.sqrt(3.0)
    det = np.array([twist_matrix(x, 0.0, 0.0, delta1, delta2, delta3, L1).det_leading.coeff for x in g])
    return g, det


# jump windows ----------------------------------------------------------------

PATTERNS = {"U1": (1, 1), "U2": (-1, -1), "U3": (1, -1), "U4": (-1, 1)}


@dataclass
class JumpWindow:
    pattern: str
    signs: tuple[int, int]
    psi1: tuple[float, float]
    gamma3: tuple[float, float]
    measure: float
    resolution: int

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class WindowSearch:
    Gamma2: float
    branch: str
    windows: list[JumpWindow]
    missing: list[str]
    thresholds: dict
    resolution: int = 0
    converged: bool = False

    def to_dict(self) -> dict:
        return {
            "Gamma2": self.Gamma2,
            "branch": self.branch,
            "resolution": self.resolution,
            "converged": self.converged,
            "windows": [w.to_dict() for w in self.windows],
            "missing": self.missing,
            "thresholds": self.thresholds,
        }


def _largest_rectangle(mask: np.ndarray) -> tuple[int, int, int, int, int]:
    """Largest all-True axis-aligned rectangle: ``(area, r0, r1, c0, c1)`` (inclusive-exclusive)."""
    nr, nc = mask.shape
    heights = np.zeros(nc, dtype=int)
    best = (0, 0, 0, 0, 0)
    for r in range(nr):
        heights = np.where(mask[r], heights + 1, 0)
        stack: list[int] = []
        for cidx in range(nc + 1):
            h = heights[cidx] if cidx < nc else 0
            while stack and heights[stack[-1]] >= h:
                top = stack.pop()
                left = stack[-1] + 1 if stack else 0
                area = heights[top] * (cidx - left)
                if area > best[0]:
                    best = (int(area), r - heights[top] + 1, r + 1, left, cidx)
            stack.append(cidx)
    return best


def _cell_mask(n: int, Gamma2: float, branch: str, c: ScatteringConstants, signs, thr) -> np.ndarray:
    """Cells (rows ``psi1``, columns ``gamma3``) where all corners and the midpoint meet the conditions."""
    nodes = 2.0 * np.pi * np.arange(n + 1) / n
    mids = nodes[:-1] + np.pi / n

    def ok(p, g):
        hj = jumps_hat(p, g, Gamma2, branch, c)
        d1, d3 = jump_derivatives(p, g, Gamma2, branch, c)
        S1 = np.broadcast_to(hj.S1, np.broadcast(p, g).shape)
        d1 = np.broadcast_to(d1, S1.shape)
        return (signs[0] * S1 > thr["nu"]) & (np.abs(d1) > thr["nu_hat"]) & (signs[1] * hj.S3 > thr["xi"]) & (np.abs(d3) > thr["xi_hat"])

    corners = ok(nodes[:, None], nodes[None, :])
    centre = ok(mids[:, None], mids[None, :])
    return corners[:-1, :-1] & corners[1:, :-1] & corners[:-1, 1:] & corners[1:, 1:] & centre


def default_thresholds(Gamma2: float, branch: str, c: ScatteringConstants, fraction: float = 0.05) -> dict:
    g = 2.0 * np.pi * np.arange(128) / 128
    hj = jumps_hat(g[:, None], g[None, :], Gamma2, branch, c)
    d1, d3 = jump_derivatives(g[:, None], g[None, :], Gamma2, branch, c)
    return {
        "nu": fraction * float(np.max(np.abs(hj.S1))),
        "nu_hat": fraction * float(np.max(np.abs(d1))),
        "xi": fraction * float(np.max(np.abs(hj.S3))),
        "xi_hat": fraction * float(np.max(np.abs(d3))),
    }


def find_jump_windows(
    Gamma2: float,
    branch: str = "+",
    c: ScatteringConstants = ScatteringConstants(),
    thresholds: dict | None = None,
    n0: int = 64,
    nmax: int = 1024,
    strict: bool = False,
) -> WindowSearch:
    """Rectangles in ``(psi1, gamma3)`` realizing each of the four sign patterns of ``(S1, S3)``.

    The grid is doubled from ``n0`` until every found measure changes by less
    than 1% or ``nmax`` is reached.  Patterns never found are listed in
    ``missing``; with ``strict=True`` they raise :class:`EmptyWindow`.
    """
    saddle(Gamma2, c.L1)
    thr = default_thresholds(Gamma2, branch, c) if thresholds is None else thresholds
    cell = (2.0 * np.pi) ** 2
    prev: dict[str, float] | None = None
    n = n0
    while True:
        found: dict[str, JumpWindow] = {}
        for name, signs in PATTERNS.items():
            mask = _cell_mask(n, Gamma2, branch, c, signs, thr)
            area, r0, r1, c0, c1 = _largest_rectangle(mask)
            if area > 0:
                h = 2.0 * np.pi / n
                found[name] = JumpWindow(name, signs, (r0 * h, r1 * h), (c0 * h, c1 * h), area * cell / n**2, n)
        measures = {k: w.measure for k, w in found.items()}
        stable = prev is not None and set(prev) == set(measures) and all(abs(measures[k] - prev[k]) <= 0.01 * prev[k] for k in measures)
        if stable or n >= nmax:
            break
        prev = measures
        n *= 2
    missing = [k for k in PATTERNS if k not in found]
    if strict and missing:
        raise EmptyWindow(f"no window for patterns {missing} at resolution {n}")
    return WindowSearch(float(Gamma2), branch, [found[k] for k in PATTERNS if k in found], missing, thr, n, bool(stable))
