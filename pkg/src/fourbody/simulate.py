"""Desk-scale dynamics.

* :func:`integrate_4bp` advances the Newtonian four-body problem with a
  kick-drift-kick leapfrog (or its fourth-order Yoshida composition) and
  monitors energy, linear and angular momentum and close approaches.
* :func:`integrate_secular` follows the flow of a :class:`SecularModel` in
  the localized variables with an adaptive Runge-Kutta scheme.
* :func:`kozai_portrait` tabulates the leading inner Hamiltonian with the
  saddle and separatrix overlays.
* :func:`compare_direct_secular` and :func:`drift_experiment` connect the two
  integrators through osculating elements.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.integrate import RK45
from scipy.ndimage import uniform_filter1d
from scipy.spatial.transform import Rotation

from .errors import CollisionDetected, DomainError, NumericalError
from .frames import (
    CartesianState,
    JacobiState,
    MassSet,
    TildeState,
    cartesian_to_jacobi,
    deprit_to_tilde,
    derive_masses,
    inclinations,
    jacobi_to_cartesian,
    jacobi_to_deprit,
    tilde_to_deprit,
)
from .hamiltonians import (
    SecularModel,
    TermParams,
    alpha_constants,
    h0_12,
    hamilton_field,
    inertial_hamiltonian,
)
from .kepler import EllipseElements, elements_from_state, planar_state
from .separatrix import saddle, separatrix_point

METHODS = ("leapfrog", "yoshida4", "rk45")


@dataclass
class IntegrationConfig:
    t_end: float
    dt: float | None = None
    rtol: float = 1e-11
    method: str = "leapfrog"
    stride: int = 1
    seed: int = 0
    collision_factor: float = 1e-3
    atol: float = 1e-14

    def __post_init__(self) -> None:
        if not self.t_end > 0.0:
            raise DomainError("t_end must be positive")
        if self.dt is not None and not self.dt > 0.0:
            raise DomainError("dt must be positive")
        if self.method not in METHODS:
            raise DomainError(f"method must be one of {METHODS}")
        if self.stride < 1:
            raise DomainError("stride must be at least 1")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> IntegrationConfig:
        return cls(**{k: v for k, v in d.items() if k in cls.__dataclass_fields__})


# ---------------------------------------------------------------------------
# initial conditions


@dataclass(frozen=True)
class OrbitElements:
    """Osculating Jacobi elements; angles in radians."""

    a: float
    e: float
    i: float = 0.0
    node: float = 0.0
    peri: float = 0.0
    mean_anomaly: float = 0.0


def orbit_state(el: OrbitElements, mu: float, M: float) -> tuple[np.ndarray, np.ndarray]:
    q2, p2 = planar_state(EllipseElements(el.a, el.e, el.mean_anomaly), mu, M)
    R = Rotation.from_euler("ZXZ", [el.node, el.i, el.peri]).as_matrix()
    return R @ np.array([q2[0], q2[1], 0.0]), R @ np.array([p2[0], p2[1], 0.0])


def hierarchical_state(masses: MassSet, orbits: list[OrbitElements]) -> CartesianState:
    """Cartesian state (centre of mass at rest at the origin) from three Jacobi orbits."""
    q = np.zeros((4, 3))
    p = np.zeros((4, 3))
    for j, el in enumerate(orbits, start=1):
        q[j], p[j] = orbit_state(el, masses.mu[j], masses.M[j])
    return jacobi_to_cartesian(JacobiState(q, p), masses)


def inner_period(state: CartesianState, masses: MassSet) -> float:
    jac = cartesian_to_jacobi(state, masses)
    el = elements_from_state(jac.q[1], jac.p[1], masses.mu[1], masses.M[1])
    return float(2.0 * np.pi * np.sqrt(el["a"] ** 3 / masses.M[1]))


# ---------------------------------------------------------------------------
# direct integration


def _accel(x: np.ndarray, m: np.ndarray) -> tuple[np.ndarray, float]:
    d = x[None, :, :] - x[:, None, :]
    r2 = np.einsum("ijk,ijk->ij", d, d)
    np.fill_diagonal(r2, np.inf)
    inv3 = r2**-1.5
    return np.einsum("ij,ijk->ik", inv3 * m[None, :], d), float(np.sqrt(r2.min()))


_YOSHIDA_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_YOSHIDA_W0 = -(2.0 ** (1.0 / 3.0)) * _YOSHIDA_W1


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    energy: np.ndarray
    momentum: np.ndarray
    angular_momentum: np.ndarray
    min_separation: float
    config: dict = field(default_factory=dict)

    @property
    def monitors(self) -> dict:
        E0 = self.energy[0]
        C0 = self.angular_momentum[0]
        scale_p = float(np.max(np.abs(self.y[0]).sum(axis=0))) or 1.0
        return {
            "rel_energy_error": float(np.max(np.abs(self.energy - E0)) / abs(E0)),
            "momentum_error": float(np.max(np.abs(self.momentum - self.momentum[0])) / scale_p),
            "rel_angular_momentum_error": float(np.max(np.linalg.norm(self.angular_momentum - C0, axis=1)) / np.linalg.norm(C0)),
            "min_separation": self.min_separation,
        }

    def state(self, k: int) -> CartesianState:
        return CartesianState(self.x[k].copy(), self.y[k].copy())


def integrate_4bp(state: CartesianState, masses: MassSet, config: IntegrationConfig) -> Trajectory:
    """Symplectic integration of the inertial four-body problem.

    ``config.dt`` defaults to a 200th of the inner period.  Samples are kept
    every ``config.stride`` steps.  A negative ``t_end`` is not allowed;
    integrate backwards by passing a state with reversed momenta.

    Raises:
        CollisionDetected: a separation fell below ``collision_factor * a1``.
    """
    if config.method == "rk45":
        raise DomainError("integrate_4bp uses 'leapfrog' or 'yoshida4'")
    m = np.asarray(masses.m, dtype=float)
    x = np.array(state.x, dtype=float)
    v = np.array(state.y, dtype=float) / m[:, None]
    jac = cartesian_to_jacobi(state, masses)
    a1 = elements_from_state(jac.q[1], jac.p[1], masses.mu[1], masses.M[1])["a"]
    dt = config.dt if config.dt is not None else inner_period(state, masses) / 200.0
    n_steps = int(np.ceil(config.t_end / dt - 1e-9))
    dt = config.t_end / n_steps
    threshold = config.collision_factor * a1
    subs = (1.0,) if config.method == "leapfrog" else (_YOSHIDA_W1, _YOSHIDA_W0, _YOSHIDA_W1)

    def sample(t):
        y = v * m[:, None]
        cs = CartesianState(x.copy(), y)
        ts.append(t)
        xs.append(x.copy())
        ys.append(y)
        es.append(inertial_hamiltonian(cs, masses))
        ps.append(y.sum(axis=0))
        cs_.append(np.cross(x, y).sum(axis=0))

    ts, xs, ys, es, ps, cs_ = [], [], [], [], [], []
    acc, dmin = _accel(x, m)
    overall_min = dmin
    sample(0.0)
    for k in range(1, n_steps + 1):
        for w in subs:
            h = w * dt
            v += 0.5 * h * acc
            x += h * v
            acc, dmin = _accel(x, m)
            v += 0.5 * h * acc
        overall_min = min(overall_min, dmin)
        if dmin < threshold:
            raise CollisionDetected(f"separation {dmin:.3e} < {threshold:.3e} at t={k * dt:.6g}")
        if k % config.stride == 0 or k == n_steps:
            sample(k * dt)
    return Trajectory(
        np.array(ts), np.array(xs), np.array(ys), np.array(es), np.array(ps), np.array(cs_), overall_min, {**config.to_dict(), "dt_used": dt}
    )


def reverse_momenta(state: CartesianState) -> CartesianState:
    return CartesianState(state.x.copy(), -state.y.copy())


# ---------------------------------------------------------------------------
# secular integration


@dataclass
class SecularTrajectory:
    t: np.ndarray
    v: np.ndarray
    energy: np.ndarray
    template: TildeState
    completed: bool
    message: str = ""

    @property
    def energy_drift(self) -> float:
        E0 = self.energy[0]
        return float(np.max(np.abs(self.energy - E0)) / max(abs(E0), 1e-300))

    def state(self, k: int) -> TildeState:
        return self.template.with_vector(self.v[k])


def integrate_secular(model: SecularModel, state: TildeState, config: IntegrationConfig, n_out: int = 400) -> SecularTrajectory:
    """Adaptive RK45 integration of the Hamiltonian flow of ``model``.

    Output is sampled uniformly (``n_out + 1`` points) from the dense
    interpolant.  If the flow leaves the model's domain the trajectory is
    returned up to the last valid sample with ``completed=False``.
    """
    v0 = state.vector()
    # an invalid start is the caller's error, not a domain exit
    hamilton_field(model, v0)
    grid = np.linspace(0.0, config.t_end, n_out + 1)
    ts, vs = [0.0], [v0.copy()]
    k = 1
    completed, message = True, ""
    t_now = 0.0
    try:
        solver = RK45(lambda _t, v: hamilton_field(model, v), 0.0, v0, config.t_end, rtol=config.rtol, atol=config.atol)
        while solver.status == "running":
            msg = solver.step()
            if solver.status == "failed":
                raise NumericalError(str(msg))
            t_now = solver.t
            dense = solver.dense_output()
            while k < len(grid) and grid[k] <= solver.t:
                ts.append(grid[k])
                vs.append(dense(grid[k]))
                k += 1
    except (DomainError, FloatingPointError) as exc:
        completed, message = False, f"left the model domain after t={t_now:.6g}: {exc}"
    V = np.array(vs)
    E = np.array([model.value(v) for v in V])
    return SecularTrajectory(np.array(ts), V, E, state, completed, message)


def physical_quad_model(masses: MassSet, tilde: TildeState) -> SecularModel:
    """Leading inner quadrupole with its physical prefactor.

    The averaged pair interaction is ``-mu1 m2 s2 <P2 r1^2/r2^3>`` and the
    bracket is approximated by ``alpha0 eps^6 H0_12``.
    """
    params = TermParams.from_tilde(tilde)
    a0 = alpha_constants(masses, params.delta1, params.L1)["alpha0_12"]
    pref = -masses.mu[1] * masses.m[2] * masses.sigma_tilde[1][2]
    return SecularModel.scaled(["H0_12"], params, masses, {"H0_12": pref * a0})


def secular_elements(traj: SecularTrajectory) -> dict[str, np.ndarray]:
    """``e1`` and the geometric ``i12`` along a secular trajectory."""
    e1, i12 = [], []
    for k in range(len(traj.t)):
        d = tilde_to_deprit(traj.state(k))
        e1.append(np.sqrt(max(0.0, 1.0 - (d.G[0] / d.L[0]) ** 2)))
        i12.append(inclinations(d)[0])
    return {"t": traj.t, "e1": np.array(e1), "i12": np.array(i12)}


# ---------------------------------------------------------------------------
# element histories from the direct run


def osculating_history(traj: Trajectory, masses: MassSet) -> dict[str, np.ndarray]:
    """Osculating ``e1, e2, e3``, mutual inclinations and normalized ``C2`` per sample."""
    out = {k: [] for k in ("e1", "e2", "e3", "i12", "i23", "a1", "a2", "C2_unit", "C_norm")}
    for k in range(len(traj.t)):
        jac = cartesian_to_jacobi(traj.state(k), masses)
        els = [elements_from_state(jac.q[j], jac.p[j], masses.mu[j], masses.M[j]) for j in (1, 2, 3)]
        C = [el["C"] for el in els]
        out["e1"].append(els[0]["e"])
        out["e2"].append(els[1]["e"])
        out["e3"].append(els[2]["e"])
        out["a1"].append(els[0]["a"])
        out["a2"].append(els[1]["a"])
        out["i12"].append(_angle(C[0], C[1]))
        out["i23"].append(_angle(C[0] + C[1], C[2]))
        out["C2_unit"].append(C[1] / np.linalg.norm(C[1]))
        out["C_norm"].append(np.linalg.norm(C[0] + C[1] + C[2]))
    res = {k: np.array(v) for k, v in out.items()}
    res["t"] = traj.t
    return res


def _angle(u: np.ndarray, v: np.ndarray) -> float:
    return float(np.arctan2(np.linalg.norm(np.cross(u, v)), u @ v))


def window_average(t: np.ndarray, series: np.ndarray, window: float) -> np.ndarray:
    """Centered moving average over ``window`` time units (uniform sampling assumed)."""
    dt = float(np.median(np.diff(t)))
    n = max(1, round(window / dt))
    return uniform_filter1d(np.asarray(series, dtype=float), size=n, axis=0, mode="nearest")


# ---------------------------------------------------------------------------
# Kozai portrait


@dataclass
class KozaiPortrait:
    Gamma2: float
    L1: float
    gamma1: np.ndarray
    Gamma1: np.ndarray
    H: np.ndarray
    saddle: dict | None
    separatrix: list[np.ndarray]

    def to_rows(self) -> list[tuple[float, float, float]]:
        G, g = np.meshgrid(self.Gamma1, self.gamma1, indexing="ij")
        return list(zip(g.ravel(), G.ravel(), self.H.ravel()))


def kozai_portrait(Gamma2: float, L1: float, n_gamma: int = 121, n_Gamma: int = 81, n_sep: int = 401) -> KozaiPortrait:
    """Values of ``h0_12`` on ``gamma1 in [0, pi]``, ``Gamma1 in (Gamma2, L1]``.

    When the saddle exists the overlays are the two saddle points and the
    separatrix branches (the closed-form curve and its mirror
    ``gamma1 -> pi - gamma1``).
    """
    if not 0.0 < Gamma2 < L1:
        raise DomainError("need 0 < Gamma2 < L1")
    g = np.linspace(0.0, np.pi, n_gamma)
    G = np.linspace(Gamma2, L1, n_Gamma + 1)[1:]
    H = h0_12(g[None, :], G[:, None], Gamma2, L1)
    try:
        sd = saddle(Gamma2, L1)
    except DomainError:
        return KozaiPortrait(Gamma2, L1, g, G, H, None, [])
    t = np.linspace(-12.0 / sd.A2, 12.0 / sd.A2, n_sep)
    p = separatrix_point(t, Gamma2, 0.0, L1)
    branch = np.column_stack([p.gamma1, p.Gamma1])
    mirror = np.column_stack([np.pi - p.gamma1, p.Gamma1])
    info = {"gamma1_min": sd.gamma1_min, "gamma1_max": sd.gamma1_max, "Gamma1": L1, "energy": sd.energy, "chi": sd.chi, "A2": sd.A2}
    return KozaiPortrait(Gamma2, L1, g, G, H, info, [branch, mirror])


# ---------------------------------------------------------------------------
# direct vs secular consistency


@dataclass
class ConsistencyReport:
    t: np.ndarray
    direct: dict
    secular: dict
    e1_deviation: float
    i12_deviation: float
    monitors: dict
    kozai_period: float
    setup: dict

    def summary(self) -> dict:
        return {
            "e1_deviation": self.e1_deviation,
            "i12_deviation": self.i12_deviation,
            "monitors": self.monitors,
            "kozai_period": self.kozai_period,
            "setup": self.setup,
        }


DEFAULT_TRIPLE = {
    "masses": [1.0, 1e-3, 1.0, 1e-8],
    "a": [1.0, 20.0, 400.0],
    "e": [0.3, 0.1, 0.05],
    "i": [60.0, 0.0, 10.0],
    "node": [0.0, 0.0, 1.0],
    "peri": [float(np.pi / 2), 0.5, 2.0],
    "mean_anomaly": [0.0, 1.0, 2.0],
}


def triple_setup(spec: dict | None = None) -> tuple[MassSet, CartesianState]:
    """Masses and Cartesian state from per-orbit elements (inclinations in degrees)."""
    s = {**DEFAULT_TRIPLE, **(spec or {})}
    masses = derive_masses(*s["masses"])
    orbits = [
        OrbitElements(s["a"][j], s["e"][j], np.radians(s["i"][j]), s["node"][j], s["peri"][j], s["mean_anomaly"][j]) for j in range(3)
    ]
    return masses, hierarchical_state(masses, orbits)


def tilde_from_cartesian(state: CartesianState, masses: MassSet) -> TildeState:
    """Localized variables with ``delta1, delta3`` chosen so ``Psi1~ = Gamma3~ = 0``."""
    d = jacobi_to_deprit(cartesian_to_jacobi(state, masses), masses)
    L2 = d.L[1]
    return deprit_to_tilde(d, d.Psi[0] / L2, None, (d.Psi[1] - d.G[2]) / L2)


def kozai_period_estimate(model: SecularModel, tilde: TildeState, t_max: float, rtol: float = 1e-11) -> float:
    """Time between the first two minima of ``e1`` along the secular flow."""
    tr = integrate_secular(model, tilde, IntegrationConfig(t_end=t_max, rtol=rtol, method="rk45"), n_out=4000)
    G1 = tr.v[:, 1]
    # e1 minima are maxima of Gamma1
    idx = [k for k in range(1, len(G1) - 1) if G1[k] >= G1[k - 1] and G1[k] > G1[k + 1]]
    if len(idx) >= 2:
        return float(tr.t[idx[1]] - tr.t[idx[0]])
    if len(idx) == 1:
        return float(tr.t[idx[0]])
    raise NumericalError("no Kozai cycle completed within t_max")


def compare_direct_secular(
    spec: dict | None = None,
    periods: float = 1.0,
    dt_fraction: float = 1.0 / 800.0,
    method: str = "yoshida4",
    average_window: str = "inner",
    stride: int | None = None,
) -> ConsistencyReport:
    """Run the full problem and the quadrupolar secular flow side by side.

    The Kozai period is measured on the secular flow; both integrations run
    for ``periods`` of it.  Direct elements are smoothed by a moving average
    over one outer (``average_window="outer"``) or inner period.  Deviations
    are ``max |direct - secular| / max |secular|`` for ``e1`` and ``i12``.
    """
    masses, cart = triple_setup(spec)
    tilde = tilde_from_cartesian(cart, masses)
    model = physical_quad_model(masses, tilde)
    P1 = inner_period(cart, masses)
    jac = cartesian_to_jacobi(cart, masses)
    a2 = elements_from_state(jac.q[2], jac.p[2], masses.mu[2], masses.M[2])["a"]
    P2 = float(2.0 * np.pi * np.sqrt(a2**3 / masses.M[2]))
    tK = kozai_period_estimate(model, tilde, t_max=400.0 * P2)
    t_end = periods * tK
    dt = dt_fraction * P1
    n_steps = int(np.ceil(t_end / dt))
    stride = stride or max(1, n_steps // 4000)
    traj = integrate_4bp(cart, masses, IntegrationConfig(t_end=t_end, dt=dt, method=method, stride=stride))
    hist = osculating_history(traj, masses)
    window = P2 if average_window == "outer" else P1
    e1_d = window_average(hist["t"], hist["e1"], window)
    i12_d = window_average(hist["t"], hist["i12"], window)
    sec = integrate_secular(model, tilde, IntegrationConfig(t_end=t_end, method="rk45"), n_out=2000)
    se = secular_elements(sec)
    e1_s = np.interp(hist["t"], se["t"], se["e1"])
    i12_s = np.interp(hist["t"], se["t"], se["i12"])
    # ignore the half-window edges of the moving average
    n_edge = int(np.ceil(0.5 * window / (hist["t"][1] - hist["t"][0])))
    sl = slice(n_edge, len(hist["t"]) - n_edge)
    dev_e = float(np.max(np.abs(e1_d[sl] - e1_s[sl])) / np.max(np.abs(e1_s)))
    dev_i = float(np.max(np.abs(i12_d[sl] - i12_s[sl])) / np.max(np.abs(i12_s)))
    return ConsistencyReport(
        hist["t"],
        {"e1": e1_d, "i12": i12_d, "e1_osc": hist["e1"], "i12_osc": hist["i12"]},
        {"e1": e1_s, "i12": i12_s},
        dev_e,
        dev_i,
        {**traj.monitors, "secular_energy_drift": sec.energy_drift},
        tK,
        {"spec": {**DEFAULT_TRIPLE, **(spec or {})}, "P1": P1, "P2": P2, "dt": traj.config["dt_used"], "method": method, "window": window},
    )


# ---------------------------------------------------------------------------
# drift experiment


@dataclass
class DriftRecord:
    t: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray
    i12: np.ndarray
    i23: np.ndarray
    Gamma2: np.ndarray
    Psi1: np.ndarray
    Gamma3: np.ndarray
    C2_unit: np.ndarray
    monitors: dict
    flags: dict

    def rows(self) -> list[tuple]:
        return [
            (self.t[k], self.e1[k], self.e2[k], self.e3[k], self.i12[k], self.i23[k], self.Gamma2[k], self.Psi1[k], self.Gamma3[k], *self.C2_unit[k])
            for k in range(len(self.t))
        ]

    HEADER = ("t", "e1", "e2", "e3", "i12", "i23", "Gamma2", "Psi1", "Gamma3", "C2x", "C2y", "C2z")

    def summary(self) -> dict:
        return {
            "monitors": self.monitors,
            "flags": self.flags,
            "e2_range": [float(self.e2.min()), float(self.e2.max())],
            "i23_range": [float(self.i23.min()), float(self.i23.max())],
        }


def drift_experiment(spec: dict | None = None, t_end: float | None = None, dt_fraction: float = 1.0 / 200.0, method: str = "leapfrog", samples: int = 500, e1_bound: float = 0.2) -> DriftRecord:
    """Direct integration of a hierarchical four-body configuration with itinerary probes.

    Reports the outer-pair quantities ``(e2, i23, C2/|C2|)``, the localized
    actions and conservation monitors.  ``flags`` records whether ``e1``
    stayed below ``e1_bound`` and the relative spread of the quadrupolar
    combination ``(1 - e2^2)^(3/2) cos i23``.  This is a qualitative probe,
    not a certified diffusion orbit.
    """
    masses, cart = triple_setup(spec)
    P1 = inner_period(cart, masses)
    t_end = t_end if t_end is not None else 2000.0 * P1
    dt = dt_fraction * P1
    stride = max(1, int(np.ceil(t_end / dt)) // samples)
    traj = integrate_4bp(cart, masses, IntegrationConfig(t_end=t_end, dt=dt, method=method, stride=stride))
    hist = osculating_history(traj, masses)
    G2, P1s, G3, Psi2 = [], [], [], []
    for k in range(len(traj.t)):
        d = jacobi_to_deprit(cartesian_to_jacobi(traj.state(k), masses), masses)
        G2.append(d.Psi[0] - d.G[1])
        P1s.append(d.Psi[0])
        G3.append(d.Psi[1] - d.G[2])
        Psi2.append(d.Psi[1])
    Psi2 = np.array(Psi2)
    quad = (1.0 - hist["e2"] ** 2) ** 1.5 * np.cos(hist["i23"])
    mon = traj.monitors
    mon["rel_C_norm_drift"] = float(np.max(np.abs(hist["C_norm"] - hist["C_norm"][0])) / hist["C_norm"][0])
    mon["rel_Psi2_drift"] = float(np.max(np.abs(Psi2 - Psi2[0])) / Psi2[0])
    flags = {
        "e1_below_bound": bool(np.all(hist["e1"] < e1_bound)),
        "e1_bound": e1_bound,
        "quad_relation_spread": float(np.ptp(quad) / max(np.max(np.abs(quad)), 1e-300)),
    }
    return DriftRecord(
        hist["t"], hist["e1"], hist["e2"], hist["e3"], hist["i12"], hist["i23"], np.array(G2), np.array(P1s), np.array(G3), hist["C2_unit"], mon, flags
    )


def to_json(obj) -> str:
    def default(o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        if isinstance(o, np.bool_):
            return bool(o)
        raise TypeError(type(o))

    return json.dumps(obj, default=default, indent=2)
