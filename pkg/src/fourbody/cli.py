"""Command-line front end.

Every command reads one JSON config (``--config``; built-in defaults when
omitted), writes CSV/JSON files into ``--out`` and finishes with a
``manifest.json``.  Exit codes: 0 success, 2 bad input or domain error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import platform
import sys
import time
import warnings
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .errors import DomainError, NumericalError
from .frames import (
    JacobiState,
    convert,
    derive_masses,
    state_from_record,
    state_to_record,
    verify_deprit_symplectic,
)
from .hamiltonians import (
    average_2angles_adaptive,
    closed_form_inputs,
    f_oct12_closed,
    f_quad12_closed,
    pair_integrand,
)
from .melnikov import kappa_at, melnikov_curve, melnikov_L1_numeric
from .scattering import (
    ScatteringConstants,
    find_jump_windows,
    jumps_hat,
    jumps_tilde,
    phi_corrections,
    twist_matrix,
)
from .separatrix import (
    gamma1_sq_integral_closed,
    gamma1_sq_integral_numeric,
    phase_shift_gamma2,
    phase_shift_psi1,
    phase_shift_psi1_numeric,
    saddle,
    sample_separatrix,
    separatrix_point,
    shadow_separatrix,
)
from .simulate import (
    IntegrationConfig,
    compare_direct_secular,
    drift_experiment,
    integrate_4bp,
    integrate_secular,
    kozai_portrait,
    osculating_history,
    physical_quad_model,
    secular_elements,
    tilde_from_cartesian,
    triple_setup,
)

EXIT_OK, EXIT_DOMAIN, EXIT_NUMERICAL = 0, 2, 3


class ConfigError(DomainError):
    """Config document does not match the command's schema."""


# ---------------------------------------------------------------------------
# output helpers


class Run:
    def __init__(self, command: str, config: dict, out: Path, seed: int):
        self.command = command
        self.config = config
        self.out = out
        self.seed = seed
        self.outputs: list[str] = []
        self.t0 = time.perf_counter()
        out.mkdir(parents=True, exist_ok=True)

    def csv(self, name: str, header: list[str], rows, meta: dict | None = None) -> Path:
        path = self.out / name
        with open(path, "w", newline="") as fh:
            fh.write("# " + json.dumps(meta or {}, sort_keys=True, default=_plain) + "\n")
            w = csv.writer(fh)
            w.writerow(header)
            for r in rows:
                w.writerow([repr(float(x)) for x in r])
        self.outputs.append(name)
        return path

    def json(self, name: str, obj) -> Path:
        path = self.out / name
        path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_plain) + "\n")
        self.outputs.append(name)
        return path

    def manifest(self, status: str, message: str = "") -> None:
        digest = hashlib.sha256(json.dumps(self.config, sort_keys=True, default=_plain).encode()).hexdigest()
        man = {
            "command": self.command,
            "config_digest": digest,
            "seed": self.seed,
            "versions": {"fourbody": __version__, "numpy": np.__version__, "scipy": scipy.__version__, "python": platform.python_version()},
            "outputs": self.outputs,
            "status": status,
            "message": message,
            "wall_time": time.perf_counter() - self.t0,
        }
        (self.out / "manifest.json").write_text(json.dumps(man, indent=2, sort_keys=True) + "\n")


def _plain(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not serializable: {type(o).__name__}")


def _get(cfg: dict, key: str, kind, default=None):
    val = cfg.get(key, default)
    if val is None:
        raise ConfigError(f"missing config field {key!r}")
    try:
        if kind is list:
            if not isinstance(val, list):
                raise TypeError
            return val
        return kind(val)
    except (TypeError, ValueError):
        raise ConfigError(f"config field {key!r} must be {kind.__name__}") from None


def _grid(text: str | None, default: tuple[int, int]) -> tuple[int, int]:
    if text is None:
        return default
    try:
        n, m = (int(s) for s in text.lower().split("x"))
    except ValueError:
        raise ConfigError(f"--grid expects NxM, got {text!r}") from None
    if n < 2 or m < 2:
        raise ConfigError("--grid sizes must be at least 2")
    return n, m


def _masses(cfg: dict):
    m = _get(cfg, "masses", list, [1.0, 1e-3, 1e-3, 1e-3])
    if len(m) != 4:
        raise ConfigError("masses must list four values")
    return derive_masses(*(float(x) for x in m))


# ---------------------------------------------------------------------------
# commands


def cmd_transform(run: Run, cfg: dict, args) -> None:
    if "state" not in cfg:
        raise ConfigError("transform needs a 'state' record")
    masses = _masses(cfg)
    state = state_from_record(cfg["state"])
    target = _get(cfg, "target", str)
    deltas = cfg.get("deltas")
    if deltas is not None:
        if len(deltas) != 3:
            raise ConfigError("deltas must be [delta1, delta2 or null, delta3]")
        deltas = (float(deltas[0]), None if deltas[1] is None else float(deltas[1]), float(deltas[2]))
    out = convert(state, target, masses, deltas)
    rec = state_to_record(out)
    if args.check_symplectic:
        jac = state if isinstance(state, JacobiState) else convert(state, "jacobi", masses, deltas)
        rec["symplectic_report"] = verify_deprit_symplectic(jac, masses).to_dict()
    run.json("state.json", rec)


def cmd_melnikov(run: Run, cfg: dict, args) -> None:
    L1 = _get(cfg, "L1", float, 1.0)
    names = cfg.get("potentials", ["L2_23", "L5_23", "L2_12"])
    values = cfg.get("Gamma2", list(np.linspace(0.05, 0.7, 10) * L1))
    n, _ = _grid(args.grid, (8, 8))
    kw = {k: float(cfg[k]) for k in ("delta1", "delta3", "gamma3", "A_oct") if k in cfg}
    summaries = []
    worst = 0.0
    for name in names:
        if name not in ("L2_23", "L5_23", "L2_12"):
            raise ConfigError(f"unknown potential {name!r}")
        for k, G in enumerate(values):
            curve = melnikov_curve(name, float(G), L1, n=n, **kw)
            path = run.out / f"{name}_{k:02d}.csv"
            curve.write_csv(str(path))
            run.outputs.append(path.name)
            summaries.append(curve.summary())
            worst = max(worst, curve.relative_deviation)
    l1 = []
    for G in values:
        num = melnikov_L1_numeric(float(G), L1)
        l1.append({"Gamma2": float(G), "numeric": [num.real, num.imag], "half_kappa": 0.5 * kappa_at(float(G), L1)})
    run.json("melnikov_summary.json", {"curves": summaries, "L1_star": l1, "max_relative_deviation": worst})
    print(f"max closed-form deviation (relative): {worst:.3e}")


def cmd_portrait(run: Run, cfg: dict, args) -> None:
    G2 = _get(cfg, "Gamma2", float, 0.3)
    L1 = _get(cfg, "L1", float, 1.0)
    ng, nG = _grid(args.grid, (121, 81))
    p = kozai_portrait(G2, L1, n_gamma=ng, n_Gamma=nG)
    run.csv("portrait.csv", ["gamma1", "Gamma1", "H0_12"], p.to_rows(), {"Gamma2": G2, "L1": L1})
    if p.saddle is None:
        print("warning: no saddle for this Gamma2; emitting level sets only", file=sys.stderr)
    else:
        for k, br in enumerate(p.separatrix):
            run.csv(f"separatrix_branch{k}.csv", ["gamma1", "Gamma1"], br, {"energy": p.saddle["energy"]})
    run.json("portrait_summary.json", {"Gamma2": G2, "L1": L1, "saddle": p.saddle})


def cmd_separatrix(run: Run, cfg: dict, args) -> None:
    G2 = _get(cfg, "Gamma2", float, 0.3)
    L1 = _get(cfg, "L1", float, 1.0)
    g0 = _get(cfg, "gamma2_0", float, 0.0)
    n, _ = _grid(args.grid, (401, 2))
    sd = saddle(G2, L1)
    rows = sample_separatrix(G2, L1, n=n, gamma2_0=g0)
    run.csv("separatrix.csv", ["t", "gamma1", "Gamma1", "gamma2"], rows, {"Gamma2": G2, "L1": L1, "gamma2_0": g0})
    from .hamiltonians import h0_12

    pts = separatrix_point(rows[:, 0], G2, g0, L1)
    pinned = float(np.max(np.abs(h0_12(pts.gamma1, pts.Gamma1, G2, L1) - sd.energy)))
    shadow, *_ = shadow_separatrix(G2, L1, gamma2_0=g0)
    prefactor = _get(cfg, "psi1_prefactor", float, 1.0)
    run.json(
        "separatrix_summary.json",
        {
            "saddle": {"gamma1_min": sd.gamma1_min, "gamma1_max": sd.gamma1_max, "chi": sd.chi, "A2": sd.A2, "energy": sd.energy},
            "pinned_energy_error": pinned,
            "shadowing_error": shadow,
            "gamma1_sq_integral": {"closed": gamma1_sq_integral_closed(G2, L1), "numeric": gamma1_sq_integral_numeric(G2, L1)},
            "phase_shift_gamma2": phase_shift_gamma2(G2, L1),
            "phase_shift_psi1": {"closed": phase_shift_psi1(G2, L1, prefactor), "numeric": phase_shift_psi1_numeric(G2, L1, prefactor)},
        },
    )


def cmd_scattering(run: Run, cfg: dict, args) -> None:
    G2 = _get(cfg, "Gamma2", float, 0.3)
    fields = {k: cfg[k] for k in ScatteringConstants.__dataclass_fields__ if k in cfg}
    try:
        c = ScatteringConstants(**fields)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    n, m = _grid(args.grid, (64, 64))
    psi = 2.0 * np.pi * np.arange(n) / n
    gam = 2.0 * np.pi * np.arange(m) / m
    P, Gm = np.meshgrid(psi, gam, indexing="ij")
    phi = phi_corrections(P, Gm, G2, c)
    summary = {"Gamma2": G2, "constants": c.to_dict(), "windows": {}}
    for branch in ("+", "-"):
        tj = jumps_tilde(P, Gm, G2, branch, c)
        hj = jumps_hat(P, Gm, G2, branch, c)
        rows = np.column_stack(
            [P.ravel(), Gm.ravel(), np.ravel(tj.dPsi1), np.ravel(tj.dGamma2), np.ravel(tj.dGamma3), np.ravel(hj.S1), np.ravel(hj.S3), phi.phi1.ravel(), phi.phi3.ravel()]
        )
        tag = "plus" if branch == "+" else "minus"
        run.csv(
            f"jumps_{tag}.csv",
            ["psi1", "gamma3", "dPsi1", "dGamma2", "dGamma3", "S1", "S3", "Phi1", "Phi3"],
            rows,
            {"Gamma2": G2, "branch": branch, "dgamma2": tj.dgamma2, "dpsi1": tj.dpsi1, "scales": tj.scales},
        )
        summary["windows"][branch] = find_jump_windows(G2, branch, c).to_dict()
    d2 = _get(cfg, "delta2", float, 0.5)
    if G2 < c.L1 / np.sqrt(3.0):
        summary["twist"] = twist_matrix(G2, 0.0, 0.0, c.delta1, d2, c.delta3, c.L1).to_dict()
    run.json("scattering_summary.json", summary)


def cmd_simulate(run: Run, cfg: dict, args) -> None:
    mode = _get(cfg, "mode", str, "direct")
    spec = cfg.get("system")
    if mode == "compare":
        rep = compare_direct_secular(
            spec,
            periods=_get(cfg, "periods", float, 1.0),
            dt_fraction=_get(cfg, "dt_fraction", float, 1.0 / 800.0),
            method=_get(cfg, "method", str, "yoshida4"),
        )
        rows = np.column_stack([rep.t, rep.direct["e1"], rep.secular["e1"], rep.direct["i12"], rep.secular["i12"]])
        run.csv("compare.csv", ["t", "e1_direct", "e1_secular", "i12_direct_rad", "i12_secular_rad"], rows, {"mode": mode})
        run.json("simulate_summary.json", rep.summary())
        return
    if mode == "drift":
        rec = drift_experiment(spec, t_end=cfg.get("t_end"), method=_get(cfg, "method", str, "leapfrog"))
        run.csv("drift.csv", list(rec.HEADER), rec.rows(), {"mode": mode})
        run.json("simulate_summary.json", rec.summary())
        return
    masses, cart = triple_setup(spec)
    icfg = IntegrationConfig.from_dict({"t_end": 100.0, **cfg.get("integration", {}), "seed": run.seed})
    if mode == "direct":
        traj = integrate_4bp(cart, masses, icfg)
        hist = osculating_history(traj, masses)
        rows = np.column_stack([traj.t, traj.energy, hist["e1"], hist["e2"], hist["e3"], hist["i12"], hist["i23"], hist["a1"], hist["a2"]])
        run.csv("trajectory.csv", ["t", "H", "e1", "e2", "e3", "i12_rad", "i23_rad", "a1", "a2"], rows, {"mode": mode, "config": icfg.to_dict()})
        run.json("simulate_summary.json", {"monitors": traj.monitors, "config": traj.config})
    elif mode == "secular":
        tilde = tilde_from_cartesian(cart, masses)
        model = physical_quad_model(masses, tilde)
        icfg = IntegrationConfig.from_dict({**icfg.to_dict(), "method": "rk45"})
        tr = integrate_secular(model, tilde, icfg)
        el = secular_elements(tr)
        rows = np.column_stack([tr.t, tr.v, el["e1"], el["i12"]])
        names = ["gamma1", "Gamma1", "gamma2", "Gamma2", "psi1", "Psi1", "gamma3", "Gamma3"][: tr.v.shape[1]]
        run.csv("secular.csv", ["t", *names, "e1", "i12_rad"], rows, {"mode": mode})
        run.json("simulate_summary.json", {"energy_drift": tr.energy_drift, "completed": tr.completed, "message": tr.message})
        if not tr.completed:
            raise NumericalError(tr.message)
    else:
        raise ConfigError(f"unknown simulate mode {mode!r}")


def cmd_average(run: Run, cfg: dict, args) -> None:
    masses = _masses(cfg)
    if "state" in cfg:
        state = convert(state_from_record(cfg["state"]), "deprit", masses)
    else:
        rng = np.random.default_rng(run.seed)
        spec = {
            "masses": [float(masses.m[j]) for j in range(4)],
            "a": [1.0, float(rng.uniform(15, 40)), float(rng.uniform(600, 1500))],
            "e": [float(x) for x in rng.uniform(0.05, 0.5, 3)],
            "i": [float(x) for x in rng.uniform(20, 70, 3)],
            "node": [float(x) for x in rng.uniform(0, 2 * np.pi, 3)],
            "peri": [float(x) for x in rng.uniform(0, 2 * np.pi, 3)],
            "mean_anomaly": [0.0, 0.0, 0.0],
        }
        _, cart = triple_setup(spec)
        state = convert(cart, "deprit", masses)
    n_orders = cfg.get("orders", [2, 3])
    inputs = closed_form_inputs(state, masses)
    result = {"inputs": inputs, "orders": {}}
    for order in n_orders:
        val, nodes = average_2angles_adaptive(pair_integrand(state, masses, int(order)))
        if order == 2:
            closed = f_quad12_closed(inputs["e1"], inputs["e2"], inputs["gamma1"], inputs["i12"], inputs["a1"], inputs["a2"])
        elif order == 3:
            closed = f_oct12_closed(inputs["e1"], inputs["e2"], inputs["gamma1"], inputs["gamma2"], inputs["i12"], inputs["a1"], inputs["a2"])
        else:
            raise ConfigError("orders must be 2 or 3")
        result["orders"][str(order)] = {"quadrature": val, "closed": float(closed), "nodes": nodes, "rel_dev": abs(val - closed) / abs(closed)}
    run.json("average.json", result)


COMMANDS = {
    "transform": cmd_transform,
    "melnikov": cmd_melnikov,
    "portrait": cmd_portrait,
    "separatrix": cmd_separatrix,
    "scattering": cmd_scattering,
    "simulate": cmd_simulate,
    "average": cmd_average,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fourbody", description="Secular four-body tooling: transforms, Melnikov potentials, scattering maps, simulations.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", type=Path, help="JSON config document")
        s.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--grid", help="grid size NxM")
        s.add_argument("--check-symplectic", action="store_true", help="append the Poisson-bracket report (transform)")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed < 0 or args.seed >= 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_DOMAIN
    cfg: dict = {}
    if args.config is not None:
        try:
            cfg = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return EXIT_DOMAIN
        if not isinstance(cfg, dict):
            print("error: config must be a JSON object", file=sys.stderr)
            return EXIT_DOMAIN
    run = Run(args.command, cfg, args.out, args.seed)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            COMMANDS[args.command](run, cfg, args)
    except DomainError as exc:
        run.manifest("domain_error", f"{type(exc).__name__}: {exc}")
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except NumericalError as exc:
        run.manifest("numerical_error", f"{type(exc).__name__}: {exc}")
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (KeyError, TypeError, ValueError) as exc:
        run.manifest("config_error", f"{type(exc).__name__}: {exc}")
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    run.manifest("ok")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
