"""Command-line driver: ``boltzlog {simulate,verify,smoothing,induction,kernel-info}``.

Exit codes: 0 success, 1 a check failed, 2 invalid configuration, 3 the
solver blew up. Every command writes ``manifest.json`` into the output
directory; its ``content_hash`` covers all other artifacts and the manifest
itself minus the ``timestamp`` block.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig, load_config
from .errors import BlowUpError, ConfigError, StabilityError
from .kernel import AngularKernel, graded_rule, kernel_moment, momentum_transfer
from .regularity import NOISE_FLOOR, fit_beta
from .solver import SimConfig, Trajectory, integrate
from .verify import _jsonable, alpha_star, c_bd_constant, exponent_identity_residual, lambda0, run_induction, run_inequality_suite

log = logging.getLogger("boltzlog")

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_BLOWUP = 0, 1, 2, 3


class Artifacts:
    """Deterministic writer for CSV and JSON outputs of one command."""

    def __init__(self, out: Path):
        self.out = Path(out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.files: dict[str, str] = {}

    def _record(self, name: str, data: bytes) -> None:
        (self.out / name).write_bytes(data)
        self.files[name] = hashlib.sha256(data).hexdigest()

    def csv(self, name: str, header: list[str], rows) -> None:
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(_fmt(v) for v in row))
        self._record(name, ("\n".join(lines) + "\n").encode())

    def json(self, name: str, obj) -> None:
        self._record(name, (json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n").encode())

    def manifest(self, body: dict, started: float) -> dict:
        body = _jsonable({**body, "files": dict(sorted(self.files.items())), "version": __version__})
        body["content_hash"] = hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()
        body["timestamp"] = {"utc": datetime.now(timezone.utc).isoformat(timespec="seconds"), "elapsed_s": round(time.perf_counter() - started, 3)}
        (self.out / "manifest.json").write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")
        return body


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def _write_trajectory(art: Artifacts, traj: Trajectory) -> None:
    for t, fld in traj.snapshots:
        art.csv(f"snap_t{t:.6f}.csv", ["x", "phi"], zip(fld.x_grid, fld.values))
    ts, m = traj.moment_table()
    art.csv("moments.csv", ["t"] + [f"m{j}" for j in range(m.shape[1])], (np.concatenate([[t], row]) for t, row in zip(ts, m)))


def _kernel_block(k: AngularKernel) -> dict:
    return {"family": k.family.value, "d": k.d, "kappa": k.kappa, "mu": k.mu, "nu": k.nu}


def command_sim_config(cfg: ExperimentConfig, command: str = "simulate") -> SimConfig:
    """Solver settings a command derives from the config."""
    if command == "smoothing":
        times = sorted(cfg.sections["smoothing"]["times"])
        return cfg.sim_config(t_end=max(times), snapshot_times=tuple([0.0] + times))
    if command == "induction":
        ind = cfg.sections["induction"]
        T0 = ind["T0"] if ind["T0"] is not None else cfg.sections["time"]["t_end"]
        return cfg.sim_config(t_end=T0, snapshot_times=tuple(T0 * np.arange(ind["n_snapshots"]) / (ind["n_snapshots"] - 1)))
    if command == "verify":
        return cfg.sim_config(t_end=0.5, dt=0.01, snapshot_times=(0.0, 0.25, 0.5))
    return cfg.sim_config()


# --- commands ---------------------------------------------------------------


def cmd_simulate(cfg: ExperimentConfig, out: Path) -> int:
    started = time.perf_counter()
    art = Artifacts(out)
    sim = command_sim_config(cfg)
    body = {"command": "simulate", "config": cfg.echo(), "lambda2": kernel_moment(sim.kernel, "two_sc", sim.tol)}
    try:
        traj = integrate(sim)
    except (BlowUpError, StabilityError) as e:
        body.update(status="blow_up", error=str(e), last_time=e.last_time)
        if e.last_state is not None:
            art.csv(f"snap_t{e.last_time:.6f}.csv", ["x", "phi"], zip(sim.grid(), e.last_state))
        art.manifest(body, started)
        print(f"solver failure: {e}", file=sys.stderr)
        return EXIT_BLOWUP
    _write_trajectory(art, traj)
    body.update(status="ok", conservation_residuals=traj.conservation_residuals(), warnings=traj.warnings)
    art.manifest(body, started)
    return EXIT_OK


def _verify_snapshot(cfg: ExperimentConfig):
    sim = command_sim_config(cfg, "verify")
    traj = integrate(sim)
    return traj.at(0.5), [(f"simulated_{sim.ic.family.value}_t{t:g}", f) for t, f in traj.snapshots]


def cmd_verify(cfg: ExperimentConfig, out: Path, tol_report: float | None = None) -> int:
    started = time.perf_counter()
    art = Artifacts(out)
    v = cfg.sections["verify"]
    tol = v["tol_report"] if tol_report is None else tol_report
    counts = {name: n for name, n in v.items() if name not in ("tol_report", "simulated_snapshot")}
    snapshot, extra = (None, [])
    if v["simulated_snapshot"]:
        snapshot, extra = _verify_snapshot(cfg)
    g = cfg.sections["grid"]
    report = run_inequality_suite(cfg.seed, counts, cfg.kernel(), g["N"], g["x_max"], tol, snapshot, extra)
    report.metadata["exponent_identity_residual"] = exponent_identity_residual(cfg.kernel().d, cfg.kernel().mu)
    art.json("report.json", report.to_dict())
    for e in report.entries:
        status = "PASS" if e.passed else "FAIL"
        print(f"{status} {e.check_id}: n={e.n_checked} violations={e.n_violations} worst_margin={e.margin:.3e}")
    art.manifest({"command": "verify", "config": cfg.echo(), "pass": report.passed, "tol_report": tol}, started)
    return EXIT_OK if report.passed else EXIT_VIOLATION


def _alpha(cfg: ExperimentConfig) -> float:
    a = cfg.sections["weights"]["alpha"]
    k = cfg.kernel()
    return alpha_star(k.d, k.mu) if a is None else a


def cmd_smoothing(cfg: ExperimentConfig, out: Path) -> int:
    started = time.perf_counter()
    art = Artifacts(out)
    sm = cfg.sections["smoothing"]
    times = sorted(sm["times"])
    sim = command_sim_config(cfg, "smoothing")
    traj = integrate(sim)
    alpha, mu = _alpha(cfg), sim.kernel.mu
    window = tuple(sm["window"]) if sm["window"] is not None else None
    floor = NOISE_FLOOR if sm["noise_floor"] is None else sm["noise_floor"]
    ref = traj.at(0.0).values
    rows = []
    for t in times:
        phi = traj.at(t)
        raw = fit_beta(phi, t, alpha, mu, window, floor)
        gained = fit_beta(phi, t, alpha, mu, window, floor, reference=ref)
        for mode, fit in (("raw", raw), ("gained", gained)):
            r = fit.as_row()
            rows.append([mode, r["t"], r["beta_t"], r["beta_hat"], r["M_hat"], r["r_squared"], r["window_lo"], r["window_hi"], r["n_points"]])
    art.csv("fits.csv", ["mode", "t", "beta_t", "beta_hat", "M_hat", "r_squared", "window_lo", "window_hi", "n_points"], rows)
    _write_trajectory(art, traj)
    body = {"command": "smoothing", "config": cfg.echo(), "alpha": alpha, "noise_floor": floor, "conservation_residuals": traj.conservation_residuals(), "warnings": traj.warnings}
    art.manifest(body, started)
    for row in rows:
        print(f"{row[0]:>6} t={row[1]:g} beta_t={row[2]:.6g} M_hat={row[4]:.4g} R2={row[5]:.6f}")
    return EXIT_OK


def cmd_induction(cfg: ExperimentConfig, out: Path) -> int:
    started = time.perf_counter()
    art = Artifacts(out)
    ind = cfg.sections["induction"]
    sim = command_sim_config(cfg, "induction")
    traj = integrate(sim)
    rep = run_induction(traj, sim.kernel, T0=sim.t_end, beta=ind["beta"])
    art.csv("ladder.csv", ["N", "Lambda", "sup", "margin", "pass"], ([r.N, r.Lambda, r.sup_value, r.margin, r.passed] for r in rep.rows))
    body = {
        "command": "induction",
        "config": cfg.echo(),
        "constants": rep.state.as_dict(),
        "N_max": rep.N_max,
        "beta_ladder_limit": rep.beta_ladder_limit,
        "notes": rep.notes,
    }
    art.manifest(body, started)
    s = rep.state
    print(f"alpha*={s.alpha_star:.6g} Lambda0={s.lambda0:.6g} M={s.M:.6g} B1={s.B1:.6g} B2={s.B2:.6g} beta={s.beta:.6g}")
    for r in rep.rows:
        print(f"N={r.N:2d} Lambda={r.Lambda:10.4f} margin={r.margin:.4e} {'PASS' if r.passed else 'FAIL'}")
    return EXIT_OK if rep.N_max >= 0 else EXIT_VIOLATION


def cmd_kernel_info(cfg: ExperimentConfig | None, out: Path | None) -> int:
    started = time.perf_counter()
    k = cfg.kernel() if cfg is not None else AngularKernel()
    tol = cfg.sections["kernel"]["tol"] if cfg is not None else 1e-12
    rule = graded_rule(k, tol)
    info = {
        "kernel": _kernel_block(k),
        "lambda2": kernel_moment(k, "two_sc", tol),
        "momentum_transfer": momentum_transfer(k, tol),
        "cancellation_I2": kernel_moment(k, "cancellation_I2", tol),
        "sin2_half": kernel_moment(k, "sin2_half", tol),
        "c_bd": c_bd_constant(k, tol),
        "alpha_star": alpha_star(k.d, k.mu),
        "lambda0": lambda0(k.d),
        "graded_levels": rule.levels,
        "angular_nodes": int(rule.nodes.size),
        "theta_min": rule.theta_min,
    }
    print(json.dumps(_jsonable(info), indent=2, sort_keys=True))
    if out is not None:
        art = Artifacts(out)
        art.json("kernel.json", info)
        art.manifest({"command": "kernel-info", "config": cfg.echo() if cfg else None}, started)
    return EXIT_OK


COMMANDS = ("simulate", "verify", "smoothing", "induction", "kernel-info")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="boltzlog", description="Fourier-side Boltzmann simulator with log-singular kernels and inequality checks.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", type=Path, help="TOML experiment config")
    p.add_argument("--out", type=Path, help="output directory (overrides the config's out)")
    p.add_argument("--seed", type=int, help="seed for randomized sweeps (overrides the config)")
    p.add_argument("--tol-report", type=float, help="tolerance for reporting a margin as a violation")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.config is None:
            if args.command != "kernel-info":
                raise ConfigError(f"{args.command} needs --config", field="--config")
            cfg = None
        else:
            cfg = load_config(args.config)
            if args.seed is not None:
                cfg.seed = args.seed
        if args.tol_report is not None and not args.tol_report >= 0:
            raise ConfigError("--tol-report must be >= 0", field="--tol-report")
    except ConfigError as e:
        print(f"config error [{e.field}]: {e}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out or (Path(cfg.out) if cfg is not None and cfg.out else None)
    if args.command == "kernel-info":
        return cmd_kernel_info(cfg, out)
    out = out or Path("out") / args.command
    try:
        if args.command == "simulate":
            return cmd_simulate(cfg, out)
        if args.command == "verify":
            return cmd_verify(cfg, out, args.tol_report)
        if args.command == "smoothing":
            return cmd_smoothing(cfg, out)
        return cmd_induction(cfg, out)
    except (BlowUpError, StabilityError) as e:
        print(f"solver failure: {e}", file=sys.stderr)
        return EXIT_BLOWUP
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
