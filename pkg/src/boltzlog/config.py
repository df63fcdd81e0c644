"""TOML experiment configuration with strict schema validation.

A config has top-level ``seed`` and optional ``out`` plus the sections
``kernel``, ``grid``, ``ic``, ``time``, ``weights``, ``verify``,
``smoothing`` and ``induction``. Unknown keys anywhere are rejected; every
error names the offending field as ``section.key``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError, DomainError
from .kernel import AngularKernel, KernelFamily
from .solver import ICFamily, InitialCondition, Integrator, SimConfig
from .verify import DEFAULT_COUNTS, DEFAULT_TOL_REPORT

_REQUIRED = object()

# section -> key -> (type, default); _REQUIRED marks mandatory keys
SCHEMA: dict[str, dict[str, tuple[type | tuple, Any]]] = {
    "kernel": {
        "family": (str, _REQUIRED),
        "d": (int, 3),
        "kappa": (float, 1.0),
        "mu": (float, None),
        "nu": (float, None),
        "tol": (float, 1e-12),
    },
    "grid": {"N": (int, 2048), "x_max": (float, 400.0), "interp_order": (int, 5)},
    "ic": {
        "family": (str, _REQUIRED),
        "c": (float, 1.0),
        "a0": (float, -0.2),
        "e0": (float, 1.0),
        "p": (float, 4.0),
        "c1": (float, 0.5),
        "c2": (float, 2.0),
        "w": (float, 0.5),
    },
    "time": {
        "dt": (float, 1e-3),
        "t_end": (float, 1.0),
        "integrator": (str, "rk4"),
        "snapshot_times": (list, None),
        "moment_every": (int, 10),
    },
    "weights": {"alpha": (float, None), "beta": (float, None)},
    "verify": {
        **{name: (int, n) for name, n in DEFAULT_COUNTS.items()},
        "tol_report": (float, DEFAULT_TOL_REPORT),
        "simulated_snapshot": (bool, True),
    },
    "smoothing": {
        "times": (list, [0.25, 0.5, 1.0]),
        "window": (list, None),
        "noise_floor": (float, None),
    },
    "induction": {"T0": (float, None), "beta": (float, None), "n_snapshots": (int, 9)},
}
TOP_LEVEL = {"seed": (int, 42), "out": (str, None)}


def _coerce(name: str, value, typ):
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{name} must be a number, got {value!r}", field=name)
        return float(value)
    if typ is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{name} must be an integer, got {value!r}", field=name)
        return value
    if typ is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{name} must be true or false, got {value!r}", field=name)
        return value
    if typ is str:
        if not isinstance(value, str):
            raise ConfigError(f"{name} must be a string, got {value!r}", field=name)
        return value
    if typ is list:
        if not isinstance(value, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            raise ConfigError(f"{name} must be a list of numbers, got {value!r}", field=name)
        return [float(v) for v in value]
    raise TypeError(typ)


@dataclass
class ExperimentConfig:
    seed: int = 42
    out: str | None = None
    sections: dict[str, dict[str, Any]] = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    def section(self, name: str) -> dict[str, Any]:
        return self.sections[name]

    def kernel(self) -> AngularKernel:
        s = self.sections["kernel"]
        kw = {"family": s["family"], "d": s["d"], "kappa": s["kappa"]}
        if s["mu"] is not None:
            kw["mu"] = s["mu"]
        if s["nu"] is not None:
            kw["nu"] = s["nu"]
        return AngularKernel(**kw)

    def initial_condition(self) -> InitialCondition:
        s = self.sections["ic"]
        return InitialCondition(**s)

    def sim_config(self, **overrides) -> SimConfig:
        g, t = self.sections["grid"], self.sections["time"]
        snaps = t["snapshot_times"] if t["snapshot_times"] is not None else [0.0, t["t_end"]]
        kw = dict(
            kernel=self.kernel(),
            ic=self.initial_condition(),
            N=g["N"],
            x_max=g["x_max"],
            dt=t["dt"],
            t_end=t["t_end"],
            integrator=Integrator(t["integrator"]),
            snapshot_times=tuple(snaps),
            interp_order=g["interp_order"],
            tol=self.sections["kernel"]["tol"],
            moment_every=t["moment_every"],
        )
        kw.update(overrides)
        return SimConfig(**kw)

    def echo(self) -> dict:
        """Fully resolved config, suitable for the manifest."""
        return {"seed": self.seed, "out": self.out, **self.sections}


def parse_config(data: dict) -> ExperimentConfig:
    """Validate a decoded TOML document and fill defaults."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a table", field="<root>")
    cfg = ExperimentConfig(raw=data)
    for key, value in data.items():
        if key in TOP_LEVEL:
            setattr(cfg, key, _coerce(key, value, TOP_LEVEL[key][0]))
        elif key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}", field=key)
        elif not isinstance(value, dict):
            raise ConfigError(f"{key} must be a table", field=key)
    for sec, spec in SCHEMA.items():
        given = data.get(sec, {})
        out = {}
        for key in given:
            if key not in spec:
                raise ConfigError(f"unknown key {sec}.{key}", field=f"{sec}.{key}")
        for key, (typ, default) in spec.items():
            name = f"{sec}.{key}"
            if key in given:
                out[key] = _coerce(name, given[key], typ)
            elif default is _REQUIRED:
                raise ConfigError(f"missing required field {name}", field=name)
            else:
                out[key] = list(default) if isinstance(default, list) else default
        cfg.sections[sec] = out
    _validate(cfg)
    return cfg


def _require(cond: bool, name: str, msg: str) -> None:
    if not cond:
        raise ConfigError(f"{name} {msg}", field=name)


def _validate(cfg: ExperimentConfig) -> None:
    k = cfg.sections["kernel"]
    families = [f.value for f in KernelFamily]
    _require(k["family"] in families, "kernel.family", f"must be one of {families}")
    fam = KernelFamily(k["family"])
    if fam is KernelFamily.DEBYE_YUKAWA:
        _require(k["mu"] is not None, "kernel.mu", "is required for the Debye-Yukawa kernel")
    if fam is KernelFamily.POWER_LAW:
        _require(k["nu"] is not None, "kernel.nu", "is required for the power-law kernel")
        _require(0 < k["nu"] < 1, "kernel.nu", "must lie in (0, 1)")
    if k["mu"] is None:
        k["mu"] = 1.0
    _require(k["mu"] > 0, "kernel.mu", "must be positive")
    _require(k["d"] >= 2, "kernel.d", "must be >= 2")
    _require(k["kappa"] > 0, "kernel.kappa", "must be positive")
    _require(k["tol"] > 0, "kernel.tol", "must be positive")

    g = cfg.sections["grid"]
    _require(g["N"] >= 8, "grid.N", "must be >= 8")
    _require(g["x_max"] > 0, "grid.x_max", "must be positive")
    _require(3 <= g["interp_order"] < g["N"], "grid.interp_order", "must be >= 3 and below grid.N")

    t = cfg.sections["time"]
    integrators = [i.value for i in Integrator]
    _require(t["integrator"] in integrators, "time.integrator", f"must be one of {integrators}")
    _require(t["t_end"] > 0, "time.t_end", "must be positive")
    _require(0 < t["dt"] < t["t_end"], "time.dt", "must lie in (0, time.t_end)")
    _require(t["moment_every"] >= 1, "time.moment_every", "must be >= 1")
    if t["snapshot_times"] is not None:
        _require(all(0 <= s <= t["t_end"] for s in t["snapshot_times"]), "time.snapshot_times", "must lie in [0, time.t_end]")

    ic = cfg.sections["ic"]
    ic_families = [f.value for f in ICFamily]
    _require(ic["family"] in ic_families, "ic.family", f"must be one of {ic_families}")
    icf, d = ICFamily(ic["family"]), k["d"]
    if icf is ICFamily.MAXWELLIAN:
        _require(ic["c"] > 0, "ic.c", "must be positive")
    elif icf is ICFamily.BKW:
        _require(ic["e0"] > 0, "ic.e0", "must be positive")
        lo = -2.0 * ic["e0"] / (d + 2)
        _require(lo <= ic["a0"] <= 0, "ic.a0", f"must lie in [{lo:.6g}, 0] for a nonnegative density")
    elif icf is ICFamily.MATERN:
        _require(ic["p"] >= d / 2 + 1, "ic.p", f"must be >= d/2 + 1 = {d / 2 + 1}")
    else:
        _require(ic["c1"] > 0, "ic.c1", "must be positive")
        _require(ic["c2"] > 0, "ic.c2", "must be positive")
        _require(0 <= ic["w"] <= 1, "ic.w", "must lie in [0, 1]")

    w = cfg.sections["weights"]
    if w["alpha"] is not None:
        # the weight inequalities need alpha >= e^mu
        _require(w["alpha"] >= math.exp(k["mu"]) * (1 - 1e-15), "weights.alpha", f"= {w['alpha']} is below e^mu = {math.exp(k['mu']):.6g}")
    if w["beta"] is not None:
        _require(w["beta"] > 0, "weights.beta", "must be positive")

    sm = cfg.sections["smoothing"]
    _require(len(sm["times"]) > 0 and all(s > 0 for s in sm["times"]), "smoothing.times", "must be positive: the smoothing fit is defined for t > 0 only")
    if sm["window"] is not None:
        _require(len(sm["window"]) == 2 and 0 <= sm["window"][0] < sm["window"][1], "smoothing.window", "must be [lo, hi] with 0 <= lo < hi")
    if sm["noise_floor"] is not None:
        _require(sm["noise_floor"] >= 0, "smoothing.noise_floor", "must be >= 0")

    for name, n in cfg.sections["verify"].items():
        if name in DEFAULT_COUNTS:
            _require(n >= 1, f"verify.{name}", "must be >= 1")
    _require(cfg.sections["verify"]["tol_report"] >= 0, "verify.tol_report", "must be >= 0")

    ind = cfg.sections["induction"]
    _require(ind["n_snapshots"] >= 5, "induction.n_snapshots", "must be >= 5")
    if ind["T0"] is not None:
        _require(0 < ind["T0"], "induction.T0", "must be positive")
    if ind["beta"] is not None:
        _require(ind["beta"] > 0, "induction.beta", "must be positive")

    try:
        cfg.sim_config()
    except DomainError as e:
        raise ConfigError(str(e), field="time") from None


def load_config(path: str | Path) -> ExperimentConfig:
    """Read and validate a TOML config file."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found", field="--config") from None
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}", field="<syntax>") from None
    return parse_config(data)
