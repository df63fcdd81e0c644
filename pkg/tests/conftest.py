"""Shared fixtures: kernels, grids and session-cached trajectories.

Trajectories for the shipped configs are built exactly as the CLI builds
them, so the acceptance checks exercise the same runs users get.
"""

from __future__ import annotations

import time
from pathlib import Path

import numpy as np
import pytest

from boltzlog.cli import command_sim_config
from boltzlog.collision import IsoSpectralField, quadratic_grid
from boltzlog.config import load_config
from boltzlog.kernel import AngularKernel
from boltzlog.solver import InitialCondition, SimConfig, integrate

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"
EIGHTHS = tuple(np.arange(9) / 8)

# command that consumes each shipped config
CONFIG_COMMANDS = {
    "maxwellian.toml": "simulate",
    "bkw.toml": "simulate",
    "two_temperature.toml": "simulate",
    "smoothing.toml": "smoothing",
    "induction.toml": "induction",
    "verify.toml": "verify",
}

_CACHE: dict = {}
RUN_SECONDS: dict[str, float] = {}  # wall time of each shipped-config simulation


def _cached(key, build):
    if key not in _CACHE:
        _CACHE[key] = build()
    return _CACHE[key]


def config_run(name: str):
    """(SimConfig, Trajectory) of a shipped config as its command runs it."""

    def build():
        sim = command_sim_config(load_config(CONFIGS / name), CONFIG_COMMANDS[name])
        started = time.perf_counter()
        traj = integrate(sim)
        RUN_SECONDS[name] = time.perf_counter() - started
        return sim, traj

    return _cached(("config", name), build)


@pytest.fixture(scope="session")
def kernel3():
    return AngularKernel(family="debye_yukawa_model", d=3, kappa=1.0, mu=1.0)


@pytest.fixture(scope="session")
def kernel2():
    return AngularKernel(family="debye_yukawa_model", d=2, kappa=1.0, mu=1.0)


@pytest.fixture(scope="session")
def grid():
    return quadratic_grid(2048, 400.0)


@pytest.fixture(scope="session")
def maxwellian_field(grid):
    return IsoSpectralField(grid, np.exp(-grid))


@pytest.fixture(scope="session")
def maxwellian_run():
    return config_run("maxwellian.toml")


@pytest.fixture(scope="session")
def bkw_run():
    return config_run("bkw.toml")


@pytest.fixture(scope="session")
def two_temperature_run():
    return config_run("two_temperature.toml")


@pytest.fixture(scope="session")
def smoothing_run():
    return config_run("smoothing.toml")


@pytest.fixture(scope="session")
def induction_run():
    return config_run("induction.toml")


def coarse_run(family: str, kernel, dt: float, snapshots=(0.0, 1.0), **ic):
    """Cached short run on the default grid."""
    key = ("coarse", family, dt, tuple(snapshots), tuple(sorted(ic.items())))
    return _cached(key, lambda: integrate(SimConfig(kernel=kernel, ic=InitialCondition(family, **ic), dt=dt, t_end=1.0, snapshot_times=snapshots)))
