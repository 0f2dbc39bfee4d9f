"""Command-line entry point.

Usage::

    spinchain SUBCOMMAND [--config PATH] [--out DIR] [--workers N] [--seedless]

Configuration files hold flat dotted keys (a TOML subset), e.g.::

    chain.j2 = 0.4
    qubit.c0 = 0.6
    qubit.c1 = 0.8

Every key is optional; omitted keys take the defaults in ``DEFAULTS``.
Exit status is 0 on success, 2 for configuration errors and 3 for numerical
failures.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import platform
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .dynamics import IntegrationError, IntegratorConfig, Pulse, StateVector, apply_pulse
from .spin_model import ChainParams, ParameterError, transition_frequency, write_spectrum_csv
from .sweeps import SweepSpec, run_sweep, write_metadata
from .teleport import InputQubit, run_protocol
from .two_level import (DetuningCatalog, TwoLevelParams, analytic_evolution, coincidence_scan,
                        write_rabi_2pik_csv)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
SUBCOMMANDS = ("spectrum", "teleport", "sweep-jratio", "sweep-rabi", "rabi-2pik", "two-level")

DEFAULTS = {
    "chain.omega0": 100.0,
    "chain.omega1": 200.0,
    "chain.omega2": 400.0,
    "chain.omega3": 800.0,
    "chain.j1": 10.0,
    "chain.j2": 0.4,
    "qubit.c0": 1 / 3,
    "qubit.c1": math.sqrt(8) / 3,
    "pulse.rabi": 0.1,
    "integrator.max_phase_step": 0.1,
    "integrator.hard_step": 0.0,  # 0 disables the override
    "integrator.max_steps": 20_000_000,
    "integrator.samples_per_pulse": 2000,
    "sweep.jratio.min": 0.002,
    "sweep.jratio.max": 0.2,
    "sweep.jratio.points": 60,
    "sweep.jratio.spacing": "log",
    "sweep.rabi.min": 0.04,
    "sweep.rabi.max": 0.12,
    "sweep.rabi.points": 240,
    "sweep.rabi.spacing": "linear",
    "rabi2pik.k_max": 500,
    "rabi2pik.window_lo": 0.04,
    "rabi2pik.window_hi": 0.12,
    "rabi2pik.cluster_tol": 0.01,
    "two_level.detuning": 0.8,
    "two_level.angle": math.pi,
    "two_level.samples": 2001,
    "output.dir": "out",
}

_INT_KEYS = {"integrator.max_steps", "integrator.samples_per_pulse", "sweep.jratio.points",
             "sweep.rabi.points", "rabi2pik.k_max", "two_level.samples"}
_STR_KEYS = {"sweep.jratio.spacing", "sweep.rabi.spacing", "output.dir"}
_COMPLEX_KEYS = {"qubit.c0", "qubit.c1"}


class ConfigError(ValueError):
    """Invalid configuration; ``errors`` maps each offending key to a message."""

    def __init__(self, errors: dict):
        self.errors = errors
        super().__init__("; ".join(f"{k}: {v}" for k, v in errors.items()))


def _flatten(d: dict, prefix: str = "") -> dict:
    flat = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            flat.update(_flatten(v, key + "."))
        else:
            flat[key] = v
    return flat


def _coerce(key: str, value):
    if key in _STR_KEYS:
        if not isinstance(value, str):
            raise TypeError("expected a string")
        return value
    if isinstance(value, bool):
        raise TypeError("expected a number")
    if key in _COMPLEX_KEYS:
        return complex(value.replace(" ", "")) if isinstance(value, str) else complex(value)
    if key in _INT_KEYS:
        if not isinstance(value, int):
            raise TypeError("expected an integer")
        return value
    if not isinstance(value, (int, float)):
        raise TypeError("expected a number")
    return float(value)


def _grid(lo: float, hi: float, points: int, spacing: str) -> np.ndarray:
    if spacing == "log":
        return np.geomspace(lo, hi, points)
    if spacing == "linear":
        return np.linspace(lo, hi, points)
    raise ValueError("spacing must be 'log' or 'linear'")


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration; ``values`` holds every key, defaults filled in."""

    values: dict

    @property
    def chain(self) -> ChainParams:
        v = self.values
        return ChainParams(tuple(v[f"chain.omega{k}"] for k in range(4)), v["chain.j1"], v["chain.j2"])

    @property
    def qubit(self) -> InputQubit:
        return InputQubit(self.values["qubit.c0"], self.values["qubit.c1"])

    @property
    def rabi(self) -> float:
        return self.values["pulse.rabi"]

    @property
    def integrator(self) -> IntegratorConfig:
        v = self.values
        return IntegratorConfig(v["integrator.max_phase_step"], v["integrator.hard_step"] or None,
                                v["integrator.max_steps"], v["integrator.samples_per_pulse"])

    @property
    def output_dir(self) -> Path:
        return Path(self.values["output.dir"])

    def sweep(self, control: str) -> SweepSpec:
        v = self.values
        name = {"j_ratio": "jratio", "rabi": "rabi"}[control]
        grid = _grid(v[f"sweep.{name}.min"], v[f"sweep.{name}.max"], v[f"sweep.{name}.points"],
                     v[f"sweep.{name}.spacing"])
        return SweepSpec(control, tuple(grid), self.chain, self.qubit, self.rabi, self.integrator)

    def serialize(self) -> str:
        lines = []
        for key in sorted(self.values):
            value = self.values[key]
            if isinstance(value, complex):
                text = f'"{value!r}"'
            elif isinstance(value, str):
                text = json.dumps(value)
            else:
                text = repr(value)
            lines.append(f"{key} = {text}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.serialize().encode()).hexdigest()


def load_config(values: dict) -> RunConfig:
    errors = {}
    merged = dict(DEFAULTS)
    for key, value in _flatten(values).items():
        if key not in DEFAULTS:
            errors[key] = "unknown key"
            continue
        try:
            merged[key] = _coerce(key, value)
        except (TypeError, ValueError) as exc:
            errors[key] = f"{exc} (got {value!r})"
    for key in _COMPLEX_KEYS:
        merged[key] = complex(merged[key])
    if errors:
        raise ConfigError(errors)

    config = RunConfig(merged)
    checks = {
        "chain": lambda: config.chain,
        "qubit": lambda: config.qubit,
        "integrator": lambda: config.integrator,
        "sweep.jratio": lambda: config.sweep("j_ratio"),
        "sweep.rabi": lambda: config.sweep("rabi"),
    }
    for name, check in checks.items():
        try:
            check()
        except (ParameterError, ValueError) as exc:
            errors[name] = str(exc)
    if not merged["pulse.rabi"] > 0:
        errors["pulse.rabi"] = "must be positive"
    if merged["rabi2pik.k_max"] < 1:
        errors["rabi2pik.k_max"] = "must be >= 1"
    if not merged["two_level.angle"] > 0:
        errors["two_level.angle"] = "must be positive"
    if merged["two_level.samples"] < 2:
        errors["two_level.samples"] = "must be >= 2"
    if errors:
        raise ConfigError(errors)
    return config


def parse_config(path: str | Path | None) -> RunConfig:
    """Read and validate a config file; ``None`` yields the defaults."""
    if path is None:
        return load_config({})
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError({"file": str(exc)}) from exc
    return load_config(data)


# ---- subcommands ------------------------------------------------------------

def _cmd_spectrum(config: RunConfig, out: Path, workers: int) -> list[str]:
    with open(out / "spectrum.csv", "w") as fh:
        write_spectrum_csv(config.chain, fh)
    return ["spectrum.csv"]


def _cmd_teleport(config: RunConfig, out: Path, workers: int) -> list[str]:
    result = run_protocol(config.chain, config.qubit, config.rabi, config.integrator, record=True)
    with open(out / "teleport_report.txt", "w") as fh:
        result.write_report(fh)
    with open(out / "teleport_trajectory.csv", "w") as fh:
        result.run.trajectory.write_csv(fh)
    return ["teleport_report.txt", "teleport_trajectory.csv"]


def _sweep(control: str, stem: str):
    def cmd(config: RunConfig, out: Path, workers: int) -> list[str]:
        spec = config.sweep(control)
        result = run_sweep(spec, workers)
        with open(out / f"{stem}.csv", "w") as fh:
            result.write_csv(fh)
        with open(out / f"{stem}.meta.json", "w") as fh:
            write_metadata(spec, fh, errors=result.errors)
        return [f"{stem}.csv", f"{stem}.meta.json"]
    return cmd


def _cmd_rabi_2pik(config: RunConfig, out: Path, workers: int) -> list[str]:
    v = config.values
    catalog = DetuningCatalog.from_params(config.chain)
    window = (v["rabi2pik.window_lo"], v["rabi2pik.window_hi"])
    with open(out / "rabi_2pik.csv", "w") as fh:
        write_rabi_2pik_csv(catalog, v["rabi2pik.k_max"], fh, window)
    with open(out / "rabi_2pik_clusters.csv", "w") as fh:
        fh.write("center,delta_label,k,omega\n")
        for cluster in coincidence_scan(catalog, v["rabi2pik.k_max"], window, v["rabi2pik.cluster_tol"]):
            for m in cluster.members:
                fh.write(f"{cluster.center!r},{m.label},{m.k},{m.omega!r}\n")
    return ["rabi_2pik.csv", "rabi_2pik_clusters.csv"]


def _cmd_two_level(config: RunConfig, out: Path, workers: int) -> list[str]:
    """Analytic and integrated amplitudes of the (0, 1) pair under one detuned pulse."""
    v = config.values
    tl = TwoLevelParams(config.rabi, v["two_level.detuning"])
    carrier = abs(transition_frequency(0, 1, config.chain)) + tl.detuning
    duration = v["two_level.angle"] / (2 * math.pi * config.rabi)
    times = np.linspace(0.0, duration, v["two_level.samples"])
    dp, dm = analytic_evolution(tl, times)
    state = StateVector.basis(0)
    with open(out / "two_level.csv", "w") as fh:
        fh.write("t_us,dp_re,dp_im,dm_re,dm_im,pp,pm,pp_numeric,pm_numeric\n")
        for t, a, b in zip(times, dp, dm):
            if t > state.frame_time:
                seg = Pulse(2 * math.pi * config.rabi * (t - state.frame_time), config.rabi, carrier, 0.0)
                state = apply_pulse(state, seg, config.chain, config.integrator, couplings=[(0, 1)])
            row = [t, a.real, a.imag, b.real, b.imag, abs(a) ** 2, abs(b) ** 2, *np.abs(state.amps[[0, 1]]) ** 2]
            fh.write(",".join(repr(float(x)) for x in row) + "\n")
    return ["two_level.csv"]


COMMANDS = {
    "spectrum": _cmd_spectrum,
    "teleport": _cmd_teleport,
    "sweep-jratio": _sweep("j_ratio", "sweep_jratio"),
    "sweep-rabi": _sweep("rabi", "sweep_rabi"),
    "rabi-2pik": _cmd_rabi_2pik,
    "two-level": _cmd_two_level,
}


def _versions() -> dict:
    import numba
    import scipy

    return {"spinchain": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "numba": numba.__version__}


def dispatch(subcommand: str, config: RunConfig, out: Path | None = None, workers: int = 1) -> int:
    """Run one subcommand, write its outputs and a manifest; return the exit status."""
    out = Path(out) if out is not None else config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    try:
        outputs = COMMANDS[subcommand](config, out, workers)
    except IntegrationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    manifest = {
        "command": subcommand,
        "config": config.serialize(),
        "config_sha256": config.digest(),
        "versions": _versions(),
        "wall_time_s": time.perf_counter() - start,
        "outputs": outputs,
    }
    with open(out / f"{subcommand}.manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinchain", description=__doc__.split("\n\n")[0])
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", type=Path, default=None, help="flat dotted-key config file")
    parser.add_argument("--out", type=Path, default=None, help="output directory (default: output.dir)")
    parser.add_argument("--workers", type=int, default=1, help="maximum parallel sweep workers")
    parser.add_argument("--seedless", action="store_true",
                        help="no-op; every computation is deterministic and uses no random numbers")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.workers < 1:
        print("--workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        config = parse_config(args.config)
    except ConfigError as exc:
        for key, msg in exc.errors.items():
            print(f"config error: {key}: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    return dispatch(args.subcommand, config, args.out, args.workers)


if __name__ == "__main__":
    sys.exit(main())
