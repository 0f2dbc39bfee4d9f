"""Fidelity of the teleportation program across a grid of J'/J or Rabi values."""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import IO

import numpy as np
from scipy.signal import find_peaks as _scipy_find_peaks

from .dynamics import DEFAULT_CONFIG, IntegrationError, IntegratorConfig, probabilities
from .spin_model import N_STATES, ChainParams, ParameterError
from .teleport import InputQubit, fidelity, protocol_targets, run_protocol

CONTROLS = ("j_ratio", "rabi")
REDUCTIONS = ("magnitude", "squared", "real")


def fig5_grid(points: int = 60) -> np.ndarray:
    return np.geomspace(0.002, 0.2, points)


def fig6_grid(points: int = 240) -> np.ndarray:
    return np.linspace(0.04, 0.12, points)


@dataclass(frozen=True)
class SweepSpec:
    control: str
    grid: tuple
    base: ChainParams = ChainParams()
    qubit: InputQubit = InputQubit()
    rabi: float = 0.1
    integrator: IntegratorConfig = DEFAULT_CONFIG

    def __post_init__(self):
        if self.control not in CONTROLS:
            raise ValueError(f"control must be one of {CONTROLS}")
        grid = tuple(float(x) for x in self.grid)
        if not grid:
            raise ValueError("sweep grid is empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("sweep grid must be strictly increasing")
        object.__setattr__(self, "grid", grid)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["qubit"] = {"c0": repr(self.qubit.c0), "c1": repr(self.qubit.c1)}
        return d


def _run_point(spec: SweepSpec, x: float):
    try:
        if spec.control == "j_ratio":
            params = spec.base.with_couplings(j2=x * spec.base.j1)
            result = run_protocol(params, spec.qubit, spec.rabi, spec.integrator)
        else:
            # carriers stay tuned to the base spectrum; only the drive strength moves
            result = run_protocol(spec.base, spec.qubit, x, spec.integrator)
    except (IntegrationError, ParameterError) as exc:
        return complex("nan+nanj"), np.full(N_STATES, np.nan), f"{type(exc).__name__}: {exc}"
    target = protocol_targets(spec.qubit).final
    return fidelity(result.final, target).overlap, probabilities(result.final), None


def _run_point_star(args):
    return _run_point(*args)


@dataclass
class SweepResult:
    control: str
    grid: np.ndarray
    overlap: np.ndarray
    probs: np.ndarray
    errors: list = field(default_factory=list)

    def __len__(self):
        return len(self.grid)

    def fidelity(self, reduction: str = "magnitude") -> np.ndarray:
        if reduction == "magnitude":
            return np.abs(self.overlap)
        if reduction == "squared":
            return np.abs(self.overlap) ** 2
        if reduction == "real":
            return self.overlap.real
        raise ValueError(f"reduction must be one of {REDUCTIONS}")

    def write_csv(self, fh: IO[str]) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["control", "fidelity_mag", "fidelity_re", "fidelity_im"] + [f"p{m}" for m in range(N_STATES)])
        for x, f, p in zip(self.grid, self.overlap, self.probs):
            f = complex(f)
            writer.writerow([repr(float(x)), repr(abs(f)), repr(f.real), repr(f.imag)] + [repr(float(v)) for v in p])

    @classmethod
    def read_csv(cls, fh: IO[str], control: str) -> "SweepResult":
        rows = list(csv.DictReader(fh))
        grid = np.array([float(r["control"]) for r in rows])
        overlap = np.array([complex(float(r["fidelity_re"]), float(r["fidelity_im"])) for r in rows])
        probs = np.array([[float(r[f"p{m}"]) for m in range(N_STATES)] for r in rows]).reshape(-1, N_STATES)
        return cls(control, grid, overlap, probs, [None] * len(rows))


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Run the full protocol at every grid point, in parallel if ``workers > 1``.

    Points are independent and results are assembled in grid order, so the
    output does not depend on the worker count. A point whose integration
    fails is recorded with NaN values and its error message.
    """
    tasks = [(spec, x) for x in spec.grid]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_point_star, tasks, chunksize=1))
    else:
        rows = [_run_point(*t) for t in tasks]
    overlap = np.array([r[0] for r in rows], dtype=np.complex128)
    probs = np.array([r[1] for r in rows]).reshape(-1, N_STATES)
    return SweepResult(spec.control, np.array(spec.grid), overlap, probs, [r[2] for r in rows])


def sweep_j_ratio(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Fidelity versus J'/J at fixed J; carriers follow the shifted spectrum."""
    if spec.control != "j_ratio":
        raise ValueError("spec.control must be 'j_ratio'")
    return run_sweep(spec, workers)


def sweep_rabi(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Fidelity versus the Rabi frequency shared by all seven pulses."""
    if spec.control != "rabi":
        raise ValueError("spec.control must be 'rabi'")
    return run_sweep(spec, workers)


def write_metadata(spec: SweepSpec, fh: IO[str], **extra) -> None:
    json.dump({"spec": spec.to_dict(), **extra}, fh, indent=2, sort_keys=True)
    fh.write("\n")


def plateau(values: np.ndarray) -> float:
    """Median of the top decile (at least one value) of the finite entries."""
    v = np.sort(values[np.isfinite(values)])
    if len(v) == 0:
        return math.nan
    n = max(1, math.ceil(len(v) / 10))
    return float(np.median(v[-n:]))


def find_threshold(result: SweepResult, level: float = 0.98, reduction: str = "magnitude") -> float | None:
    """Smallest grid value from which the fidelity stays at or above
    ``level * plateau`` for the rest of the sweep; None if the last point
    is below it."""
    f = result.fidelity(reduction)
    cut = level * plateau(f)
    ok = np.isfinite(f) & (f >= cut)
    if not ok[-1]:
        return None
    failing = np.flatnonzero(~ok)
    start = failing[-1] + 1 if len(failing) else 0
    return float(result.grid[start])


def find_peaks(result: SweepResult, prominence: float, reduction: str = "magnitude") -> list[float]:
    """Grid values of interior local maxima with at least ``prominence``."""
    f = np.nan_to_num(result.fidelity(reduction), nan=-np.inf)
    idx, _ = _scipy_find_peaks(f, prominence=prominence)
    return [float(result.grid[i]) for i in idx]
