"""Pulse-driven evolution of the 16 interaction-picture amplitudes.

Each amplitude ``D_m`` is the lab-frame amplitude with its free phase
``exp(-i E_m t)`` removed, so it only changes while a pulse is on. The drive
couples every single-flip pair ``(g, e)`` (``g`` has the flipped spin in its
ground orientation) through

    dD_g/dt =  i (Omega/2) exp(+i(delta t + phi)) D_e
    dD_e/dt =  i (Omega/2) exp(-i(delta t + phi)) D_g

where ``delta = carrier - (E_e - E_g)``. No rotating-wave truncation is made:
all 32 pairs are integrated, resonant or not.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np

from ._kernel import rk4_evolve
from .spin_model import N_SPINS, N_STATES, ChainParams, ParameterError, transition_table

TWO_PI = 2.0 * math.pi

# bit k of each basis state, shape (4, 16)
_BITS = np.array([[(s >> k) & 1 for s in range(N_STATES)] for k in range(N_SPINS)])
_IZ_SIGNS = 0.5 * (1 - 2 * _BITS)


class IntegrationError(RuntimeError):
    """The requested pulse cannot be integrated within the configured step budget."""


@dataclass(frozen=True, eq=False)
class StateVector:
    """Interaction-picture amplitudes and the elapsed time (us) of their frame."""

    amps: np.ndarray
    frame_time: float = 0.0

    def __post_init__(self):
        amps = np.array(self.amps, dtype=np.complex128)
        if amps.shape != (N_STATES,):
            raise ValueError(f"expected {N_STATES} amplitudes, got shape {amps.shape}")
        if self.frame_time < 0:
            raise ValueError("frame_time must be non-negative")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def basis(cls, index: int) -> "StateVector":
        amps = np.zeros(N_STATES, dtype=np.complex128)
        amps[index] = 1.0
        return cls(amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))


@dataclass(frozen=True)
class Pulse:
    """Rectangular RF pulse.

    ``angle`` is the nominal rotation ``Omega * tau`` in radians; ``rabi`` and
    ``carrier`` are in 2*pi*MHz and ``phase`` in radians. ``label`` names the
    targeted transition ``(i, j)`` and is informational only.
    """

    angle: float
    rabi: float
    carrier: float
    phase: float = 0.0
    label: tuple[int, int] | None = None

    def __post_init__(self):
        if not (self.angle > 0 and math.isfinite(self.angle)):
            raise ParameterError(f"pulse angle must be positive and finite, got {self.angle}")
        if not (self.rabi > 0 and math.isfinite(self.rabi)):
            raise ParameterError(f"Rabi frequency must be positive and finite, got {self.rabi}")
        if not math.isfinite(self.carrier):
            raise ParameterError("carrier frequency must be finite")

    @property
    def duration(self) -> float:
        """Pulse length in us."""
        return self.angle / (TWO_PI * self.rabi)


@dataclass(frozen=True)
class IntegratorConfig:
    """Step control for :func:`apply_pulse`.

    The step is the largest one for which no active coupling phase, and no
    Rabi rotation, advances by more than ``max_phase_step`` radians.
    ``hard_step`` (us) overrides that choice. More than ``max_steps`` steps
    for a single pulse is an error.
    """

    max_phase_step: float = 0.1
    hard_step: float | None = None
    max_steps: int = 20_000_000
    samples_per_pulse: int = 2000

    def __post_init__(self):
        if not 0 < self.max_phase_step <= 0.5:
            raise ParameterError("max_phase_step must lie in (0, 0.5]")
        if self.hard_step is not None and not self.hard_step > 0:
            raise ParameterError("hard_step must be positive")
        if self.max_steps < 1 or self.samples_per_pulse < 2:
            raise ParameterError("max_steps must be >= 1 and samples_per_pulse >= 2")


DEFAULT_CONFIG = IntegratorConfig()


def _active_pairs(params: ChainParams, couplings: Iterable[tuple[int, int]] | None):
    table = transition_table(params)
    lower, upper, gap = table.lower, table.upper, table.gap
    if couplings is None:
        return lower, upper, gap
    idx = np.array(sorted({table.index_of(m, k) for m, k in couplings}), dtype=np.int64)
    if len(idx) == 0:
        return lower[:0], upper[:0], gap[:0]
    return lower[idx], upper[idx], gap[idx]


def rhs(state: StateVector, t: float, pulse: Pulse, params: ChainParams,
        couplings: Iterable[tuple[int, int]] | None = None) -> np.ndarray:
    """Time derivative of the amplitudes (per us) at absolute time ``t``."""
    lower, upper, gap = _active_pairs(params, couplings)
    z = 1j * math.pi * pulse.rabi * np.exp(1j * (TWO_PI * (pulse.carrier - gap) * t + pulse.phase))
    d = state.amps
    out = np.zeros(N_STATES, dtype=np.complex128)
    np.add.at(out, lower, z * d[upper])
    np.add.at(out, upper, -np.conj(z) * d[lower])
    return out


def step_count(pulse: Pulse, params: ChainParams, cfg: IntegratorConfig = DEFAULT_CONFIG,
               couplings: Iterable[tuple[int, int]] | None = None) -> int:
    tau = pulse.duration
    if cfg.hard_step is not None:
        n = math.ceil(tau / cfg.hard_step)
    else:
        _, _, gap = _active_pairs(params, couplings)
        max_detuning = float(np.max(np.abs(pulse.carrier - gap))) if len(gap) else 0.0
        rate = TWO_PI * (max_detuning + 0.5 * pulse.rabi)
        n = math.ceil(rate * tau / cfg.max_phase_step)
    n = max(int(n), 1)
    if n > cfg.max_steps:
        raise IntegrationError(
            f"pulse {pulse.label or ''} needs {n} steps of {tau / n:.3e} us, "
            f"above the cap of {cfg.max_steps}")
    return n


def _evolve(state: StateVector, pulse: Pulse, params: ChainParams, cfg: IntegratorConfig,
            couplings, n_samples: int):
    lower, upper, gap = _active_pairs(params, couplings)
    n = step_count(pulse, params, cfg, couplings)
    h = pulse.duration / n
    if n_samples:
        sample_steps = np.unique(np.rint(np.linspace(0, n, min(n_samples, n + 1))).astype(np.int64))
    else:
        sample_steps = np.empty(0, dtype=np.int64)
    detuning = TWO_PI * (pulse.carrier - gap)
    amps, samples = rk4_evolve(state.amps, np.ascontiguousarray(lower), np.ascontiguousarray(upper),
                               np.ascontiguousarray(detuning), math.pi * pulse.rabi, float(pulse.phase),
                               float(state.frame_time), h, n, sample_steps)
    final = StateVector(amps, state.frame_time + pulse.duration)
    return final, state.frame_time + sample_steps * h, samples


def apply_pulse(state: StateVector, pulse: Pulse, params: ChainParams,
                cfg: IntegratorConfig = DEFAULT_CONFIG,
                couplings: Iterable[tuple[int, int]] | None = None) -> StateVector:
    """Integrate one pulse with fixed-step RK4.

    ``couplings`` restricts the drive to the listed single-flip pairs; the
    default keeps all 32.
    """
    final, _, _ = _evolve(state, pulse, params, cfg, couplings, 0)
    return final


@dataclass
class Trajectory:
    """Sampled populations during a program; ``pulse_index`` tags each row."""

    t: np.ndarray
    probs: np.ndarray
    pulse_index: np.ndarray

    @property
    def spin_z(self) -> np.ndarray:
        return self.probs @ _IZ_SIGNS.T

    def write_csv(self, fh: IO[str]) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t_us"] + [f"p{m}" for m in range(N_STATES)] + [f"iz{k}" for k in range(N_SPINS)])
        for t, p, iz in zip(self.t, self.probs, self.spin_z):
            writer.writerow([repr(float(t))] + [repr(float(x)) for x in p] + [repr(float(x)) for x in iz])


@dataclass
class ProgramRun:
    initial: StateVector
    states: list[StateVector] = field(default_factory=list)
    trajectory: Trajectory | None = None

    @property
    def final(self) -> StateVector:
        return self.states[-1] if self.states else self.initial


def apply_program(state: StateVector, program: Sequence[Pulse], params: ChainParams,
                  cfg: IntegratorConfig = DEFAULT_CONFIG, record: bool = False,
                  couplings: Iterable[tuple[int, int]] | None = None) -> ProgramRun:
    """Apply pulses left to right, keeping the state after each one.

    With ``record=True`` the populations are sampled ``cfg.samples_per_pulse``
    times per pulse (fewer if the pulse has fewer steps).
    """
    run = ProgramRun(state)
    ts, probs, tags = [], [], []
    for i, pulse in enumerate(program):
        state, t, samples = _evolve(state, pulse, params, cfg, couplings,
                                    cfg.samples_per_pulse if record else 0)
        run.states.append(state)
        if record:
            ts.append(t)
            probs.append(np.abs(samples) ** 2)
            tags.append(np.full(len(t), i))
    if record:
        if ts:
            run.trajectory = Trajectory(np.concatenate(ts), np.vstack(probs), np.concatenate(tags))
        else:
            run.trajectory = Trajectory(np.empty(0), np.empty((0, N_STATES)), np.empty(0, dtype=int))
    return run


def probabilities(state: StateVector) -> np.ndarray:
    return np.abs(state.amps) ** 2


def spin_expectations(state: StateVector) -> np.ndarray:
    """``<I_k^z>`` for k = 0..3; the ground orientation counts as +1/2."""
    return _IZ_SIGNS @ probabilities(state)


def to_lab_frame(state: StateVector, params: ChainParams) -> np.ndarray:
    """Lab-frame amplitudes ``C_m = D_m exp(-i E_m t)``; for debugging only."""
    energies = transition_table(params).energies
    return state.amps * np.exp(-1j * TWO_PI * energies * state.frame_time)
