"""Static spectrum of the four-spin Ising chain.

Basis states are integers 0..15 encoding ``|i3 i2 i1 i0>`` with ``i0`` the
least significant bit; a 0 bit is the ground orientation of that spin.
Frequencies are stored as plain numbers in units of 2*pi*MHz, so an entry of
100 means an angular frequency of 2*pi*100 rad/us.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import IO, NamedTuple

import numpy as np

N_SPINS = 4
N_STATES = 1 << N_SPINS

DEFAULT_TOL = 1e-9


class ParameterError(ValueError):
    """Raised for physically invalid chain or pulse parameters."""


def bit(state: int, k: int) -> int:
    return (state >> k) & 1


def bits_label(state: int) -> str:
    """``5 -> '0101'`` (spin 3 first)."""
    return format(state, f"0{N_SPINS}b")


@dataclass(frozen=True)
class ChainParams:
    """Larmor frequencies and Ising couplings of the chain.

    Parameters
    ----------
    omega : tuple of 4 floats
        Larmor frequency of spins 0..3.
    j1 : float
        First-neighbor coupling J.
    j2 : float
        Second-neighbor coupling J'.
    """

    omega: tuple[float, float, float, float] = (100.0, 200.0, 400.0, 800.0)
    j1: float = 10.0
    j2: float = 0.4

    def __post_init__(self):
        omega = tuple(float(w) for w in self.omega)
        if len(omega) != N_SPINS:
            raise ParameterError(f"omega must have {N_SPINS} entries, got {len(omega)}")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "j1", float(self.j1))
        object.__setattr__(self, "j2", float(self.j2))
        values = omega + (self.j1, self.j2)
        if not all(math.isfinite(v) for v in values):
            raise ParameterError("chain parameters must be finite")
        if min(omega) <= 0:
            raise ParameterError("Larmor frequencies must be positive")
        if len(set(omega)) != N_SPINS:
            raise ParameterError("Larmor frequencies must be pairwise distinct")
        if self.j1 <= 0:
            raise ParameterError("j1 must be positive")
        if self.j2 < 0:
            raise ParameterError("j2 must be non-negative")

    def with_couplings(self, j1: float | None = None, j2: float | None = None) -> "ChainParams":
        return ChainParams(self.omega, self.j1 if j1 is None else j1, self.j2 if j2 is None else j2)


def energy(state: int, params: ChainParams) -> float:
    """Energy of a basis state divided by hbar."""
    if not 0 <= state < N_STATES:
        raise ValueError(f"basis state out of range: {state}")
    s = [1 - 2 * bit(state, k) for k in range(N_SPINS)]
    zeeman = sum(s[k] * params.omega[k] for k in range(N_SPINS))
    first = sum(s[k] * s[k + 1] for k in range(N_SPINS - 1))
    second = sum(s[k] * s[k + 2] for k in range(N_SPINS - 2))
    return -0.5 * (zeeman + params.j1 * first + params.j2 * second)


def flip_gap(state: int, spin: int, params: ChainParams) -> float:
    """Energy cost of raising ``spin`` from ground to excited, other bits as in ``state``.

    Built from the neighbor terms directly, so pairs with the same neighbor
    bits get bitwise-identical values.
    """
    s = [1 - 2 * bit(state, k) for k in range(N_SPINS)]
    first = sum(s[n] for n in (spin - 1, spin + 1) if 0 <= n < N_SPINS)
    second = sum(s[n] for n in (spin - 2, spin + 2) if 0 <= n < N_SPINS)
    return params.omega[spin] + params.j1 * first + params.j2 * second


def transition_frequency(m: int, k: int, params: ChainParams) -> float:
    """Signed frequency ``(E_m - E_k) / hbar``."""
    diff = m ^ k
    if diff and diff & (diff - 1) == 0:
        spin = diff.bit_length() - 1
        gap = flip_gap(m, spin, params)
        return -gap if bit(k, spin) else gap
    return energy(m, params) - energy(k, params)


def single_flip_partners(state: int) -> list[tuple[int, int]]:
    """The four states reachable by flipping one spin, as ``(partner, spin)``."""
    return [(state ^ (1 << s), s) for s in range(N_SPINS)]


class Transition(NamedTuple):
    lower: int
    upper: int
    freq: float
    spin: int


@dataclass(frozen=True)
class TransitionTable:
    """All 32 single-spin-flip pairs ``(m, k)`` with ``m < k``.

    ``lower``/``upper``/``gap``/``freq``/``spin`` are parallel numpy arrays so
    the integrator can consume them directly. ``upper`` has the flipped spin
    excited, ``gap`` is ``E_upper - E_lower`` and ``freq`` its magnitude.
    """

    params: ChainParams
    energies: np.ndarray = field(repr=False)
    lower: np.ndarray = field(repr=False)
    upper: np.ndarray = field(repr=False)
    gap: np.ndarray = field(repr=False)
    freq: np.ndarray = field(repr=False)
    spin: np.ndarray = field(repr=False)

    @property
    def entries(self) -> list[Transition]:
        return [Transition(int(m), int(k), float(f), int(s))
                for m, k, f, s in zip(self.lower, self.upper, self.freq, self.spin)]

    def __len__(self):
        return len(self.lower)

    def index_of(self, m: int, k: int) -> int:
        m, k = min(m, k), max(m, k)
        hits = np.flatnonzero((self.lower == m) & (self.upper == k))
        if len(hits) != 1:
            raise ValueError(f"({m}, {k}) is not a single-flip pair")
        return int(hits[0])


@lru_cache(maxsize=4096)
def transition_table(params: ChainParams) -> TransitionTable:
    energies = np.array([energy(s, params) for s in range(N_STATES)])
    lower, upper, spin = [], [], []
    for m in range(N_STATES):
        for k, s in single_flip_partners(m):
            if m < k:
                lower.append(m)
                upper.append(k)
                spin.append(s)
    gap = np.array([flip_gap(m, s, params) for m, s in zip(lower, spin)])
    lower = np.array(lower, dtype=np.int64)
    upper = np.array(upper, dtype=np.int64)
    freq = np.abs(gap)
    for arr in (energies, lower, upper, gap, freq):
        arr.setflags(write=False)
    return TransitionTable(params, energies, lower, upper, gap, freq, np.array(spin, dtype=np.int64))


def resonant_transitions(freq: float, params: ChainParams, tol: float = DEFAULT_TOL) -> list[tuple[int, int]]:
    """Single-flip pairs whose transition frequency lies within ``tol`` of ``freq``."""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    table = transition_table(params)
    hits = np.abs(table.freq - freq) <= tol
    return [(int(m), int(k)) for m, k in zip(table.lower[hits], table.upper[hits])]


def write_spectrum_csv(params: ChainParams, fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["state_index", "bits", "energy"])
    for s in range(N_STATES):
        writer.writerow([s, bits_label(s), repr(energy(s, params))])
