"""Analytic two-level Rabi problem and the 2*pi*k choice of Rabi frequency.

A pulse detuned by ``delta`` from a transition drives that pair through
generalized Rabi cycles at ``sqrt(Omega^2 + delta^2)``. Choosing ``Omega`` so
that a whole number ``k`` of cycles fits into the pulse returns the detuned
pair to its initial populations.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import IO, Iterable, NamedTuple

import numpy as np

from .spin_model import ChainParams, ParameterError

KINDS = ("pi", "pi2")


@dataclass(frozen=True)
class TwoLevelParams:
    """Pair ``(p, m)``: ``p`` has the flipped spin in its ground orientation.

    ``detuning`` is carrier minus transition frequency, ``rabi`` the drive
    strength, both in 2*pi*MHz; ``phase`` is the pulse phase in radians.
    """

    rabi: float
    detuning: float
    c_p0: complex = 1.0
    c_m0: complex = 0.0
    phase: float = 0.0

    def __post_init__(self):
        if not self.rabi > 0:
            raise ParameterError("rabi must be positive")
        norm = abs(self.c_p0) ** 2 + abs(self.c_m0) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ParameterError(f"initial amplitudes not normalized ({norm!r})")

    @property
    def effective_rabi(self) -> float:
        return math.hypot(self.rabi, self.detuning)


def analytic_evolution(p: TwoLevelParams, t):
    """Closed-form amplitudes ``(D_p(t), D_m(t))`` for time(s) ``t`` in us.

    The sign of the detuning term in ``D_m`` is opposite to that in ``D_p``;
    with equal signs the map would not be unitary.
    """
    t = np.asarray(t, dtype=float)
    om, de, oe = p.rabi, p.detuning, p.effective_rabi
    half = math.pi * oe * t  # Omega_e t / 2 in radians
    c, s = np.cos(half), np.sin(half)
    drive = np.exp(1j * p.phase)
    dp = (p.c_p0 * (c - 1j * de / oe * s) + 1j * om / oe * s * drive * p.c_m0) * np.exp(1j * math.pi * de * t)
    dm = (p.c_m0 * (c + 1j * de / oe * s) + 1j * om / oe * s * np.conj(drive) * p.c_p0) * np.exp(-1j * math.pi * de * t)
    return dp, dm


def _check_k(delta: float, k: int) -> None:
    if not (isinstance(k, (int, np.integer)) and k >= 1):
        raise ValueError(f"k must be a positive integer, got {k!r}")
    if delta == 0:
        raise ValueError("zero detuning has no 2*pi*k Rabi frequency")


def rabi_2pik_pi(delta: float, k: int) -> float:
    """Rabi frequency making a pi pulse complete ``k`` generalized cycles at detuning ``delta``."""
    _check_k(delta, k)
    return abs(delta) / math.sqrt(4 * k * k - 1)


def rabi_2pik_halfpi(delta: float, k: int) -> float:
    """Same for a pi/2 pulse."""
    _check_k(delta, k)
    return abs(delta) / math.sqrt(16 * k * k - 1)


def rabi_2pik(delta: float, k: int, kind: str = "pi") -> float:
    if kind == "pi":
        return rabi_2pik_pi(delta, k)
    if kind == "pi2":
        return rabi_2pik_halfpi(delta, k)
    raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")


@dataclass(frozen=True)
class DetuningCatalog:
    """Detunings met by non-resonant pairs, keyed by a label such as ``"2J+2J'"``."""

    values: dict

    @classmethod
    def from_params(cls, params: ChainParams) -> "DetuningCatalog":
        j, jp = params.j1, params.j2
        return cls({
            "2J'": 2 * jp,
            "2J": 2 * j,
            "2J-2J'": 2 * j - 2 * jp,
            "2J+2J'": 2 * j + 2 * jp,
            "4J": 4 * j,
            "4J+2J'": 4 * j + 2 * jp,
        })

    def select(self, labels: Iterable[str]) -> "DetuningCatalog":
        return DetuningCatalog({lab: self.values[lab] for lab in labels})

    def nonzero(self) -> dict:
        return {lab: d for lab, d in self.values.items() if d != 0}


# The families tied to the fidelity peaks; 2J-2J' is catalogued but not among them.
PEAK_FAMILIES = ("4J+2J'", "4J", "2J+2J'", "2J", "2J'")


class Member(NamedTuple):
    label: str
    k: int
    omega: float


class Cluster(NamedTuple):
    center: float
    members: list


def family_values(delta: float, k_max: int, kind: str = "pi", window=(0.0, math.inf)) -> list[tuple[int, float]]:
    lo, hi = window
    out = []
    for k in range(1, k_max + 1):
        om = rabi_2pik(delta, k, kind)
        if om < lo:
            break  # values decrease with k
        if om <= hi:
            out.append((k, om))
    return out


def coincidence_scan(catalog: DetuningCatalog, k_max: int = 500, omega_window=(0.04, 0.12),
                     cluster_tol: float = 0.01, kind: str = "pi", centers: Iterable[float] | None = None,
                     anchor: str | None = None) -> list[Cluster]:
    """Group 2*pi*k Rabi frequencies of several detuning families that nearly coincide.

    Each cluster is centred on one value: by default every value of the
    ``anchor`` family (the smallest detuning) inside ``omega_window``, or
    the explicit ``centers``. From each family the member nearest to the
    centre joins the cluster if it lies within ``cluster_tol`` relative
    distance. Zero detunings are skipped.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    families = catalog.nonzero()
    if not families:
        return []
    lo, hi = omega_window
    if centers is None:
        anchor = anchor or min(families, key=families.get)
        centers = [om for _, om in family_values(families[anchor], k_max, kind, (lo, hi))]
    values = {lab: family_values(d, k_max, kind) for lab, d in families.items()}

    clusters = []
    for c in centers:
        if not lo <= c <= hi:
            continue
        members = []
        for lab, vals in values.items():
            if not vals:
                continue
            k, om = min(vals, key=lambda kv: abs(kv[1] - c))
            if abs(om - c) <= cluster_tol * c:
                members.append(Member(lab, k, om))
        clusters.append(Cluster(c, members))
    return clusters


def write_rabi_2pik_csv(catalog: DetuningCatalog, k_max: int, fh: IO[str], omega_window=(0.0, math.inf)) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["delta_label", "delta", "k", "kind", "omega"])
    for lab, d in catalog.nonzero().items():
        for kind in KINDS:
            for k, om in family_values(d, k_max, kind, omega_window):
                writer.writerow([lab, repr(d), k, kind, repr(om)])
