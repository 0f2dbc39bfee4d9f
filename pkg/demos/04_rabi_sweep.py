"""Fidelity against the Rabi frequency, compared with 2*pi*k predictions.

A detuned pair returns to its starting populations when a pulse spans a
whole number of generalized Rabi cycles. The script sweeps the shared Rabi
frequency of all seven pulses, finds the fidelity peaks, and labels each by
the closest pi-pulse value for detuning 2J'. Even k corresponds to the
pi/2-pulse condition. Pass a point count for a coarser sweep.
"""
import sys

import numpy as np

from spinchain import ChainParams
from spinchain.sweeps import SweepSpec, fig6_grid, find_peaks, run_sweep
from spinchain.two_level import PEAK_FAMILIES, DetuningCatalog, coincidence_scan, rabi_2pik_pi

points = int(sys.argv[1]) if len(sys.argv) > 1 else 240
result = run_sweep(SweepSpec("rabi", tuple(fig6_grid(points))))
f = result.fidelity("magnitude")
peaks = find_peaks(result, 0.1 * (f.max() - f.min()))

d = 2 * ChainParams().j2
print("peak Omega   nearest Omega_2J'^(k)   k   relative offset")
for x in peaks:
    k = min(range(1, 40), key=lambda k: abs(rabi_2pik_pi(d, k) - x))
    print(f"  {x:.5f}        {rabi_2pik_pi(d, k):.6f}        {k:2d}   {x / rabi_2pik_pi(d, k) - 1:+.4f}")

print("\nnear-coincidences of the 2*pi*k families inside the window:")
catalog = DetuningCatalog.from_params(ChainParams()).select(PEAK_FAMILIES)
for cluster in coincidence_scan(catalog):
    members = ", ".join(f"{m.label}^({m.k})" for m in cluster.members)
    print(f"  {cluster.center:.6f}: {members}")
print(f"\nfidelity range over the sweep: {np.min(f):.5f} .. {np.max(f):.5f}")
