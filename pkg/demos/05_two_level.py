"""An isolated detuned pair: closed form versus the full integrator.

Only pair (0, 1) is driven, so the sixteen-level integrator reduces to a
two-level problem with a known solution. At a 2*pi*k Rabi frequency the
detuned pair ends a pulse with its populations unchanged.
"""
import math

import numpy as np

from spinchain import ChainParams
from spinchain.dynamics import Pulse, StateVector, apply_pulse
from spinchain.spin_model import transition_table
from spinchain.two_level import TwoLevelParams, analytic_evolution, rabi_2pik_pi

params = ChainParams()
table = transition_table(params)
gap = table.gap[table.index_of(0, 1)]

print("detuning  angle   |numeric - analytic|   P(excited)")
for detuning in (0.0, 0.8, 20.0):
    for angle in (math.pi / 2, math.pi):
        tl = TwoLevelParams(0.1, detuning)
        pulse = Pulse(angle, tl.rabi, gap + detuning)
        out = apply_pulse(StateVector.basis(0), pulse, params, couplings=[(0, 1)])
        dp, dm = analytic_evolution(tl, pulse.duration)
        err = max(abs(out.amps[0] - dp), abs(out.amps[1] - dm))
        print(f"{detuning:8.1f}  {angle:5.3f}   {err:.2e}              {abs(out.amps[1]) ** 2:.6f}")

print("\n2*pi*k pi pulses at detuning 2J' leave the pair where it started:")
for k in (4, 5, 6):
    om = rabi_2pik_pi(2 * params.j2, k)
    t = np.linspace(0, 1 / (2 * om), 2001)
    p_ground = np.abs(analytic_evolution(TwoLevelParams(om, 2 * params.j2), t)[0]) ** 2
    print(f"  k={k} Omega={om:.6f}: lowest P(ground) {p_ground.min():.4f}, at the end {p_ground[-1]:.12f}")
