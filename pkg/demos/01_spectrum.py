"""Walk through the energy levels and single-flip transitions of the chain.

The Zeeman terms fix which spin a transition belongs to; the couplings then
split each spin's line by the orientation of its neighbours. Run with
``python demos/01_spectrum.py``.
"""
from spinchain import ChainParams
from spinchain.spin_model import bits_label, energy, resonant_transitions, transition_table

params = ChainParams()
print(f"Larmor frequencies {params.omega}, J = {params.j1}, J' = {params.j2}\n")

print("state  bits   energy")
for s in range(16):
    print(f"{s:5d}  {bits_label(s)}  {energy(s, params):9.2f}")

table = transition_table(params)
print("\nflip frequencies by spin (each neighbour pattern gives one line):")
for spin in range(4):
    lines = sorted({round(float(f), 6) for f in table.freq[table.spin == spin]})
    print(f"  spin {spin}: {lines}")

# the protocol relies on pairs that share a frequency because only neighbours matter
for freq in (109.6, 420.4):
    print(f"\npairs resonant with {freq}: {resonant_transitions(freq, params)}")
