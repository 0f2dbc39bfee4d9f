"""Fidelity against the ratio of second to first neighbour coupling.

Without J' the targeted transitions coincide with untargeted ones and the
protocol fails; as J' grows the fidelity climbs to a plateau. The script
reports the onset of that plateau under both fidelity reductions. Pass a
point count as the first argument for a quicker, coarser sweep.
"""
import sys

from spinchain.sweeps import SweepSpec, fig5_grid, find_threshold, plateau, run_sweep

points = int(sys.argv[1]) if len(sys.argv) > 1 else 60
result = run_sweep(SweepSpec("j_ratio", tuple(fig5_grid(points))))

for x, f in zip(result.grid, result.fidelity("magnitude")):
    print(f"J'/J = {x:.5f}  |F| = {f:.6f}  {'#' * int(max(f, 0) * 50)}")

for reduction in ("magnitude", "squared"):
    f = result.fidelity(reduction)
    print(f"{reduction:>9}: plateau {plateau(f):.6f}, reaches 98% of it for good at J'/J = "
          f"{find_threshold(result, 0.98, reduction)}")
