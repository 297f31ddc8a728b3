"""
Outcome map over the (b, c) plane
=================================

One initial condition, many parameter pairs. Cells are cross-tabulated
against the analytic regions to show that the numerical picture respects
them.
"""

# %%
from pathlib import Path

from pwlmarket import State, compute_bifurcation_grid, grid_stats, io

grid = compute_bifurcation_grid(h=0.05, ic=State(0.06, 0.06), nb=60, nc=60)
stats = grid_stats(grid)

# %%
for (region, label), n in sorted(stats["crosstab"].items()):
    print(f"{region:13s} {label:17s} {n:5d}")

# %%
out = Path("demo_out")
out.mkdir(exist_ok=True)
io.write_image(grid, out / "bifurcation_ic0.06.ppm")
