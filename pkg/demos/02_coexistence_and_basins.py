"""
Coexisting attractors and their basins
======================================

At b = 0.8, c = 2.5 a fixed point of the segment and a weird quasiperiodic
attractor coexist. We classify two orbits, then colour a coarse grid of
initial conditions by outcome and save it as a PPM image.
"""

# %%
from pathlib import Path

from pwlmarket import (
    GridSpec2D,
    ModelParams,
    State,
    classify_trajectory,
    compute_basin_grid,
    grid_stats,
    io,
)

p = ModelParams(0.8, 2.5, 0.05)
out = Path("demo_out")
out.mkdir(exist_ok=True)

# %% Two nearby starting points, two different fates.
for ic in [(-0.12, -0.16), (0.13, 0.0)]:
    label, diag = classify_trajectory(State(*ic), p)
    print(ic, label.variant, "after", diag.iterations, "steps", diag.branch_counts)

# %% A 60 x 60 basin grid is enough to see the structure.
grid = compute_basin_grid(p, GridSpec2D(nx=60, ny=60))
print({k: round(v, 3) for k, v in grid_stats(grid)["fractions"].items() if v})
io.write_image(grid, out / "basin_b0.8_c2.5.ppm")
io.write_csv("basin", grid, out / "basin_b0.8_c2.5.csv")
