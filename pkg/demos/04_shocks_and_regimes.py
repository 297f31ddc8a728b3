"""
Random fundamental shocks and regime switching
==============================================

With noise the mispricing wanders between the basin of the fixed segment
and the basin of the quasiperiodic attractor. Larger c makes the volatile
basin bigger, so the orbit spends more time there.
"""

# %%
from pwlmarket import (
    GridSpec2D,
    ModelParams,
    ShockConfig,
    compute_basin_grid,
    regime_labels,
    regime_stats,
    simulate_stochastic,
)

shocks = ShockConfig(sigma_d=0.005, seed=7, t_max=10_000)

# %%
for c in (0.45, 0.75, 1.10):
    p = ModelParams(0.8, c, 0.05)
    run = simulate_stochastic(p, shocks)
    basin = compute_basin_grid(p, GridSpec2D(nx=80, ny=80))
    st = regime_stats(regime_labels(run, basin))
    print(f"c={c:.2f}  wqa share {st['occupancy']['wqa']:.3f}  switches {st['switches']}"
          f"  mean wqa sojourn {st['sojourn']['wqa']['mean']:.1f}")
