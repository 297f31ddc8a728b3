"""
Linear pieces, the fixed segment and the parameter regions
==========================================================

Map M glues two linear maps along the band |x| <= h: map C inside the band
(chartists only) and map F outside it (chartists plus fundamentalists).
"""

# %%
from pwlmarket import (
    ModelParams,
    State,
    c_limit,
    classify_region,
    eigen,
    f_subregion,
    iterate,
    jacobian,
)

p = ModelParams(b=0.8, c=1.35, h=0.05)

# %% Map C has an eigenvalue 1, so every point (u, u) is a fixed point.
# The limit reached from (x0, y0) is known in closed form.
for ic in [(-0.13, -0.17), (-0.10, -0.17)]:
    tr = iterate("C", State(*ic), 200, p)
    print(ic, "->", tr.final, "closed form u =", c_limit(State(*ic), p.b))

# %% Eigenvalues of the two pieces.
for branch in "MR":
    ev = eigen(jacobian(branch, p))
    print(branch, ev.kind, ev.values, "spectral radius", round(ev.spectral_radius, 4))

# %% Where a (b, c) pair sits in the parameter plane.
for b, c in [(0.8, 0.2), (0.8, 2.5), (0.8, 3.7), (1.05, 1.35)]:
    q = ModelParams(b, c, 0.05)
    print((b, c), classify_region(q), f_subregion(q))
