"""Basin-of-attraction and (b, c) bifurcation sweeps.

Every cell is classified independently by the compiled classifier; cells are
split into contiguous blocks that may run on a thread pool. Each block writes
only its own slice of preallocated arrays, so the output does not depend on
the number of workers.
"""

from __future__ import annotations

import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .analysis import (
    DEFAULT_CONFIG,
    VARIANTS,
    ClassifierConfig,
    PairResult,
    attractor_pair_check,
    classify_region,
    classify_trajectory,
)
from .core import ModelParams, ParameterError, State

OVERLAY_CAP = 2000
OVERLAY_CELLS = 20


@dataclass(frozen=True)
class GridSpec2D:
    x_min: float = -0.2
    x_max: float = 0.2
    y_min: float = -0.2
    y_max: float = 0.2
    nx: int = 250
    ny: int = 250

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ParameterError("grid bounds must satisfy min < max")
        if self.nx < 2 or self.ny < 2:
            raise ParameterError("grid needs at least 2 cells per axis")

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def ys(self) -> np.ndarray:
        return np.linspace(self.y_min, self.y_max, self.ny)

    def scaled(self, k: float) -> GridSpec2D:
        return GridSpec2D(k * self.x_min, k * self.x_max, k * self.y_min,
                          k * self.y_max, self.nx, self.ny)


@dataclass
class CellResults:
    codes: np.ndarray
    u: np.ndarray
    period: np.ndarray
    iterations: np.ndarray
    centroid: np.ndarray


def _resolve_workers(workers: int | None) -> int:
    if workers is None:
        workers = int(os.environ.get("PWL_THREADS", "1"))
    return max(1, int(workers))


def classify_cells(
    xs: np.ndarray,
    ys: np.ndarray,
    bs: np.ndarray,
    cs: np.ndarray,
    h: float,
    cfg: ClassifierConfig = DEFAULT_CONFIG,
    workers: int | None = None,
    early_exit: bool = True,
) -> CellResults:
    """Classify flat arrays of initial states and parameters."""
    xs, ys, bs, cs = (np.ascontiguousarray(a, dtype=float) for a in (xs, ys, bs, cs))
    n = xs.size
    out = CellResults(
        codes=np.empty(n, dtype=np.int8),
        u=np.empty(n),
        period=np.empty(n, dtype=np.int64),
        iterations=np.empty(n, dtype=np.int64),
        centroid=np.empty((n, 2)),
    )
    r_div = cfg.radius(h)

    def run(lo, hi):
        K.classify_batch(
            xs[lo:hi], ys[lo:hi], bs[lo:hi], cs[lo:hi], h, cfg.t_max, r_div,
            cfg.eps_fix, cfg.w_tail, cfg.p_max, cfg.eps_rec, early_exit,
            cfg.transient, cfg.growth_tol, cfg.max_ext,
            out.codes[lo:hi], out.u[lo:hi], out.period[lo:hi],
            out.iterations[lo:hi], out.centroid[lo:hi],
        )

    workers = _resolve_workers(workers)
    if workers == 1 or n < 2:
        run(0, n)
        return out
    # more blocks than workers so WQA-heavy rows do not serialise the pool
    edges = np.linspace(0, n, 4 * workers + 1).astype(int)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for f in [pool.submit(run, lo, hi) for lo, hi in zip(edges[:-1], edges[1:])]:
            f.result()
    return out


@dataclass
class BasinGrid:
    """Outcome per initial condition; arrays are indexed ``[j, i]`` with ``j``
    along y and ``i`` along x."""

    spec: GridSpec2D
    params: ModelParams
    codes: np.ndarray
    u: np.ndarray
    period: np.ndarray
    centroid: np.ndarray = field(repr=False)
    overlay: np.ndarray = field(repr=False)
    wqa_side: np.ndarray | None = field(default=None, repr=False)
    pair: PairResult | None = None

    @property
    def labels(self) -> np.ndarray:
        return np.asarray(VARIANTS, dtype=object)[self.codes]


@dataclass
class BifurcationGrid:
    """Outcome per (b, c) cell from a fixed initial state; arrays are indexed
    ``[j, i]`` with ``j`` along c and ``i`` along b."""

    b_range: tuple[float, float]
    c_range: tuple[float, float]
    nb: int
    nc: int
    h: float
    ic: State
    bs: np.ndarray
    cs: np.ndarray
    codes: np.ndarray
    u: np.ndarray

    @property
    def labels(self) -> np.ndarray:
        return np.asarray(VARIANTS, dtype=object)[self.codes]


def _overlay(p, cfg, xs, ys, codes, cap=OVERLAY_CAP, n_cells=OVERLAY_CELLS):
    wqa = np.flatnonzero(codes == K.WQA)
    if wqa.size == 0:
        return np.empty((0, 2))
    pick = wqa[np.linspace(0, wqa.size - 1, min(n_cells, wqa.size)).astype(int)]
    per_cell = cap // len(pick)
    pts = []
    for k in np.unique(pick):
        _, diag = classify_trajectory(State(xs[k], ys[k]), p, cfg)
        smp = diag.attractor_sample
        if len(smp):
            pts.append(smp[np.linspace(0, len(smp) - 1, min(per_cell, len(smp))).astype(int)])
    return np.vstack(pts) if pts else np.empty((0, 2))


def compute_basin_grid(
    p: ModelParams,
    g: GridSpec2D = GridSpec2D(),
    cfg: ClassifierConfig = DEFAULT_CONFIG,
    workers: int | None = None,
    split_pairs: bool = False,
) -> BasinGrid:
    """Classify every grid point as an initial condition of map M.

    With ``split_pairs`` the WQA cells are additionally assigned to ``A`` or
    ``-A`` (``wqa_side`` 0 or 1) when the attractors form a symmetric pair.
    """
    X, Y = np.meshgrid(g.xs, g.ys)
    xs, ys = X.ravel(), Y.ravel()
    n = xs.size
    res = classify_cells(xs, ys, np.full(n, p.b), np.full(n, p.c), p.h, cfg, workers)
    shape = (g.ny, g.nx)
    grid = BasinGrid(
        spec=g,
        params=p,
        codes=res.codes.reshape(shape),
        u=res.u.reshape(shape),
        period=res.period.reshape(shape),
        centroid=res.centroid.reshape(shape + (2,)),
        overlay=_overlay(p, cfg, xs, ys, res.codes),
    )
    if split_pairs:
        _split_pairs(grid, cfg, xs, ys, res)
    return grid


def _split_pairs(grid, cfg, xs, ys, res, n_probes=16):
    wqa = np.flatnonzero(res.codes == K.WQA)
    if wqa.size == 0:
        return
    pick = wqa[np.linspace(0, wqa.size - 1, min(n_probes, wqa.size)).astype(int)]
    probes = [State(xs[k], ys[k]) for k in pick]
    grid.pair = attractor_pair_check(grid.params, cfg, probes)
    side = np.zeros(res.codes.size, dtype=np.int8)
    if grid.pair.kind == "coexisting-pair":
        ref = res.centroid[pick[0]]
        side[wqa] = (res.centroid[wqa] @ ref < 0).astype(np.int8)
    grid.wqa_side = side.reshape(grid.codes.shape)


def cell_centers(lo: float, hi: float, n: int) -> np.ndarray:
    """Midpoints of ``n`` equal cells covering the open range ``(lo, hi)``."""
    return lo + (np.arange(n) + 0.5) * (hi - lo) / n


def compute_bifurcation_grid(
    h: float = 0.05,
    ic: State = State(0.06, 0.06),
    b_range: tuple[float, float] = (0.0, 1.1),
    c_range: tuple[float, float] = (0.0, 4.4),
    nb: int = 250,
    nc: int = 250,
    cfg: ClassifierConfig = DEFAULT_CONFIG,
    workers: int | None = None,
) -> BifurcationGrid:
    """Classify one initial state over a grid of (b, c) values."""
    bs = cell_centers(*b_range, nb)
    cs = cell_centers(*c_range, nc)
    if bs[0] <= 0 or cs[0] <= 0:
        raise ParameterError("b and c must stay positive over the grid")
    ModelParams(float(bs[0]), float(cs[0]), h)
    B, C = np.meshgrid(bs, cs)
    n = B.size
    res = classify_cells(np.full(n, float(ic[0])), np.full(n, float(ic[1])),
                         B.ravel(), C.ravel(), h, cfg, workers)
    return BifurcationGrid(
        b_range=tuple(b_range), c_range=tuple(c_range), nb=nb, nc=nc, h=h,
        ic=State(float(ic[0]), float(ic[1])), bs=bs, cs=cs,
        codes=res.codes.reshape(nc, nb), u=res.u.reshape(nc, nb),
    )


def region_map(grid: BifurcationGrid, tau_b: float = 1e-9) -> np.ndarray:
    """``classify_region`` for every cell of a bifurcation grid."""
    return np.array([[classify_region(ModelParams(float(b), float(c), grid.h), tau_b)
                      for b in grid.bs] for c in grid.cs], dtype=object)


def grid_stats(grid: BasinGrid | BifurcationGrid, tau_b: float = 1e-9) -> dict:
    """Label counts and fractions; bifurcation grids also get a cross-table of
    region against label."""
    codes = grid.codes.ravel()
    total = codes.size
    counts = {v: int(np.count_nonzero(codes == k)) for k, v in enumerate(VARIANTS)}
    stats = {
        "total": total,
        "counts": counts,
        "fractions": {v: n / total for v, n in counts.items()},
    }
    if isinstance(grid, BifurcationGrid):
        regions = region_map(grid, tau_b)
        stats["regions"] = regions
        stats["crosstab"] = dict(Counter(zip(regions.ravel(), grid.labels.ravel())))
    elif 0 < grid.params.b < 1:
        stats["region"] = classify_region(grid.params, tau_b)
    return stats
