"""Fundamental shocks, price reconstruction and regime-switching statistics.

Random numbers come from an in-repo generator so that streams can be
reproduced from the algorithm alone: SplitMix64 produces 64-bit words, the
top 53 bits become uniforms, and pairs of uniforms are turned into standard
normals by the Box-Muller transform (cosine branch first, then sine).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .analysis import in_immediate_basin
from .core import ModelParams, ParameterError, State

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1

REGIMES = ("fixed", "wqa", "divergent", "outside")
_CODE_TO_REGIME = {
    K.FUNDAMENTAL: "fixed",
    K.NONFUNDAMENTAL: "fixed",
    K.WQA: "wqa",
    K.PERIODIC: "wqa",
    K.DIVERGENT: "divergent",
    K.UNDECIDED: "outside",  # no ground truth for the cell
}


def splitmix64(seed: int, n: int) -> np.ndarray:
    """First ``n`` outputs of SplitMix64 seeded with ``seed`` (uint64 array)."""
    if not 0 <= seed <= _MASK64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    i = np.arange(1, n + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed) + i * _GAMMA
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def uniform_stream(seed: int, n: int) -> np.ndarray:
    """Uniforms on [0, 1) with 53-bit resolution."""
    return (splitmix64(seed, n) >> np.uint64(11)).astype(np.float64) * 2.0**-53


def normal_stream(seed: int, n: int) -> np.ndarray:
    """``n`` standard normal deviates, reproducible from ``seed``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    m = (n + 1) // 2
    u = uniform_stream(seed, 2 * m)
    r = np.sqrt(-2.0 * np.log1p(-u[0::2]))  # 1 - u in (0, 1]
    theta = 2.0 * np.pi * u[1::2]
    out = np.empty(2 * m)
    out[0::2] = r * np.cos(theta)
    out[1::2] = r * np.sin(theta)
    return out[:n]


@dataclass(frozen=True)
class ShockConfig:
    """Shock size, seed and initial levels of a stochastic run.

    Give exactly one of ``sigma_d`` (deviation shocks) or ``sigma_delta``
    (fundamental shocks); they are linked by ``sigma_d = sigma_delta *
    sqrt(1 + b**2)``. ``P0`` and ``P_minus1`` default to the fundamental
    value, i.e. zero initial mispricing.
    """

    sigma_d: float | None = None
    sigma_delta: float | None = None
    seed: int = 0
    t_max: int = 10_000
    F0: float = 100.0
    P0: float | None = None
    P_minus1: float | None = None

    def __post_init__(self):
        given = [s for s in (self.sigma_d, self.sigma_delta) if s is not None]
        if len(given) != 1:
            raise ParameterError("give exactly one of sigma_d and sigma_delta")
        if not (math.isfinite(given[0]) and given[0] >= 0):
            raise ParameterError("shock standard deviation must be finite and >= 0")
        if self.t_max < 0:
            raise ParameterError("t_max must be >= 0")

    def resolve(self, b: float) -> tuple[float, float]:
        """``(sigma_delta, sigma_d)`` for chartist impact ``b``."""
        k = math.sqrt(1.0 + b * b)
        if self.sigma_delta is not None:
            return self.sigma_delta, self.sigma_delta * k
        return self.sigma_d / k, self.sigma_d


@dataclass
class StochasticRun:
    """Per-step records of a shocked run, ``t = 0 .. len - 1``.

    ``x[t] = P[t] - F[t]`` is the mispricing and ``y[t] = x[t - 1]`` the
    lagged mispricing (``y[0]`` from ``P_minus1``).
    """

    params: ModelParams
    config: ShockConfig
    t: np.ndarray
    delta: np.ndarray
    d: np.ndarray
    F: np.ndarray
    P: np.ndarray
    x: np.ndarray
    y: np.ndarray
    diverged: bool = False
    regime: np.ndarray | None = field(default=None, repr=False)

    def __len__(self):
        return self.t.size

    @property
    def states(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])


def simulate_stochastic(p: ModelParams, sc: ShockConfig) -> StochasticRun:
    """Run the deviation law with shocks ``d_t = -delta_t - b * delta_{t-1}``
    while the fundamental value follows a random walk driven by ``delta``.

    ``delta_{-1}`` is taken as 0. A non-finite state truncates the run and sets
    ``diverged``.
    """
    sigma_delta, _ = sc.resolve(p.b)
    n = sc.t_max + 1
    delta = sigma_delta * normal_stream(sc.seed, n)
    prev = np.concatenate([[0.0], delta[:-1]])
    d = -delta - p.b * prev

    P0 = sc.F0 if sc.P0 is None else sc.P0
    Pm1 = P0 if sc.P_minus1 is None else sc.P_minus1
    F = np.empty(n)
    x = np.empty(n)
    y = np.empty(n)
    F[0] = sc.F0
    x[0] = P0 - sc.F0
    y[0] = Pm1 - sc.F0

    a_out, a_mid, b, h = 1.0 + p.b - p.c, 1.0 + p.b, p.b, p.h
    xt, yt = float(x[0]), float(y[0])
    dl = d.tolist()  # plain floats overflow to inf without warnings
    last = n
    for t in range(n - 1):
        a = a_mid if -h <= xt <= h else a_out
        xn = a * xt - b * yt + dl[t]
        if not math.isfinite(xn):
            last = t + 1
            break
        yt, xt = xt, xn
        x[t + 1] = xt
        y[t + 1] = yt
        F[t + 1] = F[t] + delta[t]
    sl = slice(0, last)
    return StochasticRun(
        params=p, config=sc, t=np.arange(last), delta=delta[sl], d=d[sl],
        F=F[sl], P=x[sl] + F[sl], x=x[sl], y=y[sl], diverged=last < n,
    )


def regime_labels(run: StochasticRun, basin) -> np.ndarray:
    """Label every step by the deterministic basin its state lies in.

    Lookup is by nearest grid point; states beyond half a cell outside the
    grid window are ``"outside"``. Points of the immediate basin are always
    ``"fixed"`` regardless of grid resolution.
    """
    g = basin.spec
    dx = (g.x_max - g.x_min) / (g.nx - 1)
    dy = (g.y_max - g.y_min) / (g.ny - 1)
    i = np.rint((run.x - g.x_min) / dx)
    j = np.rint((run.y - g.y_min) / dy)
    inside = (i >= 0) & (i < g.nx) & (j >= 0) & (j < g.ny)
    lut = np.array([_CODE_TO_REGIME[k] for k in range(len(_CODE_TO_REGIME))], dtype=object)
    labels = np.full(run.x.size, "outside", dtype=object)
    ii, jj = i[inside].astype(int), j[inside].astype(int)
    labels[inside] = lut[basin.codes[jj, ii]]
    p = run.params
    if 0 < p.b < 1:
        for t in range(run.x.size):
            if in_immediate_basin(State(run.x[t], run.y[t]), p):
                labels[t] = "fixed"
    run.regime = labels
    return labels


def regime_stats(labels, transient: int = 0) -> dict:
    """Occupancy fractions, switch count and sojourn lengths per regime."""
    lab = list(labels)[transient:]
    n = len(lab)
    out = {"steps": n, "occupancy": {}, "switches": 0, "sojourn": {}}
    if n == 0:
        return out
    runs: dict[str, list[int]] = {r: [] for r in REGIMES}
    cur, length = lab[0], 1
    for s in lab[1:]:
        if s == cur:
            length += 1
        else:
            runs[cur].append(length)
            out["switches"] += 1
            cur, length = s, 1
    runs[cur].append(length)
    for r in REGIMES:
        out["occupancy"][r] = sum(runs[r]) / n
        out["sojourn"][r] = {
            "mean": float(np.mean(runs[r])) if runs[r] else 0.0,
            "max": max(runs[r], default=0),
            "count": len(runs[r]),
        }
    return out
