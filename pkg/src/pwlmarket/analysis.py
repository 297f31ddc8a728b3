"""Parameter regions, basin geometry and trajectory classification for map M."""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import _kernels as K
from .core import (
    EigenPair,
    ModelParams,
    ParameterError,
    State,
    branch_of,
    eigen,
    inverse_outer,
    jacobian,
    jacobian_f,
    outer_forward,
    step_m,
)

VARIANTS = (
    "FundamentalFP",
    "NonfundamentalFP",
    "WQA",
    "Divergent",
    "Undecided",
    "PeriodicAnomaly",
)
FIXED_VARIANTS = frozenset({"FundamentalFP", "NonfundamentalFP"})


class DivergenceError(RuntimeError):
    """The orbit left every bounded region."""


# ---------------------------------------------------------------------------
# parameter plane


def classify_region(p: ModelParams, tau_b: float = 1e-9) -> str:
    """Region of the (b, c) plane: ``"R1"``..``"R4"`` or ``"BoundaryCase"``.

    R1: fixed segment globally attracting; R2: fixed points may coexist with
    weird quasiperiodic attractors; R3: fixed points or divergence;
    R4 (b > 1): divergence off the fixed segment.
    """
    b, c = p.b, p.c
    if abs(b - 1.0) <= tau_b:
        return "BoundaryCase"
    if b > 1.0:
        return "R4"
    lo, hi = 2.0 * (1.0 - b), 2.0 * (1.0 + b)
    if abs(c - lo) <= tau_b or abs(c - hi) <= tau_b:
        return "BoundaryCase"
    if c < lo:
        return "R1"
    if c < hi:
        return "R2"
    return "R3"


def stability_conditions(p: ModelParams) -> tuple[float, float, float]:
    """``(1 + tr + det, 1 - tr + det, 1 - det)`` for the Jacobian of map F.

    The origin of F is stable iff all three are positive.
    """
    tr = 1.0 + p.b - p.c
    det = p.b
    return 1.0 + tr + det, 1.0 - tr + det, 1.0 - det


def f_subregion(p: ModelParams) -> str:
    """``S1`` (complex eigenvalues), ``S2`` (real negative), ``S3`` (real
    positive) inside the stability box of map F, ``Unstable`` outside it."""
    if not all(v > 0 for v in stability_conditions(p)):
        return "Unstable"
    ev = eigen(jacobian_f(p))
    if ev.is_complex:
        return "S1"
    return "S3" if ev.values[1] > 0 else "S2"


# ---------------------------------------------------------------------------
# immediate basin and its first preimages


@dataclass(frozen=True)
class Parallelogram:
    """Immediate basin of the fixed segment; vertices in boundary order."""

    vertices: np.ndarray
    b: float
    h: float

    def contains(self, x: float, y: float) -> bool:
        b, h = self.b, self.h
        return -h <= x <= h and y <= -h + (x + h) / b and y >= h + (x - h) / b

    @property
    def area(self) -> float:
        v = self.vertices
        x, y = v[:, 0], v[:, 1]
        return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


@dataclass(frozen=True)
class Triangle:
    vertices: np.ndarray
    side: str

    def contains(self, x: float, y: float, tol: float = 0.0) -> bool:
        (x1, y1), (x2, y2), (x3, y3) = self.vertices
        d = (y2 - y3) * (x1 - x3) + (x3 - x2) * (y1 - y3)
        l1 = ((y2 - y3) * (x - x3) + (x3 - x2) * (y - y3)) / d
        l2 = ((y3 - y1) * (x - x3) + (x1 - x3) * (y - y3)) / d
        l3 = 1.0 - l1 - l2
        return min(l1, l2, l3) >= -tol


def _require_contracting(p: ModelParams):
    if not 0 < p.b < 1:
        raise ParameterError(f"requires 0 < b < 1, got b={p.b}")


def immediate_basin(p: ModelParams) -> Parallelogram:
    _require_contracting(p)
    b, h = p.b, p.h
    v = np.array([[-h, -h], [h, -h + 2 * h / b], [h, h], [-h, h - 2 * h / b]])
    return Parallelogram(v, b, h)


def in_immediate_basin(s: State, p: ModelParams) -> bool:
    x, y = s
    b, h = p.b, p.h
    return -h <= x <= h and y <= -h + (x + h) / b and y >= h + (x - h) / b


def preimage_triangles(p: ModelParams) -> tuple[Triangle, Triangle]:
    """Rank-1 preimages of the immediate basin in the outer partitions.

    The left triangle is the outer-branch preimage of the part of the
    parallelogram below ``y = -h``; the right one is its point reflection.
    Vertices are ordered A (on ``x = -h``), B, C (on ``x = -h``).
    """
    _require_contracting(p)
    b, h = p.b, p.h
    targets = [(-h, -h), (-h, h - 2 * h / b), (h * (1 - 2 * b), -h)]
    left = np.array([inverse_outer(u, v, p) for u, v in targets])
    return Triangle(left, "left"), Triangle(-left, "right")


def a_double_prime(p: ModelParams) -> State:
    """Outer-branch image of the corner ``(-h, -h)`` of the immediate basin."""
    return outer_forward(State(-p.h, -p.h), p)


def fundamental_line_check(s0: State, p: ModelParams, tol: float = 1e-10) -> bool:
    """True iff ``s0`` lies (within ``tol``) on the part of ``y = x / b``
    inside the band, whose points converge to the fundamental value."""
    _require_contracting(p)
    x, y = s0
    return abs(x) <= p.h and abs(y - x / p.b) <= tol


# ---------------------------------------------------------------------------
# trajectory classification


@dataclass(frozen=True)
class ClassifierConfig:
    t_max: int = 100_000
    r_div: float | None = None  # None: 1e6 * max(h, 1)
    eps_fix: float = 1e-10
    w_tail: int = 4096
    p_max: int = 64
    eps_rec: float = 1e-9
    transient: int = 2000
    # budget extensions for orbits still setting amplitude records at t_max
    growth_tol: float = 1e-3
    max_ext: int = 100

    def __post_init__(self):
        for name in ("t_max", "eps_fix", "w_tail", "p_max", "eps_rec", "transient", "growth_tol"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive")
        if self.max_ext < 0:
            raise ParameterError("max_ext must be >= 0")
        if self.r_div is not None and not self.r_div > 0:
            raise ParameterError("r_div must be positive")
        if self.p_max >= self.w_tail:
            raise ParameterError("p_max must be smaller than w_tail")

    def radius(self, h: float) -> float:
        return self.r_div if self.r_div is not None else 1e6 * max(h, 1.0)


DEFAULT_CONFIG = ClassifierConfig()


@dataclass(frozen=True)
class ClassLabel:
    variant: str
    u: float | None = None
    period: int | None = None

    @property
    def code(self) -> int:
        return VARIANTS.index(self.variant)

    @property
    def is_fixed(self) -> bool:
        return self.variant in FIXED_VARIANTS

    @classmethod
    def from_code(cls, code: int, u: float = 0.0, period: int = 0) -> ClassLabel:
        variant = VARIANTS[int(code)]
        if variant in FIXED_VARIANTS:
            return cls(variant, u=float(u))
        if variant == "PeriodicAnomaly":
            return cls(variant, period=int(period))
        return cls(variant)


@dataclass
class Diagnostics:
    iterations: int
    branch_counts: dict[str, int]
    attractor_sample: np.ndarray = field(repr=False)


def classify_trajectory(
    s0: State,
    p: ModelParams,
    cfg: ClassifierConfig = DEFAULT_CONFIG,
    *,
    early_exit: bool = True,
) -> tuple[ClassLabel, Diagnostics]:
    """Iterate map M from ``s0`` and decide where the orbit goes.

    With ``early_exit`` the orbit stops as soon as it enters the immediate
    basin, whose limit is known in closed form. Without it, a fixed point is
    only reported once the simulated orbit has settled, which makes this mode
    an independent check of the basin geometry.

    The attractor sample holds the last ``w_tail`` states for bounded orbits
    that never settled, and is empty otherwise.
    """
    buf = np.empty((cfg.w_tail, 2))
    counts = np.zeros(3, dtype=np.int64)
    code, u, iters, period, n_tail, start = K.classify_one(
        float(s0[0]), float(s0[1]), p.b, p.c, p.h, cfg.t_max, cfg.radius(p.h),
        cfg.eps_fix, cfg.p_max, cfg.eps_rec, early_exit, cfg.transient,
        cfg.growth_tol, cfg.max_ext, buf, counts,
    )
    label = ClassLabel.from_code(code, u, period)
    if code in (K.WQA, K.PERIODIC, K.UNDECIDED) and n_tail:
        idx = (start + np.arange(n_tail)) % cfg.w_tail
        sample = buf[idx]
    else:
        sample = np.empty((0, 2))
    diag = Diagnostics(
        iterations=int(iters),
        branch_counts={"L": int(counts[0]), "M": int(counts[1]), "R": int(counts[2])},
        attractor_sample=sample,
    )
    return label, diag


# ---------------------------------------------------------------------------
# cycles


@dataclass(frozen=True)
class CycleReport:
    sequence: str
    eigenvalues: EigenPair
    unit_eigenvalue: bool
    admissible: bool
    s_star: bool

    @property
    def k(self) -> int:
        return len(self.sequence)


@functools.lru_cache(maxsize=8)
def necklaces(k_max: int) -> tuple[str, ...]:
    """Symbol sequences over L, M, R up to cyclic shift, lengths 1..k_max."""
    out = []
    for k in range(1, k_max + 1):
        for seq in itertools.product("LMR", repeat=k):
            s = "".join(seq)
            if all(s <= s[i:] + s[:i] for i in range(1, k)):
                out.append(s)
    return tuple(out)


def _product(seq: str, mats: dict[str, np.ndarray]) -> np.ndarray:
    m = np.eye(2)
    for sym in seq:  # first symbol acts first
        m = mats[sym] @ m
    return m


def _unit_eigvec(m: np.ndarray) -> np.ndarray:
    a = m - np.eye(2)
    v1 = np.array([-a[0, 1], a[0, 0]])
    v2 = np.array([a[1, 1], -a[1, 0]])
    v = v1 if np.hypot(*v1) >= np.hypot(*v2) else v2
    n = np.hypot(*v)
    return v / n if n > 0 else np.array([1.0, 1.0]) / math.sqrt(2)


def _admissible(seq: str, m: np.ndarray, p: ModelParams, n_samples: int = 128) -> bool:
    v = _unit_eigvec(m)
    span = np.linspace(-4 * p.h, 4 * p.h, n_samples)
    if abs(v[0]) > 1e-12:
        pts = np.column_stack([span, span * v[1] / v[0]])
    else:
        pts = np.column_stack([np.zeros_like(span), span])
    for x, y in pts:
        s = State(float(x), float(y))
        ok = True
        for sym in seq:
            if branch_of(s, p).value != sym:
                ok = False
                break
            s = step_m(s, p)
        if ok:
            scale = max(abs(x), abs(y), p.h)
            if abs(s.x - x) <= 1e-6 * scale and abs(s.y - y) <= 1e-6 * scale:
                return True
    return False


def cycle_scan(p: ModelParams, k_max: int = 10, tol: float = 1e-8) -> list[CycleReport]:
    """Search symbolic sequences for Jacobian products with eigenvalue +1.

    A k-cycle with itinerary ``sigma`` can only exist if the branch Jacobian
    product has eigenvalue 1; otherwise its only fixed point is the origin.
    Flagged sequences are checked for admissibility by sampling the unit
    eigendirection and verifying the itinerary point by point.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    mats = {s: jacobian(s, p) for s in "LMR"}
    cache: dict[str, tuple[np.ndarray, EigenPair, bool]] = {}
    reports = []
    for seq in necklaces(k_max):
        # J_L == J_R, so the product depends only on the outer/middle pattern
        key = seq.replace("R", "L")
        if key not in cache:
            m = _product(key, mats)
            d = (m[0, 0] - 1.0) * (m[1, 1] - 1.0) - m[0, 1] * m[1, 0]
            cache[key] = (m, eigen(m), abs(d) < tol)
        m, ev, unit = cache[key]
        adm = _admissible(seq, m, p) if unit else False
        reports.append(CycleReport(seq, ev, unit, adm, adm and set(seq) == {"M"}))
    return reports


# ---------------------------------------------------------------------------
# Lyapunov exponent


@dataclass(frozen=True)
class LyapunovResult:
    exponent: float
    branch_counts: dict[str, int]


def lyapunov_max(
    s0: State,
    p: ModelParams,
    n: int = 100_000,
    transient: int = 2000,
    r_div: float | None = None,
) -> LyapunovResult:
    """Largest Lyapunov exponent from renormalised tangent-vector growth.

    The map is linear on each branch, so the tangent dynamics are products of
    branch Jacobians along the orbit. Growth is averaged over steps after
    ``transient``.
    """
    if n <= transient:
        raise ValueError("n must exceed transient")
    r_div = r_div if r_div is not None else 1e6 * max(p.h, 1.0)
    a_out, a_mid, b, h = 1.0 + p.b - p.c, 1.0 + p.b, p.b, p.h
    x, y = float(s0[0]), float(s0[1])
    vx, vy = 1.0, 0.0
    acc = 0.0
    counts = {"L": 0, "M": 0, "R": 0}
    for t in range(n):
        if x > h:
            a, br = a_out, "R"
        elif x < -h:
            a, br = a_out, "L"
        else:
            a, br = a_mid, "M"
        vx, vy = a * vx - b * vy, vx
        x, y = a * x - b * y, x
        if not (abs(x) <= r_div and abs(y) <= r_div):
            raise DivergenceError(f"orbit left radius {r_div:g} after {t + 1} steps")
        norm = math.hypot(vx, vy)
        vx /= norm
        vy /= norm
        if t >= transient:
            acc += math.log(norm)
            counts[br] += 1
    return LyapunovResult(acc / (n - transient), counts)


# ---------------------------------------------------------------------------
# symmetric attractor pairs


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    da = cKDTree(b).query(a)[0].max()
    db = cKDTree(a).query(b)[0].max()
    return float(max(da, db))


@dataclass(frozen=True)
class PairResult:
    kind: str  # "symmetric-single", "coexisting-pair" or "none"
    hausdorff: float
    tolerance: float
    n_wqa: int
    mirrored: bool = False  # partner cluster came from reflected probes


def _wqa_samples(p, cfg, probes):
    out = []
    for s in probes:
        label, diag = classify_trajectory(State(float(s[0]), float(s[1])), p, cfg)
        if label.variant == "WQA" and len(diag.attractor_sample):
            out.append(diag.attractor_sample)
    return out


def _cluster(samples, tol):
    reps: list[np.ndarray] = []
    for smp in samples:
        if not any(hausdorff(smp, r) <= tol for r in reps):
            reps.append(smp)
    return reps


def attractor_pair_check(
    p: ModelParams,
    cfg: ClassifierConfig,
    probes: list[State],
    rel_tol: float = 1e-2,
) -> PairResult:
    """Decide whether the weird quasiperiodic attractors reached from
    ``probes`` form one origin-symmetric set or a pair ``A``, ``-A``.

    Post-transient samples of the WQA probes are clustered by Hausdorff
    distance. The tolerance is ``rel_tol`` times the diameter of the pooled
    samples (a finite orbit sample cannot resolve the attractor more finely),
    floored at ``10 * eps_rec`` times the diameter. If the probes only reach
    an asymmetric ``A``, the reflected probes are tried for its partner and
    the result is marked ``mirrored``.
    """
    if not probes:
        raise ValueError("probes must be nonempty")
    samples = _wqa_samples(p, cfg, probes)
    if not samples:
        return PairResult("none", math.nan, math.nan, 0)
    pooled = np.vstack(samples)
    diam = float(np.ptp(np.vstack([pooled, -pooled]), axis=0).max())
    tol = max(10 * cfg.eps_rec * diam, rel_tol * diam)

    reps = _cluster(samples, tol)
    a = reps[0]
    d_sym = hausdorff(a, -a)
    if d_sym <= tol:
        return PairResult("symmetric-single", d_sym, tol, len(samples))
    d_pair = min((hausdorff(a, -r) for r in reps[1:]), default=math.inf)
    if d_pair <= tol:
        return PairResult("coexisting-pair", d_pair, tol, len(samples))
    mirrored = _wqa_samples(p, cfg, [(-s[0], -s[1]) for s in probes])
    d_pair = min((hausdorff(a, -r) for r in mirrored), default=math.inf)
    if d_pair <= tol:
        return PairResult("coexisting-pair", d_pair, tol, len(samples), mirrored=True)
    return PairResult("none", d_pair, tol, len(samples))
