"""Exact evaluation of the chartist-fundamentalist deviation map and its limits.

The deviation map ``M`` has three linear branches split by the inactivity
band ``|x| <= h``::

    x' = (1 + b - c) x - b y     if |x| > h   (outer branches L, R)
    x' = (1 + b) x - b y         if |x| <= h  (middle branch M)
    y' = x

``C`` is the middle branch applied everywhere (chartists only) and ``F`` the
outer branch applied everywhere (both speculator types always trade).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class ParameterError(ValueError):
    """Raised for parameters outside the model's domain."""


class State(NamedTuple):
    x: float
    y: float


class Branch(str, enum.Enum):
    L = "L"
    M = "M"
    R = "R"


@dataclass(frozen=True)
class ModelParams:
    """Aggregate parameters: chartist impact ``b``, fundamentalist impact ``c``
    and half-width ``h`` of the band where fundamentalists stay out."""

    b: float
    c: float
    h: float

    def __post_init__(self):
        for name in ("b", "c", "h"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0:
                raise ParameterError(f"{name} must be finite and > 0, got {v!r}")


@dataclass(frozen=True)
class RawParams:
    """Behavioural parameters of the price-level model.

    ``alpha`` is the market maker's adjustment speed, ``beta`` and ``gamma``
    the chartist and fundamentalist reaction coefficients, ``theta`` the
    fundamentalists' expected reversion share and ``rho`` their required risk
    compensation.
    """

    alpha: float
    beta: float
    gamma: float
    theta: float
    rho: float

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "rho"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0:
                raise ParameterError(f"{name} must be finite and > 0, got {v!r}")
        if not 0 < self.theta < 1:
            raise ParameterError(f"theta must lie in (0, 1), got {self.theta!r}")
        self.aggregate()

    @property
    def h(self) -> float:
        return self.rho / self.theta

    def aggregate(self) -> ModelParams:
        return ModelParams(self.alpha * self.beta, self.alpha * self.gamma, self.h)


@dataclass(frozen=True)
class EigenPair:
    """Eigenvalues of a real 2x2 matrix.

    For ``kind == "real"`` ``values`` holds the two eigenvalues (larger
    first); for ``"complex"`` it holds (real part, positive imaginary part).
    """

    kind: str
    values: tuple[float, float]
    spectral_radius: float

    @property
    def is_complex(self) -> bool:
        return self.kind == "complex"

    def as_complex(self) -> tuple[complex, complex]:
        if self.is_complex:
            re, im = self.values
            return complex(re, im), complex(re, -im)
        return complex(self.values[0]), complex(self.values[1])


def branch_of(s: State, p: ModelParams) -> Branch:
    x = s[0]
    if x > p.h:
        return Branch.R
    if x < -p.h:
        return Branch.L
    return Branch.M


def step_m(s: State, p: ModelParams) -> State:
    x, y = s
    if x > p.h or x < -p.h:
        xn = (1.0 + p.b - p.c) * x - p.b * y
    else:
        xn = (1.0 + p.b) * x - p.b * y
    return State(xn, x)


def step_f(s: State, p: ModelParams) -> State:
    x, y = s
    return State((1.0 + p.b - p.c) * x - p.b * y, x)


def step_c(s: State, p: ModelParams) -> State:
    x, y = s
    return State((1.0 + p.b) * x - p.b * y, x)


def outer_forward(s: State, p: ModelParams) -> State:
    """Outer-branch formula applied regardless of the partition."""
    return step_f(s, p)


def inverse_outer(u: float, v: float, p: ModelParams) -> State:
    """Preimage of ``(u, v)`` under the outer linear branch.

    Admissibility (``|x| > h`` for the returned point) is left to the caller.
    """
    return State(v, ((1.0 + p.b - p.c) * v - u) / p.b)


_STEPPERS = {"M": step_m, "F": step_f, "C": step_c}


@dataclass
class Trajectory:
    """Orbit of one of the maps.

    ``states`` has shape (steps + 1, 2). ``branches[t]`` is the partition of
    ``states[t]`` for map ``M`` and ``"-"`` for the linear maps. ``diverged``
    is set when an iterate overflowed to a non-finite value; the orbit is cut
    at the last finite state.
    """

    kind: str
    states: np.ndarray
    branches: list[str]
    diverged: bool = False

    @property
    def final(self) -> State:
        return State(float(self.states[-1, 0]), float(self.states[-1, 1]))

    def __len__(self):
        return len(self.states)


def iterate(kind: str, s0: State, n: int, p: ModelParams) -> Trajectory:
    """Iterate map ``kind`` (``"M"``, ``"F"`` or ``"C"``) ``n`` times from ``s0``."""
    kind = str(kind).upper()
    if kind not in _STEPPERS:
        raise ValueError(f"unknown map {kind!r}; expected M, F or C")
    if n < 0:
        raise ValueError("n must be >= 0")
    step = _STEPPERS[kind]
    s = State(float(s0[0]), float(s0[1]))
    states = [s]
    diverged = False
    for _ in range(n):
        s = step(s, p)
        if not (math.isfinite(s.x) and math.isfinite(s.y)):
            diverged = True
            break
        states.append(s)
    if kind == "M":
        branches = [branch_of(st, p).value for st in states]
    else:
        branches = ["-"] * len(states)
    return Trajectory(kind, np.array(states, dtype=float), branches, diverged)


def c_limit(s0: State, b: float) -> float:
    """Common coordinate ``u`` of the fixed point ``(u, u)`` that map C reaches."""
    if b == 1.0:
        raise ParameterError("c_limit is undefined for b == 1")
    x0, y0 = s0
    return (b * y0 - x0) / (b - 1.0)


def c_closed_form(s0: State, b: float, t: int) -> State:
    """The ``t``-th iterate of map C from ``s0`` in closed form."""
    if b == 1.0:
        raise ParameterError("closed form is undefined for b == 1")
    x0, y0 = s0
    u = (b * y0 - x0) / (b - 1.0)
    k = b * (y0 - x0) / (b - 1.0)
    return State(u - k * b**t, u - k * b ** (t - 1))


def jacobian(branch: Branch | str, p: ModelParams) -> np.ndarray:
    branch = Branch(branch)
    a = 1.0 + p.b if branch is Branch.M else 1.0 + p.b - p.c
    return np.array([[a, -p.b], [1.0, 0.0]])


def jacobian_f(p: ModelParams) -> np.ndarray:
    return jacobian(Branch.R, p)


def jacobian_c(p: ModelParams) -> np.ndarray:
    return jacobian(Branch.M, p)


def eigen(m: np.ndarray) -> EigenPair:
    """Eigenvalues of a 2x2 matrix from its trace and determinant."""
    (a, b), (c, d) = np.asarray(m, dtype=float).tolist()
    tr = a + d
    det = a * d - b * c
    disc = tr * tr - 4.0 * det
    if disc < 0:
        re = tr / 2.0
        im = math.sqrt(-disc) / 2.0
        return EigenPair("complex", (re, im), math.hypot(re, im))
    r = math.sqrt(disc)
    # the root of larger magnitude first, the other from det to avoid cancellation
    big = (tr + math.copysign(r, tr)) / 2.0
    small = det / big if big != 0 else 0.0
    hi, lo = max(big, small), min(big, small)
    return EigenPair("real", (hi, lo), max(abs(hi), abs(lo)))


def price_space_step(
    P_t: float, P_prev: float, F_t: float, rp: RawParams
) -> float:
    """Next price level: the market maker moves the price by ``alpha`` times
    the speculators' excess demand.

    Kept in increment form so rounding scales with the price change rather
    than with the price level.
    """
    demand = rp.beta * (P_t - P_prev)  # chartists
    mis = P_t - F_t
    if not -rp.h <= mis <= rp.h:
        demand -= rp.gamma * mis  # fundamentalists, active outside the band
    return P_t + rp.alpha * demand
