"""CSV and binary PPM output.

Reals are written in the shortest form that parses back to the same double
(``repr``), with a trailing ``.0`` dropped so integral values read ``0``,
``5``, ``-0``. PPM files are P6 with the row of largest y first. Convert with
e.g. ``magick basin.ppm basin.png`` if a compressed format is needed.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .analysis import VARIANTS, immediate_basin
from .grids import BasinGrid, BifurcationGrid, region_map

PALETTE: dict[str, tuple[int, int, int]] = {
    "FundamentalFP": (0, 160, 0),
    "NonfundamentalFP": (170, 210, 255),
    "NonfundamentalFP_attractor": (0, 0, 255),
    "WQA": (255, 190, 190),
    "WQA_attractor": (255, 0, 0),
    "WQA_second": (210, 180, 140),
    "Divergent": (128, 128, 128),
    "Undecided": (0, 0, 0),
    "PeriodicAnomaly": (0, 0, 0),
    "outline": (255, 220, 0),
}

# bifurcation diagrams colour cells by the attractor reached, not its basin
BIFURCATION_PALETTE: dict[str, tuple[int, int, int]] = {
    **PALETTE,
    "NonfundamentalFP": PALETTE["NonfundamentalFP_attractor"],
    "WQA": PALETTE["WQA_attractor"],
}

PHASE_COLORS = {
    "background": (255, 255, 255),
    "band": (0, 0, 0),
    "orbit": (200, 0, 200),
}

SCHEMAS = {
    "trajectory": ["t", "x", "y", "branch"],
    "basin": ["i", "j", "x0", "y0", "label", "limit_u"],
    "bifurcation": ["i", "j", "b", "c", "label", "region"],
    "cycles": ["sequence", "k", "eig1_re", "eig1_im", "eig2_re", "eig2_im",
               "unit_eig", "admissible"],
    "stochastic": ["t", "delta", "d", "F", "P", "x", "regime"],
    "points": ["x", "y"],
}


def fmt_real(v) -> str:
    s = repr(float(v))
    return s.removesuffix(".0")


def _rows(kind, data):
    if kind == "trajectory":
        for t, ((x, y), br) in enumerate(zip(data.states, data.branches)):
            yield [t, fmt_real(x), fmt_real(y), br]
    elif kind == "basin":
        xs, ys = data.spec.xs, data.spec.ys
        for j in range(data.spec.ny):
            for i in range(data.spec.nx):
                code = data.codes[j, i]
                u = fmt_real(data.u[j, i]) if code in (0, 1) else ""
                yield [i, j, fmt_real(xs[i]), fmt_real(ys[j]), VARIANTS[code], u]
    elif kind == "bifurcation":
        regions = region_map(data)
        for j in range(data.nc):
            for i in range(data.nb):
                yield [i, j, fmt_real(data.bs[i]), fmt_real(data.cs[j]),
                       VARIANTS[data.codes[j, i]], regions[j, i]]
    elif kind == "cycles":
        for r in data:
            e1, e2 = r.eigenvalues.as_complex()
            yield [r.sequence, r.k, fmt_real(e1.real), fmt_real(e1.imag),
                   fmt_real(e2.real), fmt_real(e2.imag),
                   str(r.unit_eigenvalue).lower(), str(r.admissible).lower()]
    elif kind == "stochastic":
        regime = data.regime if data.regime is not None else [""] * len(data)
        for k in range(len(data)):
            yield [int(data.t[k]), fmt_real(data.delta[k]), fmt_real(data.d[k]),
                   fmt_real(data.F[k]), fmt_real(data.P[k]), fmt_real(data.x[k]),
                   regime[k]]
    elif kind == "points":
        for x, y in np.asarray(data).reshape(-1, 2):
            yield [fmt_real(x), fmt_real(y)]
    else:
        raise ValueError(f"unknown CSV kind {kind!r}")


def write_csv(kind: str, data, path) -> Path:
    """Write ``data`` with the column layout ``SCHEMAS[kind]``."""
    if kind not in SCHEMAS:
        raise ValueError(f"unknown CSV kind {kind!r}")
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCHEMAS[kind])
        w.writerows(_rows(kind, data))
    return path


def read_csv(path) -> list[dict[str, str]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def encode_ppm(rgb: np.ndarray) -> bytes:
    rgb = np.ascontiguousarray(rgb, dtype=np.uint8)
    h, w, _ = rgb.shape
    return f"P6\n{w} {h}\n255\n".encode("ascii") + rgb.tobytes()


def decode_ppm(blob: bytes) -> np.ndarray:
    parts = blob.split(b"\n", 3)
    if parts[0] != b"P6":
        raise ValueError("not a binary PPM")
    w, h = map(int, parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w, 3)


class _Canvas:
    """Raster in grid orientation: ``pix[j, i]`` with ``j`` along y."""

    def __init__(self, x_min, x_max, y_min, y_max, nx, ny, fill=(0, 0, 0)):
        self.x_min, self.y_min = x_min, y_min
        self.dx = (x_max - x_min) / (nx - 1)
        self.dy = (y_max - y_min) / (ny - 1)
        self.nx, self.ny = nx, ny
        self.pix = np.empty((ny, nx, 3), dtype=np.uint8)
        self.pix[:] = fill

    def plot(self, pts, color):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        pts = pts[np.isfinite(pts).all(axis=1)]
        i = np.rint((pts[:, 0] - self.x_min) / self.dx)
        j = np.rint((pts[:, 1] - self.y_min) / self.dy)
        ok = (i >= 0) & (i < self.nx) & (j >= 0) & (j < self.ny)
        self.pix[j[ok].astype(int), i[ok].astype(int)] = color

    def segment(self, p0, p1, color):
        n = 4 * max(self.nx, self.ny)
        t = np.linspace(0.0, 1.0, n)[:, None]
        self.plot((1 - t) * np.asarray(p0) + t * np.asarray(p1), color)

    def raster(self) -> np.ndarray:
        return self.pix[::-1]


def render_basin(grid: BasinGrid, palette=PALETTE, path=None) -> np.ndarray:
    """Basin colours with the immediate-basin outline, fixed segment and WQA
    sample on top; ``path`` (an orbit) is drawn last."""
    g, p = grid.spec, grid.params
    lut = np.array([palette[v] for v in VARIANTS], dtype=np.uint8)
    cv = _Canvas(g.x_min, g.x_max, g.y_min, g.y_max, g.nx, g.ny)
    cv.pix[:] = lut[grid.codes]
    if grid.wqa_side is not None:
        cv.pix[(grid.codes == VARIANTS.index("WQA")) & (grid.wqa_side == 1)] = palette["WQA_second"]
    if 0 < p.b < 1:
        v = immediate_basin(p).vertices
        for k in range(4):
            cv.segment(v[k], v[(k + 1) % 4], palette["outline"])
    cv.segment((-p.h, -p.h), (p.h, p.h), palette["NonfundamentalFP_attractor"])
    cv.plot([(0.0, 0.0)], palette["FundamentalFP"])
    if len(grid.overlay):
        cv.plot(grid.overlay, palette["WQA_attractor"])
    if path is not None:
        cv.plot(path, PHASE_COLORS["orbit"])
    return cv.raster()


def render_bifurcation(grid: BifurcationGrid, palette=BIFURCATION_PALETTE) -> np.ndarray:
    lut = np.array([palette[v] for v in VARIANTS], dtype=np.uint8)
    return lut[grid.codes][::-1]


def render_phase(states, h, window, size=250) -> np.ndarray:
    """Phase-plane raster of an orbit with the band edges ``x = +-h``."""
    x_min, x_max, y_min, y_max = window
    cv = _Canvas(x_min, x_max, y_min, y_max, size, size, PHASE_COLORS["background"])
    for xe in (-h, h):
        cv.segment((xe, y_min), (xe, y_max), PHASE_COLORS["band"])
    cv.plot(states, PHASE_COLORS["orbit"])
    return cv.raster()


def write_image(grid, path, palette=None) -> Path:
    """Render a basin or bifurcation grid (or an RGB array) to a P6 file."""
    if isinstance(grid, BasinGrid):
        rgb = render_basin(grid, palette or PALETTE)
    elif isinstance(grid, BifurcationGrid):
        rgb = render_bifurcation(grid, palette or BIFURCATION_PALETTE)
    else:
        rgb = np.asarray(grid)
    path = Path(path)
    path.write_bytes(encode_ppm(rgb))
    return path


def phase_window(states, h, pad=0.1):
    pts = np.asarray(states, dtype=float)
    pts = pts[np.isfinite(pts).all(axis=1)]
    r = max(float(np.abs(pts).max()) if len(pts) else 0.0, 2 * h)
    r = r * (1 + pad) if math.isfinite(r) else 2 * h
    return (-r, r, -r, r)
