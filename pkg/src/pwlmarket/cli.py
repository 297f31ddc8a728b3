"""Command-line entry point.

Configuration is a flat key space. Values are layered, last writer wins:
built-in defaults, figure preset, ``--config`` JSON file, ``--set key=value``
flags, then ``--seed``/``--threads``. Keys may carry a section prefix
(``model.b``, ``classifier.t_max``); the prefix is checked and dropped.

Exit codes: 0 success, 1 too many undecided classifications, 2 invalid
configuration, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io
from .analysis import (
    ClassifierConfig,
    classify_region,
    classify_trajectory,
    cycle_scan,
    f_subregion,
)
from .core import ModelParams, ParameterError, RawParams, State, iterate
from .grids import GridSpec2D, compute_basin_grid, compute_bifurcation_grid, grid_stats
from .presets import PRESETS
from .stochastic import ShockConfig, regime_labels, regime_stats, simulate_stochastic

SECTIONS: dict[str, dict[str, type]] = {
    "model": {"b": float, "c": float, "h": float},
    "raw": {"alpha": float, "beta": float, "gamma": float, "theta": float, "rho": float},
    "ic": {"x0": float, "y0": float},
    "simulate": {"map": str, "n": int},
    "classifier": {"t_max": int, "r_div": float, "eps_fix": float, "w_tail": int,
                   "p_max": int, "eps_rec": float, "transient": int, "growth_tol": float,
                   "max_ext": int, "early_exit": bool},
    "grid": {"x_min": float, "x_max": float, "y_min": float, "y_max": float,
             "nx": int, "ny": int, "split_pairs": bool},
    "bifurcation": {"b_min": float, "b_max": float, "c_min": float, "c_max": float,
                    "nb": int, "nc": int},
    "cycles": {"k_max": int, "tol": float},
    "shock": {"sigma_d": float, "sigma_delta": float, "seed": int, "steps": int,
              "F0": float, "P0": float, "P_minus1": float, "regime_transient": int},
    "run": {"threads": int, "undecided_max": float},
}
KEYS: dict[str, type] = {k: t for sec in SECTIONS.values() for k, t in sec.items()}
AGGREGATE = ("b", "c", "h")
RAW = tuple(SECTIONS["raw"])

DEFAULTS = {
    "x0": 0.0, "y0": 0.0, "map": "M", "n": 100,
    "t_max": 100_000, "eps_fix": 1e-10, "w_tail": 4096, "p_max": 64,
    "eps_rec": 1e-9, "transient": 2000, "growth_tol": 1e-3, "max_ext": 100,
    "early_exit": True,
    "x_min": -0.2, "x_max": 0.2, "y_min": -0.2, "y_max": 0.2, "nx": 250, "ny": 250,
    "split_pairs": False,
    "b_min": 0.0, "b_max": 1.1, "c_min": 0.0, "c_max": 4.4, "nb": 250, "nc": 250,
    "k_max": 10, "tol": 1e-8,
    "seed": 0, "steps": 10_000, "F0": 100.0, "regime_transient": 0,
    "undecided_max": 0.001,
}

EXIT_OK, EXIT_UNDECIDED, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


class ConfigError(Exception):
    pass


@dataclass
class Resolved:
    values: dict
    origin: dict  # key -> human-readable source, for error messages

    def where(self, key):
        return self.origin.get(key, "default")

    def get(self, key, default=None):
        return self.values.get(key, default)


def _canonical(name: str) -> str:
    if "." in name:
        sec, _, key = name.rpartition(".")
        if sec not in SECTIONS or key not in SECTIONS[sec]:
            raise KeyError(name)
        return key
    if name not in KEYS:
        raise KeyError(name)
    return name


def _coerce(key: str, value):
    typ = KEYS[key]
    if typ is bool:
        if isinstance(value, bool):
            return value
        s = str(value).strip().lower()
        if s in ("1", "true", "yes", "on"):
            return True
        if s in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"expected a boolean, got {value!r}")
    if typ is int:
        if isinstance(value, bool):
            raise ValueError(f"expected an integer, got {value!r}")
        f = float(value) if not isinstance(value, int) else value
        if isinstance(f, float) and not f.is_integer():
            raise ValueError(f"expected an integer, got {value!r}")
        return int(f)
    if typ is float:
        if isinstance(value, bool):
            raise ValueError(f"expected a number, got {value!r}")
        v = float(value)
        if not math.isfinite(v):
            raise ValueError(f"expected a finite number, got {value!r}")
        return v
    return str(value)


def _line_of(text: str, key: str) -> int:
    needle = f'"{key}"'
    for no, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return no
    return 1


def load_config_file(path: str) -> tuple[dict, dict]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"{path}: cannot read config: {e.strerror}") from e
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}: invalid JSON: {e.msg}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}:1: top level must be an object of key/value pairs")
    values, origin = {}, {}
    for name, val in raw.items():
        line = _line_of(text, name)
        try:
            key = _canonical(name)
        except KeyError:
            raise ConfigError(f"{path}:{line}: unknown key {name!r}") from None
        try:
            values[key] = _coerce(key, val)
        except ValueError as e:
            raise ConfigError(f"{path}:{line}: {name}: {e}") from None
        origin[key] = f"{path}:{line}"
    return values, origin


def parse_sets(items: list[str]) -> tuple[dict, dict]:
    values, origin = {}, {}
    for k, item in enumerate(items, 1):
        where = f"--set #{k} ({item})"
        name, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"{where}: expected key=value")
        try:
            key = _canonical(name.strip())
        except KeyError:
            raise ConfigError(f"{where}: unknown key {name.strip()!r}") from None
        try:
            values[key] = _coerce(key, val.strip())
        except ValueError as e:
            raise ConfigError(f"{where}: {e}") from None
        origin[key] = where
    return values, origin


def resolve(layers: list[tuple[dict, dict]]) -> Resolved:
    values, origin = {}, {}
    for vals, orig in layers:
        values.update(vals)
        origin.update(orig)
    return Resolved(values, origin)


def model_params(cfg: Resolved) -> ModelParams:
    agg = [k for k in AGGREGATE if k in cfg.values]
    raw = [k for k in RAW if k in cfg.values]
    if agg and raw:
        raise ConfigError(
            f"{cfg.where(raw[0])}: conflicting parameterizations: "
            f"aggregate ({', '.join(agg)}) and raw ({', '.join(raw)}) both given")
    try:
        if raw:
            missing = [k for k in RAW if k not in cfg.values]
            if missing:
                raise ConfigError(f"raw parameterization needs {', '.join(missing)}")
            return RawParams(*(cfg.values[k] for k in RAW)).aggregate()
        missing = [k for k in AGGREGATE if k not in cfg.values]
        if missing:
            raise ConfigError(f"missing model parameters: {', '.join(missing)}")
        return ModelParams(*(cfg.values[k] for k in AGGREGATE))
    except ParameterError as e:
        keys = raw or agg
        bad = next((k for k in keys if f"{k} " in str(e)), keys[0])
        raise ConfigError(f"{cfg.where(bad)}: {e}") from None


def classifier_config(cfg: Resolved) -> ClassifierConfig:
    kw = {k: cfg.values[k] for k in SECTIONS["classifier"] if k in cfg.values and k != "early_exit"}
    try:
        return ClassifierConfig(**kw)
    except ParameterError as e:
        raise ConfigError(f"classifier: {e}") from None


def grid_spec(cfg: Resolved) -> GridSpec2D:
    try:
        return GridSpec2D(*(cfg.values[k] for k in ("x_min", "x_max", "y_min", "y_max", "nx", "ny")))
    except ParameterError as e:
        raise ConfigError(f"grid: {e}") from None


def shock_config(cfg: Resolved) -> ShockConfig:
    sig = {k: cfg.values[k] for k in ("sigma_d", "sigma_delta") if k in cfg.values}
    if not sig:
        sig = {"sigma_d": 0.005}
    try:
        return ShockConfig(
            **sig, seed=cfg.values["seed"], t_max=cfg.values["steps"], F0=cfg.values["F0"],
            P0=cfg.values.get("P0"), P_minus1=cfg.values.get("P_minus1"))
    except (ParameterError, ValueError) as e:
        raise ConfigError(f"shock: {e}") from None


def _threads(args, cfg: Resolved) -> int:
    if args.threads is not None:
        return args.threads
    if "threads" in cfg.values:
        return cfg.values["threads"]
    env = os.environ.get("PWL_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"PWL_THREADS: expected an integer, got {env!r}") from None
    return 1


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


def _dump(path: Path, obj):
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# experiments; each returns the undecided fraction of its classifications


def run_simulate(cfg: Resolved, out: Path, tag: str = "") -> float:
    p = model_params(cfg)
    kind = cfg.values["map"].upper()
    if kind not in ("M", "F", "C"):
        raise ConfigError(f"{cfg.where('map')}: map must be M, F or C")
    if cfg.values["n"] < 0:
        raise ConfigError(f"{cfg.where('n')}: n must be >= 0")
    traj = iterate(kind, State(cfg.values["x0"], cfg.values["y0"]), cfg.values["n"], p)
    io.write_csv("trajectory", traj, out / f"{tag}trajectory.csv")
    window = io.phase_window(traj.states, p.h)
    io.write_image(io.render_phase(traj.states, p.h, window), out / f"{tag}trajectory.ppm")
    return 0.0


def run_basin(cfg: Resolved, out: Path, threads: int, tag: str = "") -> float:
    p = model_params(cfg)
    grid = compute_basin_grid(p, grid_spec(cfg), classifier_config(cfg), threads,
                              split_pairs=cfg.values["split_pairs"])
    io.write_csv("basin", grid, out / f"{tag}basin.csv")
    io.write_csv("points", grid.overlay, out / f"{tag}attractor.csv")
    io.write_image(grid, out / f"{tag}basin.ppm")
    stats = grid_stats(grid)
    if grid.pair is not None:
        stats["pair"] = {"kind": grid.pair.kind, "hausdorff": grid.pair.hausdorff,
                         "tolerance": grid.pair.tolerance}
    _dump(out / f"{tag}stats.json", stats)
    return stats["fractions"]["Undecided"]


def run_bifurcation(cfg: Resolved, out: Path, threads: int, tag: str = "") -> float:
    v = cfg.values
    if "h" not in v:
        raise ConfigError("missing model parameter: h")
    try:
        grid = compute_bifurcation_grid(
            v["h"], State(v["x0"], v["y0"]), (v["b_min"], v["b_max"]),
            (v["c_min"], v["c_max"]), v["nb"], v["nc"], classifier_config(cfg), threads)
    except ParameterError as e:
        raise ConfigError(f"bifurcation: {e}") from None
    io.write_csv("bifurcation", grid, out / f"{tag}bifurcation.csv")
    io.write_image(grid, out / f"{tag}bifurcation.ppm")
    stats = grid_stats(grid)
    stats.pop("regions")
    stats["crosstab"] = {f"{r}/{lab}": n for (r, lab), n in sorted(stats["crosstab"].items())}
    _dump(out / f"{tag}stats.json", stats)
    return stats["fractions"]["Undecided"]


def run_cycles(cfg: Resolved, out: Path, tag: str = "") -> float:
    p = model_params(cfg)
    reports = cycle_scan(p, cfg.values["k_max"], cfg.values["tol"])
    io.write_csv("cycles", reports, out / f"{tag}cycles.csv")
    flagged = [r for r in reports if r.admissible and not r.s_star]
    print(f"{len(reports)} sequences, {sum(r.unit_eigenvalue for r in reports)} with unit "
          f"eigenvalue, {len(flagged)} admissible cycles off the fixed segment")
    return 0.0


def run_stochastic(cfg: Resolved, out: Path, threads: int, tag: str = "") -> float:
    p = model_params(cfg)
    run = simulate_stochastic(p, shock_config(cfg))
    grid = compute_basin_grid(p, grid_spec(cfg), classifier_config(cfg), threads)
    labels = regime_labels(run, grid)
    stats = regime_stats(labels, cfg.values["regime_transient"])
    sigma_delta, sigma_d = run.config.resolve(p.b)
    stats.update(sigma_delta=sigma_delta, sigma_d=sigma_d, diverged=run.diverged,
                 d_sample_std=float(np.std(run.d)))
    io.write_csv("stochastic", run, out / f"{tag}stochastic.csv")
    _dump(out / f"{tag}regime_stats.json", stats)
    io.write_image(io.render_basin(grid, path=run.states), out / f"{tag}stochastic.ppm")
    return grid_stats(grid)["fractions"]["Undecided"]


def run_classify(cfg: Resolved) -> float:
    p = model_params(cfg)
    label, diag = classify_trajectory(State(cfg.values["x0"], cfg.values["y0"]), p,
                                      classifier_config(cfg),
                                      early_exit=cfg.values["early_exit"])
    print(json.dumps({
        "variant": label.variant, "u": label.u, "period": label.period,
        "iterations": diag.iterations, "branch_counts": diag.branch_counts,
        "region": classify_region(p),
    }))
    return 1.0 if label.variant == "Undecided" else 0.0


def run_region(cfg: Resolved) -> float:
    p = model_params(cfg)
    print(classify_region(p))
    print(f_subregion(p))
    return 0.0


RUNNERS = {
    "simulate": lambda cfg, out, th, tag="": run_simulate(cfg, out, tag),
    "basin": run_basin,
    "bifurcation": run_bifurcation,
    "cycles": lambda cfg, out, th, tag="": run_cycles(cfg, out, tag),
    "stochastic": run_stochastic,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pwlmarket", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with flat (optionally dotted) keys")
    common.add_argument("--set", dest="sets", action="append", default=[],
                        metavar="KEY=VALUE", help="override a config key (repeatable)")
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument("--threads", type=int, help="worker threads (env PWL_THREADS)")
    common.add_argument("--seed", type=int, help="shock generator seed (unsigned 64-bit)")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, text in [
        ("region", "print the parameter region and map-F subregion"),
        ("simulate", "iterate M, F or C and write the trajectory"),
        ("classify", "classify one initial condition, JSON on stdout"),
        ("basin", "basin-of-attraction grid"),
        ("bifurcation", "(b, c) bifurcation grid from one initial condition"),
        ("cycles", "symbolic cycle scan"),
        ("stochastic", "shocked run with regime statistics"),
    ]:
        sub.add_parser(name, parents=[common], help=text)
    fig = sub.add_parser("figure", parents=[common], help="reproduce a figure preset")
    fig.add_argument("name", choices=sorted(PRESETS))
    return ap


def _layers(args, preset_vals=None, preset_name=None):
    layers = [(dict(DEFAULTS), {})]
    if preset_vals:
        layers.append((preset_vals, {k: f"preset {preset_name}" for k in preset_vals}))
    if args.config:
        layers.append(load_config_file(args.config))
    layers.append(parse_sets(args.sets))
    if args.seed is not None:
        layers.append(({"seed": args.seed}, {"seed": "--seed"}))
    return layers


def _validate_seed(cfg: Resolved):
    seed = cfg.values.get("seed", 0)
    if not 0 <= seed < 2**64:
        raise ConfigError(f"{cfg.where('seed')}: seed must be an unsigned 64-bit integer")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


def _dispatch(args) -> int:
    if args.command == "region":
        cfg = resolve(_layers(args))
        run_region(cfg)
        return EXIT_OK
    if args.command == "classify":
        cfg = resolve(_layers(args))
        frac = run_classify(cfg)
        return EXIT_OK if frac <= cfg.values["undecided_max"] else EXIT_UNDECIDED

    out = Path(args.out)
    if args.command == "figure":
        preset = PRESETS[args.name]
        kind = preset["kind"]
        panels = []
        for k, panel in enumerate(preset["panels"], 1):
            vals = {**preset["base"], **panel}
            cfg = resolve(_layers(args, vals, args.name))
            _validate_seed(cfg)
            if kind != "bifurcation":
                model_params(cfg)
            panels.append(cfg)
        threads = _threads(args, panels[0])
        out.mkdir(parents=True, exist_ok=True)
        worst = 0.0
        for k, cfg in enumerate(panels, 1):
            worst = max(worst, RUNNERS[kind](cfg, out, threads, f"{args.name}_p{k}_"))
        resolved = {"preset": args.name, "kind": kind, "threads": threads,
                    "panels": [c.values for c in panels]}
        if "note" in preset:
            resolved["note"] = preset["note"]
        _dump(out / "resolved.json", resolved)
        return EXIT_OK if worst <= panels[0].values["undecided_max"] else EXIT_UNDECIDED

    cfg = resolve(_layers(args))
    _validate_seed(cfg)
    threads = _threads(args, cfg)
    if args.command != "bifurcation":
        model_params(cfg)
    out.mkdir(parents=True, exist_ok=True)
    frac = RUNNERS[args.command](cfg, out, threads)
    _dump(out / "resolved.json", {"command": args.command, "threads": threads, **cfg.values})
    return EXIT_OK if frac <= cfg.values["undecided_max"] else EXIT_UNDECIDED


if __name__ == "__main__":
    sys.exit(main())
