"""Parameter sets of the published figures, as flat config overrides.

Each preset has a ``kind`` (which experiment to run), shared ``base`` values
and a list of ``panels`` whose values are layered over ``base``.
"""

FIG8_C = (0.25, 1.00, 1.70, 2.05, 2.50, 3.61)
FIG10_B = (0.30, 0.40, 0.50, 0.60, 0.80, 1.05)
FIG12_C = (0.45, 0.75, 1.10)

PRESETS: dict[str, dict] = {
    "fig2": {
        "kind": "simulate",
        "base": {"map": "F", "h": 0.05, "n": 60},
        "panels": [
            {"b": 0.80, "c": 1.35, "x0": 0.15, "y0": 0.00},
            {"b": 0.20, "c": 2.30, "x0": 0.08, "y0": -0.09},
            {"b": 0.20, "c": 0.30, "x0": 0.15, "y0": 0.19},
        ],
    },
    "fig3": {
        "kind": "simulate",
        # map C ignores c; any positive value passes validation
        "base": {"map": "C", "b": 0.80, "c": 1.35, "h": 0.05, "n": 200},
        "panels": [
            {"x0": -0.13, "y0": -0.17},
            {"x0": -0.10, "y0": -0.17},
        ],
    },
    "fig4": {
        "kind": "basin",
        "base": {"b": 0.80, "c": 2.50, "h": 0.05},
        "panels": [{}],
    },
    "fig5": {
        "kind": "simulate",
        "base": {"map": "M", "b": 0.80, "c": 2.50, "h": 0.05, "n": 200},
        "panels": [
            {"x0": -0.12, "y0": -0.16},
            {"x0": 0.13, "y0": 0.00},
        ],
        "note": "figure caption gives c = 1.35, body text gives c = 2.50; "
                "c = 2.50 is used, matching the fig4 parameters",
    },
    "fig6": {
        "kind": "bifurcation",
        "base": {"h": 0.05, "b_min": 0.0, "b_max": 1.10, "c_min": 0.0, "c_max": 4.40},
        "panels": [
            {"x0": 0.06, "y0": 0.06},
            {"x0": 0.04, "y0": 0.00},
        ],
    },
    "fig7": {
        "kind": "basin",
        "base": {},
        "panels": [
            {"b": 0.80, "c": 1.00, "h": 0.10,
             "x_min": -0.4, "x_max": 0.4, "y_min": -0.4, "y_max": 0.4},
            {"b": 0.80, "c": 1.00, "h": 0.05},
            {"b": 0.60, "c": 1.00, "h": 0.05},
        ],
    },
    "fig8": {
        "kind": "basin",
        "base": {"b": 0.80, "h": 0.05},
        "panels": [{"c": c} for c in FIG8_C],
    },
    "fig9": {
        "kind": "simulate",
        "base": {"map": "M", "b": 0.80, "h": 0.05, "n": 200, "x0": 0.13, "y0": 0.00},
        "panels": [{"c": c} for c in FIG8_C],
    },
    "fig10": {
        "kind": "basin",
        "base": {"c": 1.35, "h": 0.05},
        "panels": [{"b": b} for b in FIG10_B],
    },
    "fig11": {
        "kind": "simulate",
        "base": {"map": "M", "c": 1.35, "h": 0.05, "n": 200, "x0": 0.13, "y0": 0.00},
        "panels": [{"b": b} for b in FIG10_B],
    },
    "fig12": {
        "kind": "stochastic",
        "base": {"b": 0.80, "h": 0.05, "sigma_d": 0.005, "steps": 10_000},
        "panels": [{"c": c} for c in FIG12_C],
    },
    "figA1": {
        "kind": "basin",
        "base": {"b": 0.40, "c": 2.85, "h": 0.05},
        "panels": [{}],
    },
    "figA2": {
        "kind": "basin",
        "base": {"b": 0.40, "h": 0.05},
        "panels": [{"c": 0.60}, {"c": 1.20}, {"c": 1.60}],
    },
    "figB1": {
        "kind": "basin",
        "base": {"b": 0.40, "h": 0.05, "split_pairs": True},
        "panels": [{"c": 2.10}, {"c": 2.15}],
    },
}
