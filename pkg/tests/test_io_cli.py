import json
import struct

import numpy as np
import pytest

from pwlmarket import io
from pwlmarket.cli import main
from pwlmarket.core import ModelParams, State, iterate
from pwlmarket.presets import PRESETS


def test_fmt_real():
    assert io.fmt_real(0.0) == "0"
    assert io.fmt_real(-0.0) == "-0"
    assert io.fmt_real(5) == "5"
    assert io.fmt_real(0.1) == "0.1"
    assert io.fmt_real(1e-300) == "1e-300"


def test_csv_roundtrip_is_exact(tmp_path):
    rng = np.random.default_rng(5)
    bits = rng.integers(0, 2**63, size=10_000, dtype=np.uint64) | np.uint64(1)
    vals = bits.view(np.float64)
    vals = vals[np.isfinite(vals)].reshape(-1)
    vals = np.concatenate([vals, rng.normal(size=2000), [0.0, -0.0, 1.0, -2.5]])
    if vals.size % 2:
        vals = vals[:-1]
    path = io.write_csv("points", vals.reshape(-1, 2), tmp_path / "p.csv")
    rows = io.read_csv(path)
    back = np.array([[float(r["x"]), float(r["y"])] for r in rows]).ravel()
    assert back.view(np.uint64).tolist() == vals.view(np.uint64).tolist()


def test_trajectory_csv_schema(tmp_path):
    tr = iterate("M", State(0.13, 0.0), 5, ModelParams(0.8, 2.5, 0.05))
    path = io.write_csv("trajectory", tr, tmp_path / "t.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "t,x,y,branch"
    assert lines[1] == "0,0.13,0,R"
    assert len(lines) == 7
    with pytest.raises(ValueError):
        io.write_csv("nope", tr, tmp_path / "x.csv")


def test_ppm_encoding():
    rgb = np.arange(4 * 3 * 3, dtype=np.uint8).reshape(4, 3, 3)
    blob = io.encode_ppm(rgb)
    header = b"P6\n3 4\n255\n"
    assert blob.startswith(header)
    assert len(blob) == len(header) + 4 * 3 * 3
    np.testing.assert_array_equal(io.decode_ppm(blob), rgb)
    with pytest.raises(ValueError):
        io.decode_ppm(b"P3\n1 1\n255\n" + bytes(3))


def test_render_bifurcation_orientation():
    from pwlmarket.grids import BifurcationGrid

    codes = np.zeros((2, 3), dtype=np.int8)
    codes[1, :] = 3  # top row in c is divergent
    g = BifurcationGrid((0, 1), (0, 1), 3, 2, 0.05, State(0, 0), np.ones(3), np.ones(2),
                        codes, np.zeros((2, 3)))
    rgb = io.render_bifurcation(g)
    assert tuple(rgb[0, 0]) == io.PALETTE["Divergent"]
    assert tuple(rgb[1, 0]) == io.PALETTE["FundamentalFP"]


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_region(capsys):
    code, out, _ = run_cli(capsys, "region", "--set", "b=0.8", "--set", "c=1.35", "--set", "h=0.05")
    assert code == 0 and out.split() == ["R2", "S1"]


def test_cli_region_raw_parameters(capsys):
    code, out, _ = run_cli(capsys, "region", *sum((["--set", f"{k}={v}"] for k, v in
                           dict(alpha=1, beta=0.2, gamma=0.3, theta=0.5, rho=0.025).items()), []))
    assert code == 0 and out.split() == ["R1", "S3"]


def test_cli_classify(capsys):
    code, out, _ = run_cli(capsys, "classify", "--set", "model.b=0.8", "--set", "c=2.5",
                           "--set", "h=0.05", "--set", "x0=0.13", "--set", "y0=0")
    assert code == 0
    assert json.loads(out)["variant"] == "WQA"


def test_cli_undecided_exit(capsys):
    code, out, _ = run_cli(capsys, "classify", "--set", "b=0.8", "--set", "c=2.5", "--set", "h=0.05",
                           "--set", "x0=0.13", "--set", "t_max=200", "--set", "w_tail=100")
    assert json.loads(out)["variant"] == "Undecided"
    assert code == 1


@pytest.mark.parametrize("argv, needle", [
    (["--set", "b=0.8", "--set", "alpha=1"], "--set #2"),
    (["--set", "b=0.8", "--set", "c=1", "--set", "h=-1"], "--set #3"),
    (["--set", "bogus=1"], "unknown key"),
    (["--set", "b"], "key=value"),
    (["--set", "model.t_max=3"], "unknown key"),
    (["--set", "b=abc"], "--set #1"),
])
def test_cli_config_errors(capsys, argv, needle):
    code, _, err = run_cli(capsys, "region", *argv)
    assert code == 2 and needle in err


def test_cli_config_file_line_numbers(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text('{\n  "model.b": 0.8,\n  "model.c": "x",\n  "h": 0.05\n}\n')
    code, _, err = run_cli(capsys, "region", "--config", str(cfg))
    assert code == 2 and f"{cfg}:3" in err
    cfg.write_text('{"b": 0.8, "c": 2.5, "h": 0.05}')
    code, out, _ = run_cli(capsys, "region", "--config", str(cfg), "--set", "c=0.1")
    assert code == 0 and out.split()[0] == "R1"


def test_cli_io_error(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code, _, err = run_cli(capsys, "simulate", "--out", str(blocker / "sub"),
                           "--set", "b=0.8", "--set", "c=2.5", "--set", "h=0.05")
    assert code == 3 and err.startswith("error:")


def test_cli_simulate_writes_files(tmp_path, capsys):
    code, _, _ = run_cli(capsys, "simulate", "--out", str(tmp_path), "--set", "b=0.8",
                         "--set", "c=2.5", "--set", "h=0.05", "--set", "x0=0.13", "--set", "n=50")
    assert code == 0
    assert len(io.read_csv(tmp_path / "trajectory.csv")) == 51
    blob = (tmp_path / "trajectory.ppm").read_bytes()
    assert io.decode_ppm(blob).shape == (250, 250, 3)
    res = json.loads((tmp_path / "resolved.json").read_text())
    assert res["b"] == 0.8 and res["command"] == "simulate"


def test_cli_basin_and_cycles(tmp_path, capsys):
    base = ["--out", str(tmp_path), "--set", "b=0.8", "--set", "c=2.5", "--set", "h=0.05"]
    code, _, _ = run_cli(capsys, "basin", *base, "--set", "nx=12", "--set", "ny=10",
                         "--set", "t_max=20000", "--threads", "2")
    assert code == 0
    rows = io.read_csv(tmp_path / "basin.csv")
    assert len(rows) == 120 and rows[0].keys() == {"i", "j", "x0", "y0", "label", "limit_u"}
    stats = json.loads((tmp_path / "stats.json").read_text())
    assert stats["total"] == 120
    code, out, _ = run_cli(capsys, "cycles", *base, "--set", "k_max=5")
    assert code == 0 and "0 admissible cycles off the fixed segment" in out
    assert io.read_csv(tmp_path / "cycles.csv")[0]["sequence"] == "L"


def test_cli_stochastic(tmp_path, capsys):
    code, _, _ = run_cli(capsys, "stochastic", "--out", str(tmp_path), "--seed", "4",
                         "--set", "b=0.8", "--set", "c=1.1", "--set", "h=0.05",
                         "--set", "steps=300", "--set", "nx=12", "--set", "ny=12",
                         "--set", "t_max=20000")
    assert code == 0
    rows = io.read_csv(tmp_path / "stochastic.csv")
    assert len(rows) == 301 and rows[0]["regime"] == "fixed"
    stats = json.loads((tmp_path / "regime_stats.json").read_text())
    assert stats["sigma_d"] == 0.005


def test_cli_seed_out_of_range(tmp_path, capsys):
    code, _, err = run_cli(capsys, "stochastic", "--out", str(tmp_path), "--seed", "-1",
                           "--set", "b=0.8", "--set", "c=1.1", "--set", "h=0.05")
    assert code == 2 and "seed" in err


def test_figure_preset(tmp_path, capsys):
    code, _, _ = run_cli(capsys, "figure", "fig5", "--out", str(tmp_path))
    assert code == 0
    res = json.loads((tmp_path / "resolved.json").read_text())
    assert res["panels"][0]["c"] == 2.5 and "note" in res
    assert (tmp_path / "fig5_p2_trajectory.csv").exists()


def test_presets_are_complete():
    expected = {"fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10",
                "fig11", "fig12", "figA1", "figA2", "figB1"}
    assert set(PRESETS) == expected
    assert [p["c"] for p in PRESETS["fig8"]["panels"]] == [0.25, 1.0, 1.7, 2.05, 2.5, 3.61]


def test_ppm_header_fields():
    blob = io.encode_ppm(np.zeros((2, 5, 3), dtype=np.uint8))
    magic, dims, maxval, _ = blob.split(b"\n", 3)
    assert (magic, dims, maxval) == (b"P6", b"5 2", b"255")
    assert struct.calcsize("30B") == len(blob) - len(b"P6\n5 2\n255\n")
