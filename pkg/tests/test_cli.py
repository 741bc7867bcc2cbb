import json
import subprocess
import sys

import numpy as np
import pytest

from passive_eq import cli, io

EX1 = str(io.bundled_path("example1.json"))
GRID = "41,-4e9,2e9"


def run(*args):
    return cli.main(list(args))


def test_parse_grid():
    g = cli.parse_grid("11,-1,1")
    assert g.points().shape == (11,)
    for bad in ("10,-1,1", "11,1,-1", "11,a,1", "11,1"):
        with pytest.raises(Exception):
            cli.parse_grid(bad)


def test_check_writes_report(tmp_path, capsys):
    assert run("check", "--channel", EX1, "--out", str(tmp_path)) == 0
    rep = json.loads((tmp_path / "check.json").read_text())
    assert rep["realizability"]["passed"] is True
    assert rep["channel"]["example"] == "cavity1"


def test_check_corrupted_channel_exit_1(tmp_path, capsys):
    cfg = json.loads(io.bundled_path("example1.json").read_text())
    ch, _ = io.load_channel(EX1)
    raw = {"example": "raw", "n": ch.n, "n_w": ch.n_w, "n_y": ch.n_y, "n_d": ch.n_d,
           "Sigma_u": cfg["Sigma_u"], "Sigma_w": cfg["Sigma_w"]}
    raw.update(io.statespace_to_dict(ch.ss))
    raw["D"][0][0][0] += 1e-3
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(raw))
    assert run("check", "--channel", str(p), "--out", str(tmp_path)) == 1
    err = capsys.readouterr().err
    assert "[check]" in err and "residual" in err


def test_missing_channel_exit_2(tmp_path, capsys):
    assert run("check", "--channel", str(tmp_path / "nope.json")) == 2
    assert "[config]" in capsys.readouterr().err


def test_short_grid_exit_2():
    with pytest.raises(SystemExit) as exc:
        run("synth", "--channel", EX1, "--grid", "5,-1,1")
    assert exc.value.code == 2


def test_psd_requires_equalizer(tmp_path):
    assert run("psd", "--channel", EX1, "--out", str(tmp_path)) == 2


def test_factor(tmp_path):
    assert run("factor", "--channel", EX1, "--out", str(tmp_path)) == 0
    rep = json.loads((tmp_path / "factor.json").read_text())
    assert rep["residual"] <= 1e-7
    assert rep["lambda2"] == 0.0


def test_synth_verify_psd_pipeline(tmp_path):
    out = tmp_path / "a"
    assert run("synth", "--channel", EX1, "--grid", GRID, "--out", str(out)) == 0
    eqf = out / "equalizer.json"
    rep = json.loads((out / "synth_report.json").read_text())
    assert rep["report"]["gamma2"] < 2.1
    assert run("verify", "--channel", EX1, "--equalizer", str(eqf), "--grid", GRID, "--out", str(out)) == 0
    sweep = io.read_sweep_csv(out / "verify.csv")
    assert tuple(sweep) == io.FROZEN_CSV_COLUMNS
    assert np.all(np.diff(sweep["omega"]) > 0)
    assert np.all(sweep["maxeig_Pe"] < sweep["gamma2"])
    assert json.loads((out / "verify.json").read_text())["verification"]["passed"] is True
    assert run("psd", "--channel", EX1, "--equalizer", str(eqf), "--grid", GRID, "--out", str(out)) == 0
    assert list(io.read_sweep_csv(out / "psd.csv")) == ["omega", "maxeig_Pe"]


def test_synth_is_deterministic(tmp_path):
    for d in ("a", "b"):
        assert run("synth", "--channel", EX1, "--grid", GRID, "--out", str(tmp_path / d)) == 0
    for name in ("equalizer.json", "synth_report.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_baseline(tmp_path):
    assert run("baseline", "--channel", EX1, "--out", str(tmp_path)) == 0
    rep = json.loads((tmp_path / "baseline.json").read_text())
    assert len(rep["omega"]) == 21
    assert rep["omega"][0] == pytest.approx(-4e9) and rep["omega"][-1] == pytest.approx(2e9)


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "passive_eq.cli", "check", "--channel", EX1, "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
