import json

import numpy as np
import pytest

from passive_eq import io, lti
from passive_eq.io import ConfigError


def test_parse_matrix_complex_and_real():
    M = io.parse_matrix([[1, [0.5, -2.0]], [0.0, 3]])
    assert M.dtype == complex
    assert M[0, 1] == 0.5 - 2j


@pytest.mark.parametrize("bad", [[[1, 2], [3]], [[1, [1, 2, 3]]], [["x"]], "nope", [[True]]])
def test_parse_matrix_errors(bad):
    with pytest.raises(ConfigError):
        io.parse_matrix(bad)


def test_format_parse_roundtrip(rng):
    M = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
    assert np.array_equal(io.parse_matrix(io.format_matrix(M)), M)


def test_dumps_seventeen_digits():
    x = 0.1 + 0.2
    text = io.dumps({"x": x, "n": 3, "inf": float("inf"), "z": 1 + 2j})
    assert "0.30000000000000004" in text
    assert '"n": 3' in text
    back = json.loads(text)
    assert back["x"] == x
    assert back["z"] == [1.0, 2.0]
    assert back["inf"] == float("inf")


def test_dumps_numpy_types():
    text = io.dumps({"a": np.arange(3.0), "b": np.float64(2.5), "c": np.int64(4)})
    assert json.loads(text) == {"a": [0.0, 1.0, 2.0], "b": 2.5, "c": 4}


def test_statespace_roundtrip(rng):
    from conftest import random_stable

    sys = random_stable(rng, 2, 2, 1)
    back = io.statespace_from_dict(json.loads(io.dumps(io.statespace_to_dict(sys))))
    for a, b in zip((sys.A, sys.B, sys.C, sys.D), (back.A, back.B, back.C, back.D)):
        assert np.array_equal(a, b)
    g = io.statespace_from_dict(io.statespace_to_dict(lti.gain([[0.5]])))
    assert g.nstates == 0


def test_bundled_examples_load():
    ch1, raw1 = io.load_channel(io.bundled_path("example1.json"))
    ch2, _ = io.load_channel(io.bundled_path("example2.json"))
    assert (ch1.n, ch1.n_y) == (1, 1)
    assert (ch2.n, ch2.n_y) == (2, 2)
    assert raw1["example"] == "cavity1"


def test_raw_channel_config(ex1, tmp_path):
    ss = ex1.ss
    cfg = {"example": "raw", "n": ex1.n, "n_w": ex1.n_w, "n_y": ex1.n_y, "n_d": ex1.n_d,
           "Sigma_u": io.format_matrix(ex1.noise.Sigma_u), "Sigma_w": io.format_matrix(ex1.noise.Sigma_w)}
    cfg.update(io.statespace_to_dict(ss))
    ch = io.channel_from_config(cfg)
    assert np.allclose(ch.ss(0.3j), ss(0.3j))
    del cfg["Sigma_w"]
    with pytest.raises(ConfigError, match="Sigma_w"):
        io.channel_from_config(cfg)


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        io.channel_from_config({"example": "cavity9"})
    with pytest.raises(ConfigError):
        io.channel_from_config({"example": "cavity1", "params": {"bogus": 1}})
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        io.load_channel(p)


def test_zpk_entry_signs():
    sys = io.zpk_entry({"gain": [2.0, 0.0], "num": [["+", [1.0, 1.0]]], "den": [["-", [-3.0, 0.0]]]})
    s = 0.5j
    assert sys(s)[0, 0] == pytest.approx(2 * (s + 1 + 1j) / (s + 3))
    with pytest.raises(ConfigError):
        io.zpk_entry({"gain": 1.0, "num": [["*", 1.0]], "den": []})


def test_equalizer_roundtrip(ex1_synth, tmp_path):
    eq, _ = ex1_synth
    p = tmp_path / "eq.json"
    io.write_json(p, io.equalizer_to_dict(eq))
    back = io.load_equalizer(p)
    assert back.gamma2 == eq.gamma2
    for k, v in eq.blocks().items():
        assert np.array_equal(back.blocks()[k].A, v.A)
        assert np.array_equal(back.blocks()[k].D, v.D)


def test_appendix_fixture_loads():
    eq = io.load_equalizer(io.bundled_path("appendix_H.json"))
    assert eq.gamma2 == 1.9401
    assert eq.H.shape == (4, 4)


def test_equalizer_file_errors(tmp_path):
    p = tmp_path / "eq.json"
    p.write_text(json.dumps({"format": "passive-eq/equalizer", "gamma2": 1.0, "blocks": {"H11": {}}}))
    with pytest.raises(ConfigError):
        io.load_equalizer(p)


def test_csv_roundtrip(tmp_path):
    p = tmp_path / "s.csv"
    cols = {"omega": np.array([-1.0, 0.0, 2.5]), "maxeig_Pe": np.array([1.0, np.nan, 1 / 3])}
    io.write_sweep_csv(p, cols)
    back = io.read_sweep_csv(p)
    assert list(back) == ["omega", "maxeig_Pe"]
    assert np.array_equal(back["omega"], cols["omega"])
    assert back["maxeig_Pe"][2] == 1 / 3
    assert np.isnan(back["maxeig_Pe"][1])


def test_csv_rejects_unsorted_grid(tmp_path):
    with pytest.raises(ValueError):
        io.write_sweep_csv(tmp_path / "s.csv", {"omega": [0.0, 0.0]})
    with pytest.raises(ValueError):
        io.write_sweep_csv(tmp_path / "s.csv", {"x": [0.0]})
