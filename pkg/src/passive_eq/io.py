"""Channel configs, equalizer files, JSON reports and CSV sweeps.

Channel config (JSON)::

    {"example": "cavity1" | "cavity2" | "raw",
     "name": optional string,
     "params": {...},            # keyword arguments of the example builder
     "Sigma_u": matrix,          # optional override for the examples
     "Sigma_w": matrix,
     "A": ..., "B": ..., "C": ..., "D": ...,     # raw only
     "n": int, "n_w": int, "n_y": int, "n_d": int}  # raw only

Matrix entries are numbers or ``[re, im]`` pairs.  Equalizer files store
each block as a state-space realization (``"format": "passive-eq/equalizer"``)
or as zero-pole-gain entries (``"format": "passive-eq/zpk-equalizer"``).

Floats are written with 17 significant digits so reports are reproducible
byte for byte.
"""

from __future__ import annotations

import csv
import json
import math
import re
from importlib import resources
from pathlib import Path

import numpy as np

from . import lti
from .channel import NoiseModel, PassiveChannel, build_example1, build_example2
from .lti import StateSpace

__all__ = [
    "ConfigError",
    "FROZEN_CSV_COLUMNS",
    "bundled_path",
    "parse_matrix",
    "format_matrix",
    "channel_from_config",
    "load_channel",
    "dumps",
    "write_json",
    "statespace_to_dict",
    "statespace_from_dict",
    "equalizer_to_dict",
    "load_equalizer",
    "zpk_entry",
    "write_sweep_csv",
    "read_sweep_csv",
]

FROZEN_CSV_COLUMNS = ("omega", "maxeig_Pe", "maxeig_Pyu", "maxeig_Pmyu", "gamma2")

_BUILDERS = {"cavity1": build_example1, "cavity2": build_example2}
_FLOAT_TAG = "\x00f:"


class ConfigError(ValueError):
    pass


def bundled_path(name: str) -> Path:
    """Path of a bundled fixture such as ``"example1.json"``."""
    return Path(str(resources.files("passive_eq") / "data" / name))


# ---------------------------------------------------------------- matrices


def _scalar(x) -> complex:
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ConfigError(f"complex entries must be [re, im] pairs, got {x!r}")
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(f"matrix entry {x!r} is not a number")
    return complex(float(x), 0.0)


def parse_matrix(data, name: str = "matrix") -> np.ndarray:
    """Two-dimensional complex array from nested lists of numbers or ``[re, im]`` pairs."""
    if not isinstance(data, list) or any(not isinstance(r, list) for r in data):
        raise ConfigError(f"{name} must be a list of rows")
    if not data:
        return np.zeros((0, 0), dtype=complex)
    widths = {len(r) for r in data}
    if len(widths) != 1:
        raise ConfigError(f"{name} has ragged rows")
    try:
        return np.array([[_scalar(x) for x in r] for r in data], dtype=complex).reshape(len(data), widths.pop())
    except ConfigError as exc:
        raise ConfigError(f"{name}: {exc}") from None


def format_matrix(M) -> list:
    """Nested ``[re, im]`` lists."""
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


# ---------------------------------------------------------------- channels


def channel_from_config(cfg: dict) -> PassiveChannel:
    if not isinstance(cfg, dict):
        raise ConfigError("channel config must be a JSON object")
    kind = cfg.get("example")
    if kind in _BUILDERS:
        params = cfg.get("params", {})
        if not isinstance(params, dict):
            raise ConfigError("params must be an object")
        params = {k: (parse_matrix(v, k) if isinstance(v, list) else v) for k, v in params.items()}
        try:
            ch = _BUILDERS[kind](**params)
        except TypeError as exc:
            raise ConfigError(f"bad parameters for {kind}: {exc}") from None
        if "Sigma_u" in cfg or "Sigma_w" in cfg:
            ch = ch.with_noise(
                parse_matrix(cfg["Sigma_u"], "Sigma_u") if "Sigma_u" in cfg else None,
                parse_matrix(cfg["Sigma_w"], "Sigma_w") if "Sigma_w" in cfg else None,
            )
    elif kind == "raw":
        missing = [k for k in ("A", "B", "C", "D", "n", "n_w", "n_y", "n_d", "Sigma_u", "Sigma_w") if k not in cfg]
        if missing:
            raise ConfigError("raw config is missing " + ", ".join(missing))
        mats = [parse_matrix(cfg[k], k) for k in ("A", "B", "C", "D")]
        A, B, C, D = mats
        m = A.shape[0]
        if m == 0:
            B = B.reshape(0, D.shape[1])
            C = C.reshape(D.shape[0], 0)
        ss = StateSpace(A, B, C, D)
        noise = NoiseModel(parse_matrix(cfg["Sigma_u"], "Sigma_u"), parse_matrix(cfg["Sigma_w"], "Sigma_w"))
        ch = PassiveChannel(ss, int(cfg["n"]), int(cfg["n_w"]), int(cfg["n_y"]), int(cfg["n_d"]), noise)
    else:
        raise ConfigError(f"unknown example kind {kind!r}; expected cavity1, cavity2 or raw")
    name = cfg.get("name")
    if name is not None:
        ch = PassiveChannel(ch.ss, ch.n, ch.n_w, ch.n_y, ch.n_d, ch.noise, str(name))
    return ch


def load_channel(path) -> tuple[PassiveChannel, dict]:
    """Channel and the raw config dictionary (echoed into reports)."""
    try:
        cfg = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    try:
        return channel_from_config(cfg), cfg
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


# ---------------------------------------------------------------- JSON


def _tag_floats(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (float, np.floating)):
        return _FLOAT_TAG + _fmt(float(obj))
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_tag_floats(float(obj.real)), _tag_floats(float(obj.imag))]
    if isinstance(obj, np.ndarray):
        return _tag_floats(obj.tolist())
    if isinstance(obj, dict):
        return {str(k): _tag_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_tag_floats(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _fmt(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    s = format(x, ".17g")
    if not re.search(r"[.eEn]", s):
        s += ".0"
    return s


def dumps(obj, indent: int | None = 1) -> str:
    """JSON text with every float printed to 17 significant digits."""
    text = json.dumps(_tag_floats(obj), indent=indent, sort_keys=False)
    return re.sub(r'"\\u0000f:([^"]*)"', r"\1", text)


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj) + "\n")


# ---------------------------------------------------------------- equalizers


def statespace_to_dict(sys: StateSpace) -> dict:
    return {
        "A": format_matrix(sys.A) if sys.nstates else [],
        "B": format_matrix(sys.B) if sys.nstates else [],
        "C": format_matrix(sys.C) if sys.nstates else [],
        "D": format_matrix(sys.D),
    }


def statespace_from_dict(d: dict) -> StateSpace:
    D = parse_matrix(d["D"], "D")
    A = parse_matrix(d.get("A", []), "A")
    m = A.shape[0]
    B = parse_matrix(d["B"], "B") if m else np.zeros((0, D.shape[1]))
    C = parse_matrix(d["C"], "C") if m else np.zeros((D.shape[0], 0))
    return StateSpace(A, B, C, D)


def equalizer_to_dict(eq) -> dict:
    return {
        "format": "passive-eq/equalizer",
        "gamma2": eq.gamma2,
        "lambda2": eq.lambda2,
        "blocks": {k: statespace_to_dict(v) for k, v in eq.blocks().items()},
    }


def zpk_entry(entry: dict) -> StateSpace:
    """SISO system from ``{"gain": [re, im], "num": [[sign, c], ...], "den": [...]}``."""

    def roots(factors):
        out = []
        for sign, c in factors:
            c = _scalar(c)
            if sign == "+":
                out.append(-c)
            elif sign == "-":
                out.append(c)
            else:
                raise ConfigError(f"factor sign must be '+' or '-', got {sign!r}")
        return out

    return lti.zpk_siso(roots(entry.get("num", [])), roots(entry.get("den", [])), _scalar(entry["gain"]))


def load_equalizer(path):
    """:class:`~passive_eq.synth.Equalizer` from either equalizer file format."""
    from .synth import Equalizer

    d = json.loads(Path(path).read_text())
    fmt = d.get("format")
    blocks = d.get("blocks", {})
    if set(blocks) != {"H11", "H12", "H21", "H22"}:
        raise ConfigError("equalizer file must define blocks H11, H12, H21, H22")
    if fmt == "passive-eq/equalizer":
        ss = {k: statespace_from_dict(v) for k, v in blocks.items()}
    elif fmt == "passive-eq/zpk-equalizer":
        ss = {k: lti.from_entries([[zpk_entry(e) for e in row] for row in v]) for k, v in blocks.items()}
    else:
        raise ConfigError(f"unknown equalizer format {fmt!r}")
    return Equalizer(ss["H11"], ss["H12"], ss["H21"], ss["H22"],
                     float(d["gamma2"]), float(d.get("lambda2", 0.0)))


# ---------------------------------------------------------------- CSV


def write_sweep_csv(path, columns: dict) -> None:
    """Write equal-length columns; ``omega`` must come first and be strictly increasing."""
    names = list(columns)
    if not names or names[0] != "omega":
        raise ValueError("first column must be omega")
    om = np.asarray(columns["omega"], dtype=float)
    if np.any(np.diff(om) <= 0):
        raise ValueError("omega must be strictly increasing")
    cols = [np.broadcast_to(np.asarray(columns[k], dtype=float), om.shape) for k in names]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for row in zip(*cols):
            w.writerow([_fmt(float(x)) for x in row])


def read_sweep_csv(path) -> dict:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.array([[float(x) for x in r] for r in body]) if body else np.zeros((0, len(header)))
    return {h: data[:, i] for i, h in enumerate(header)}
