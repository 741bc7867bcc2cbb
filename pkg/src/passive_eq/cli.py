"""Command-line front end: ``passive-eq <command> --channel config.json``.

Commands and artifacts (written to ``--out``, default ``.``):

``check``
    ``check.json`` with the physical-realizability residuals.
``factor``
    ``factor.json`` with the spectral factor realization and its residual.
``synth``
    ``equalizer.json`` and ``synth_report.json``.
``verify``
    ``verify.csv`` (columns ``omega, maxeig_Pe, maxeig_Pyu, maxeig_Pmyu,
    gamma2``) and ``verify.json``.  Uses ``--equalizer`` if given, otherwise
    synthesizes first.
``psd``
    ``psd.csv`` (columns ``omega, maxeig_Pe``) for ``--equalizer``.
``baseline``
    ``baseline.json`` with the pointwise bound and its samples.

Exit status is 0 on success, 1 when a pipeline stage fails and 2 for usage
or config errors; failures print ``error: [stage] message``.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import lti, sdp, spectral
from .channel import (
    PassiveChannel,
    check_realizability,
    difference_psd,
    error_psd,
    make_phi_lambda,
    select_lambda2,
)
from .io import (
    ConfigError,
    equalizer_to_dict,
    load_channel,
    load_equalizer,
    statespace_to_dict,
    write_json,
    write_sweep_csv,
)
from .synth import SynthesisError, SynthOptions, synthesize, verify

__all__ = ["RunConfig", "GridSpec", "parse_grid", "run", "main"]

COMMANDS = ("check", "factor", "synth", "verify", "psd", "baseline")
MIN_GRID = 11
BASELINE_POINTS = 21

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridSpec:
    count: int
    lo: float
    hi: float

    def points(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.count)


@dataclass(frozen=True)
class RunConfig:
    command: str
    channel_path: Path
    margin: float = 0.01
    lambda2: float | None = None
    grid: GridSpec | None = None
    out_dir: Path = Path(".")
    solver_tol: float = 1e-7
    equalizer_path: Path | None = None

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if not self.margin > 0:
            raise ConfigError("margin must be positive")
        if self.lambda2 is not None and self.lambda2 < 0:
            raise ConfigError("lambda2 must be nonnegative")
        if not self.solver_tol > 0:
            raise ConfigError("tol must be positive")
        if not Path(self.channel_path).is_file():
            raise ConfigError(f"channel config {self.channel_path} not found")
        if self.equalizer_path is not None and not Path(self.equalizer_path).is_file():
            raise ConfigError(f"equalizer file {self.equalizer_path} not found")
        if self.command == "psd" and self.equalizer_path is None:
            raise ConfigError("psd needs --equalizer")


def parse_grid(text: str) -> GridSpec:
    """``"n,min,max"`` with ``n >= 11`` and ``min < max``."""
    try:
        n, lo, hi = text.split(",")
        spec = GridSpec(int(n), float(lo), float(hi))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be n,min,max; got {text!r}") from None
    if spec.count < MIN_GRID:
        raise argparse.ArgumentTypeError(f"grid needs at least {MIN_GRID} points")
    if not spec.lo < spec.hi:
        raise argparse.ArgumentTypeError("grid needs min < max")
    return spec


# ---------------------------------------------------------------- commands


def _grid(cfg: RunConfig, *systems) -> np.ndarray:
    if cfg.grid is not None:
        return cfg.grid.points()
    return np.unique(lti.default_grid(*systems))


def _cmd_check(cfg, ch, raw, out):
    rep = check_realizability(ch, _grid(cfg, ch.ss))
    write_json(out / "check.json", {"channel": raw, "realizability": rep.to_dict()})
    if not rep.passed:
        detail = ", ".join(f"{k} = {rep.residuals.get(k, rep.grid_residual):.3e}" for k in rep.failures)
        raise SynthesisError("check", f"physical realizability residual too large: {detail}")


def _cmd_factor(cfg, ch, raw, out):
    om = _grid(cfg, ch.ss)
    try:
        lambda2 = cfg.lambda2 if cfg.lambda2 is not None else select_lambda2(ch, om)
        f = spectral.factor_phi(make_phi_lambda(ch, lambda2), om)
    except (lti.LtiError, ValueError) as exc:
        raise SynthesisError("factor", str(exc)) from exc
    write_json(out / "factor.json", {
        "channel": raw,
        "lambda2": f.lambda2,
        "residual": f.residual,
        "factor": statespace_to_dict(f.ss),
    })


def _synth(cfg, ch):
    opts = SynthOptions(
        margin=cfg.margin,
        lambda2=cfg.lambda2,
        omegas=None if cfg.grid is None else cfg.grid.points(),
        solver_tol=cfg.solver_tol,
    )
    return synthesize(ch, opts)


def _cmd_synth(cfg, ch, raw, out):
    eq, rep = _synth(cfg, ch)
    write_json(out / "equalizer.json", equalizer_to_dict(eq))
    diag = dict(eq.diagnostics)
    write_json(out / "synth_report.json", {
        "channel": raw,
        "options": {"margin": cfg.margin, "lambda2": cfg.lambda2, "tol": cfg.solver_tol},
        "report": rep.to_dict(),
        "diagnostics": diag,
    })
    print(f"gamma^2 = {rep.gamma2:.6f} (bound minimum {rep.gamma_bar2_star:.6f}, lambda^2 = {rep.lambda2:g})")


def _pe_sweep(ch, eq, om):
    return error_psd(ch, eq.H11, om).max_eig()


def _cmd_verify(cfg, ch, raw, out):
    eq = load_equalizer(cfg.equalizer_path) if cfg.equalizer_path else _synth(cfg, ch)[0]
    om = _grid(cfg, ch.ss, *eq.blocks().values())
    ver = verify(eq, ch, om)
    nan = np.full(om.shape, np.nan)
    write_sweep_csv(out / "verify.csv", {
        "omega": om,
        "maxeig_Pe": ver.pe_max,
        "maxeig_Pyu": nan if ver.pyu_max is None else ver.pyu_max,
        "maxeig_Pmyu": nan if ver.pmyu_max is None else ver.pmyu_max,
        "gamma2": np.full(om.shape, eq.gamma2),
    })
    write_json(out / "verify.json", {"channel": raw, "verification": ver.to_dict()})
    print(f"sup P_e = {ver.sup_pe:.6f}, gamma^2 = {eq.gamma2:.6f}, "
          f"paraunitarity residual = {ver.paraunitarity:.3e}")
    if not ver.passed:
        raise SynthesisError("verify", "; ".join(ver.failures))


def _cmd_psd(cfg, ch, raw, out):
    eq = load_equalizer(cfg.equalizer_path)
    om = _grid(cfg, ch.ss, eq.H11)
    write_sweep_csv(out / "psd.csv", {"omega": om, "maxeig_Pe": _pe_sweep(ch, eq, om)})


def _baseline_grid(ch: PassiveChannel) -> np.ndarray:
    p = ch.ss.poles()
    wmax = float(np.abs(p.imag).max()) if p.size else 1.0
    center = float(p.imag.mean()) if p.size else 0.0
    return np.linspace(center - 3 * wmax, center + 3 * wmax, BASELINE_POINTS)


def _cmd_baseline(cfg, ch, raw, out):
    om = cfg.grid.points() if cfg.grid is not None else _baseline_grid(ch)
    try:
        res = sdp.pointwise_bound(ch, om, tol=cfg.solver_tol)
    except (lti.LtiError, ValueError) as exc:
        raise SynthesisError("baseline", str(exc)) from exc
    write_json(out / "baseline.json", {
        "channel": raw,
        "nu2": res.nu2,
        "omega": res.omegas,
        "maxeig_Pe": res.pe_max,
        "H11_samples": res.H11_samples,
    })
    print(f"nu^2 = {res.nu2:.6f}")


_HANDLERS = {
    "check": _cmd_check,
    "factor": _cmd_factor,
    "synth": _cmd_synth,
    "verify": _cmd_verify,
    "psd": _cmd_psd,
    "baseline": _cmd_baseline,
}


def run(cfg: RunConfig) -> int:
    """Execute one command; returns the process exit status."""
    try:
        cfg.validate()
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        ch, raw = load_channel(cfg.channel_path)
        _HANDLERS[cfg.command](cfg, ch, raw, out)
    except ConfigError as exc:
        print(f"error: [config] {exc}", file=sys.stderr)
        return 2
    except SynthesisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (lti.LtiError, ValueError) as exc:
        print(f"error: [{cfg.command}] {exc}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="passive-eq", description="Coherent passive equalizer synthesis.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--channel", required=True, type=Path, help="channel config (JSON)")
    p.add_argument("--equalizer", type=Path, help="equalizer file for verify/psd")
    p.add_argument("--margin", type=float, default=0.01, help="near-optimality inflation (default 0.01)")
    p.add_argument("--lambda2", type=float, default=None, help="override the lambda^2 selection")
    p.add_argument("--grid", type=parse_grid, default=None, help="frequency grid n,min,max (rad/s)")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--tol", type=float, default=1e-7, help="solver feasibility tolerance")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    cfg = RunConfig(
        command=args.command,
        channel_path=args.channel,
        margin=args.margin,
        lambda2=args.lambda2,
        grid=args.grid,
        out_dir=args.out,
        solver_tol=args.tol,
        equalizer_path=args.equalizer,
    )
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
