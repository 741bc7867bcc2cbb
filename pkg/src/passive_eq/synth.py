"""End-to-end equalizer synthesis and verification.

The pipeline: choose ``lambda^2``, factor ``Phi_lambda``, minimize the PSD
bound over ``(X1, Y1)``, recover ``H11``, complete it with the spectral
factors of ``I - H11 H11^H`` and ``I - H11^H H11``, cancel the right
half-plane poles of the remaining blocks with an all-pass ``U`` and assemble
the paraunitary filter ``H = [[H11, H12], [H21, H22]]``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import lti, sdp, spectral
from .channel import (
    PassiveChannel,
    check_condition21,
    check_realizability,
    condition21_threshold,
    difference_psd,
    error_psd,
    make_phi_lambda,
    select_lambda2,
)
from .lti import StateSpace

__all__ = [
    "SynthesisError",
    "SynthOptions",
    "Equalizer",
    "SynthesisReport",
    "VerificationReport",
    "HardwareRealization",
    "build_allpass_U",
    "assemble",
    "complete_equalizer",
    "synthesize",
    "verify",
    "paraunitarity_residual",
    "realize_scalar_hardware",
    "hardware_network",
]

log = logging.getLogger(__name__)

PARAUNITARY_TOL = 1e-8


class SynthesisError(Exception):
    """Failure of one pipeline stage; ``stage`` names it."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass(frozen=True)
class SynthOptions:
    margin: float = 0.01
    lambda2: float | None = None
    omegas: np.ndarray | None = None
    use_cap: bool = True
    solver_tol: float = 1e-7


@dataclass(frozen=True)
class Equalizer:
    H11: StateSpace
    H12: StateSpace
    H21: StateSpace
    H22: StateSpace
    gamma2: float
    lambda2: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def H(self) -> StateSpace:
        return assemble(self.H11, self.H12, self.H21, self.H22)

    def blocks(self) -> dict:
        return {"H11": self.H11, "H12": self.H12, "H21": self.H21, "H22": self.H22}


@dataclass(frozen=True)
class SynthesisReport:
    gamma_bar2_star: float
    gamma_bar2: float
    gamma2: float
    lambda2: float
    condition21_holds: bool
    theta: float | None
    gamma0_2: float  # largest gamma^2 with the low-SNR condition (0 if none)
    capped: bool
    contraction_retry: bool
    factor_residual: float
    bounds_collapse: bool  # all relaxation values coincide when the condition holds

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class VerificationReport:
    omegas: np.ndarray
    pe_max: np.ndarray
    pyu_max: np.ndarray | None
    pmyu_max: np.ndarray | None
    gamma2: float
    sup_pe: float
    paraunitarity: float  # max of both orders
    blocks_stable: dict
    hinf_h11: float
    passed: bool
    failures: tuple

    def to_dict(self) -> dict:
        return {
            "gamma2": self.gamma2,
            "sup_pe": self.sup_pe,
            "paraunitarity_residual": self.paraunitarity,
            "blocks_stable": dict(self.blocks_stable),
            "hinf_H11": self.hinf_h11,
            "passed": self.passed,
            "failures": list(self.failures),
        }


# ---------------------------------------------------------------- building blocks


def build_allpass_U(poles, r: int) -> StateSpace:
    """``prod_k (s - p_k)/(s + p_k^*) * I_r`` for poles strictly in the right half-plane."""
    poles = [complex(p) for p in poles]
    for p in poles:
        if p.real <= 0:
            raise ValueError(f"all-pass pole {p} is not in the open right half-plane")
    if not poles:
        return lti.gain(np.eye(r))
    sections = [
        StateSpace([[-p.conjugate()]], [[np.sqrt(2.0 * p.real)]], [[-np.sqrt(2.0 * p.real)]], [[1.0]])
        for p in poles
    ]
    scalar = lti.compose("series", sections)
    return lti.compose("diagonal", [scalar] * r)


def assemble(H11, H12, H21, H22) -> StateSpace:
    return lti.from_entries([[H11, H12], [H21, H22]])


def paraunitarity_residual(H: StateSpace, omegas) -> float:
    """``sup_w max(||H H^H - I||, ||H^H H - I||)`` on the grid and at infinity."""
    v = lti.freqresp(H, omegas).values
    v = np.concatenate([v, H.D[None]], axis=0)
    vh = np.conj(np.swapaxes(v, 1, 2))
    p, q = H.shape
    r1 = np.linalg.norm(v @ vh - np.eye(p), ord=2, axis=(1, 2)).max()
    r2 = np.linalg.norm(vh @ v - np.eye(q), ord=2, axis=(1, 2)).max()
    return float(max(r1, r2))


def _drop_unstable_residue(sys: StateSpace, omegas, tol: float = 1e-9) -> StateSpace:
    """Remove an antistable part left over from inexact pole cancellation."""
    if sys.is_stable():
        return sys
    stable, anti = lti.additive_split(sys)
    mag = np.linalg.norm(lti.freqresp(anti, omegas).values, ord=2, axis=(1, 2)).max()
    if mag > tol:
        raise lti.UnstableSystemError(
            f"all-pass completion left unstable poles (residue {mag:.3e})"
        )
    return stable


def complete_equalizer(H11: StateSpace, omegas=None) -> tuple[StateSpace, StateSpace, StateSpace, dict]:
    """``(H12, H21, H22)`` making ``[[H11, H12], [H21, H22]]`` paraunitary.

    Returns the blocks and a dictionary with the intermediate factors.
    """
    om = lti.default_grid(H11) if omegas is None else omegas
    zf = spectral.z_factors(H11, om)
    inv = spectral.right_inverse_analytic(zf.H21tilde)
    X = lti.minreal(lti.para_adjoint(H11 @ inv))
    scale = max(np.abs(X.poles()).max(initial=0.0), 1e-300)
    unstable = [p for p in X.poles() if p.real > 1e-9 * scale]
    U = build_allpass_U(unstable, zf.r)
    H21 = lti.minreal(U @ zf.H21tilde)
    UX = _drop_unstable_residue(U @ X, om)
    H22 = _drop_unstable_residue(lti.minreal(-(UX @ zf.H12)), om)
    info = {"z": zf, "inverse": inv, "X": X, "U": U, "allpass_poles": unstable}
    return zf.H12, H21, H22, info


# ---------------------------------------------------------------- verification


def verify(eq: Equalizer, ch: PassiveChannel, omegas=None) -> VerificationReport:
    """Recompute the guarantees of an equalizer on a frequency grid."""
    om = (
        lti.default_grid(ch.ss, *eq.blocks().values()) if omegas is None else np.asarray(omegas, dtype=float)
    )
    pe = error_psd(ch, eq.H11, om).max_eig()
    pyu = pmyu = None
    if ch.n_y == ch.n:
        pyu = difference_psd(ch, 1.0, om).max_eig()
        pmyu = difference_psd(ch, -1.0, om).max_eig()
    stable = {k: v.is_stable() for k, v in eq.blocks().items()}
    pres = paraunitarity_residual(eq.H, om)
    hinf = lti.hinf_norm(eq.H11) if stable["H11"] else float("inf")
    sup_pe = float(pe.max())
    failures = []
    if not pres <= PARAUNITARY_TOL:
        failures.append(f"paraunitarity residual {pres:.3e} > {PARAUNITARY_TOL:.0e}")
    if not sup_pe < eq.gamma2:
        failures.append(f"sup P_e {sup_pe:.6g} >= gamma^2 {eq.gamma2:.6g}")
    if not all(stable.values()):
        failures.append("unstable blocks: " + ", ".join(k for k, v in stable.items() if not v))
    if not hinf < 1.0:
        failures.append(f"||H11||_inf = {hinf:.6g} >= 1")
    return VerificationReport(om, pe, pyu, pmyu, eq.gamma2, sup_pe, pres, stable, hinf,
                              not failures, tuple(failures))


# ---------------------------------------------------------------- pipeline


def _stage(name):
    def wrap(fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except SynthesisError:
            raise
        except (lti.LtiError, ValueError, np.linalg.LinAlgError) as exc:
            raise SynthesisError(name, str(exc)) from exc

    return wrap


def synthesize(ch: PassiveChannel, options: SynthOptions | None = None) -> tuple[Equalizer, SynthesisReport]:
    """Run the full synthesis for ``ch``; every returned equalizer has been verified."""
    opt = options or SynthOptions()
    if opt.margin <= 0:
        raise ValueError("margin must be positive")
    om = ch.grid() if opt.omegas is None else np.asarray(opt.omegas, dtype=float)

    rep = check_realizability(ch, om)
    if not rep.passed:
        raise SynthesisError("check", "channel is not physically realizable: " + "; ".join(rep.failures))

    lambda2 = opt.lambda2 if opt.lambda2 is not None else _stage("lambda")(select_lambda2, ch, om)
    phi = make_phi_lambda(ch, lambda2)
    factor = _stage("factor")(spectral.factor_phi, phi, om)
    blocks = spectral.partition_factor(factor, ch.n_y, ch.n)

    gamma0_2 = condition21_threshold(ch, om)
    cap = gamma0_2 + lambda2 if (opt.use_cap and gamma0_2 > 0) else None
    capped = cap is not None
    try:
        gres = sdp.gamma_sdp(blocks, lambda2, gamma_cap2=cap, margin=opt.margin, tol=opt.solver_tol)
    except sdp.SdpError:
        if cap is None:
            raise SynthesisError("sdp", "bound minimization failed") from None
        log.info("bound minimization infeasible under cap %.6g; retrying uncapped", cap)
        capped = False
        gres = _stage("sdp")(sdp.gamma_sdp, blocks, lambda2, None, opt.margin, tol=opt.solver_tol)
    gamma2 = gres.gamma_bar2 - lambda2
    c21 = check_condition21(ch, gamma2, omegas=om)

    H11 = _stage("recover")(
        sdp.reconstruct_K, blocks, gres.gamma_bar2, gres.X1, gres.Y1, tol=opt.solver_tol
    )
    retried = False
    if not lti.hinf_norm(H11) < 1.0:
        retried = True
        log.info("recovered H11 not contractive; retrying with feedthrough contraction")
        no_guarantee = "recovered H11 is not contractive" + (
            " although the low-SNR condition holds" if c21.holds else " and the low-SNR condition does not hold"
        )
        try:
            H11 = sdp.reconstruct_K(
                blocks, gres.gamma_bar2, gres.X1, gres.Y1, contraction=True, tol=opt.solver_tol
            )
        except sdp.SdpError as exc:
            raise SynthesisError("recover", f"{no_guarantee}; contraction retry failed: {exc}") from exc
        if not lti.hinf_norm(H11) < 1.0:
            raise SynthesisError("recover", no_guarantee)

    H12, H21, H22, info = _stage("complete")(complete_equalizer, H11, om)
    eq = Equalizer(H11, H12, H21, H22, gamma2, lambda2)
    ver = verify(eq, ch, om)
    zf = info["z"]
    diag = {
        "paraunitarity_residual": ver.paraunitarity,
        "hinf_H11": ver.hinf_h11,
        "sup_pe": ver.sup_pe,
        "condition21_theta": c21.theta,
        "z1_residual": zf.residual_z1,
        "z2_residual": zf.residual_z2,
        "allpass_poles": [complex(p) for p in info["allpass_poles"]],
        "inverse_poles": [complex(p) for p in info["inverse"].poles()],
    }
    eq = Equalizer(H11, H12, H21, H22, gamma2, lambda2, diag)
    if not ver.passed:
        raise SynthesisError("verify", "; ".join(ver.failures))
    report = SynthesisReport(
        gamma_bar2_star=gres.gamma_bar2_star,
        gamma_bar2=gres.gamma_bar2,
        gamma2=gamma2,
        lambda2=lambda2,
        condition21_holds=c21.holds,
        theta=c21.theta,
        gamma0_2=gamma0_2,
        capped=capped,
        contraction_retry=retried,
        factor_residual=factor.residual,
        bounds_collapse=c21.holds,
    )
    return eq, report


# ---------------------------------------------------------------- scalar hardware


@dataclass(frozen=True)
class HardwareRealization:
    """Beamsplitter pair and cavity implementing a first-order scalar equalizer."""

    eta1: float
    xi1: float
    eta2: float
    xi2: float
    kappa1: float | None = None


def realize_scalar_hardware(a: float, b: float, kappa1: float | None = None) -> HardwareRealization:
    """Coefficients for ``H11 = a (s + b k1 + i W)/(s + k1 + i W)`` as beamsplitter-cavity-beamsplitter."""
    if not (a * a < 1 and a * a * b * b < 1):
        raise ValueError("need a^2 < 1 and a^2 b^2 < 1")
    root = np.sqrt((1 - a * a * b * b) * (1 - a * a))
    eta1 = -np.sqrt(max((1 + a * a * b - root) / 2, 0.0))
    xi1 = np.sqrt(max((1 - a * a * b + root) / 2, 0.0))
    eta2 = -np.sqrt(max((1 - a * a * b - root) / 2, 0.0))
    xi2 = np.sqrt(max((1 + a * a * b + root) / 2, 0.0))
    return HardwareRealization(float(eta1), float(xi1), float(eta2), float(xi2), kappa1)


def hardware_network(hw: HardwareRealization, Omega: float) -> StateSpace:
    """Transfer matrix from ``(y, z)`` to ``(u_hat, z_hat)`` of the two-beamsplitter cavity network."""
    from .channel import cavity

    if hw.kappa1 is None:
        raise ValueError("cavity rate kappa1 is required")
    first = lti.gain([[hw.xi1, hw.eta1], [hw.eta1, -hw.xi1]])
    second = lti.gain([[hw.eta2, hw.xi2], [hw.xi2, -hw.eta2]])
    return second @ cavity(2, 0, hw.kappa1, Omega) @ first
