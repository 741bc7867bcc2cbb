"""Spectral factors: ``Phi_lambda = Upsilon Upsilon^H`` and the completion factors of ``I - H11 H11^H``.

Both factorizations go through the stabilizing solution of an algebraic
Riccati equation, so the resulting factors are stable with stable zeros.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import lti
from .channel import PhiKernel
from .lti import RiccatiError, StateSpace

__all__ = [
    "FactorizationError",
    "NonContractiveError",
    "SpectralFactor",
    "FactorBlocks",
    "ZFactors",
    "upper_sqrt",
    "herm_sqrt",
    "factor_para_hermitian",
    "factor_phi",
    "partition_factor",
    "z_factors",
    "right_inverse_analytic",
]

ZINF_MIN_EIG = 1e-6


class FactorizationError(lti.LtiError):
    pass


class NonContractiveError(lti.LtiError):
    pass


def _h(M):
    return np.asarray(M).conj().T


def upper_sqrt(R) -> np.ndarray:
    """Upper-triangular ``U`` with positive diagonal and ``U U^H = R`` (``R`` positive definite)."""
    R = np.asarray(R, dtype=complex)
    R = 0.5 * (R + _h(R))
    J = np.eye(R.shape[0])[::-1]
    L = np.linalg.cholesky(J @ R @ J)
    return J @ L @ J


def herm_sqrt(R, inverse: bool = False) -> np.ndarray:
    """Hermitian square root (or inverse square root) of a positive definite matrix."""
    R = np.asarray(R, dtype=complex)
    w, V = np.linalg.eigh(0.5 * (R + _h(R)))
    if w.min() <= 0:
        raise FactorizationError("matrix is not positive definite")
    d = w ** (-0.5 if inverse else 0.5)
    return (V * d) @ _h(V)


@dataclass(frozen=True)
class SpectralFactor:
    """Stable square factor ``Upsilon`` of ``Phi_lambda`` with its grid residual."""

    ss: StateSpace
    lambda2: float
    residual: float


class FactorBlocks(NamedTuple):
    A: np.ndarray
    B: np.ndarray
    C1: np.ndarray
    C2: np.ndarray
    D1: np.ndarray
    D2: np.ndarray


def _relative_residual(F: StateSpace, target: StateSpace, omegas) -> float:
    fv = lti.freqresp(F, omegas).values
    tv = lti.freqresp(target, omegas).values
    prod = fv @ np.conj(np.swapaxes(fv, 1, 2))
    num = np.linalg.norm(prod - tv, ord=2, axis=(1, 2))
    den = np.maximum(np.linalg.norm(tv, ord=2, axis=(1, 2)), 1e-300)
    return float((num / den).max())


def factor_para_hermitian(phi: StateSpace, omegas=None) -> tuple[StateSpace, float]:
    """Stable, minimum-phase ``Y`` with ``Y Y^H = phi`` for ``phi(i w) > 0`` including infinity.

    ``phi`` is split as ``Z + Z^H`` with ``Z`` stable, and the factor is
    ``(I + C (sI - A)^{-1} F) U`` where ``U U^H = phi(i inf)`` is upper
    triangular and ``F`` comes from the stabilizing solution of the
    positive-real Riccati equation.  Returns the factor and its relative
    residual on the grid.
    """
    om = lti.default_grid(phi) if omegas is None else np.asarray(omegas, dtype=float)
    R = 0.5 * (phi.D + _h(phi.D))
    if np.linalg.eigvalsh(R)[0] <= 0:
        raise FactorizationError("kernel is not positive definite at infinity")
    U = upper_sqrt(R)
    if phi.nstates == 0:
        F = lti.gain(U)
        return F, _relative_residual(F, phi, om)
    w = lti.frequency_scale(phi)
    s = lti.scale_frequency(phi, w)
    stable, _ = lti.additive_split(s)
    A, B, C = stable.A, stable.B, stable.C
    Ri = np.linalg.inv(R)
    Ag = _h(A - B @ Ri @ C)
    try:
        P = lti.solve_riccati_stabilizing(Ag, _h(C), -R, B @ Ri @ _h(B))
    except RiccatiError as exc:
        raise FactorizationError(str(exc)) from exc
    F = (B - P @ _h(C)) @ Ri
    Y = StateSpace(A, F @ U, C, U)
    Y = lti.scale_frequency(lti.minreal(Y), 1.0 / w)
    return Y, _relative_residual(Y, phi, om)


def factor_phi(phi: PhiKernel, omegas=None, rtol: float = 1e-7) -> SpectralFactor:
    """Stable square spectral factor of ``Phi_lambda`` with upper-triangular feedthrough."""
    try:
        Y, res = factor_para_hermitian(phi.ss, omegas)
    except FactorizationError as exc:
        raise FactorizationError(
            f"spectral factorization failed at lambda2={phi.lambda2}: {exc}"
        ) from exc
    if not Y.is_stable():
        raise FactorizationError(f"factor at lambda2={phi.lambda2} is not stable")
    if res > rtol:
        raise FactorizationError(
            f"factor residual {res:.3e} exceeds {rtol:.1e} at lambda2={phi.lambda2}"
        )
    return SpectralFactor(Y, phi.lambda2, res)


def partition_factor(f: SpectralFactor | StateSpace, n_y: int, n: int) -> FactorBlocks:
    """Split the factor realization into the rows driving ``y`` and ``u``."""
    ss = f.ss if isinstance(f, SpectralFactor) else f
    if ss.noutputs != n_y + n:
        raise ValueError(f"factor has {ss.noutputs} rows, expected {n_y + n}")
    C, D = np.array(ss.C), np.array(ss.D)
    return FactorBlocks(np.array(ss.A), np.array(ss.B), C[:n_y], C[n_y:], D[:n_y], D[n_y:])


# ---------------------------------------------------------------- completion factors


@dataclass(frozen=True)
class ZFactors:
    """Factors with ``H12 H12^H = I - H11 H11^H`` and ``H21t^H H21t = I - H11^H H11``."""

    H12: StateSpace
    H21tilde: StateSpace
    Q12: np.ndarray
    Q21: np.ndarray
    L1: np.ndarray
    L2: np.ndarray
    Z1_inf: np.ndarray
    Z2_inf: np.ndarray
    residual_z1: float
    residual_z2: float

    @property
    def r(self) -> int:
        return self.H21tilde.noutputs


def _z_residuals(H11, H12, H21t, omegas) -> tuple[float, float]:
    h = lti.freqresp(H11, omegas).values
    a = lti.freqresp(H12, omegas).values
    b = lti.freqresp(H21t, omegas).values
    hH = np.conj(np.swapaxes(h, 1, 2))
    n, ny = H11.shape
    r1 = a @ np.conj(np.swapaxes(a, 1, 2)) - (np.eye(n) - h @ hH)
    r2 = np.conj(np.swapaxes(b, 1, 2)) @ b - (np.eye(ny) - hH @ h)
    return (
        float(np.linalg.norm(r1, ord=2, axis=(1, 2)).max()),
        float(np.linalg.norm(r2, ord=2, axis=(1, 2)).max()),
    )


def z_factors(H11: StateSpace, omegas=None, check_norm: bool = True) -> ZFactors:
    """Completion factors of a strictly contractive, stable ``H11 = (A, B, C, J)``.

    ``Q12`` and ``Q21`` are the stabilizing solutions of

        A Q + Q A^H + (Q C^H + B J^H) Z1^{-1} (Q C^H + B J^H)^H + B B^H = 0,
        Q A + A^H Q + (Q B + C^H J) Z2^{-1} (Q B + C^H J)^H + C^H C = 0,

    with ``Z1 = I - J J^H`` and ``Z2 = I - J^H J``.  Then
    ``H12 = -Z1^{1/2} - C (sI - A)^{-1} L1`` and
    ``H21t = Z2^{1/2} - L2 (sI - A)^{-1} B``.
    """
    if not H11.is_stable():
        raise lti.UnstableSystemError("H11 must be stable")
    if check_norm:
        nrm = lti.hinf_norm(H11)
        if not nrm < 1.0:
            raise NonContractiveError(
                f"H11 is not strictly contractive (||H11||_inf = {nrm:.6g} >= 1)"
            )
    J = np.array(H11.D)
    n, ny = J.shape
    Z1 = np.eye(n) - J @ _h(J)
    Z2 = np.eye(ny) - _h(J) @ J
    for name, Z in (("Z1(i inf)", Z1), ("Z2(i inf)", Z2)):
        if np.linalg.eigvalsh(0.5 * (Z + _h(Z)))[0] < ZINF_MIN_EIG:
            raise NonContractiveError(f"{name} is nearly singular (min eigenvalue < {ZINF_MIN_EIG})")
    om = lti.default_grid(H11) if omegas is None else np.asarray(omegas, dtype=float)
    w = lti.frequency_scale(H11)
    s = lti.scale_frequency(H11, w)
    A, B, C = s.A, s.B, s.C
    m = A.shape[0]
    Z1i, Z2i = np.linalg.inv(Z1), np.linalg.inv(Z2)
    if m:
        Q12 = lti.solve_riccati_stabilizing(
            _h(A + B @ _h(J) @ Z1i @ C), _h(C), -Z1, B @ (np.eye(ny) + _h(J) @ Z1i @ J) @ _h(B)
        )
        Q21 = lti.solve_riccati_stabilizing(
            A + B @ Z2i @ _h(J) @ C, B, -Z2, _h(C) @ (np.eye(n) + J @ Z2i @ _h(J)) @ C
        )
    else:
        Q12 = np.zeros((0, 0), dtype=complex)
        Q21 = np.zeros((0, 0), dtype=complex)
    L1 = -(Q12 @ _h(C) + B @ _h(J)) @ herm_sqrt(Z1, inverse=True)
    L2 = herm_sqrt(Z2, inverse=True) @ _h(Q21 @ B + _h(C) @ J)
    H12 = lti.scale_frequency(StateSpace(A, L1, -C, -herm_sqrt(Z1)), 1.0 / w)
    H21t = lti.scale_frequency(StateSpace(A, B, -L2, herm_sqrt(Z2)), 1.0 / w)
    closed = A + B @ Z2i @ _h(Q21 @ B + _h(C) @ J)
    if not lti.is_hurwitz(closed):
        raise RiccatiError("zeros of the right completion factor are not stable")
    r1, r2 = _z_residuals(H11, H12, H21t, om)
    sq = np.sqrt(w)
    return ZFactors(H12, H21t, Q12, Q21, L1 * sq, L2 * sq, Z1, Z2, r1, r2)


def right_inverse_analytic(H21t: StateSpace) -> StateSpace:
    """Stable inverse of a square factor with invertible feedthrough and stable zeros."""
    p, q = H21t.shape
    if p != q:
        raise ValueError("only square completion factors are supported")
    inv = lti.inverse(H21t)
    if not inv.is_stable():
        raise FactorizationError("completion factor has zeros on or right of the imaginary axis")
    return inv
