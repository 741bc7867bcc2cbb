"""Complex state-space algebra for continuous-time rational transfer matrices.

All systems are complex-valued: ``G(s) = D + C (sI - A)^{-1} B``.  Nothing here
assumes conjugate symmetry of the spectrum, since the optical systems of
interest are detuned (poles at ``-(kappa + i*Omega)``).

Frequency scaling
-----------------
Realizations coming from optics have rates of order 1e8-1e9 rad/s.  Routines
that are sensitive to scaling (Riccati, H-infinity norm, staircase reduction)
work on the realization ``G(w s)`` with ``w`` the largest pole magnitude and map
the result back.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as sla

__all__ = [
    "LtiError",
    "PoleEvaluationError",
    "UnstableSystemError",
    "RiccatiError",
    "StateSpace",
    "FrequencySweep",
    "gain",
    "evaluate",
    "freqresp",
    "para_adjoint",
    "bar_adjoint",
    "compose",
    "inverse",
    "scale_frequency",
    "frequency_scale",
    "is_hurwitz",
    "hinf_norm",
    "minreal",
    "additive_split",
    "solve_lyapunov",
    "solve_riccati_stabilizing",
    "riccati_residual",
    "default_grid",
    "zpk_siso",
    "from_entries",
]

# eigenvalues with |Re| below this fraction of the matrix scale count as imaginary-axis
AXIS_TOL = 1e-9


class LtiError(Exception):
    """Base class for state-space errors."""


class PoleEvaluationError(LtiError):
    """Raised when a transfer function is evaluated at one of its poles."""

    def __init__(self, s: complex):
        super().__init__(f"evaluation at a pole: s = {s!r}")
        self.s = s


class UnstableSystemError(LtiError):
    pass


class RiccatiError(LtiError):
    pass


def _cmat(x, shape=None) -> np.ndarray:
    arr = np.array(x, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1) if shape is None else arr.reshape(shape)
    if shape is not None and arr.size == 0:
        arr = arr.reshape(shape)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class StateSpace:
    """Realization ``(A, B, C, D)`` of ``G(s) = D + C (sI - A)^{-1} B``.

    Arrays are stored as read-only complex matrices.  A pure gain has
    ``A`` of shape ``(0, 0)``.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        D = _cmat(self.D)
        p, q = D.shape
        A = np.array(self.A, dtype=complex)
        m = 0 if A.size == 0 else A.shape[0]
        A = _cmat(A, (m, m))
        B = _cmat(self.B, (m, q))
        C = _cmat(self.C, (p, m))
        if A.shape != (m, m) or B.shape != (m, q) or C.shape != (p, m):
            raise ValueError(
                f"inconsistent realization: A{A.shape} B{B.shape} C{C.shape} D{D.shape}"
            )
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)

    @property
    def nstates(self) -> int:
        return self.A.shape[0]

    @property
    def ninputs(self) -> int:
        return self.D.shape[1]

    @property
    def noutputs(self) -> int:
        return self.D.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.D.shape

    def poles(self) -> np.ndarray:
        if self.nstates == 0:
            return np.zeros(0, dtype=complex)
        return np.linalg.eigvals(self.A)

    def is_stable(self) -> bool:
        return is_hurwitz(self.A)

    def __call__(self, s: complex) -> np.ndarray:
        return evaluate(self, s)

    def __matmul__(self, other: "StateSpace") -> "StateSpace":
        return compose("series", [self, other])

    def __add__(self, other: "StateSpace") -> "StateSpace":
        return compose("parallel", [self, other])

    def __neg__(self) -> "StateSpace":
        return StateSpace(self.A, self.B, -self.C, -self.D)

    def __sub__(self, other: "StateSpace") -> "StateSpace":
        return self + (-other)

    def __mul__(self, k) -> "StateSpace":
        k = complex(k)
        return StateSpace(self.A, self.B, k * self.C, k * self.D)

    __rmul__ = __mul__

    def select(self, rows=None, cols=None) -> "StateSpace":
        """Sub-block of the transfer matrix (same state)."""
        rows = slice(None) if rows is None else rows
        cols = slice(None) if cols is None else cols
        return StateSpace(self.A, self.B[:, cols], self.C[rows, :], self.D[rows, cols])


@dataclass(frozen=True)
class FrequencySweep:
    """Matrix values sampled on a strictly increasing grid of angular frequencies."""

    omegas: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        om = np.asarray(self.omegas, dtype=float)
        vals = np.asarray(self.values)
        if vals.ndim == 1:
            vals = vals.reshape(-1, 1, 1)
        if om.ndim != 1 or len(om) != len(vals):
            raise ValueError("omegas and values must have the same length")
        if len(om) > 1 and np.any(np.diff(om) <= 0):
            raise ValueError("omegas must be strictly increasing")
        object.__setattr__(self, "omegas", om)
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.omegas)

    def max_eig(self) -> np.ndarray:
        """Largest eigenvalue at each frequency (values assumed Hermitian)."""
        herm = 0.5 * (self.values + np.conj(np.swapaxes(self.values, 1, 2)))
        return np.linalg.eigvalsh(herm)[:, -1]

    def min_eig(self) -> np.ndarray:
        herm = 0.5 * (self.values + np.conj(np.swapaxes(self.values, 1, 2)))
        return np.linalg.eigvalsh(herm)[:, 0]

    def max_sv(self) -> np.ndarray:
        return np.linalg.svd(self.values, compute_uv=False)[:, 0]


def gain(D) -> StateSpace:
    """Static system with transfer matrix ``D``."""
    D = _cmat(D)
    p, q = D.shape
    return StateSpace(np.zeros((0, 0)), np.zeros((0, q)), np.zeros((p, 0)), D)


def evaluate(sys: StateSpace, s: complex) -> np.ndarray:
    """``D + C (sI - A)^{-1} B``; raises :class:`PoleEvaluationError` at a pole."""
    s = complex(s)
    if sys.nstates == 0:
        return np.array(sys.D)
    M = s * np.eye(sys.nstates) - sys.A
    scale = max(np.linalg.norm(sys.A, 2), abs(s), 1e-300)
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[-1] <= 1e-13 * scale:
        raise PoleEvaluationError(s)
    return sys.D + sys.C @ np.linalg.solve(M, sys.B)


def freqresp(sys: StateSpace, omegas) -> FrequencySweep:
    """Evaluate ``sys`` at ``s = i*omega`` for every omega."""
    om = np.asarray(omegas, dtype=float)
    N = len(om)
    p, q = sys.shape
    if sys.nstates == 0:
        return FrequencySweep(om, np.broadcast_to(sys.D, (N, p, q)).copy())
    m = sys.nstates
    M = 1j * om[:, None, None] * np.eye(m)[None] - sys.A[None]
    X = np.linalg.solve(M, np.broadcast_to(sys.B, (N, m, q)))
    return FrequencySweep(om, sys.D[None] + sys.C[None] @ X)


def para_adjoint(sys: StateSpace) -> StateSpace:
    """Realization of ``G(s)^H = G(-s*)^dagger``."""
    H = lambda M: M.conj().T  # noqa: E731
    return StateSpace(-H(sys.A), H(sys.C), -H(sys.B), H(sys.D))


def bar_adjoint(sys: StateSpace) -> StateSpace:
    """Realization of ``G(s*)^dagger``; the state matrix is ``A^dagger``."""
    H = lambda M: M.conj().T  # noqa: E731
    return StateSpace(H(sys.A), H(sys.C), H(sys.B), H(sys.D))


def _blkdiag(*mats) -> np.ndarray:
    return sla.block_diag(*[np.asarray(M, dtype=complex) for M in mats])


def _series2(P1: StateSpace, P2: StateSpace) -> StateSpace:
    # transfer product P1(s) P2(s)
    if P1.ninputs != P2.noutputs:
        raise ValueError(f"series: {P1.shape} @ {P2.shape} mismatch")
    m1, m2 = P1.nstates, P2.nstates
    A = np.block([[P1.A, P1.B @ P2.C], [np.zeros((m2, m1)), P2.A]])
    B = np.vstack([P1.B @ P2.D, P2.B])
    C = np.hstack([P1.C, P1.D @ P2.C])
    return StateSpace(A, B, C, P1.D @ P2.D)


def _parallel2(P1: StateSpace, P2: StateSpace) -> StateSpace:
    if P1.shape != P2.shape:
        raise ValueError(f"parallel: {P1.shape} + {P2.shape} mismatch")
    return StateSpace(
        _blkdiag(P1.A, P2.A), np.vstack([P1.B, P2.B]), np.hstack([P1.C, P2.C]), P1.D + P2.D
    )


def _vertical2(P1: StateSpace, P2: StateSpace) -> StateSpace:
    if P1.ninputs != P2.ninputs:
        raise ValueError(f"vertical: input dims {P1.ninputs} != {P2.ninputs}")
    return StateSpace(
        _blkdiag(P1.A, P2.A), np.vstack([P1.B, P2.B]), _blkdiag(P1.C, P2.C), np.vstack([P1.D, P2.D])
    )


def _horizontal2(P1: StateSpace, P2: StateSpace) -> StateSpace:
    if P1.noutputs != P2.noutputs:
        raise ValueError(f"horizontal: output dims {P1.noutputs} != {P2.noutputs}")
    return StateSpace(
        _blkdiag(P1.A, P2.A), _blkdiag(P1.B, P2.B), np.hstack([P1.C, P2.C]), np.hstack([P1.D, P2.D])
    )


def _diagonal2(P1: StateSpace, P2: StateSpace) -> StateSpace:
    return StateSpace(
        _blkdiag(P1.A, P2.A), _blkdiag(P1.B, P2.B), _blkdiag(P1.C, P2.C), _blkdiag(P1.D, P2.D)
    )


_COMPOSERS = {
    "series": _series2,
    "parallel": _parallel2,
    "vertical": _vertical2,
    "horizontal": _horizontal2,
    "diagonal": _diagonal2,
}


def compose(kind: str, parts: Sequence[StateSpace]) -> StateSpace:
    """Interconnect systems.

    ``series`` is the transfer-matrix product ``parts[0] @ parts[1] @ ...``
    (the signal passes through the last part first); its state matrix is
    block upper triangular with the left factor's states first.  ``parallel``
    sums, ``vertical`` stacks outputs over a shared input, ``horizontal``
    concatenates inputs and sums outputs, ``diagonal`` is the block diagonal.
    """
    try:
        op = _COMPOSERS[kind]
    except KeyError:
        raise ValueError(f"unknown composition kind {kind!r}") from None
    parts = list(parts)
    if not parts:
        raise ValueError("compose needs at least one part")
    return reduce(op, parts)


def inverse(sys: StateSpace) -> StateSpace:
    """Inverse system for square ``sys`` with invertible feedthrough."""
    p, q = sys.shape
    if p != q:
        raise ValueError("inverse requires a square system")
    Di = np.linalg.inv(sys.D)
    return StateSpace(sys.A - sys.B @ Di @ sys.C, sys.B @ Di, -Di @ sys.C, Di)


def scale_frequency(sys: StateSpace, w: float) -> StateSpace:
    """Realization of ``G(w s)``: poles divided by ``w``, same responses rescaled in omega."""
    w = float(w)
    r = np.sqrt(w)
    return StateSpace(sys.A / w, sys.B / r, sys.C / r, sys.D)


def frequency_scale(*systems: StateSpace) -> float:
    """Largest pole magnitude over ``systems`` (1.0 for pure gains)."""
    mags = [np.abs(s.poles()).max() for s in systems if s.nstates > 0]
    w = max(mags) if mags else 1.0
    return w if w > 0 else 1.0


def is_hurwitz(A, tol: float = AXIS_TOL) -> bool:
    A = np.asarray(A, dtype=complex)
    if A.size == 0:
        return True
    ev = np.linalg.eigvals(A)
    scale = max(np.linalg.norm(A, 2), 1e-300)
    return bool(np.all(ev.real < -tol * scale))


# ---------------------------------------------------------------- H-infinity


def _hamiltonian_crossings(sys: StateSpace, gamma: float) -> np.ndarray | None:
    """Frequencies where ``gamma`` is a singular value of ``sys(i w)``.

    Returns ``None`` when the Hamiltonian test is numerically unusable.
    """
    A, B, C, D = sys.A, sys.B, sys.C, sys.D
    q = sys.ninputs
    R = gamma**2 * np.eye(q) - D.conj().T @ D
    try:
        Ri = np.linalg.inv(R)
    except np.linalg.LinAlgError:
        return None
    if np.linalg.cond(R) > 1e12:
        return None
    Ah = A + B @ Ri @ D.conj().T @ C
    H = np.block(
        [
            [Ah, B @ Ri @ B.conj().T],
            [-C.conj().T @ (np.eye(sys.noutputs) + D @ Ri @ D.conj().T) @ C, -Ah.conj().T],
        ]
    )
    ev = np.linalg.eigvals(H)
    scale = max(np.linalg.norm(H, 2), 1.0)
    on_axis = np.abs(ev.real) < 1e-7 * scale
    return np.sort(ev[on_axis].imag)


def _grid_norm(sys: StateSpace, lo: float, hi: float, n: int = 2001) -> tuple[float, float]:
    om = np.concatenate([np.linspace(lo, hi, n), -np.logspace(-3, 3, n // 4), np.logspace(-3, 3, n // 4)])
    om = np.unique(om)
    sv = freqresp(sys, om).max_sv()
    k = int(np.argmax(sv))
    return float(sv[k]), float(om[k])


def hinf_norm(sys: StateSpace, tol: float = 1e-8) -> float:
    """Supremum over ``omega`` (including infinity) of the largest singular value.

    Two-step bisection on the Hamiltonian imaginary-axis test: lower bounds come
    from evaluating the response at midpoints between crossing frequencies.  If
    the Hamiltonian becomes ill-conditioned the remaining refinement uses an
    adaptive frequency grid.
    """
    if not sys.is_stable():
        raise UnstableSystemError("hinf_norm requires a Hurwitz state matrix")
    dnorm = float(np.linalg.norm(sys.D, 2)) if sys.D.size else 0.0
    if sys.nstates == 0:
        return dnorm
    w = frequency_scale(sys)
    s = scale_frequency(sys, w)
    cands = [0.0] + list(-s.poles().imag)
    lb = max([dnorm] + [float(np.linalg.norm(evaluate(s, 1j * c), 2)) for c in cands])
    wpk = cands[int(np.argmax([np.linalg.norm(evaluate(s, 1j * c), 2) for c in cands]))]
    if lb == 0.0:
        return 0.0
    for _ in range(60):
        gamma = (1.0 + 2.0 * tol) * lb
        cross = _hamiltonian_crossings(s, gamma)
        if cross is None:
            break
        if len(cross) == 0:
            return float(0.5 * (lb + gamma))
        mids = list(0.5 * (cross[:-1] + cross[1:])) + list(cross)
        vals = [float(np.linalg.norm(evaluate(s, 1j * m), 2)) for m in mids]
        k = int(np.argmax(vals))
        if vals[k] <= lb:
            # crossings are numerical noise around the peak
            return float(lb)
        lb, wpk = vals[k], mids[k]
    # adaptive grid refinement around the best frequency so far
    span = 10.0 * max(1.0, np.abs(s.poles()).max())
    best, wbest = _grid_norm(s, -span, span)
    if lb > best:
        best, wbest = lb, wpk
    width = span / 100.0
    for _ in range(40):
        om = np.linspace(wbest - width, wbest + width, 201)
        sv = freqresp(s, om).max_sv()
        k = int(np.argmax(sv))
        if sv[k] > best:
            best, wbest = float(sv[k]), float(om[k])
        width /= 10.0
        if width < 1e-14:
            break
    return max(best, dnorm)


# ---------------------------------------------------------------- reduction


def _staircase(A, B, C, tol_abs):
    """Controllable part of ``(A, B, C)`` by orthogonal staircase reduction."""
    n = A.shape[0]
    A = A.copy()
    B = B.copy()
    C = C.copy()
    k = 0
    Bj = B
    while k < n:
        if Bj.size == 0:
            break
        U, sv, _ = np.linalg.svd(Bj, full_matrices=True)
        r = int(np.sum(sv > tol_abs))
        if r == 0:
            break
        P = np.eye(n, dtype=complex)
        P[k:, k:] = U
        A = P.conj().T @ A @ P
        B = P.conj().T @ B
        C = C @ P
        new = k + r
        Bj = A[new:, k:new]
        k = new
    return A[:k, :k], B[:k, :], C[:, :k]


def minreal(sys: StateSpace, tol: float = 1e-8) -> StateSpace:
    """Remove uncontrollable then unobservable states (staircase, SVD cutoff).

    The realization is frequency-scaled and rescaled so ``||B|| = ||C||``;
    the cutoff is ``tol`` times its norm.
    """
    if sys.nstates == 0:
        return sys
    w = frequency_scale(sys)
    s = scale_frequency(sys, w)
    nb, nc = np.linalg.norm(s.B, 2), np.linalg.norm(s.C, 2)
    alpha = np.sqrt(nc / nb) if nb > 0 and nc > 0 else 1.0
    Bs, Cs = s.B * alpha, s.C / alpha
    size = max(np.linalg.norm(s.A, 2), np.linalg.norm(Bs, 2), 1e-300)
    tol_abs = tol * size
    A, B, C = _staircase(s.A, Bs, Cs, tol_abs)
    At, Ct, Bt = _staircase(A.conj().T, C.conj().T, B.conj().T, tol_abs)
    red = StateSpace(At.conj().T, Bt.conj().T, Ct.conj().T, s.D)
    return scale_frequency(red, 1.0 / w)


def additive_split(sys: StateSpace) -> tuple[StateSpace, StateSpace]:
    """Split ``G = G_stable + G_antistable``; the feedthrough stays with the stable part.

    Raises :class:`LtiError` if a pole lies on the imaginary axis.
    """
    m = sys.nstates
    if m == 0:
        z = gain(np.zeros(sys.shape))
        return sys, z
    scale = max(np.linalg.norm(sys.A, 2), 1e-300)
    ev = np.linalg.eigvals(sys.A)
    if np.any(np.abs(ev.real) < AXIS_TOL * scale):
        raise LtiError("pole on the imaginary axis; no stable/antistable split")
    T, Z, k = sla.schur(sys.A, output="complex", sort="lhp")
    T11, T12, T22 = T[:k, :k], T[:k, k:], T[k:, k:]
    Y = sla.solve_sylvester(T11, -T22, -T12)
    L = np.eye(m, dtype=complex)
    L[:k, k:] = Y
    Li = np.eye(m, dtype=complex)
    Li[:k, k:] = -Y
    Bt = Li @ Z.conj().T @ sys.B
    Ct = sys.C @ Z @ L
    stable = StateSpace(T11, Bt[:k], Ct[:, :k], sys.D)
    anti = StateSpace(T22, Bt[k:], Ct[:, k:], np.zeros(sys.shape))
    return stable, anti


# ---------------------------------------------------------------- Lyapunov / Riccati


def solve_lyapunov(A, Q) -> np.ndarray:
    """Hermitian ``X`` with ``A X + X A^dagger + Q = 0`` for Hurwitz ``A``."""
    A = np.asarray(A, dtype=complex)
    Q = np.asarray(Q, dtype=complex)
    if A.size == 0:
        return np.zeros((0, 0), dtype=complex)
    if not is_hurwitz(A):
        raise UnstableSystemError("solve_lyapunov requires a Hurwitz matrix")
    X = sla.solve_continuous_lyapunov(A, -Q)
    return 0.5 * (X + X.conj().T)


def riccati_residual(A, B, R, Q, X) -> float:
    """Relative residual of ``A^H X + X A - X B R^{-1} B^H X + Q = 0``."""
    A, B, R, Q, X = (np.asarray(M, dtype=complex) for M in (A, B, R, Q, X))
    G = B @ np.linalg.solve(R, B.conj().T)
    terms = [A.conj().T @ X, X @ A, X @ G @ X, Q]
    res = terms[0] + terms[1] - terms[2] + terms[3]
    den = sum(np.linalg.norm(t) for t in terms) + 1e-300
    return float(np.linalg.norm(res) / den)


def solve_riccati_stabilizing(A, B, R, Q, *, rtol: float = 1e-8) -> np.ndarray:
    """Stabilizing Hermitian solution of ``A^H X + X A - X B R^{-1} B^H X + Q = 0``.

    ``R`` must be Hermitian and nonsingular but may be indefinite (a negative
    definite ``R`` flips the sign of the quadratic term).  The solution makes
    ``A - B R^{-1} B^H X`` Hurwitz.  It is computed from the ordered complex
    Schur form of the balanced Hamiltonian and polished with Newton steps;
    the relative residual and the closed-loop spectrum are checked before
    returning.
    """
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    R = np.atleast_2d(np.asarray(R, dtype=complex))
    Q = np.asarray(Q, dtype=complex)
    m = A.shape[0]
    if m == 0:
        return np.zeros((0, 0), dtype=complex)
    G = B @ np.linalg.solve(R, B.conj().T)
    G = 0.5 * (G + G.conj().T)
    Q = 0.5 * (Q + Q.conj().T)
    a = max(np.abs(np.linalg.eigvals(A)).max(), np.linalg.norm(A, 2) * 1e-3, 1e-300)
    gn, qn = np.linalg.norm(G, 2), np.linalg.norm(Q, 2)
    s = np.sqrt(qn / gn) if gn > 0 and qn > 0 else 1.0
    At, Gt, Qt = A / a, G * (s / a), Q / (s * a)
    H = np.block([[At, -Gt], [-Qt, -At.conj().T]])
    ev = np.linalg.eigvals(H)
    hscale = max(np.linalg.norm(H, 2), 1.0)
    if np.any(np.abs(ev.real) < AXIS_TOL * hscale):
        raise RiccatiError(
            "no stabilizing solution: Hamiltonian has imaginary-axis eigenvalues"
        )
    T, Z, k = sla.schur(H, output="complex", sort="lhp")
    if k != m:
        raise RiccatiError(f"no stabilizing solution: stable subspace has dim {k}, need {m}")
    U1, U2 = Z[:m, :m], Z[m:, :m]
    if np.linalg.cond(U1) > 1e12:
        raise RiccatiError("no stabilizing solution: stable subspace is not a graph")
    X = s * np.linalg.solve(U1.conj().T, U2.conj().T).conj().T
    X = 0.5 * (X + X.conj().T)
    for _ in range(4):
        if riccati_residual(A, B, R, Q, X) <= 1e-13:
            break
        Ac = A - G @ X
        res = A.conj().T @ X + X @ A - X @ G @ X + Q
        try:
            dX = sla.solve_continuous_lyapunov(Ac.conj().T, -res)
        except (np.linalg.LinAlgError, ValueError):
            break
        Xn = X + 0.5 * (dX + dX.conj().T)
        if riccati_residual(A, B, R, Q, Xn) >= riccati_residual(A, B, R, Q, X):
            break
        X = Xn
    resid = riccati_residual(A, B, R, Q, X)
    if resid > rtol:
        raise RiccatiError(f"Riccati residual {resid:.3e} exceeds {rtol:.1e}")
    if not is_hurwitz(A - G @ X):
        raise RiccatiError("Riccati solution is not stabilizing")
    return X


# ---------------------------------------------------------------- grids, zpk


def default_grid(*systems: StateSpace, n: int = 401) -> np.ndarray:
    """Mixed linear/logarithmic grid on ``[-10 w_max, 10 w_max]``.

    ``w_max`` is the largest ``|Im p|`` over all poles (largest ``|p|`` when the
    poles are real).  Half of the points are linear; the rest cluster
    logarithmically around each resonance ``-Im p`` with the pole's damping as
    the length scale.
    """
    poles = np.concatenate([s.poles() for s in systems]) if systems else np.zeros(0)
    if poles.size == 0:
        return np.linspace(-10.0, 10.0, n)
    wmax = np.abs(poles.imag).max()
    if wmax == 0:
        wmax = np.abs(poles).max()
    if wmax == 0:
        wmax = 1.0
    lo, hi = -10.0 * wmax, 10.0 * wmax
    n_lin = n - n // 2
    pts = [np.linspace(lo, hi, n_lin)]
    centers = {}
    for p in poles:
        c = round(float(-p.imag), 6)
        centers[c] = max(centers.get(c, 0.0), abs(p.real))
    per = max((n - n_lin) // (2 * len(centers)), 1)
    for c, damp in centers.items():
        damp = damp if damp > 0 else wmax
        off = damp * np.logspace(-2, 1.5, per)
        pts.extend([c + off, c - off])
    om = np.unique(np.concatenate(pts))
    return om[(om >= lo) & (om <= hi)]


def zpk_siso(zeros: Iterable[complex], poles: Iterable[complex], k: complex) -> StateSpace:
    """``k * prod(s - z) / prod(s - p)`` as a cascade of first-order sections."""
    zeros, poles = list(zeros), list(poles)
    if len(zeros) > len(poles):
        raise ValueError("improper zpk data")
    parts = [gain(k)]
    for i, p in enumerate(poles):
        if i < len(zeros):
            z = zeros[i]
            parts.append(StateSpace([[p]], [[1.0]], [[p - z]], [[1.0]]))
        else:
            parts.append(StateSpace([[p]], [[1.0]], [[1.0]], [[0.0]]))
    return compose("series", parts)


def from_entries(entries: Sequence[Sequence[StateSpace]]) -> StateSpace:
    """Assemble a transfer matrix from SISO (or block) entries, row by row."""
    rows = [compose("horizontal", row) for row in entries]
    return compose("vertical", rows)
