"""Passive linear quantum channels and the power spectra built from them.

A channel maps the signal ``u`` (``n`` fields) and environment noise ``w``
(``n_w`` fields) to the observed output ``y`` (``n_y`` fields) and the loss
ports ``d`` (``n_d`` fields).  Its transfer matrix is ``G = [[G11, G12],
[G21, G22]]`` partitioned accordingly.  Only ``G11`` and ``G12`` enter the
equalization problem, through the kernel ``Phi`` that represents the error
spectrum as ``P_e = [H11 I] Phi [H11 I]^H``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import lti
from .lti import StateSpace

__all__ = [
    "NoiseModel",
    "PassiveChannel",
    "RealizabilityReport",
    "PhiKernel",
    "Condition21Result",
    "beamsplitter",
    "cavity",
    "netlist",
    "random_passive_channel",
    "check_realizability",
    "make_phi_lambda",
    "psd_sweep",
    "error_psd",
    "difference_psd",
    "min_eig_phi",
    "check_condition21",
    "condition21_margin",
    "condition21_threshold",
    "lambda_lower_bound",
    "select_lambda2",
    "build_example1",
    "build_example2",
    "DEFAULT_THETA_GRID",
]

REALIZABILITY_TOL = 1e-9
UNITARITY_TOL = 1e-8
DEFAULT_THETA_GRID = np.geomspace(1e-3, 1e3, 200)


def _herm(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    return 0.5 * (M + M.conj().T)


@dataclass(frozen=True)
class NoiseModel:
    """Photon-number intensities of the signal (``Sigma_u``) and noise (``Sigma_w``)."""

    Sigma_u: np.ndarray
    Sigma_w: np.ndarray

    def __post_init__(self):
        Su = np.atleast_2d(np.asarray(self.Sigma_u, dtype=complex))
        Sw = np.asarray(self.Sigma_w, dtype=complex)
        Sw = Sw.reshape(0, 0) if Sw.size == 0 else np.atleast_2d(Sw)
        for name, M in (("Sigma_u", Su), ("Sigma_w", Sw)):
            if M.shape[0] != M.shape[1]:
                raise ValueError(f"{name} must be square")
            if M.size and np.abs(M - M.conj().T).max() > 1e-12:
                raise ValueError(f"{name} must be Hermitian")
        if np.linalg.eigvalsh(_herm(Su)).min() <= 0:
            raise ValueError("Sigma_u must be positive definite")
        if Sw.size and np.linalg.eigvalsh(_herm(Sw)).min() < -1e-12:
            raise ValueError("Sigma_w must be positive semidefinite")
        Su.setflags(write=False)
        Sw.setflags(write=False)
        object.__setattr__(self, "Sigma_u", Su)
        object.__setattr__(self, "Sigma_w", Sw)


@dataclass(frozen=True)
class PassiveChannel:
    """State-space channel ``col(y, d) = G col(u, w)`` with its noise model."""

    ss: StateSpace
    n: int
    n_w: int
    n_y: int
    n_d: int
    noise: NoiseModel
    name: str = "channel"

    def __post_init__(self):
        if self.n + self.n_w != self.n_y + self.n_d:
            raise ValueError("input and output field counts differ (n + n_w != n_y + n_d)")
        if self.ss.shape != (self.n_y + self.n_d, self.n + self.n_w):
            raise ValueError(f"realization shape {self.ss.shape} does not match partition")
        if self.noise.Sigma_u.shape != (self.n, self.n):
            raise ValueError("Sigma_u dimension must equal n")
        if self.noise.Sigma_w.shape != (self.n_w, self.n_w):
            raise ValueError("Sigma_w dimension must equal n_w")

    @property
    def G11(self) -> StateSpace:
        return self.ss.select(slice(0, self.n_y), slice(0, self.n))

    @property
    def G12(self) -> StateSpace:
        return self.ss.select(slice(0, self.n_y), slice(self.n, None))

    @property
    def G1(self) -> StateSpace:
        """Rows of ``G`` producing ``y``: ``[G11 G12]``."""
        return self.ss.select(slice(0, self.n_y), None)

    def with_noise(self, Sigma_u=None, Sigma_w=None) -> "PassiveChannel":
        noise = NoiseModel(
            self.noise.Sigma_u if Sigma_u is None else Sigma_u,
            self.noise.Sigma_w if Sigma_w is None else Sigma_w,
        )
        return PassiveChannel(self.ss, self.n, self.n_w, self.n_y, self.n_d, noise, self.name)

    def grid(self, n: int = 401) -> np.ndarray:
        return lti.default_grid(self.ss, n=n)


# ---------------------------------------------------------------- building blocks


def beamsplitter(N: int, i: int, j: int, k: float) -> StateSpace:
    """Static beamsplitter ``[[k, l], [-l, k]]`` (``l = sqrt(1-k^2)``) on fields ``i, j`` of ``N``."""
    if not -1.0 <= k <= 1.0:
        raise ValueError(f"beamsplitter coefficient {k} outside [-1, 1]")
    l = np.sqrt(1.0 - k * k)
    D = np.eye(N, dtype=complex)
    D[i, i], D[i, j], D[j, i], D[j, j] = k, l, -l, k
    return lti.gain(D)


def cavity(N: int, i: int, kappa: float, Omega: float) -> StateSpace:
    """Detuned cavity ``(s - kappa + i Omega)/(s + kappa + i Omega)`` acting on field ``i``."""
    if kappa <= 0:
        raise ValueError("cavity decay rate must be positive")
    r = np.sqrt(2.0 * kappa)
    e = np.zeros((1, N))
    e[0, i] = 1.0
    return StateSpace([[-(kappa + 1j * Omega)]], -r * e, r * e.T, np.eye(N))


def netlist(N: int, stages: Sequence[tuple]) -> StateSpace:
    """Cascade of ``("bs", i, j, k)`` and ``("cavity", i, kappa, Omega)`` stages on ``N`` fields.

    Stages are listed in the order the light traverses them.
    """
    parts = []
    for st in stages:
        kind = st[0]
        if kind == "bs":
            parts.append(beamsplitter(N, *st[1:]))
        elif kind == "cavity":
            parts.append(cavity(N, *st[1:]))
        else:
            raise ValueError(f"unknown stage {kind!r}")
    if not parts:
        return lti.gain(np.eye(N))
    return lti.compose("series", parts[::-1])


def random_passive_channel(rng: np.random.Generator, n: int = 1, n_w: int = 2,
                           n_cav: int = 1, n_bs: int = 4) -> PassiveChannel:
    """Random beamsplitter/cavity network with ``n_y = n`` for property tests."""
    N = n + n_w
    stages = []
    for _ in range(n_bs):
        i, j = rng.choice(N, 2, replace=False)
        stages.append(("bs", int(i), int(j), float(rng.uniform(0.2, 0.9))))
    cav_fields = rng.choice(n, size=n_cav) if n_cav else []
    for c in cav_fields:
        pos = int(rng.integers(0, len(stages) + 1))
        kappa = float(rng.uniform(0.3, 1.5))
        stages.insert(pos, ("cavity", int(c), kappa, float(rng.uniform(-1.5, 1.5))))
    # make sure every signal field reaches the observed ports through a mixer
    for i in range(n):
        stages.append(("bs", i, n + int(rng.integers(0, n_w)), float(rng.uniform(0.5, 0.9))))
    ss = netlist(N, stages)
    su = np.diag(rng.uniform(0.05, 0.5, n))
    sw = np.diag(rng.uniform(0.5, 3.0, n_w))
    return PassiveChannel(ss, n, n_w, n, n_w, NoiseModel(su, sw), name="random")


# ---------------------------------------------------------------- realizability


@dataclass(frozen=True)
class RealizabilityReport:
    residuals: dict
    grid_residual: float
    passed: bool
    failures: tuple = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "residuals": dict(self.residuals),
            "grid_unitarity_residual": self.grid_residual,
            "passed": self.passed,
            "failures": list(self.failures),
        }


def check_realizability(ch: PassiveChannel | StateSpace, omegas=None) -> RealizabilityReport:
    """Physical-realizability residuals of a passive realization.

    The matrix residuals are computed on the frequency-normalized realization
    (poles of order one), which leaves the conditions invariant but makes the
    thresholds independent of the physical rate units.
    """
    ss = ch.ss if isinstance(ch, PassiveChannel) else ch
    s = lti.scale_frequency(ss, lti.frequency_scale(ss))
    A, B, C, D = s.A, s.B, s.C, s.D
    nrm = lambda M: float(np.linalg.norm(M, 2)) if M.size else 0.0  # noqa: E731
    res = {
        "A+A^H+BB^H": nrm(A + A.conj().T + B @ B.conj().T),
        "B+C^H D": nrm(B + C.conj().T @ D),
        "D^H D-I": nrm(D.conj().T @ D - np.eye(D.shape[1])),
        "D D^H-I": nrm(D @ D.conj().T - np.eye(D.shape[0])),
    }
    om = lti.default_grid(ss) if omegas is None else np.asarray(omegas, dtype=float)
    vals = lti.freqresp(ss, om).values
    p, q = ss.shape
    if p == q:
        dev = np.conj(np.swapaxes(vals, 1, 2)) @ vals - np.eye(q)
        grid = float(np.linalg.norm(dev, ord=2, axis=(1, 2)).max())
    else:
        grid = float("inf")
    failures = [k for k, v in res.items() if not v <= REALIZABILITY_TOL]
    if not grid <= UNITARITY_TOL:
        failures.append("grid unitarity G(iw)^H G(iw)-I")
    return RealizabilityReport(res, grid, not failures, tuple(failures))


# ---------------------------------------------------------------- PSD kernels


@dataclass(frozen=True)
class PhiKernel:
    """Realization of the error-spectrum kernel with the ``lambda^2`` offset."""

    lambda2: float
    ss: StateSpace
    n_y: int
    n: int

    @property
    def psi(self) -> StateSpace:
        return self.ss.select(slice(0, self.n_y), slice(0, self.n_y))

    def values(self, omegas) -> np.ndarray:
        return lti.freqresp(self.ss, omegas).values

    def at_infinity(self) -> np.ndarray:
        return np.array(self.ss.D)


def _middle(ch: PassiveChannel, lambda2: float) -> np.ndarray:
    n, nw = ch.n, ch.n_w
    SuT = ch.noise.Sigma_u.T
    SwT = ch.noise.Sigma_w.T
    E = np.vstack([np.eye(n), np.zeros((nw, n))])
    top = np.hstack([lti._blkdiag(SuT, SwT), -E @ (np.eye(n) + SuT)])
    bot = np.hstack([-(np.eye(n) + SuT) @ E.T, SuT + (2.0 + lambda2) * np.eye(n)])
    return np.vstack([top, bot])


def make_phi_lambda(ch: PassiveChannel, lambda2: float = 0.0) -> PhiKernel:
    """Kernel ``Phi_lambda = W M W^H`` with ``W = diag([G11 G12], I_n)``.

    ``M`` holds the noise intensities, so the (1,1) block is
    ``Psi = G11 Su^T G11^H + G12 Sw^T G12^H``, the off-diagonal block is
    ``-G11 (I + Su^T)`` and the (2,2) block is ``Su^T + (2 + lambda^2) I``.
    """
    if lambda2 < 0:
        raise ValueError("lambda2 must be nonnegative")
    W = lti.compose("diagonal", [ch.G1, lti.gain(np.eye(ch.n))])
    M = lti.gain(_middle(ch, lambda2))
    ss = lti.compose("series", [W, M, lti.para_adjoint(W)])
    return PhiKernel(float(lambda2), ss, ch.n_y, ch.n)


def psd_sweep(phi_values: np.ndarray, h_values: np.ndarray, omegas) -> lti.FrequencySweep:
    """``[H I] Phi [H I]^H`` from sampled ``Phi`` and ``H`` (``n x n_y``) values."""
    N, n, _ = h_values.shape
    left = np.concatenate([h_values, np.broadcast_to(np.eye(n), (N, n, n))], axis=2)
    P = left @ phi_values @ np.conj(np.swapaxes(left, 1, 2))
    P = 0.5 * (P + np.conj(np.swapaxes(P, 1, 2)))
    return lti.FrequencySweep(omegas, P)


def error_psd(ch: PassiveChannel, H11: StateSpace, omegas, phi: PhiKernel | None = None) -> lti.FrequencySweep:
    """Error spectrum ``P_e(i w)`` of the equalizer whose (1,1) block is ``H11``."""
    if H11.shape != (ch.n, ch.n_y):
        raise ValueError(f"H11 must be {ch.n}x{ch.n_y}, got {H11.shape}")
    phi = make_phi_lambda(ch, 0.0) if phi is None else phi
    om = np.asarray(omegas, dtype=float)
    return psd_sweep(phi.values(om), lti.freqresp(H11, om).values, om)


def difference_psd(ch: PassiveChannel, sign: float, omegas) -> lti.FrequencySweep:
    """Spectrum of ``sign*y - u`` (the unequalized comparison curves)."""
    if ch.n_y != ch.n:
        raise ValueError("difference spectrum needs n_y == n")
    return error_psd(ch, lti.gain(sign * np.eye(ch.n)), omegas)


def min_eig_phi(phi: PhiKernel, omegas) -> float:
    """Smallest eigenvalue of ``Phi_lambda`` over the grid and at infinity."""
    vals = phi.values(omegas)
    vals = 0.5 * (vals + np.conj(np.swapaxes(vals, 1, 2)))
    m = np.linalg.eigvalsh(vals)[:, 0].min()
    return float(min(m, np.linalg.eigvalsh(_herm(phi.at_infinity()))[0]))


# ---------------------------------------------------------------- low-SNR condition


@dataclass(frozen=True)
class Condition21Result:
    holds: bool
    theta: float | None
    interval: tuple | None  # feasible (theta_min, theta_max)
    min_eig: float | None  # at the returned theta

    def __iter__(self):
        return iter((self.holds, self.theta))


def _mu_interval(Am: np.ndarray, J: np.ndarray) -> tuple[float, float] | None:
    """Interval of ``mu > 0`` with ``Am - mu J`` positive definite (``None`` if empty)."""
    ev = np.linalg.eigvals(J @ Am)
    scale = max(np.abs(ev).max(), 1.0)
    roots = sorted(
        float(e.real) for e in ev if abs(e.imag) <= 1e-9 * scale and e.real > 0
    )
    pts = [0.0] + roots
    ends = pts + [2.0 * pts[-1] + 1.0]
    for lo, hi in zip(ends[:-1], ends[1:]):
        mid = 0.5 * (lo + hi)
        if np.linalg.eigvalsh(_herm(Am - mid * J))[0] > 0:
            return lo, (hi if hi != ends[-1] else np.inf)
    return None


def _cond21_mats(ch: PassiveChannel, gamma2: float, omegas, phi: PhiKernel | None = None):
    phi = make_phi_lambda(ch, 0.0) if phi is None else phi
    vals = list(phi.values(omegas)) + [phi.at_infinity()]
    shift = lti._blkdiag(np.zeros((ch.n_y, ch.n_y)), gamma2 * np.eye(ch.n))
    J = lti._blkdiag(np.eye(ch.n_y), -np.eye(ch.n))
    return [_herm(v) - shift for v in vals], J


def condition21_margin(ch: PassiveChannel, gamma2: float, theta: float, omegas=None) -> float:
    """Minimum eigenvalue of ``theta (Phi - gamma^2 diag(0, I)) - diag(I, -I)`` over the grid and infinity."""
    om = ch.grid() if omegas is None else omegas
    mats, J = _cond21_mats(ch, gamma2, om)
    return float(min(np.linalg.eigvalsh(theta * M - J)[0] for M in mats))


def check_condition21(ch: PassiveChannel, gamma2: float, theta_grid=None, omegas=None) -> Condition21Result:
    """Search for ``theta > 0`` making the low-SNR condition hold at every frequency.

    For each frequency (including infinity, through the constant term) the set
    of admissible ``mu = 1/theta`` is an interval whose ends are real
    eigenvalues of ``J (Phi - gamma^2 diag(0, I))``.  The intervals are
    intersected; the first ``theta`` of ``theta_grid`` inside the result is
    returned, or the geometric center of the interval when the interval is
    nonempty but falls between grid points.
    """
    if gamma2 <= 0:
        raise ValueError("gamma2 must be positive")
    om = ch.grid() if omegas is None else np.asarray(omegas, dtype=float)
    tg = DEFAULT_THETA_GRID if theta_grid is None else np.asarray(theta_grid, dtype=float)
    mats, J = _cond21_mats(ch, gamma2, om)
    lo, hi = 0.0, np.inf
    for M in mats:
        iv = _mu_interval(M, J)
        if iv is None:
            return Condition21Result(False, None, None, None)
        lo, hi = max(lo, iv[0]), min(hi, iv[1])
        if lo >= hi:
            return Condition21Result(False, None, None, None)
    th_lo = 1.0 / hi if np.isfinite(hi) else 0.0
    th_hi = 1.0 / lo if lo > 0 else np.inf
    inside = tg[(tg > th_lo) & (tg < th_hi)]
    if len(inside):
        theta = float(inside[0])
    elif np.isfinite(th_hi) and th_lo > 0:
        theta = float(np.sqrt(th_lo * th_hi))
    else:
        return Condition21Result(False, None, (th_lo, th_hi), None)
    margin = float(min(np.linalg.eigvalsh(theta * M - J)[0] for M in mats))
    if margin <= 0:
        return Condition21Result(False, None, (th_lo, th_hi), margin)
    return Condition21Result(True, theta, (th_lo, th_hi), margin)


def condition21_threshold(ch: PassiveChannel, omegas=None, rtol: float = 1e-6) -> float:
    """Largest ``gamma^2`` for which the condition holds (0.0 if it never does).

    Uses the monotonicity of the condition in ``gamma^2``.
    """
    om = ch.grid() if omegas is None else omegas
    hi = 2.0 + float(np.linalg.eigvalsh(_herm(ch.noise.Sigma_u)).max())
    while check_condition21(ch, hi, omegas=om).holds:
        hi *= 2.0
    lo = 0.0
    if not check_condition21(ch, hi * 1e-6, omegas=om).holds:
        return 0.0
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if check_condition21(ch, mid, omegas=om).holds:
            lo = mid
        else:
            hi = mid
    return lo


# ---------------------------------------------------------------- lambda selection


def _lemma_gap(SuT: np.ndarray, lambda2: float) -> float:
    n = SuT.shape[0]
    P = SuT + np.eye(n)
    rhs = P @ np.linalg.solve(SuT + (2.0 + lambda2) * np.eye(n), P)
    return float(np.linalg.eigvalsh(_herm(SuT - rhs))[0])


def lambda_lower_bound(ch: PassiveChannel, rtol: float = 1e-10) -> float:
    """Smallest ``lambda^2 >= 0`` satisfying the noise-intensity sufficient condition.

    The condition is ``Su^T >= (Su^T + I)(Su^T + (2 + lambda^2) I)^{-1}(Su^T + I)``;
    it guarantees ``Phi_lambda(i w) >= 0`` for every channel with that ``Su``.
    """
    SuT = ch.noise.Sigma_u.T
    if _lemma_gap(SuT, 0.0) >= 0:
        return 0.0
    hi = 1.0
    while _lemma_gap(SuT, hi) < 0:
        hi *= 2.0
    lo = 0.0
    while hi - lo > rtol * max(hi, 1.0):
        mid = 0.5 * (lo + hi)
        if _lemma_gap(SuT, mid) >= 0:
            hi = mid
        else:
            lo = mid
    return hi


def select_lambda2(ch: PassiveChannel, omegas=None, margin: float = 1e-6) -> float:
    """``lambda^2`` used for factorization: 0 when ``Phi_0`` is positive on the grid.

    Otherwise bisect upward until the grid minimum eigenvalue exceeds ``margin``;
    the sufficient-condition bound caps the search.
    """
    om = ch.grid() if omegas is None else omegas
    f = lambda l2: min_eig_phi(make_phi_lambda(ch, l2), om)  # noqa: E731
    if f(0.0) > margin:
        return 0.0
    hi = lambda_lower_bound(ch) + 1.0
    while f(hi) <= margin:
        hi *= 2.0
    lo = 0.0
    while hi - lo > 1e-6 * max(hi, 1.0):
        mid = 0.5 * (lo + hi)
        if f(mid) > margin:
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------- examples


def build_example1(k: float = 0.4, k_c: float = np.sqrt(0.5), kappa: float = 5e8,
                   Omega: float = 1e9, sigma_u2: float = 0.1, sigma_w1_2: float = 0.2,
                   sigma_w2_2: float = 3.0) -> PassiveChannel:
    """One cavity between two beamsplitters followed by a lossy beamsplitter.

    Fields ``(u, w1, w2)`` map to ``(y, d1, d2)``; ``G11 = k_c (k^2 G_c - (1 - k^2))``.
    """
    if not (0 < k * k < 1):
        raise ValueError("need 0 < k^2 < 1")
    if not (0 < k_c * k_c <= 1):
        raise ValueError("need 0 < k_c^2 <= 1")
    if kappa <= 0:
        raise ValueError("need kappa > 0")
    stages = [
        ("bs", 0, 1, k),
        ("cavity", 0, kappa, Omega),
        ("bs", 0, 1, k),
        ("bs", 0, 2, k_c),
    ]
    ss = netlist(3, stages)
    noise = NoiseModel([[sigma_u2]], np.diag([sigma_w1_2, sigma_w2_2]))
    return PassiveChannel(ss, 1, 2, 1, 2, noise, name="example1")


def build_example2(k0: float = 1 / np.sqrt(2), k1: float = 0.4, k2: float = 0.3,
                   k3: float = 0.4, k4: float = 0.3, k5: float = 1 / np.sqrt(2),
                   k6: float = 1 / np.sqrt(2), kappa1: float = 7.5e8, kappa2: float = 3e8,
                   Omega1: float = 1e9, Omega2: float = -5e8,
                   Sigma_u=((0.1, 0.0), (0.0, 0.2)),
                   Sigma_w=((0.2, 0, 0, 0), (0, 0.3, 0, 0), (0, 0, 3.0, 0.2), (0, 0, 0.2, 3.0)),
                   ) -> PassiveChannel:
    """Two cavity branches mixed by beamsplitters; fields ``(u1, u2, w1..w4)`` to ``(y1, y2, d1..d4)``."""
    for name, v in dict(k0=k0, k1=k1, k2=k2, k3=k3, k4=k4, k5=k5, k6=k6).items():
        if not (0 < v * v < 1):
            raise ValueError(f"need 0 < {name}^2 < 1")
    if kappa1 <= 0 or kappa2 <= 0:
        raise ValueError("cavity rates must be positive")
    stages = [
        ("bs", 0, 2, k1),
        ("cavity", 0, kappa1, Omega1),
        ("bs", 0, 2, k3),
        ("bs", 1, 3, k2),
        ("cavity", 1, kappa2, Omega2),
        ("bs", 1, 3, k4),
        ("bs", 0, 1, k0),
        ("bs", 0, 4, k5),
        ("bs", 1, 5, k6),
    ]
    ss = netlist(6, stages)
    return PassiveChannel(ss, 2, 4, 2, 4, NoiseModel(np.asarray(Sigma_u), np.asarray(Sigma_w)),
                          name="example2")
