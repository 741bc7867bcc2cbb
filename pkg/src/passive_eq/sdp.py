"""Linear matrix inequalities over complex Hermitian data.

:class:`LmiSystem` collects decision variables (Hermitian or general complex
matrices and real scalars) and affine Hermitian-valued constraint maps.  Each
map is an ordinary Python callable; it is compiled into coefficient matrices by
probing it at the zero assignment and at unit coordinates, embedded into real
symmetric form ``[[Re M, -Im M], [Im M, Re M]]`` and handed to cvxpy/Clarabel.

On top of that layer sit the equalizer-specific programs: the bounded-real
(KYP) inequality, the minimization of the PSD bound over ``(X1, Y1)``, the
recovery of the filter realization ``K`` and the pointwise baseline.
"""

from __future__ import annotations

import io
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import cvxpy as cp
import numpy as np

from . import lti
from .channel import PassiveChannel, make_phi_lambda, psd_sweep
from .lti import StateSpace
from .spectral import FactorBlocks

__all__ = [
    "SdpError",
    "LmiSystem",
    "SdpSolution",
    "real_embedding",
    "kyp_matrix",
    "kyp_lmi",
    "kyp_feasible",
    "GammaResult",
    "inflate_gamma",
    "kernel_basis",
    "gamma_sdp",
    "AffineKData",
    "affine_k_data",
    "bounded_real_blocks",
    "unpack_K",
    "pack_K",
    "j11_contraction_lmi",
    "reconstruct_K",
    "h11_bounded_real",
    "PointwiseResult",
    "pointwise_bound",
]

DEFAULT_EPS = 1e-6


class SdpError(lti.LtiError):
    pass


def _h(M):
    return np.asarray(M).conj().T


def real_embedding(M) -> np.ndarray:
    """``[[Re M, -Im M], [Im M, Re M]]``; Hermitian ``M`` maps to a symmetric matrix with doubled spectrum."""
    M = np.asarray(M, dtype=complex)
    return np.block([[M.real, -M.imag], [M.imag, M.real]])


@dataclass
class _Var:
    name: str
    kind: str
    shape: tuple
    offset: int
    size: int


@dataclass
class _Constraint:
    fn: Callable
    sense: str
    name: str
    margin: float | None
    over: tuple | None
    M0: np.ndarray | None = None
    coeffs: list = field(default_factory=list)  # (coordinate, matrix)


@dataclass
class SdpSolution:
    status: str  # optimal | feasible | infeasible | failed
    assignment: dict
    objective_value: float | None
    max_constraint_violation: float
    info: str = ""

    @property
    def ok(self) -> bool:
        return self.status in ("optimal", "feasible")

    def __getitem__(self, name):
        return self.assignment[name]


class LmiSystem:
    """Affine Hermitian matrix inequalities in named complex decision variables.

    Senses: ``'<'`` (``M <= -margin I``), ``'<='``, ``'>'`` (``M >= margin I``),
    ``'>='``.  Strict senses default to ``margin = eps * scale`` where ``scale``
    is the largest norm of a strict constraint's constant term (at least 1).
    """

    def __init__(self, name: str = "lmi", eps: float = DEFAULT_EPS):
        self.name = name
        self.eps = eps
        self._vars: list[_Var] = []
        self._cons: list[_Constraint] = []
        self._objective = None
        self._sign = 1.0
        self._n = 0

    # -- variables
    def _add(self, name, kind, shape, size):
        if any(v.name == name for v in self._vars):
            raise ValueError(f"duplicate variable {name!r}")
        self._vars.append(_Var(name, kind, shape, self._n, size))
        self._n += size
        return name

    def hermitian(self, name: str, n: int) -> str:
        return self._add(name, "hermitian", (n, n), n * n)

    def complex(self, name: str, p: int, q: int) -> str:
        return self._add(name, "complex", (p, q), 2 * p * q)

    def real(self, name: str) -> str:
        return self._add(name, "real", (), 1)

    @property
    def variables(self) -> dict:
        return {v.name: (v.kind, v.shape) for v in self._vars}

    @property
    def ncoords(self) -> int:
        return self._n

    def _unpack(self, x) -> dict:
        out = {}
        for v in self._vars:
            seg = np.asarray(x[v.offset : v.offset + v.size], dtype=float)
            if v.kind == "real":
                out[v.name] = float(seg[0])
            elif v.kind == "complex":
                p, q = v.shape
                out[v.name] = (seg[: p * q] + 1j * seg[p * q :]).reshape(p, q)
            else:
                n = v.shape[0]
                M = np.zeros((n, n), dtype=complex)
                M[np.diag_indices(n)] = seg[:n]
                iu = np.triu_indices(n, 1)
                k = len(iu[0])
                M[iu] = seg[n : n + k] + 1j * seg[n + k :]
                M = M + np.triu(M, 1).conj().T
                out[v.name] = M
        return out

    def _coords(self, names) -> list[int]:
        if names is None:
            return list(range(self._n))
        idx = []
        for v in self._vars:
            if v.name in names:
                idx.extend(range(v.offset, v.offset + v.size))
        return idx

    # -- constraints and objective
    def constrain(self, fn: Callable[[dict], np.ndarray], sense: str, name: str | None = None,
                  margin: float | None = None, over: Sequence[str] | None = None) -> None:
        """Add ``fn(values) sense 0``; ``over`` lists the variables ``fn`` depends on."""
        if sense not in ("<", "<=", ">", ">="):
            raise ValueError(f"bad sense {sense!r}")
        nm = name or f"c{len(self._cons)}"
        self._cons.append(_Constraint(fn, sense, nm, margin, None if over is None else tuple(over)))

    def minimize(self, fn: Callable[[dict], float]) -> None:
        self._objective, self._sign = fn, 1.0

    def maximize(self, fn: Callable[[dict], float]) -> None:
        self._objective, self._sign = fn, -1.0

    # -- compilation
    def _compile(self):
        zero = np.zeros(self._n)
        base = self._unpack(zero)
        scale = 1.0
        for c in self._cons:
            M0 = np.atleast_2d(np.asarray(c.fn(base), dtype=complex))
            if np.abs(M0 - _h(M0)).max(initial=0.0) > 1e-9 * max(1.0, np.abs(M0).max(initial=0.0)):
                raise SdpError(f"constraint {c.name} is not Hermitian")
            c.M0 = 0.5 * (M0 + _h(M0))
            c.coeffs = []
            for i in self._coords(c.over):
                e = zero.copy()
                e[i] = 1.0
                Mi = np.atleast_2d(np.asarray(c.fn(self._unpack(e)), dtype=complex)) - M0
                Mi = 0.5 * (Mi + _h(Mi))
                if np.abs(Mi).max(initial=0.0) > 0:
                    c.coeffs.append((i, Mi))
            if c.sense in ("<", ">") and c.M0.size:
                scale = max(scale, float(np.linalg.norm(c.M0, 2)))
        self._scale = scale
        obj = None
        if self._objective is not None:
            c0 = float(np.real(self._objective(base)))
            cv = np.zeros(self._n)
            for i in range(self._n):
                e = zero.copy()
                e[i] = 1.0
                cv[i] = float(np.real(self._objective(self._unpack(e)))) - c0
            obj = (c0, cv)
        return obj

    def _margin(self, c: _Constraint) -> float:
        if c.sense in ("<=", ">="):
            return 0.0
        return self.eps * self._scale if c.margin is None else c.margin

    def constraint_values(self, assignment: dict) -> list[tuple[str, np.ndarray]]:
        return [(c.name, np.atleast_2d(np.asarray(c.fn(assignment), dtype=complex))) for c in self._cons]

    def violation(self, assignment: dict) -> float:
        """Largest amount by which any constraint (with its margin) is violated."""
        worst = 0.0
        for c in self._cons:
            M = np.atleast_2d(np.asarray(c.fn(assignment), dtype=complex))
            ev = np.linalg.eigvalsh(0.5 * (M + _h(M)))
            mg = self._margin(c)
            if c.sense in ("<", "<="):
                worst = max(worst, ev[-1] + mg)
            else:
                worst = max(worst, mg - ev[0])
        return float(worst)

    def solve(self, tol: float = 1e-7, verbose: bool = False) -> SdpSolution:
        """Solve with Clarabel; deterministic for identical inputs."""
        obj = self._compile()
        x = cp.Variable(self._n)
        cons = []
        for c in self._cons:
            d = c.M0.shape[0]
            E0 = real_embedding(c.M0)
            if c.coeffs:
                F = np.column_stack([real_embedding(Mi).ravel(order="F") for _, Mi in c.coeffs])
                idx = [i for i, _ in c.coeffs]
                expr = cp.reshape(F @ x[idx], (2 * d, 2 * d), order="F") + E0
            else:
                expr = cp.Constant(E0)
            mg = self._margin(c)
            I = np.eye(2 * d)
            if c.sense in ("<", "<="):
                cons.append(-expr - mg * I >> 0)
            else:
                cons.append(expr - mg * I >> 0)
        if obj is None:
            problem = cp.Problem(cp.Minimize(0), cons)
        else:
            problem = cp.Problem(cp.Minimize(self._sign * (obj[1] @ x)), cons)
        try:
            with warnings.catch_warnings():
                # inaccurate solutions are caught by the violation check below
                warnings.filterwarnings("ignore", "Solution may be inaccurate", UserWarning)
                problem.solve(solver=cp.CLARABEL, verbose=verbose)
        except cp.error.SolverError as exc:
            return SdpSolution("failed", {}, None, np.inf, f"solver error: {exc}")
        st = problem.status
        if st in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
            return SdpSolution("infeasible", {}, None, np.inf, st)
        if x.value is None:
            return SdpSolution("failed", {}, None, np.inf, st)
        assign = self._unpack(x.value)
        viol = self.violation(assign)
        val = None if obj is None else float(obj[0] + obj[1] @ x.value)
        if st == cp.UNBOUNDED or viol > tol:
            return SdpSolution("failed", assign, val, viol, f"{st}; violation {viol:.3e}")
        status = "feasible" if obj is None else "optimal"
        return SdpSolution(status, assign, val, viol, st)

    def dump(self) -> str:
        """Sparse text form of the real-embedded problem.

        One entry per line: ``constraint block row col value`` where block 0
        is the constant term and block ``k > 0`` multiplies coordinate
        ``k - 1``; only the upper triangle of each symmetric block is listed.
        A header line per constraint gives its sense, margin and size.
        """
        self._compile()
        out = io.StringIO()
        out.write(f"# {self.name}: {self._n} coordinates, {len(self._cons)} constraints\n")
        for v in self._vars:
            out.write(f"# var {v.name} {v.kind} {v.shape} offset {v.offset} size {v.size}\n")
        for ci, c in enumerate(self._cons):
            d = 2 * c.M0.shape[0]
            out.write(f"# constraint {ci} {c.name} sense {c.sense} margin {self._margin(c):.17g} size {d}\n")
            blocks = [(0, c.M0)] + [(i + 1, Mi) for i, Mi in c.coeffs]
            for b, M in blocks:
                E = real_embedding(M)
                for r, col in zip(*np.triu_indices(d)):
                    if E[r, col] != 0:
                        out.write(f"{ci} {b} {r} {col} {E[r, col]:.17g}\n")
        return out.getvalue()


# ---------------------------------------------------------------- KYP


def kyp_matrix(A, B, C, D, X, gamma2) -> np.ndarray:
    """Bounded-real matrix ``[[A^H X + X A, X B, C^H], [B^H X, -g I, D^H], [C, D, -I]]``."""
    A, B, C, D = (np.asarray(M, dtype=complex) for M in (A, B, C, D))
    q, p = B.shape[1], C.shape[0]
    return np.block(
        [
            [_h(A) @ X + X @ A, X @ B, _h(C)],
            [_h(B) @ X, -gamma2 * np.eye(q), _h(D)],
            [C, D, -np.eye(p)],
        ]
    )


def kyp_lmi(T: StateSpace, gamma_bar2: float, eps: float = DEFAULT_EPS) -> LmiSystem:
    """LMI in ``X > 0`` that is feasible iff ``sup_w sigma_max(T(i w))^2 < gamma_bar2``.

    ``T`` is frequency-normalized first; this does not change feasibility.
    """
    if not T.is_stable():
        raise lti.UnstableSystemError("bounded-real LMI requires a stable system")
    s = lti.scale_frequency(T, lti.frequency_scale(T))
    lmi = LmiSystem("kyp", eps)
    m = s.nstates
    lmi.hermitian("X", m)
    if m:
        lmi.constrain(lambda v: v["X"], ">", "X>0")
    lmi.constrain(lambda v: kyp_matrix(s.A, s.B, s.C, s.D, v["X"], gamma_bar2), "<", "kyp")
    return lmi


def kyp_feasible(T: StateSpace, gamma_bar: float) -> bool:
    return kyp_lmi(T, gamma_bar**2).solve().ok


# ---------------------------------------------------------------- bound minimization


def kernel_basis(M, cutoff: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (columns) of ``ker M`` by SVD with a relative cutoff."""
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    _, s, Vh = np.linalg.svd(M, full_matrices=True)
    tol = cutoff * (s[0] if s.size else 1.0)
    rank = int(np.sum(s > tol))
    return Vh[rank:].conj().T


def inflate_gamma(gamma_bar2_star: float, lambda2: float, margin: float) -> float:
    """``gamma_bar^2`` used for recovery: ``(1 + margin)(gamma_bar*^2 - lambda^2) + lambda^2``."""
    return (1.0 + margin) * (gamma_bar2_star - lambda2) + lambda2


@dataclass(frozen=True)
class GammaResult:
    gamma_bar2_star: float
    gamma_bar2: float  # value at which X1, Y1 are strictly feasible
    X1: np.ndarray
    Y1: np.ndarray
    lambda2: float
    solution: SdpSolution


def _scaled_blocks(blocks: FactorBlocks) -> tuple[FactorBlocks, float]:
    A = np.asarray(blocks.A, dtype=complex)
    w = float(np.abs(np.linalg.eigvals(A)).max()) if A.size else 1.0
    w = w if w > 0 else 1.0
    r = np.sqrt(w)
    return FactorBlocks(A / w, blocks.B / r, blocks.C1 / r, blocks.C2 / r, blocks.D1, blocks.D2), w


def _bound_lmis(lmi: LmiSystem, fb: FactorBlocks, gamma2: Callable, lambda2: float, slack=None):
    """Register the projected bound LMIs on variables X1, Y1."""
    m, p = fb.B.shape
    n = fb.C2.shape[0]
    Nc = kernel_basis(np.hstack([fb.C1, fb.D1]))
    N = lti._blkdiag(Nc, np.eye(n))
    t = (lambda v: v[slack]) if slack else (lambda v: 0.0)
    Im = np.eye(m)

    def proj(v):
        Y = v["Y1"]
        M = np.block(
            [
                [_h(fb.A) @ Y + Y @ fb.A, Y @ fb.B, _h(fb.C2)],
                [_h(fb.B) @ Y, -np.eye(p), _h(fb.D2)],
                [fb.C2, fb.D2, -gamma2(v) * np.eye(n)],
            ]
        )
        return _h(N) @ M @ N + t(v) * np.eye(N.shape[1])

    lmi.constrain(lambda v: v["X1"] - t(v) * Im, ">", "X1>0")
    lmi.constrain(lambda v: v["Y1"] - t(v) * Im, ">", "Y1>0")
    lmi.constrain(
        lambda v: fb.A @ v["X1"] + v["X1"] @ _h(fb.A) + fb.B @ _h(fb.B) + t(v) * Im, "<", "gramian"
    )
    lmi.constrain(proj, "<", "projected-bound")
    lmi.constrain(
        lambda v: np.block([[v["X1"], Im], [Im, v["Y1"]]]) - t(v) * np.eye(2 * m), ">=", "coupling"
    )


def gamma_sdp(blocks: FactorBlocks, lambda2: float = 0.0, gamma_cap2: float | None = None,
              margin: float = 0.01, m11: int | None = None, eps: float = DEFAULT_EPS,
              bound: float = 1e4, tol: float = 1e-7) -> GammaResult:
    """Minimize ``gamma_bar^2`` over the projected bounded-real LMIs in ``(X1, Y1)``.

    The filter order is the factor order (``m11 = m``), which makes the
    problem convex.  After the minimum is found the LMIs are re-solved at the
    inflated value :func:`inflate_gamma` maximizing a common slack, which
    gives a well-centered strictly feasible ``(X1, Y1)`` for recovery.
    """
    m = blocks.A.shape[0]
    if m11 is not None and m11 != m:
        raise ValueError("only the convex case m11 == m is supported")
    fb, _ = _scaled_blocks(blocks)
    lmi = LmiSystem("gamma", eps)
    lmi.real("g")
    lmi.hermitian("X1", m)
    lmi.hermitian("Y1", m)
    lmi.constrain(lambda v: np.array([[v["g"] - lambda2]]), ">", "g>lambda2", over=["g"])
    if gamma_cap2 is not None:
        lmi.constrain(lambda v: np.array([[gamma_cap2 - v["g"]]]), ">=", "cap", over=["g"])
    _bound_lmis(lmi, fb, lambda v: v["g"], lambda2)
    lmi.constrain(lambda v: bound * np.eye(m) - v["X1"], ">=", "X1 bounded", over=["X1"])
    lmi.constrain(lambda v: bound * np.eye(m) - v["Y1"], ">=", "Y1 bounded", over=["Y1"])
    lmi.minimize(lambda v: v["g"])
    sol = lmi.solve(tol)
    if not sol.ok:
        where = f" under cap {gamma_cap2}" if gamma_cap2 is not None else ""
        raise SdpError(f"bound minimization {sol.status}{where}: {sol.info}")
    g_star = sol.objective_value
    g = inflate_gamma(g_star, lambda2, margin)
    if gamma_cap2 is not None:
        g = min(g, gamma_cap2)
    X1, Y1, sol2 = _centered_xy(fb, g, lambda2, eps, bound, tol)
    return GammaResult(g_star, g, X1, Y1, lambda2, sol2)


def _centered_xy(fb: FactorBlocks, g: float, lambda2: float, eps: float, bound: float,
                 tol: float = 1e-7):
    """Strictly feasible ``(X1, Y1)`` at fixed ``g``.

    First the common slack ``t`` is maximized; then, keeping half of that
    slack, ``tr X1 + tr Y1`` is minimized so the pair stays well scaled.
    """
    m = fb.A.shape[0]

    def build(t_fixed=None):
        lmi = LmiSystem("gamma-center", eps)
        lmi.hermitian("X1", m)
        lmi.hermitian("Y1", m)
        lmi.real("t")
        _bound_lmis(lmi, fb, lambda v: g, lambda2, slack="t")
        lmi.constrain(lambda v: bound * np.eye(m) - v["X1"], ">=", "X1 bounded", over=["X1"])
        lmi.constrain(lambda v: bound * np.eye(m) - v["Y1"], ">=", "Y1 bounded", over=["Y1"])
        lmi.constrain(lambda v: np.array([[1.0 - v["t"]]]), ">=", "t<=1", over=["t"])
        if t_fixed is not None:
            lmi.constrain(lambda v: np.array([[v["t"] - t_fixed]]), ">=", "t fixed", over=["t"])
        return lmi

    lmi = build()
    lmi.maximize(lambda v: v["t"])
    sol = lmi.solve(tol)
    if not sol.ok or sol["t"] <= 0:
        raise SdpError(f"no strictly feasible (X1, Y1) at gamma_bar^2={g}: {sol.info}")
    lmi = build(0.5 * sol["t"])
    lmi.minimize(lambda v: float(np.trace(v["X1"]).real + np.trace(v["Y1"]).real))
    sol2 = lmi.solve(tol)
    if not sol2.ok:
        return sol["X1"], sol["Y1"], sol
    return sol2["X1"], sol2["Y1"], sol2


# ---------------------------------------------------------------- filter recovery


class AffineKData(NamedTuple):
    Abar: np.ndarray
    Bbar: np.ndarray
    Cbar: np.ndarray
    Dbar: np.ndarray
    Bu: np.ndarray
    Cu: np.ndarray
    D12u: np.ndarray
    D21u: np.ndarray


def affine_k_data(fb: FactorBlocks, m11: int) -> AffineKData:
    """Constant matrices making ``T_lambda``'s realization affine in ``K``.

    ``A_hat = Abar + Bu K Cu``, ``B_hat = Bbar + Bu K D21u``,
    ``C_hat = Cbar + D12u K Cu``, ``D_hat = Dbar + D12u K D21u`` with
    ``K = [[A11^H, C11^H], [B11^H, J11^H]]``.
    """
    m, p = fb.B.shape
    ny, n = fb.C1.shape[0], fb.C2.shape[0]
    Z = lambda r, c: np.zeros((r, c), dtype=complex)  # noqa: E731
    Abar = np.block([[_h(fb.A), Z(m, m11)], [Z(m11, m), Z(m11, m11)]])
    Bbar = np.vstack([_h(fb.C2), Z(m11, n)])
    Bu = np.block([[Z(m, m11), _h(fb.C1)], [np.eye(m11), Z(m11, ny)]])
    Cu = np.block([[Z(m11, m), np.eye(m11)], [Z(n, m), Z(n, m11)]])
    D12u = np.hstack([Z(p, m11), _h(fb.D1)])
    Cbar = np.hstack([_h(fb.B), Z(p, m11)])
    Dbar = _h(fb.D2).astype(complex)
    D21u = np.vstack([Z(m11, n), np.eye(n)])
    return AffineKData(Abar, Bbar, Cbar, Dbar, Bu, Cu, D12u, D21u)


def bounded_real_blocks(data: AffineKData, Xhat: np.ndarray, gamma_bar2: float):
    """``(Sigma, Lambda, Pi)`` with the bounded-real matrix equal to ``Sigma + Pi^H K^H Lambda + Lambda^H K Pi``."""
    Sigma = kyp_matrix(data.Abar, data.Bbar, data.Cbar, data.Dbar, Xhat, gamma_bar2)
    n = data.Bbar.shape[1]
    p = data.Cbar.shape[0]
    k_rows = data.Bu.shape[1]
    k_cols = data.Cu.shape[0]
    Lam = np.hstack([_h(data.Bu) @ Xhat, np.zeros((k_rows, n)), _h(data.D12u)])
    Pi = np.hstack([data.Cu, data.D21u, np.zeros((k_cols, p))])
    return Sigma, Lam, Pi


def pack_K(A11, B11, C11, J11) -> np.ndarray:
    return np.block([[_h(A11), _h(C11)], [_h(B11), _h(J11)]])


def unpack_K(K: np.ndarray, m11: int):
    """``(A11, B11, C11, J11)`` from ``K = [[A11^H, C11^H], [B11^H, J11^H]]``."""
    K = np.asarray(K)
    return (
        _h(K[:m11, :m11]),
        _h(K[m11:, :m11]),
        _h(K[:m11, m11:]),
        _h(K[m11:, m11:]),
    )


def j11_contraction_lmi(m11: int, n: int, n_y: int) -> Callable[[np.ndarray], np.ndarray]:
    """Map ``K -> [[I_n, J11], [J11^H, I_ny]]``, to be required positive definite."""
    E1 = np.block([[np.zeros((n, m11)), np.eye(n)], [np.zeros((n_y, m11)), np.zeros((n_y, n))]])
    E2 = np.block([[np.zeros((m11, n)), np.zeros((m11, n_y))], [np.zeros((n_y, n)), np.eye(n_y)]])
    E3 = np.block([[np.zeros((n, m11)), np.zeros((n, n_y))], [np.zeros((n_y, m11)), np.eye(n_y)]])
    E4 = np.block([[np.zeros((m11, n)), np.zeros((m11, n_y))], [np.eye(n), np.zeros((n, n_y))]])

    def frag(K):
        return np.eye(n + n_y) + E1 @ _h(K) @ E2 + E3 @ K @ E4

    return frag


def h11_bounded_real(m11: int, p: float = 1.0) -> Callable[[np.ndarray, float], np.ndarray]:
    """Map ``(K, rho) -> `` bounded-real matrix of ``H11`` with Lyapunov matrix ``p I``.

    Negative definiteness certifies ``||H11||_inf < rho``; fixing the Lyapunov
    matrix keeps the condition affine in ``K``.
    """

    def frag(K, rho):
        A, B, C, J = unpack_K(K, m11)
        n, ny = J.shape
        P = p * np.eye(m11)
        return np.block([
            [_h(A) @ P + P @ A, P @ B, _h(C)],
            [_h(B) @ P, -rho * np.eye(ny), _h(J)],
            [C, J, -rho * np.eye(n)],
        ])

    return frag


def reconstruct_K(blocks: FactorBlocks, gamma_bar2: float, X1, Y1, *, contraction: bool = False,
                  shrink: bool = True, keep: float = 0.5, eps: float = DEFAULT_EPS,
                  k_bound: float = 1e2, tol: float = 1e-7) -> StateSpace:
    """Filter ``H11`` from a strictly feasible ``(X1, Y1)`` at ``gamma_bar2``.

    ``X2`` is the Hermitian square root of ``X1 - Y1^{-1}``, ``X_hat =
    [[X1, X2], [X2^H, I]]`` and ``K`` first maximizes the slack ``t`` of the
    bounded-real LMI with ``X_hat`` fixed (``||K|| <= k_bound`` in normalized
    units).  With ``shrink`` a second solve keeps ``keep * t`` of that slack
    and minimizes a certified bound on ``||H11||_inf`` (see
    :func:`h11_bounded_real`); if it fails the first solution is used.  With
    ``contraction`` the feedthrough is additionally forced to be a strict
    contraction.
    """
    fb, w = _scaled_blocks(blocks)
    m = fb.A.shape[0]
    m11 = m
    ny, n = fb.C1.shape[0], fb.C2.shape[0]
    X1 = np.asarray(X1, dtype=complex)
    Y1 = np.asarray(Y1, dtype=complex)
    G = X1 - np.linalg.inv(Y1)
    G = 0.5 * (G + _h(G))
    ev, V = np.linalg.eigh(G)
    if ev.min() < -1e-9 * max(1.0, np.abs(ev).max()):
        raise SdpError("X1 - Y1^{-1} is not positive semidefinite")
    X2 = (V * np.sqrt(np.clip(ev, 0.0, None))) @ _h(V)
    Xhat = np.block([[X1, X2], [_h(X2), np.eye(m11)]])
    Xhat = 0.5 * (Xhat + _h(Xhat))
    if np.linalg.eigvalsh(Xhat)[0] <= 0:
        raise SdpError("X_hat is not positive definite")
    data = affine_k_data(fb, m11)
    Sigma, Lam, Pi = bounded_real_blocks(data, Xhat, gamma_bar2)
    kr, kc = Lam.shape[0], Pi.shape[0]
    dim = Sigma.shape[0]

    def build(t_min=None):
        lmi = LmiSystem("K", eps)
        lmi.complex("K", kr, kc)
        lmi.real("t")
        lmi.constrain(
            lambda v: Sigma + _h(Pi) @ _h(v["K"]) @ Lam + _h(Lam) @ v["K"] @ Pi + v["t"] * np.eye(dim),
            "<",
            "bounded-real",
        )
        lmi.constrain(
            lambda v: np.block([[k_bound * np.eye(kr), v["K"]], [_h(v["K"]), k_bound * np.eye(kc)]]),
            ">=",
            "K bounded",
            over=["K"],
        )
        lmi.constrain(lambda v: np.array([[1.0 - v["t"]]]), ">=", "t<=1", over=["t"])
        if contraction:
            frag = j11_contraction_lmi(m11, n, ny)
            lmi.constrain(lambda v: frag(v["K"]), ">", "J11 contraction", over=["K"])
        if t_min is None:
            lmi.maximize(lambda v: v["t"])
        else:
            lmi.real("rho")
            br = h11_bounded_real(m11)
            lmi.constrain(lambda v: br(v["K"], v["rho"]), "<", "H11 bound", over=["K", "rho"])
            lmi.constrain(lambda v: np.array([[v["t"] - t_min]]), ">=", "keep slack", over=["t"])
            lmi.minimize(lambda v: v["rho"])
        return lmi.solve(tol)

    sol = build()
    if not sol.ok or sol["t"] <= 0:
        raise SdpError(f"filter recovery LMI infeasible at gamma_bar^2={gamma_bar2}: {sol.info}")
    K = sol["K"]
    if shrink:
        sol2 = build(keep * sol["t"])
        if sol2.ok:
            K = sol2["K"]
    A11, B11, C11, J11 = unpack_K(K, m11)
    H = StateSpace(A11, B11, C11, J11)
    if not H.is_stable():
        raise SdpError("recovered filter state matrix is not Hurwitz")
    return lti.scale_frequency(H, 1.0 / w)


# ---------------------------------------------------------------- pointwise baseline


@dataclass(frozen=True)
class PointwiseResult:
    nu2: float
    omegas: np.ndarray
    H11_samples: np.ndarray  # (L, n, n_y)
    pe_max: np.ndarray  # largest eigenvalue of P_e at each sample


def pointwise_bound(ch: PassiveChannel, omegas, eps: float = DEFAULT_EPS,
                    tol: float = 1e-7) -> PointwiseResult:
    """Smallest ``nu^2`` with per-frequency contractive ``H_l`` giving ``P_e(i w_l) < nu^2 I``.

    The factor of ``Psi(i w_l)`` is taken as its Hermitian square root; only
    ``M M^H`` enters the constraint.
    """
    om = np.asarray(omegas, dtype=float)
    n, ny = ch.n, ch.n_y
    SuT = ch.noise.Sigma_u.T
    P = np.eye(n) + SuT
    phi = make_phi_lambda(ch, 0.0)
    psi = phi.values(om)[:, :ny, :ny]
    g11 = lti.freqresp(ch.G11, om).values
    lmi = LmiSystem("pointwise", eps)
    lmi.real("nu2")
    names = []
    for l in range(len(om)):
        hname = f"H{l}"
        lmi.complex(hname, n, ny)
        names.append(hname)
        Ml = _psd_sqrt(psi[l])
        Gl = g11[l]

        def pe_block(v, hname=hname, Ml=Ml, Gl=Gl):
            H = v[hname]
            Xi = (2.0 - v["nu2"]) * np.eye(n) + SuT - H @ Gl @ P - P @ _h(Gl) @ _h(H)
            HM = H @ Ml
            return np.block([[Xi, HM], [_h(HM), -np.eye(ny)]])

        def contr(v, hname=hname):
            H = v[hname]
            return np.block([[np.eye(n), H], [_h(H), np.eye(ny)]])

        lmi.constrain(pe_block, "<", f"pe{l}", over=["nu2", hname])
        lmi.constrain(contr, ">=", f"contraction{l}", over=[hname])
    lmi.minimize(lambda v: v["nu2"])
    sol = lmi.solve(tol)
    if not sol.ok:
        raise SdpError(f"pointwise bound {sol.status}: {sol.info}")
    Hs = np.array([sol[nm] for nm in names])
    pe = psd_sweep(phi.values(om), Hs, om).max_eig()
    return PointwiseResult(float(sol["nu2"]), om, Hs, pe)


def _psd_sqrt(M):
    w, V = np.linalg.eigh(0.5 * (M + _h(M)))
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ _h(V)
