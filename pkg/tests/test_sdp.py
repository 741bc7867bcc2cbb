import numpy as np
import pytest

from passive_eq import lti, sdp
from passive_eq.channel import error_psd, make_phi_lambda
from passive_eq.sdp import LmiSystem, SdpError
from passive_eq.spectral import factor_phi, partition_factor

from conftest import random_stable


def _blocks(ch, lambda2=0.0):
    f = factor_phi(make_phi_lambda(ch, lambda2), ch.grid())
    return partition_factor(f, ch.n_y, ch.n)


@pytest.fixture(scope="module")
def ex1_gamma(ex1):
    return sdp.gamma_sdp(_blocks(ex1))


# ---------------------------------------------------------------- LMI layer


def test_max_eigenvalue_by_lmi():
    M = np.array([[2.0, 1j], [-1j, 1.0]])
    lmi = LmiSystem("maxeig")
    lmi.real("t")
    lmi.constrain(lambda v: v["t"] * np.eye(2) - M, ">=")
    lmi.minimize(lambda v: v["t"])
    sol = lmi.solve()
    assert sol.status == "optimal"
    assert sol.objective_value == pytest.approx(np.linalg.eigvalsh(M).max(), abs=1e-6)


def test_lyapunov_lmi_feasibility():
    def lyap(A):
        lmi = LmiSystem("lyap")
        lmi.hermitian("P", 2)
        lmi.constrain(lambda v: v["P"], ">")
        lmi.constrain(lambda v: A.conj().T @ v["P"] + v["P"] @ A, "<")
        return lmi.solve()

    ok = lyap(np.array([[-1.0, 3.0], [0.0, -2.0 + 1j]]))
    assert ok.ok
    P = ok["P"]
    assert np.allclose(P, P.conj().T)
    assert not lyap(np.array([[0.5, 0.0], [1.0, -1.0]])).ok


def test_non_hermitian_constraint_rejected():
    lmi = LmiSystem()
    lmi.complex("K", 1, 2)
    lmi.constrain(lambda v: np.array([[1.0, 2.0], [0.0, 1.0]]) + 0 * v["K"][0, 0], "<")
    with pytest.raises(SdpError):
        lmi.solve()


def test_duplicate_variable_and_bad_sense():
    lmi = LmiSystem()
    lmi.real("x")
    with pytest.raises(ValueError):
        lmi.real("x")
    with pytest.raises(ValueError):
        lmi.constrain(lambda v: v["x"], "==")


def test_real_embedding_preserves_definiteness(rng):
    M = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    H = M + M.conj().T
    E = sdp.real_embedding(H)
    ev = np.linalg.eigvalsh(H)
    assert np.allclose(np.sort(np.linalg.eigvalsh(E)), np.sort(np.concatenate([ev, ev])))


def test_dump_format():
    lmi = LmiSystem("tiny")
    lmi.real("t")
    lmi.constrain(lambda v: np.array([[v["t"] - 1.0]]), ">=", "t>=1")
    text = lmi.dump()
    lines = text.splitlines()
    assert lines[0].startswith("# tiny: 1 coordinates, 1 constraints")
    assert any(l.startswith("# constraint 0 t>=1 sense >=") for l in lines)
    entries = [l.split() for l in lines if not l.startswith("#")]
    assert all(len(e) == 5 for e in entries)
    assert text == lmi.dump()


# ---------------------------------------------------------------- KYP


@pytest.mark.parametrize("c", [0.3, 1.0, 4.0])
def test_kyp_first_order(c):
    T = lti.StateSpace([[-1.0]], [[1.0]], [[c]], [[0.0]])
    assert sdp.kyp_feasible(T, 1.1 * c)
    assert not sdp.kyp_feasible(T, 0.9 * c)


def test_kyp_requires_stability():
    with pytest.raises(lti.UnstableSystemError):
        sdp.kyp_lmi(lti.StateSpace([[1.0]], [[1.0]], [[1.0]], [[0.0]]), 1.0)


def test_kyp_bracket_random(rng):
    for _ in range(5):
        T = random_stable(rng, 2, 2, 2)
        nrm = lti.hinf_norm(T)
        assert sdp.kyp_feasible(T, 1.1 * nrm)
        assert not sdp.kyp_feasible(T, 0.9 * nrm)


def test_kernel_basis():
    M = np.array([[1.0, 1.0, 0.0]])
    N = sdp.kernel_basis(M)
    assert N.shape == (3, 2)
    assert np.allclose(M @ N, 0)
    assert np.allclose(N.conj().T @ N, np.eye(2))


# ---------------------------------------------------------------- bound and recovery


def test_inflate_gamma():
    assert sdp.inflate_gamma(2.0, 0.0, 0.01) == pytest.approx(2.02)
    assert sdp.inflate_gamma(2.5, 0.5, 0.01) == pytest.approx(2.52)


def test_pack_unpack_roundtrip(rng):
    A, B, C, J = (rng.normal(size=s) + 1j * rng.normal(size=s) for s in ((2, 2), (2, 1), (3, 2), (3, 1)))
    K = sdp.pack_K(A, B, C, J)
    for x, y in zip(sdp.unpack_K(K, 2), (A, B, C, J)):
        assert np.allclose(x, y)


def test_j11_contraction_fragment(rng):
    J = 0.5 * (rng.normal(size=(2, 1)) + 1j * rng.normal(size=(2, 1)))
    K = sdp.pack_K(np.zeros((1, 1)), np.zeros((1, 1)), np.zeros((2, 1)), J)
    F = sdp.j11_contraction_lmi(1, 2, 1)(K)
    assert np.allclose(F, np.block([[np.eye(2), J], [J.conj().T, np.eye(1)]]))


def test_gamma_bound_not_worse_than_zero_filter(ex1, ex1_gamma):
    # H11 = 0 attains sigma_u^2 + 2, so the optimum cannot exceed it
    assert ex1_gamma.gamma_bar2_star <= 2 + 0.1 + 1e-6
    assert ex1_gamma.gamma_bar2 == pytest.approx(sdp.inflate_gamma(ex1_gamma.gamma_bar2_star, 0.0, 0.01))
    assert np.linalg.eigvalsh(ex1_gamma.X1).min() > 0


def test_gamma_cap_is_respected(ex1):
    res = sdp.gamma_sdp(_blocks(ex1), gamma_cap2=1.93)
    assert res.gamma_bar2 <= 1.93 + 1e-9
    with pytest.raises(SdpError):
        sdp.gamma_sdp(_blocks(ex1), gamma_cap2=1.5)


def test_reconstructed_filter_meets_bound(ex1, ex1_gamma):
    H11 = sdp.reconstruct_K(_blocks(ex1), ex1_gamma.gamma_bar2, ex1_gamma.X1, ex1_gamma.Y1)
    assert H11.is_stable()
    om = ex1.grid(801)
    assert error_psd(ex1, H11, om).max_eig().max() < ex1_gamma.gamma_bar2
    assert lti.hinf_norm(H11) < 1


def test_reconstruct_rejects_incompatible_pair(ex1, ex1_gamma):
    with pytest.raises(SdpError):
        sdp.reconstruct_K(_blocks(ex1), ex1_gamma.gamma_bar2, 0.1 * ex1_gamma.X1, ex1_gamma.Y1 * 0 + 1e-3)


def test_pointwise_bound_samples_contractive(ex1):
    om = np.linspace(-4e9, 2e9, 11)
    res = sdp.pointwise_bound(ex1, om)
    sv = np.linalg.svd(res.H11_samples, compute_uv=False)
    assert sv.max() <= 1 + 1e-6
    assert np.all(res.pe_max <= res.nu2 + 1e-5)
    assert res.nu2 <= 2.1 + 1e-6
