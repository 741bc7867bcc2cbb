import numpy as np
import pytest

from passive_eq import lti
from passive_eq.channel import build_example1, build_example2
from passive_eq.synth import synthesize

# Example-1 filter used as a closed-form fixture: H11 = a (s + b k1 + iW) / (s + k1 + iW)
FIXTURE_A, FIXTURE_B, FIXTURE_K1, FIXTURE_OMEGA = -0.36292, 0.9837, 3.1853e8, 1e9


def fixture_h11(a=FIXTURE_A, b=FIXTURE_B, k1=FIXTURE_K1, omega=FIXTURE_OMEGA):
    return lti.StateSpace([[-(k1 + 1j * omega)]], [[a * (b - 1) * k1]], [[1.0]], [[a]])


def random_stable(rng, m, p, q, decay=(0.2, 2.0), spread=3.0, d_scale=1.0):
    """Random complex stable system with poles in a bounded strip."""
    re = -rng.uniform(*decay, m)
    im = rng.uniform(-spread, spread, m)
    T = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    T += 3 * np.eye(m)
    A = T @ np.diag(re + 1j * im) @ np.linalg.inv(T)
    B = (rng.normal(size=(m, q)) + 1j * rng.normal(size=(m, q))) / np.sqrt(m)
    C = (rng.normal(size=(p, m)) + 1j * rng.normal(size=(p, m))) / np.sqrt(m)
    D = d_scale * (rng.normal(size=(p, q)) + 1j * rng.normal(size=(p, q)))
    return lti.StateSpace(A, B, C, D)


def dense_grid(*systems, n=4001):
    return np.unique(np.concatenate([lti.default_grid(*systems, n=n), np.linspace(-20, 20, 801)]))


@pytest.fixture(scope="session")
def ex1():
    return build_example1()


@pytest.fixture(scope="session")
def ex2():
    return build_example2()


@pytest.fixture(scope="session")
def ex1_synth(ex1):
    return synthesize(ex1)


@pytest.fixture(scope="session")
def ex2_synth(ex2):
    return synthesize(ex2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
