import numpy as np
import pytest

from zerograph.opalg import ProductSpace
from zerograph.superact import make_graph

ACCEPTANCE_LINES = []


def random_matrix(rng, n, m=None):
    m = n if m is None else m
    return rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))


def random_hermitian(rng, n):
    a = random_matrix(rng, n)
    return (a + a.conj().T) / 2


def random_density(rng, n, rank=None):
    g = random_matrix(rng, n, rank or n)
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng, n):
    q, r = np.linalg.qr(random_matrix(rng, n))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_kraus(rng, n_in, n_out, k):
    """Kraus family from a random isometry C^n_in -> C^n_out (x) C^k."""
    v = np.linalg.qr(random_matrix(rng, n_out * k, n_in))[0]
    return list(v.reshape(n_out, k, n_in).transpose(1, 0, 2))


def _inverse_sqrt(s):
    w, v = np.linalg.eigh(s)
    return v @ np.diag(w ** -0.5) @ v.conj().T


def proposition1_fixture(rng, indistinguishable, dim=None, outcomes=None):
    """(effects, 2-dim subspace basis) on C^dim.

    Indistinguishable fixtures take M_i = p_i P + Q_i with P the projector
    on the subspace and Q_i positive, supported on its complement; both are
    then rotated by a random unitary. Generic fixtures pair random effects
    with a random plane.
    """
    dim = dim or int(rng.integers(3, 6))
    outcomes = outcomes or int(rng.integers(2, 5))
    if not indistinguishable:
        g = [random_density(rng, dim) for _ in range(outcomes)]
        root = _inverse_sqrt(sum(g))
        effects = [root @ a @ root for a in g]
        plane = np.linalg.qr(random_matrix(rng, dim, 2))[0]
        return effects, plane
    p = rng.dirichlet(np.ones(outcomes))
    g = [random_density(rng, dim - 2) for _ in range(outcomes)]
    root = _inverse_sqrt(sum(g))
    effects = []
    for pi, gi in zip(p, g):
        m = np.zeros((dim, dim), dtype=complex)
        m[:2, :2] = pi * np.eye(2)
        m[2:, 2:] = root @ gi @ root
        effects.append(m)
    u = random_unitary(rng, dim)
    return [u @ m @ u.conj().T for m in effects], u[:, :2]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def l0():
    return make_graph("L0")


@pytest.fixture(scope="session")
def l0sq(l0):
    return ProductSpace(l0, l0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
