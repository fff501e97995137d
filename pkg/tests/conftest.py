"""Shared fixtures and independent oracles for the test suite.

The oracles here deliberately avoid the package's own plumbing: brute
Gibbs states go through scipy's expm, Lindblad actions through explicit
Kronecker products, and partial traces through reshape/sum loops, so
agreement is meaningful.
"""

import numpy as np
import pytest
import scipy.linalg

from gibbsgap.algebra import DensityMatrix, Lattice, Region

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def brute_gibbs(interaction, beta: float) -> np.ndarray:
    """exp(-beta H) / Z through scipy, bypassing gibbs_state."""
    h = interaction.hamiltonian().matrix
    m = scipy.linalg.expm(-beta * h)
    return m / np.trace(m).real


def brute_ptrace(mat: np.ndarray, n_sites: int, keep: tuple[int, ...],
                 d: int = 2) -> np.ndarray:
    """Partial trace by axis bookkeeping only."""
    t = mat.reshape((d,) * (2 * n_sites))
    drop = sorted(set(range(n_sites)) - set(keep), reverse=True)
    for site in drop:
        t = np.trace(t, axis1=site, axis2=site + t.ndim // 2)
    dk = d ** len(keep)
    # axes are now in ascending kept-site order on both sides
    return t.reshape(dk, dk)


def kron_chain(factors) -> np.ndarray:
    out = np.array([[1.0]], dtype=complex)
    for f in factors:
        out = np.kron(out, f)
    return out


def embed_site(op: np.ndarray, site: int, n: int) -> np.ndarray:
    """op on one site of an n-qubit chain."""
    return kron_chain([op if k == site else np.eye(2) for k in range(n)])


def lindblad_apply(vs, h, q: np.ndarray) -> np.ndarray:
    """Heisenberg generator through raw matrix algebra:
    i[h, q] + sum_v (v+ q v - (v+ v q + q v+ v)/2)."""
    out = 1j * (h @ q - q @ h)
    for v in vs:
        vd = v.conj().T
        k = vd @ v
        out = out + vd @ q @ v - 0.5 * (k @ q + q @ k)
    return out


def random_density(dim: int, rng, ridge: float = 0.05) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = a @ a.conj().T + ridge * np.eye(dim)
    return m / np.trace(m).real


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def ring4():
    return Lattice("ring", 4, 2)


@pytest.fixture
def state4(ring4, rng):
    return DensityMatrix(ring4.full_region(), random_density(16, rng))
