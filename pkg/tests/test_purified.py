"""Projector algebra, purified Hamiltonians and gap extraction."""

import numpy as np
import pytest

from gibbsgap.algebra import DensityMatrix, Lattice, Region, embed_matrix, opnorm
from gibbsgap.errors import (
    CapacityError,
    DomainError,
    ParameterError,
    PartitionError,
    RegionError,
)
from gibbsgap.gibbs import gibbs_state
from gibbsgap.models import ising_ring, random_ring
from gibbsgap.purified import (
    EtaBound,
    SuperOperator,
    eta_bound,
    martingale_defect,
    pi_project,
    purified_hamiltonian,
    small_region_gap_bound,
    spectral_gap,
)

from conftest import random_density


@pytest.fixture
def sigma4(rng):
    lat = Lattice("ring", 4, 2)
    return DensityMatrix(lat.full_region(), random_density(16, rng))


class TestPiProject:
    def test_projector_contracts(self, sigma4):
        p = pi_project(sigma4, Region(sigma4.support.lattice, (1, 2))).dense()
        assert np.allclose(p @ p, p, atol=1e-10)
        assert np.allclose(p, p.conj().T, atol=1e-10)

    def test_fixes_weighted_outside_algebra(self, sigma4, rng):
        lat = sigma4.support.lattice
        region = Region(lat, (0, 3))
        pi = pi_project(sigma4, region)
        # sqrt(sigma) itself is the A = 1 member of the image
        assert np.allclose(pi.apply(sigma4.sqrt), sigma4.sqrt, atol=1e-11)
        keep = (1, 2)
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        q = embed_matrix(a, keep, sigma4.support.sites, 2) @ sigma4.sqrt
        assert np.allclose(pi.apply(q), q, atol=1e-10)

    def test_empty_region_is_identity(self, sigma4, rng):
        pi = pi_project(sigma4, Region(sigma4.support.lattice, ()))
        q = rng.normal(size=(16, 16))
        assert np.allclose(pi.apply(q), q)

    def test_nesting(self, sigma4):
        # a larger erased region leaves a smaller fixed algebra, so the
        # small-region projector absorbs the large one on either side
        lat = sigma4.support.lattice
        p_small = pi_project(sigma4, Region(lat, (1,))).dense()
        p_large = pi_project(sigma4, Region(lat, (1, 2, 3))).dense()
        assert np.allclose(p_small @ p_large, p_large, atol=1e-10)
        assert np.allclose(p_large @ p_small, p_large, atol=1e-10)

    def test_foreign_region_rejected(self, sigma4):
        other = Lattice("ring", 6, 2)
        with pytest.raises(RegionError):
            pi_project(sigma4, Region(other, (0,)))


class TestPurifiedHamiltonian:
    def test_kernel_dimension_counts_outside_algebra(self, sigma4):
        lat = sigma4.support.lattice
        for sites in [(0,), (0, 1), (0, 1, 2), (0, 1, 2, 3)]:
            h = purified_hamiltonian(sigma4, Region(lat, sites))
            evals = np.linalg.eigvalsh(h.dense())
            assert evals[0] > -1e-10
            want = 4 ** (4 - len(sites))        # dim B(H_{X^c}) = d^(2|X^c|)
            assert int(np.sum(evals < 1e-10)) == want

    def test_full_kernel_is_the_state_root(self, sigma4):
        h = purified_hamiltonian(sigma4)
        assert np.linalg.norm(h.apply(sigma4.sqrt)) < 1e-11

    def test_maximally_mixed_spectrum_is_integer(self):
        lat = Lattice("ring", 3, 2)
        sigma = DensityMatrix(lat.full_region(), np.eye(8) / 8.0)
        evals = np.linalg.eigvalsh(purified_hamiltonian(sigma).dense())
        assert np.allclose(evals, np.round(evals.real), atol=1e-12)
        gap = spectral_gap(purified_hamiltonian(sigma))
        assert abs(gap.value - 1.0) < 1e-10

    def test_empty_region_is_zero(self, sigma4, rng):
        h = purified_hamiltonian(sigma4, Region(sigma4.support.lattice, ()))
        q = rng.normal(size=(16, 16))
        assert np.linalg.norm(h.apply(q)) == 0.0


class TestSpectralGap:
    def test_dense_matches_eigvalsh(self, sigma4):
        h = purified_hamiltonian(sigma4)
        res = spectral_gap(h)
        evals = np.linalg.eigvalsh(h.dense())
        above = evals[evals > res.kernel_tol]
        assert abs(res.value - above[0]) < 1e-12
        assert res.kernel_dim == 1
        assert res.method == "dense"

    def test_iterative_agrees_with_dense(self):
        sigma = gibbs_state(ising_ring(4), 0.7)
        dense = spectral_gap(purified_hamiltonian(sigma))
        it = spectral_gap(purified_hamiltonian(sigma), method="iterative",
                          known_kernel=[sigma.sqrt], seed=5)
        assert abs(it.value - dense.value) < 1e-8 * max(dense.value, 1.0)
        assert it.residual is not None and it.residual < 1e-6

    def test_zero_map(self):
        lat = Lattice("ring", 2, 2)
        res = spectral_gap(SuperOperator.zero(lat.full_region()))
        assert res.value == 0.0
        assert "zero operator" in res.warnings

    def test_parameter_guards(self, sigma4):
        h = purified_hamiltonian(sigma4)
        with pytest.raises(ParameterError):
            spectral_gap(h, method="iterative")
        with pytest.raises(ParameterError):
            spectral_gap(h, method="magic")

    def test_dense_capacity(self):
        big = Lattice("ring", 7, 2)
        with pytest.raises(CapacityError):
            SuperOperator.identity(big.full_region()).dense()


class TestMartingaleDefect:
    def test_matches_dense_norm(self, rng):
        lat = Lattice("ring", 5, 2)
        sigma = DensityMatrix(lat.full_region(), random_density(32, rng))
        a, b, c = Region(lat, (0,)), Region(lat, (1, 2)), Region(lat, (3,))
        got = martingale_defect(sigma, a, b, c, seed=2)
        m = (pi_project(sigma, a | b).dense() @ pi_project(sigma, b | c).dense()
             - pi_project(sigma, (a | b) | c).dense())
        assert abs(got - opnorm(m)) < 1e-8

    def test_product_state_has_no_defect(self):
        lat = Lattice("ring", 4, 2)
        single = np.diag([0.7, 0.3])
        mat = single
        for _ in range(3):
            mat = np.kron(mat, single)
        sigma = DensityMatrix(lat.full_region(), mat)
        val = martingale_defect(sigma, Region(lat, (0,)), Region(lat, (1,)),
                                Region(lat, (2,)))
        assert val < 1e-10

    def test_overlap_rejected(self, sigma4):
        lat = sigma4.support.lattice
        with pytest.raises(PartitionError):
            martingale_defect(sigma4, Region(lat, (0, 1)), Region(lat, (1,)),
                              Region(lat, (2,)))


class TestEtaBound:
    def test_trivial_is_condition_number_root(self, sigma4):
        region = Region(sigma4.support.lattice, (0,))
        eb = eta_bound(sigma4, region)
        want = float(np.sqrt(sigma4.evals[-1] / sigma4.evals[0]))
        assert abs(eb.value - want) < 1e-12
        assert abs(eb.gap_lower - eb.value ** -4) < 1e-15

    def test_closed_form_uses_strength(self):
        inter = ising_ring(5)
        region = Region(inter.lattice, (1, 2))
        eb = eta_bound(None, region, method="closed-form", interaction=inter, beta=0.4)
        assert abs(eb.value - np.exp(0.4 * 2 * inter.strength)) < 1e-12

    def test_gibbs_boundary_at_beta_zero_matches_trivial(self, sigma4):
        inter = ising_ring(4)
        region = Region(inter.lattice, (0,))
        gb = eta_bound(sigma4, region, method="gibbs-boundary",
                       interaction=inter, beta=0.0)
        tv = eta_bound(sigma4, region)
        assert abs(gb.value - tv.value) < 1e-10

    def test_gibbs_boundary_is_finite_and_useful(self):
        inter = ising_ring(4)
        sigma = gibbs_state(inter, 0.8)
        region = Region(inter.lattice, (0,))
        gb = eta_bound(sigma, region, method="gibbs-boundary",
                       interaction=inter, beta=0.8)
        tv = eta_bound(sigma, region)
        assert 1.0 <= gb.value <= tv.value   # boundary witness beats Q = 1 here

    def test_guards(self, sigma4):
        region = Region(sigma4.support.lattice, (0,))
        inter = ising_ring(4)
        with pytest.raises(ParameterError):
            eta_bound(None, region)
        with pytest.raises(ParameterError):
            eta_bound(None, region, method="closed-form", interaction=inter)
        with pytest.raises(DomainError):
            eta_bound(None, region, method="closed-form", interaction=inter, beta=-1.0)
        with pytest.raises(ParameterError):
            eta_bound(sigma4, region, method="gibbs-boundary", interaction=inter)
        with pytest.raises(ParameterError):
            eta_bound(sigma4, region, method="no-such-method")

    def test_small_region_gap_bound(self, sigma4):
        region = Region(sigma4.support.lattice, (0,))
        eb = eta_bound(sigma4, region)
        assert small_region_gap_bound(eb) == eb.gap_lower
        with pytest.raises(ParameterError):
            small_region_gap_bound(EtaBound(region, "trivial", 0.5))


def test_superoperator_algebra(sigma4, rng):
    lat = sigma4.support.lattice
    p = pi_project(sigma4, Region(lat, (0,)))
    ident = SuperOperator.identity(lat.full_region())
    q = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    combo = 2.0 * ident - p
    assert np.allclose(combo.apply(q), 2.0 * q - p.apply(q))
    assert np.allclose((p @ p).apply(q), p.apply(q), atol=1e-10)
    adj = p.hs_adjoint()
    assert np.allclose(adj.dense(), p.dense().conj().T, atol=1e-10)
    with pytest.raises(RegionError):
        p + SuperOperator.identity(Region(lat, (0, 1)))
