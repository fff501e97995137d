"""Thermal generators: frequency components, dissipators, gaps, evolution."""

import math

import numpy as np
import pytest

from gibbsgap.algebra import DenseOperator, DensityMatrix, Lattice, Region, opnorm
from gibbsgap.davies import (
    bohr_decompose,
    build_davies,
    commutant_dimension,
    db_defect,
    derivation,
    dissipator_gaps,
    evolve,
    gns_negativity,
    jump_dissipator,
    local_primitivity_check,
    purified_dissipator,
    rate_profile,
)
from gibbsgap.errors import (
    CapabilityError,
    CapacityError,
    ContractError,
    DomainError,
    ParameterError,
    RegionError,
)
from gibbsgap.models import ising_ring, random_ring
from gibbsgap.purified import SuperOperator, spectral_gap

from conftest import PAULI_X, PAULI_Z, lindblad_apply


@pytest.fixture(scope="module")
def gen3():
    return build_davies(ising_ring(3), 1.0)


def site_region(n_ring):
    lat = Lattice("ring", n_ring, 2)
    return Region(lat, (0,))


class TestRateProfile:
    @pytest.mark.parametrize("name", ["glauber", "sqrt"])
    def test_balance_identity_is_exact(self, name):
        g = rate_profile(name, 0.73)
        for w in (0.1, 1.0, 3.7, 12.0):
            assert g(-w) == math.exp(-0.73 * w) * g(w)   # bit-exact by construction
        assert g(0.0) == 1.0

    def test_glauber_saturates(self):
        g = rate_profile("glauber", 2.0)
        assert g(5.0) == 1.0
        assert g(-5.0) == math.exp(-10.0)

    def test_guards(self):
        with pytest.raises(ParameterError):
            rate_profile("ohmic", 1.0)
        with pytest.raises(DomainError):
            rate_profile("glauber", -0.5)


class TestBohrDecomposition:
    def test_x_under_z_field(self):
        reg = site_region(2)
        h = DenseOperator(reg, PAULI_Z)
        decomp = bohr_decompose(h, DenseOperator(reg, PAULI_X))
        assert decomp.frequencies == (-2.0, 2.0)
        assert np.allclose(decomp.components[2.0].matrix, [[0, 0], [1, 0]])
        assert np.allclose(decomp.components[-2.0].matrix, [[0, 1], [0, 0]])
        assert np.allclose(decomp.reconstruction(), PAULI_X)

    def test_commuting_coupling_is_all_static(self):
        reg = site_region(2)
        decomp = bohr_decompose(DenseOperator(reg, PAULI_Z),
                                DenseOperator(reg, PAULI_Z))
        assert decomp.frequencies == (0.0,)
        assert np.allclose(decomp.components[0.0].matrix, PAULI_Z)

    def test_negative_component_is_the_adjoint(self, gen3):
        h0 = DenseOperator(gen3.hamiltonian.support, gen3.hamiltonian.matrix)
        coupling = DenseOperator(h0.support,
                                 np.kron(PAULI_X, np.eye(4)) / np.sqrt(2))
        decomp = bohr_decompose(h0, coupling)
        for w in decomp.frequencies:
            if w > 0:
                assert np.allclose(decomp.components[-w].matrix,
                                   decomp.components[w].matrix.conj().T,
                                   atol=1e-12)

    def test_modular_identity(self):
        reg = site_region(2)
        beta = 0.9
        z = np.exp(-beta) + np.exp(beta)
        sigma = DensityMatrix(reg, np.diag([np.exp(-beta), np.exp(beta)]) / z)
        decomp = bohr_decompose(DenseOperator(reg, PAULI_Z),
                                DenseOperator(reg, PAULI_X))
        assert decomp.modular_residual(sigma, beta) < 1e-12
        assert decomp.modular_residual(sigma, beta + 0.2) > 1e-2

    def test_guards(self):
        reg = site_region(2)
        with pytest.raises(DomainError):
            bohr_decompose(DenseOperator(reg, [[0.0, 1.0], [0.0, 0.0]]),
                           DenseOperator(reg, PAULI_X))
        other = Region(Lattice("ring", 2, 2), (1,))
        with pytest.raises(RegionError):
            bohr_decompose(DenseOperator(reg, PAULI_Z),
                           DenseOperator(other, PAULI_X))


class TestBuildDavies:
    def test_generator_matches_raw_lindblad_algebra(self, gen3, rng):
        vs = [j.v.matrix for j in gen3.jumps]
        h = gen3.hamiltonian.matrix
        for _ in range(3):
            q = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
            assert np.allclose(gen3.generator.apply(q),
                               lindblad_apply(vs, h, q), atol=1e-12)

    def test_unitality_is_exact(self, gen3):
        assert opnorm(gen3.generator.apply(np.eye(8, dtype=complex))) == 0.0

    def test_thermal_state_is_stationary(self, gen3):
        resid = opnorm(gen3.generator.hs_adjoint().apply(gen3.sigma.matrix))
        assert resid < 1e-10

    def test_jump_frequencies(self, gen3):
        # local boundary term spectrum {-2, 0, 2} gives differences 0, 4
        assert sorted({j.omega for j in gen3.jumps}) == [-4.0, 0.0, 4.0]
        assert {j.site for j in gen3.jumps} == {0, 1, 2}
        assert {j.alpha for j in gen3.jumps} == {0, 1, 2}

    def test_gns_negativity(self, gen3):
        assert gns_negativity(gen3, probes=6, seed=1) < 1e-10

    def test_guards(self):
        with pytest.raises(CapacityError):
            build_davies(ising_ring(9), 1.0)
        with pytest.raises(CapabilityError):
            build_davies(random_ring(3, 2, seed=5), 1.0)
        with pytest.raises(ParameterError):
            build_davies(ising_ring(3), 1.0, profile="ohmic")
        with pytest.raises(DomainError):
            build_davies(ising_ring(3), -1.0)
        with pytest.raises(ParameterError):
            build_davies(ising_ring(3), 1.0, couplings={0: (PAULI_X,)})
        bad = np.array([[0.0, 1.0], [0.0, 0.0]])
        with pytest.raises(ParameterError):
            build_davies(ising_ring(3), 1.0,
                         couplings={x: (bad,) for x in range(3)})


class TestDetailedBalance:
    def test_davies_dissipator_is_reversible(self, gen3):
        assert db_defect(gen3.dissipative, gen3.sigma) < 1e-12

    def test_derivation_is_not(self, gen3):
        val = db_defect(derivation(gen3.hamiltonian), gen3.sigma)
        assert abs(val - 0.9479149938) < 1e-6
        with pytest.raises(ContractError):
            purified_dissipator(derivation(gen3.hamiltonian), gen3.sigma)

    def test_zero_map(self, gen3):
        zero = SuperOperator.zero(gen3.hamiltonian.support)
        assert db_defect(zero, gen3.sigma) == 0.0


class TestPurifiedDissipator:
    def test_spectrum_matches_negated_generator(self):
        gen = build_davies(ising_ring(2), 0.7)
        pur = purified_dissipator(gen.dissipative, gen.sigma)
        sym = np.linalg.eigvalsh(pur.dense())
        raw = np.sort(np.linalg.eigvals(-gen.dissipative.dense()).real)
        assert np.allclose(sym, raw, atol=1e-9)
        assert sym[0] > -1e-10

    def test_infinite_temperature_is_plain_negation(self, rng):
        gen = build_davies(ising_ring(3), 0.0)
        pur = purified_dissipator(gen.dissipative, gen.sigma)
        q = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        assert np.allclose(pur.apply(q), -gen.dissipative.apply(q), atol=1e-10)


class TestCommutant:
    def test_known_dimensions(self):
        z1 = np.kron(PAULI_Z, np.eye(2))
        z2 = np.kron(np.eye(2), PAULI_Z)
        assert commutant_dimension([z1]) == 8
        assert commutant_dimension([z1, z2]) == 4
        assert commutant_dimension([np.eye(4)]) == 16
        with pytest.raises(ParameterError):
            commutant_dimension([])

    def test_site_kernel_is_the_jump_commutant(self, gen3):
        pur = purified_dissipator(gen3.site_dissipators[0], gen3.sigma)
        evals = np.linalg.eigvalsh(pur.dense())
        cut = 1e-10 * max(abs(evals).max(), 1.0)
        kernel_dim = int(np.sum(np.abs(evals) <= cut))
        vs = [j.v.matrix for j in gen3.jumps if j.site == 0]
        family = vs + [v.conj().T for v in vs]
        assert kernel_dim == commutant_dimension(family) == 6

    def test_paired_unit_lookup(self, gen3):
        unit = jump_dissipator(gen3, 0, 0, 4.0)
        assert np.abs(unit.apply(np.eye(8))).max() < 1e-12
        with pytest.raises(ParameterError):
            jump_dissipator(gen3, 0, 0, 77.0)


class TestPrimitivity:
    def test_full_dissipator_fixes_only_scalars(self, gen3):
        ok, basis = local_primitivity_check(gen3.dissipative, 0, gen3.sigma)
        assert ok
        assert basis.shape[0] == 1

    def test_site_dissipator_is_primitive_at_its_own_site(self, gen3):
        ok, basis = local_primitivity_check(gen3.site_dissipators[0], 0, gen3.sigma)
        assert ok
        assert basis.shape[0] == 6

    def test_but_not_at_a_neighbor(self, gen3):
        ok, _ = local_primitivity_check(gen3.site_dissipators[0], 1, gen3.sigma)
        assert not ok

    def test_site_guard(self, gen3):
        with pytest.raises(RegionError):
            local_primitivity_check(gen3.dissipative, 5, gen3.sigma)


class TestGapComparison:
    @pytest.mark.parametrize("beta,gap,parent,margin", [
        (0.5, 0.319266066, 0.238405844, 0.183930783),
        (1.0, 0.043860281, 0.035972420, 0.025544642),
    ])
    def test_frozen_anchors(self, beta, gap, parent, margin):
        comp = dissipator_gaps(build_davies(ising_ring(3), beta))
        assert abs(comp.dissipative_gap - gap) < 1e-6
        assert abs(comp.parent_gap - parent) < 1e-6
        assert abs(comp.margin - margin) < 1e-6
        assert len(set(np.round(list(comp.site_gaps.values()), 9))) == 1
        assert comp.lower_bound == min(comp.site_gaps.values()) * comp.parent_gap

    def test_parent_gap_source(self, gen3):
        comp = dissipator_gaps(gen3)
        from gibbsgap.purified import purified_hamiltonian
        want = spectral_gap(purified_hamiltonian(gen3.sigma)).value
        assert abs(comp.parent_gap - want) < 1e-12


class TestEvolve:
    def test_decay_to_equilibrium(self, gen3):
        eps = 1e-6
        rho0 = DensityMatrix(gen3.sigma.support,
                             (1 - eps) * np.diag([1.0] + [0.0] * 7)
                             + eps * np.eye(8) / 8.0)
        comp = dissipator_gaps(gen3)
        times = [0.0, 1.0 / comp.dissipative_gap, 40.0 / comp.dissipative_gap]
        res = evolve(gen3, rho0, times)
        assert res.states.shape == (3, 8, 8)
        assert np.array_equal(res.states[0], rho0.matrix)
        assert res.distances[0] > res.distances[1] > res.distances[2]
        assert res.distances[2] < 1e-8
        for dist, bound in zip(res.distances, res.bounds):
            assert dist <= bound + 1e-8
        assert res.dissipative_gap == comp.dissipative_gap

    def test_guards(self, gen3):
        rho0 = gen3.sigma
        with pytest.raises(DomainError):
            evolve(gen3, rho0, [-1.0])
        wrong = DensityMatrix(Region(Lattice("ring", 2, 2), (0, 1)), np.eye(4) / 4.0)
        with pytest.raises(RegionError):
            evolve(gen3, wrong, [0.0])
