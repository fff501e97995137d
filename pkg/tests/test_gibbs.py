"""Thermal states and closed-form marginals against brute-force oracles."""

import numpy as np
import pytest

from gibbsgap.algebra import Lattice, Region
from gibbsgap.errors import (
    GeometryError,
    HypothesisError,
    IntervalError,
    ModelError,
    RegionError,
)
from gibbsgap.gibbs import (
    connectivity_check,
    gibbs_state,
    ising_marginal_closed,
    ising_partition_function,
    qd_gamma_q,
    qd_marginal_closed,
    qd_trace_sandwich,
)
from gibbsgap.models import cyclic_group, ising_ring, quantum_double, random_ring, symmetric_group_s3

from conftest import brute_gibbs, brute_ptrace


class TestGibbsState:
    @pytest.mark.parametrize("beta", [0.0, 0.3, 1.0, 2.5])
    def test_matches_expm_oracle(self, beta):
        inter = ising_ring(4)
        state = gibbs_state(inter, beta)
        ref = brute_gibbs(inter, beta)
        assert np.allclose(state.matrix, ref, atol=1e-13)
        assert abs(np.trace(state.matrix) - 1.0) < 1e-12

    def test_eigenvalues_ascend(self):
        state = gibbs_state(random_ring(4, 2, seed=3), 0.7)
        vals, vecs = state.evals, state.evecs
        assert np.all(np.diff(vals) >= -1e-15)
        # the stored decomposition must actually diagonalize the state
        rebuilt = (vecs * vals) @ vecs.conj().T
        assert np.allclose(rebuilt, state.matrix, atol=1e-12)

    def test_beta_zero_is_maximally_mixed(self):
        state = gibbs_state(ising_ring(3), 0.0)
        assert np.allclose(state.matrix, np.eye(8) / 8.0, atol=1e-14)

    def test_marginals_match_brute_trace(self):
        inter = random_ring(5, 2, seed=11)
        state = gibbs_state(inter, 0.9)
        ref = brute_gibbs(inter, 0.9)
        for keep in [(0,), (1, 3), (0, 1, 2), (2, 3, 4), (0, 4)]:
            sub = state.marginal(Region(inter.lattice, keep))
            assert np.allclose(sub.matrix, brute_ptrace(ref, 5, keep), atol=1e-12)


class TestIsingClosedForms:
    @pytest.mark.parametrize("n", [2, 3, 5, 8])
    @pytest.mark.parametrize("beta", [0.2, 1.0, 3.0])
    def test_partition_function(self, n, beta):
        h = ising_ring(n).hamiltonian().matrix
        z_brute = float(np.sum(np.exp(-beta * np.linalg.eigvalsh(h))))
        z = ising_partition_function(n, beta)
        assert abs(z - z_brute) < 1e-11 * z_brute

    def test_partition_function_needs_a_ring(self):
        with pytest.raises(GeometryError):
            ising_partition_function(1, 1.0)

    @pytest.mark.parametrize("window", [(0, 1), (0, 3), (2, 3), (4, 3), (1, 5)])
    def test_marginal_matches_brute(self, window):
        n, beta = 5, 0.8
        start, m = window
        lat = Lattice("ring", n, 2)
        sites = tuple((start + j) % n for j in range(m))
        region = Region(lat, sites)
        got = ising_marginal_closed(beta, region).matrix

        ref_full = brute_gibbs(ising_ring(n), beta) * ising_partition_function(n, beta)
        ref = brute_ptrace(ref_full, n, region.sites)
        assert np.allclose(got, ref, atol=1e-10 * np.abs(ref).max())

    def test_marginal_trace_is_partition_function(self):
        lat = Lattice("ring", 7, 2)
        region = Region(lat, (2, 3, 4))
        z = np.trace(ising_marginal_closed(1.3, region).matrix).real
        assert abs(z - ising_partition_function(7, 1.3)) < 1e-9 * z

    def test_marginal_guards(self):
        lat = Lattice("ring", 5, 2)
        with pytest.raises(IntervalError):
            ising_marginal_closed(1.0, Region(lat, ()))
        with pytest.raises(IntervalError):
            ising_marginal_closed(1.0, Region(lat, (0, 2)))  # not contiguous
        with pytest.raises(GeometryError):
            ising_marginal_closed(1.0, Region(Lattice("torus_edges", 2, 2), (0,)))
        with pytest.raises(GeometryError):
            ising_marginal_closed(1.0, Region(Lattice("ring", 4, 3), (0,)))


class TestConnectivity:
    def test_single_edge_is_connected(self):
        lat = Lattice("torus_edges", 2, 2)
        rep = connectivity_check(Region(lat, (lat.edge_index(0, 0, 0),)))
        assert rep.connected
        assert rep.n_stars == 2 and rep.n_plaquettes == 2

    def test_disjoint_edges_disconnect(self):
        # two parallel horizontal edges sharing no vertex and no face
        lat = Lattice("torus_edges", 2, 2)
        region = Region(lat, (lat.edge_index(0, 0, 0), lat.edge_index(1, 1, 0)))
        rep = connectivity_check(region)
        assert not rep.star_connected
        assert not rep.plaquette_connected
        assert not rep.connected

    def test_guards(self):
        with pytest.raises(GeometryError):
            connectivity_check(Region(Lattice("ring", 4, 2), (0,)))
        with pytest.raises(RegionError):
            connectivity_check(Region(Lattice("torus_edges", 2, 2), ()))


class TestQdMarginal:
    def test_gamma_q_values(self):
        gamma, q = qd_gamma_q(2, np.log(3.0))
        assert abs(gamma - 1.0) < 1e-12
        assert abs(q - 0.5) < 1e-12

    @pytest.mark.parametrize("edges", [
        ((0, 0, 0),),
        ((0, 0, 0), (0, 0, 1)),
        ((0, 0, 0), (1, 0, 0), (0, 1, 1)),
    ])
    def test_closed_form_matches_brute(self, edges):
        group = cyclic_group(2)
        inter = quantum_double(2, group)
        lat = inter.lattice
        beta = 0.6
        region = Region(lat, tuple(lat.edge_index(*e) for e in edges))

        form = qd_marginal_closed(group, beta, region)
        closure = inter.closure(region)
        hb = inter.boundary_hamiltonian(region)
        energies, vecs = np.linalg.eigh(hb.matrix)
        expm = (vecs * np.exp(-beta * energies)) @ vecs.conj().T
        keep = tuple(i for i, s in enumerate(closure.sites) if s not in set(region.sites))
        ref = brute_ptrace(expm, len(closure), keep)

        assert form.support.sites == tuple(s for s in closure.sites
                                           if s not in set(region.sites))
        got = form.assembled().matrix
        assert np.allclose(got, ref, atol=1e-10 * np.abs(ref).max())

    def test_guards(self):
        z2 = cyclic_group(2)
        ring = Region(Lattice("ring", 4, 2), (0,))
        with pytest.raises(GeometryError):
            qd_marginal_closed(z2, 1.0, ring)
        lat3 = Lattice("torus_edges", 2, 3)
        with pytest.raises(ModelError):
            qd_marginal_closed(z2, 1.0, Region(lat3, (0,)))
        lat = Lattice("torus_edges", 2, 2)
        with pytest.raises(RegionError):
            qd_marginal_closed(z2, 1.0, Region(lat, ()))
        lat6 = Lattice("torus_edges", 2, 6)
        with pytest.raises(HypothesisError):
            qd_marginal_closed(symmetric_group_s3(), 1.0, Region(lat6, (0,)))
        split = Region(lat, (lat.edge_index(0, 0, 0), lat.edge_index(1, 1, 0)))
        with pytest.raises(HypothesisError):
            qd_marginal_closed(z2, 1.0, split)


class TestSandwich:
    def test_single_edge_verified(self):
        group = cyclic_group(2)
        lat = Lattice("torus_edges", 2, 2)
        region = Region(lat, (lat.edge_index(0, 0, 1),))
        rep = qd_trace_sandwich(group, np.log(3.0), region)
        assert rep.n_stars == 2 and rep.n_plaquettes == 2
        # gamma = 1 at this beta, so kappa = 2 * 2^4
        assert abs(rep.kappa - 32.0) < 1e-12
        assert rep.verified is True
        assert rep.lower - 1e-9 <= rep.spectrum_min
        assert rep.spectrum_max <= rep.upper + 1e-9

    def test_nonabelian_group_accepted(self):
        group = symmetric_group_s3()
        lat = Lattice("torus_edges", 2, 6)
        region = Region(lat, (lat.edge_index(0, 0, 0),))
        rep = qd_trace_sandwich(group, 0.4, region, verify=False)
        assert rep.verified is None
        assert rep.lower <= rep.upper
        assert rep.defect_bound > 0.0

    def test_guards(self):
        z2 = cyclic_group(2)
        with pytest.raises(GeometryError):
            qd_trace_sandwich(z2, 1.0, Region(Lattice("ring", 4, 2), (0,)))
        lat = Lattice("torus_edges", 2, 2)
        with pytest.raises(RegionError):
            qd_trace_sandwich(z2, 1.0, Region(lat, ()))
        split = Region(lat, (lat.edge_index(0, 0, 0), lat.edge_index(1, 1, 0)))
        with pytest.raises(HypothesisError):
            qd_trace_sandwich(z2, 1.0, split)
