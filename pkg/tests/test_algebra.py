import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gibbsgap.algebra import (DenseOperator, DensityMatrix, Lattice, Region,
                              embed, embed_matrix, gns_inner, herm_basis,
                              herm_trace_norm, hermitize, hs_inner,
                              matrix_sign, opnorm, partial_trace, philox,
                              ptrace_matrix)
from gibbsgap.errors import (DimensionError, GeometryError, RankError,
                             RegionError)

from conftest import embed_site, kron_chain, brute_ptrace, random_density


class TestLattice:
    def test_ring_counts(self):
        assert Lattice("ring", 5, 2).site_count == 5
        assert Lattice("torus_edges", 3, 2).site_count == 18

    def test_bad_kind(self):
        with pytest.raises(GeometryError):
            Lattice("chain", 4, 2)

    def test_local_dim_floor(self):
        with pytest.raises(DimensionError):
            Lattice("ring", 4, 1)

    def test_edge_indexing_roundtrip(self):
        lat = Lattice("torus_edges", 3, 2)
        for idx in lat.sites():
            x, y, o = lat.edge_coords(idx)
            assert lat.edge_index(x, y, o) == idx


class TestRegion:
    def test_sorted_dedup(self, ring4):
        reg = Region(ring4, (3, 1, 3))
        assert reg.sites == (1, 3)
        assert reg.dim == 4

    def test_foreign_site(self, ring4):
        with pytest.raises(RegionError):
            Region(ring4, (0, 4))

    @given(a=st.sets(st.integers(0, 5)), b=st.sets(st.integers(0, 5)))
    @settings(deadline=None, max_examples=60)
    def test_set_operations(self, a, b):
        lat = Lattice("ring", 6, 2)
        ra = Region(lat, tuple(a))
        rb = Region(lat, tuple(b))
        assert set((ra | rb).sites) == a | b
        assert set((ra & rb).sites) == a & b
        assert set((ra - rb).sites) == a - b
        assert set(ra.complement().sites) == set(range(6)) - a

    def test_interval_detection(self):
        lat = Lattice("ring", 6, 2)
        assert Region(lat, (4, 5, 0)).is_ring_interval()
        assert not Region(lat, (0, 2)).is_ring_interval()


class TestEmbedPtrace:
    def test_embed_against_kron(self):
        # support order (2, 0) exercises the axis permutation
        rng = np.random.default_rng(7)
        m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        got = embed_matrix(m, (2, 0), (0, 1, 2), 2)
        m4 = m.reshape(2, 2, 2, 2)       # axes: (s2 row, s0 row, s2 col, s0 col)
        e = np.eye(2)
        want = np.zeros((8, 8), dtype=complex)
        for i2r in range(2):
            for i0r in range(2):
                for i2c in range(2):
                    for i0c in range(2):
                        want += m4[i2r, i0r, i2c, i0c] * kron_chain(
                            [np.outer(e[i0r], e[i0c]), e,
                             np.outer(e[i2r], e[i2c])])
        assert np.allclose(got, want, atol=1e-13)

    def test_embed_identity_on_rest(self):
        z = np.diag([1.0, -1.0]).astype(complex)
        got = embed_matrix(z, (1,), (0, 1, 2), 2)
        assert np.allclose(got, embed_site(z, 1, 3))

    def test_ptrace_against_brute(self, rng):
        m = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
        got = ptrace_matrix(m, (0, 1, 2, 3), (1, 3), 2)
        assert np.allclose(got, brute_ptrace(m, 4, (1, 3)), atol=1e-13)

    @given(sites=st.sets(st.integers(0, 3), min_size=1), seed=st.integers(0, 50))
    @settings(deadline=None, max_examples=40)
    def test_embed_then_trace_recovers(self, sites, seed):
        lat = Lattice("ring", 4, 2)
        sub = tuple(sorted(sites))
        d = 2 ** len(sub)
        rng = np.random.default_rng(seed)
        m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        big = embed_matrix(m, sub, tuple(lat.sites()), 2)
        back = ptrace_matrix(big, tuple(lat.sites()), sub, 2)
        assert np.allclose(back, m * 2 ** (4 - len(sub)), atol=1e-12)

    def test_dense_operator_embed(self, ring4):
        reg = Region(ring4, (1, 2))
        op = DenseOperator(reg, np.kron(np.eye(2), np.diag([2.0, 3.0])))
        big = embed(op, ring4.full_region())
        assert big.support == ring4.full_region()
        small = partial_trace(big, ring4.full_region() - reg)
        assert small.support == reg
        assert np.allclose(small.matrix, op.matrix * 4, atol=1e-13)


class TestBasesAndNorms:
    @pytest.mark.parametrize("d", [2, 3])
    def test_herm_basis(self, d):
        basis = herm_basis(d)
        assert len(basis) == d * d
        assert np.allclose(basis[0], np.eye(d) / np.sqrt(d))
        for i, a in enumerate(basis):
            assert np.allclose(a, a.conj().T)
            for j, b in enumerate(basis):
                assert abs(hs_inner(a, b) - (i == j)) < 1e-12

    def test_opnorm_and_trace_norm(self, rng):
        m = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        h = hermitize(m)
        assert abs(opnorm(m) - np.linalg.svd(m, compute_uv=False)[0]) < 1e-12
        assert abs(herm_trace_norm(h)
                   - np.abs(np.linalg.eigvalsh(h)).sum()) < 1e-10

    def test_gns_inner(self, rng):
        sigma = random_density(4, rng)
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        b = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        want = np.trace(sigma @ a.conj().T @ b)
        assert abs(gns_inner(sigma, a, b) - want) < 1e-12

    def test_matrix_sign(self):
        h = np.diag([3.0, -0.5, 2.0])
        assert np.allclose(matrix_sign(h), np.diag([1.0, -1.0, 1.0]))


class TestDensityMatrix:
    def test_trace_gate(self, ring4):
        with pytest.raises(Exception):
            DensityMatrix(ring4.full_region(), np.eye(16) / 8.0)

    def test_rank_gate(self, ring4):
        m = np.zeros((16, 16))
        m[0, 0] = 1.0
        with pytest.raises(RankError):
            DensityMatrix(ring4.full_region(), m)

    def test_sqrt_contract(self, state4):
        root = state4.sqrt
        assert np.allclose(root @ root, state4.matrix, atol=1e-12)
        assert np.allclose(state4.inv_sqrt @ root, np.eye(16), atol=1e-10)

    def test_marginal_vs_brute(self, state4):
        got = state4.marginal((0, 2))
        want = brute_ptrace(state4.matrix, 4, (0, 2))
        assert np.allclose(got.matrix, want, atol=1e-13)

    def test_min_eigenvalue(self, state4):
        want = np.linalg.eigvalsh(state4.matrix)[0]
        assert abs(state4.min_eigenvalue - want) < 1e-12


class TestPhilox:
    def test_deterministic(self):
        a = philox(3, 1, 4).normal(size=5)
        b = philox(3, 1, 4).normal(size=5)
        assert np.array_equal(a, b)

    def test_spawn_keys_differ(self):
        a = philox(3, 1).normal(size=5)
        b = philox(3, 2).normal(size=5)
        assert not np.allclose(a, b)
