import numpy as np
import pytest

from gibbsgap.algebra import Lattice, Region, opnorm
from gibbsgap.errors import (CapacityError, GeometryError, GroupError,
                             ModelError)
from gibbsgap.models import (Interaction, cyclic_group, ising_ring,
                             is_ising_ring, plaquette_operator,
                             quantum_double, random_ring, star_operator,
                             symmetric_group_s3)

from conftest import PAULI_Z, embed_site


class TestIsingRing:
    def test_structure(self):
        inter = ising_ring(5)
        assert len(inter.terms) == 5
        assert inter.strength == pytest.approx(2.0)
        assert inter.range == 2
        assert inter.commuting
        assert is_ising_ring(inter)

    def test_hamiltonian_matches_kron(self):
        inter = ising_ring(4)
        n = 4
        want = np.zeros((16, 16), dtype=complex)
        for k in range(n):
            want -= embed_site(PAULI_Z, k, n) @ embed_site(
                PAULI_Z, (k + 1) % n, n)
        assert np.allclose(inter.hamiltonian().matrix, want)

    def test_two_site_ring_doubles_bond(self):
        inter = ising_ring(2)
        assert len(inter.terms) == 2
        assert inter.terms[0].support == inter.terms[1].support

    def test_guards(self):
        with pytest.raises(GeometryError):
            ising_ring(1)
        with pytest.raises(Exception):
            ising_ring(4, local_dim=3)


class TestRandomRing:
    def test_deterministic(self):
        a = random_ring(5, 2, seed=3)
        b = random_ring(5, 2, seed=3)
        for ta, tb in zip(a.terms, b.terms):
            assert np.array_equal(ta.matrix, tb.matrix)
        c = random_ring(5, 2, seed=4)
        assert not np.allclose(a.terms[0].matrix, c.terms[0].matrix)

    def test_strength_normalized(self):
        inter = random_ring(6, 2, strength=1.5, seed=1)
        assert inter.strength == pytest.approx(1.5, rel=1e-12)

    def test_generically_noncommuting(self):
        assert random_ring(4, 2, seed=0).commuting is False

    def test_window_guard(self):
        with pytest.raises(GeometryError):
            random_ring(4, 5)


class TestInteraction:
    def test_empty_terms_rejected(self, ring4):
        with pytest.raises(ModelError):
            Interaction(ring4, ())

    def test_non_hermitian_rejected(self, ring4):
        bad = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
        from gibbsgap.algebra import DenseOperator
        with pytest.raises(ModelError):
            Interaction(ring4, (DenseOperator(Region(ring4, (0,)), bad),))

    def test_closure_and_boundary(self):
        inter = ising_ring(6)
        reg = Region(inter.lattice, (2, 3))
        clo = inter.closure(reg)
        assert clo.sites == (1, 2, 3, 4)
        assert inter.boundary(reg).sites == (1, 4)

    def test_sub_hamiltonian_full_terms_guard(self):
        inter = ising_ring(6)
        with pytest.raises(ModelError):
            inter.sub_hamiltonian(Region(inter.lattice, (2, 3)),
                                  full_terms=True)

    def test_boundary_hamiltonian_support(self):
        inter = ising_ring(6)
        hb = inter.boundary_hamiltonian(Region(inter.lattice, (2, 3)))
        assert hb.support.sites == (1, 2, 3, 4)

    def test_capacity_guard(self):
        inter = ising_ring(15)
        with pytest.raises(CapacityError):
            inter.hamiltonian()


class TestGroups:
    @pytest.mark.parametrize("group", [cyclic_group(2), cyclic_group(5),
                                       symmetric_group_s3()])
    def test_axioms(self, group):
        n = group.order
        mult = group.mult
        assert np.array_equal(mult[0], np.arange(n))      # identity
        assert np.array_equal(mult[:, 0], np.arange(n))
        for g in range(n):
            assert mult[g, group.inverse[g]] == 0
        for a in range(n):                                # associativity
            for b in range(n):
                for c in range(n):
                    assert mult[mult[a, b], c] == mult[a, mult[b, c]]

    def test_cyclic_characters(self):
        group = cyclic_group(4)
        chars = group.characters
        # rows are homomorphisms, orthogonal under the group average
        for i in range(4):
            for g in range(4):
                for h in range(4):
                    assert abs(chars[i, group.mult[g, h]]
                               - chars[i, g] * chars[i, h]) < 1e-12
        gram = chars @ chars.conj().T / 4
        assert np.allclose(gram, np.eye(4), atol=1e-12)

    def test_s3_nonabelian(self):
        group = symmetric_group_s3()
        assert group.characters is None
        assert (group.mult != group.mult.T).any()

    def test_cyclic_guard(self):
        with pytest.raises(GroupError):
            cyclic_group(0)


class TestQuantumDouble:
    def test_term_count_and_flags(self):
        inter = quantum_double(2, cyclic_group(2))
        assert len(inter.terms) == 8          # 4 stars + 4 plaquettes
        assert inter.lattice.kind == "torus_edges"
        assert inter.commuting

    def test_operators_are_projectors(self):
        lat = Lattice("torus_edges", 2, 2)
        group = cyclic_group(2)
        for op in (star_operator(lat, (0, 0), group, None),
                   plaquette_operator(lat, (0, 0), group, None)):
            m = op.matrix
            assert np.allclose(m, m.conj().T)
            assert np.allclose(m @ m, m, atol=1e-12)

    def test_all_terms_commute_densely(self):
        inter = quantum_double(2, cyclic_group(2))
        lam = inter.lattice.full_region()
        embedded = [t.embed_to(lam).matrix for t in inter.terms]
        for i in range(len(embedded)):
            for j in range(i + 1, len(embedded)):
                comm = embedded[i] @ embedded[j] - embedded[j] @ embedded[i]
                assert opnorm(comm) < 1e-12

    def test_left_right_actions_commute_for_s3(self):
        # the structural commutation claim reduces to left vs right
        # multiplication operators on a shared edge
        group = symmetric_group_s3()
        n = group.order
        eye = np.eye(n)
        left = [eye[group.mult[g]].T for g in range(n)]   # |k> -> |gk>
        right = [eye[group.mult[:, group.inverse[h]]].T   # |k> -> |k h^-1>
                 for h in range(n)]
        for lg in left:
            for rh in right:
                assert np.allclose(lg @ rh, rh @ lg)

    def test_s3_double_builds_without_dense_check(self):
        inter = quantum_double(2, symmetric_group_s3())
        assert inter.lattice.local_dim == 6
        assert inter.commuting        # structural, no dense check possible
