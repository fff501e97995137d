"""Model Hamiltonians: Ising and random rings, and quantum doubles on a torus.

An :class:`Interaction` is a list of dense terms with supports; everything
else (strength, range, boundary pieces) is derived from it.  Group data for
the quantum double is carried by :class:`GroupSpec` multiplication tables,
so nonabelian groups work wherever character tables are not required.
"""

from __future__ import annotations

import dataclasses
import itertools
from functools import cached_property

import numpy as np

from .algebra import DenseOperator, Lattice, Region, embed, hermitize, philox
from .errors import (
    CapacityError,
    DimensionError,
    GeometryError,
    GroupError,
    HypothesisError,
    ModelError,
)

COMMUTE_TOL = 1e-10        # Frobenius tolerance for the pairwise commutator check
COMMUTE_DENSE_CAP = 4096   # largest pair-union dimension checked densely
DENSE_DIM_CAP = 2 ** 14    # largest Hilbert-space dimension assembled densely

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1j], [1j, 0.0]], dtype=complex)
PAULI_Z = np.diag([1.0, -1.0]).astype(complex)


@dataclasses.dataclass(eq=False)
class Interaction:
    """A local Hamiltonian ``H = sum_a h_a`` given by its dense terms.

    ``commuting`` may be passed by constructors that can certify it
    structurally; left as None it is decided by a dense pairwise
    commutator check (capped at pair-union dimension 4096).
    """

    lattice: Lattice
    terms: tuple[DenseOperator, ...]
    _commuting: bool | None = None

    def __post_init__(self):
        self.terms = tuple(self.terms)
        if not self.terms:
            raise ModelError("an interaction needs at least one term")
        for t in self.terms:
            if t.support.lattice != self.lattice:
                raise ModelError("term support lives on a different lattice")
            if t.support.is_empty:
                raise ModelError("terms must have nonempty support")
            if not t.is_hermitian:
                raise ModelError("interaction terms must be Hermitian")

    @cached_property
    def strength(self) -> float:
        """max over sites of the summed operator norms of terms touching it."""
        per_site = np.zeros(self.lattice.site_count)
        for t in self.terms:
            nrm = t.norm
            for s in t.support.sites:
                per_site[s] += nrm
        return float(per_site.max())

    @cached_property
    def range(self) -> int:
        """Smallest cyclic window length covering every term (ring lattices);
        maximum support size elsewhere."""
        if self.lattice.kind != "ring":
            return max(len(t.support) for t in self.terms)
        n = self.lattice.site_count
        worst = 1
        for t in self.terms:
            sites = t.support.sites
            if len(sites) == 1:
                continue
            # the covering window is the complement of the widest empty arc
            gaps = [(sites[(i + 1) % len(sites)] - sites[i]) % n for i in range(len(sites))]
            worst = max(worst, n - max(gaps) + 1)
        return worst

    @cached_property
    def commuting(self) -> bool:
        if self._commuting is not None:
            return self._commuting
        for a, b in itertools.combinations(self.terms, 2):
            if not (set(a.support.sites) & set(b.support.sites)):
                continue
            union = a.support | b.support
            if union.dim > COMMUTE_DENSE_CAP:
                raise CapacityError(
                    f"dense commutator check needs dimension {union.dim} > {COMMUTE_DENSE_CAP}; "
                    "pass the commuting flag explicitly")
            ma = embed(a, union).matrix
            mb = embed(b, union).matrix
            scale = max(1.0, np.linalg.norm(ma) * np.linalg.norm(mb))
            if np.linalg.norm(ma @ mb - mb @ ma) > COMMUTE_TOL * scale:
                return False
        return True

    def closure(self, region: Region) -> Region:
        """``region`` plus the supports of all terms touching it."""
        sites = set(region.sites)
        for t in self.terms:
            if set(t.support.sites) & set(region.sites):
                sites |= set(t.support.sites)
        return Region(self.lattice, tuple(sites))

    def boundary(self, region: Region) -> Region:
        return self.closure(region) - region

    def hamiltonian(self) -> DenseOperator:
        """H on the full lattice, dense."""
        return self.sub_hamiltonian(self.lattice.full_region(), full_terms=True)

    def sub_hamiltonian(self, region: Region, *, full_terms: bool = False) -> DenseOperator:
        """Sum of the terms fully contained in ``region``, on ``region``.

        With ``full_terms`` every term is required to fit (used for the
        global Hamiltonian); otherwise outside terms are silently dropped.
        """
        if region.dim > DENSE_DIM_CAP:
            raise CapacityError(f"dense Hamiltonian on dimension {region.dim} exceeds {DENSE_DIM_CAP}")
        acc = np.zeros((region.dim, region.dim), dtype=complex)
        inside = set(region.sites)
        for t in self.terms:
            if set(t.support.sites) <= inside:
                acc += embed(t, region).matrix
            elif full_terms:
                raise ModelError("term support sticks out of the requested region")
        return DenseOperator(region, acc)

    def boundary_hamiltonian(self, region: Region) -> DenseOperator:
        """Sum of all terms touching ``region``, on its closure."""
        clo = self.closure(region)
        if clo.dim > DENSE_DIM_CAP:
            raise CapacityError(f"dense Hamiltonian on dimension {clo.dim} exceeds {DENSE_DIM_CAP}")
        acc = np.zeros((clo.dim, clo.dim), dtype=complex)
        for t in self.terms:
            if set(t.support.sites) & set(region.sites):
                acc += embed(t, clo).matrix
        return DenseOperator(clo, acc)


def ising_ring(n: int, local_dim: int = 2) -> Interaction:
    """Ferromagnetic Ising ring: H = -sum_k Z_k Z_{k+1} (cyclic).

    n = 2 gives the doubled bond of the 2-cycle.
    """
    if local_dim != 2:
        raise DimensionError("the Ising ring is a qubit model")
    if n < 2:
        raise GeometryError("ising_ring needs at least 2 sites")
    lat = Lattice("ring", n, 2)
    zz = -np.kron(PAULI_Z, PAULI_Z)
    terms = [DenseOperator(Region(lat, ((k, (k + 1) % n))), zz) for k in range(n)]
    return Interaction(lat, tuple(terms), _commuting=True)


def is_ising_ring(interaction: Interaction) -> bool:
    """Structural test for the Ising ring: every term is -ZZ on a bond
    and every cyclic bond appears exactly once."""
    lat = interaction.lattice
    if lat.kind != "ring" or lat.local_dim != 2:
        return False
    n = lat.site_count
    if len(interaction.terms) != n:
        return False
    zz = -np.kron(PAULI_Z, PAULI_Z)
    bonds = []
    for term in interaction.terms:
        if len(term.support.sites) != 2:
            return False
        if not np.allclose(term.matrix, zz, atol=1e-12):
            return False
        bonds.append(term.support.sites)
    expected = sorted(tuple(sorted((k, (k + 1) % n))) for k in range(n))
    return sorted(bonds) == expected


def random_ring(n: int, r: int, strength: float = 1.0, seed: int = 0,
                local_dim: int = 2) -> Interaction:
    """GUE terms on every cyclic window of length ``r``, rescaled so the
    interaction strength is exactly ``strength``."""
    if not 1 <= r <= n:
        raise GeometryError(f"window length {r} invalid for a ring of {n} sites")
    if strength <= 0:
        raise ModelError("strength must be positive")
    lat = Lattice("ring", n, local_dim)
    dw = local_dim ** r
    rng = philox(seed, n, r)
    raw = []
    for k in range(n):
        sites = tuple((k + j) % n for j in range(r))
        g = rng.normal(size=(dw, dw)) + 1j * rng.normal(size=(dw, dw))
        raw.append(DenseOperator(Region(lat, sites), hermitize(g) / np.sqrt(2.0)))
    unscaled = Interaction(lat, tuple(raw))
    factor = strength / unscaled.strength
    terms = tuple(DenseOperator(t.support, factor * t.matrix) for t in raw)
    return Interaction(lat, terms)


# --------------------------------------------------------------------------
# finite groups

@dataclasses.dataclass(frozen=True, eq=False)
class GroupSpec:
    """A finite group as multiplication data; element 0 is the identity.

    ``characters`` (rows = irreducible characters of an abelian group,
    columns = elements) is None for nonabelian groups.
    """

    name: str
    mult: np.ndarray
    inverse: np.ndarray
    characters: np.ndarray | None = None

    def __post_init__(self):
        mult = np.asarray(self.mult, dtype=int)
        inv = np.asarray(self.inverse, dtype=int)
        n = mult.shape[0]
        if mult.shape != (n, n) or inv.shape != (n,):
            raise GroupError("group tables have inconsistent shapes")
        idx = np.arange(n)
        if not (np.array_equal(mult[0], idx) and np.array_equal(mult[:, 0], idx)):
            raise GroupError("element 0 is not an identity")
        # mult[mult][i,j,k] = (i j) k   vs   mult[:, mult][i,j,k] = i (j k)
        if not np.array_equal(mult[mult], mult[:, mult]):
            raise GroupError("multiplication table is not associative")
        if not (np.array_equal(mult[idx, inv], np.zeros(n, dtype=int))
                and np.array_equal(mult[inv, idx], np.zeros(n, dtype=int))):
            raise GroupError("inverse table is wrong")
        object.__setattr__(self, "mult", mult)
        object.__setattr__(self, "inverse", inv)
        if self.characters is not None:
            ch = np.asarray(self.characters, dtype=complex)
            if ch.shape != (n, n):
                raise GroupError("character table must be |G| x |G|")
            if not np.allclose(ch[:, 0], 1.0, atol=1e-12):
                raise GroupError("characters must send the identity to 1")
            prod = ch[:, mult]                     # chi_k(g h)
            sep = ch[:, :, None] * ch[:, None, :]  # chi_k(g) chi_k(h)
            if not np.allclose(prod, sep, atol=1e-12):
                raise GroupError("characters are not multiplicative")
            gram = ch @ ch.conj().T / n
            if not np.allclose(gram, np.eye(n), atol=1e-12):
                raise GroupError("characters are not orthonormal")
            object.__setattr__(self, "characters", ch)

    @property
    def order(self) -> int:
        return int(self.mult.shape[0])

    @cached_property
    def abelian(self) -> bool:
        return bool(np.array_equal(self.mult, self.mult.T))

    def left_regular(self, g: int) -> np.ndarray:
        """Permutation matrix of |h> -> |g h>."""
        n = self.order
        p = np.zeros((n, n))
        p[self.mult[g, np.arange(n)], np.arange(n)] = 1.0
        return p

    def right_regular(self, g: int) -> np.ndarray:
        """Permutation matrix of |h> -> |h g^{-1}>."""
        n = self.order
        p = np.zeros((n, n))
        p[self.mult[np.arange(n), self.inverse[g]], np.arange(n)] = 1.0
        return p


def cyclic_group(n: int) -> GroupSpec:
    if n < 1:
        raise GroupError("cyclic group order must be positive")
    idx = np.arange(n)
    mult = (idx[:, None] + idx[None, :]) % n
    inv = (-idx) % n
    chars = np.exp(2j * np.pi * np.outer(idx, idx) / n)
    return GroupSpec(f"Z{n}", mult, inv, chars)


def symmetric_group_s3() -> GroupSpec:
    """S3 as explicit permutations of three points; no character table."""
    perms = [(0, 1, 2), (1, 2, 0), (2, 0, 1), (0, 2, 1), (2, 1, 0), (1, 0, 2)]
    index = {p: i for i, p in enumerate(perms)}
    n = len(perms)
    mult = np.zeros((n, n), dtype=int)
    inv = np.zeros(n, dtype=int)
    for i, p in enumerate(perms):
        for j, q in enumerate(perms):
            comp = tuple(p[q[x]] for x in range(3))   # (p o q)(x) = p(q(x))
            mult[i, j] = index[comp]
        inv[i] = index[tuple(np.argsort(p))]
    return GroupSpec("S3", mult, inv, None)


# --------------------------------------------------------------------------
# quantum double on torus edges
#
# Orientation convention (fixed once; translations below assume y grows
# upward and indices wrap mod N):
#
#   star at vertex (x,y): left-regular on the outgoing edges, that is the
#     up edge v(x,y) and the right edge h(x,y); right-regular on the
#     incoming edges, the down edge v(x,y-1) and the left edge h(x-1,y).
#   plaquette at face (x,y), corners (x,y)..(x+1,y+1): the group word is
#     read counterclockwise from the bottom-left corner,
#     g_bottom . g_right . g_top^{-1} . g_left^{-1},
#     with bottom h(x,y), right v(x+1,y), top h(x,y+1), left v(x,y).
#
# Every star commutes with every plaquette for arbitrary finite groups:
# three corners leave the word unchanged and the bottom-left corner
# conjugates it, which class-function labels do not see.


def star_edge_roles(lattice: Lattice, x: int, y: int) -> list[tuple[int, str]]:
    """Edges of the star at vertex (x, y) with their action side.

    'L' marks left-regular (outgoing) edges, 'R' right-regular (incoming).
    """
    return [
        (lattice.edge_index(x, y, 1), "L"),          # up
        (lattice.edge_index(x, y, 0), "L"),          # right
        (lattice.edge_index(x, y - 1, 1), "R"),      # down
        (lattice.edge_index(x - 1, y, 0), "R"),      # left
    ]


def plaquette_edge_signs(lattice: Lattice, x: int, y: int) -> list[tuple[int, int]]:
    """Edges of the face at (x, y) with word exponents +1/-1."""
    return [
        (lattice.edge_index(x, y, 0), +1),           # bottom
        (lattice.edge_index(x + 1, y, 1), +1),       # right
        (lattice.edge_index(x, y + 1, 0), -1),       # top
        (lattice.edge_index(x, y, 1), -1),           # left
    ]


def _check_torus(lattice: Lattice, group: GroupSpec) -> None:
    if lattice.kind != "torus_edges":
        raise GeometryError("stars and plaquettes live on torus_edges lattices")
    if lattice.extent < 2:
        raise GeometryError("the torus needs extent >= 2 so the four edges are distinct")
    if lattice.local_dim != group.order:
        raise DimensionError(
            f"local_dim {lattice.local_dim} does not match group order {group.order}")


def star_operator(lattice: Lattice, vertex: tuple[int, int], group: GroupSpec,
                  element: int | None = None) -> DenseOperator:
    """A_s(g) for a group element, or the averaged projector A_s if None."""
    _check_torus(lattice, group)
    x, y = vertex
    roles = star_edge_roles(lattice, x, y)
    support = Region(lattice, tuple(e for e, _ in roles))
    by_edge = dict(roles)
    order = support.sites

    def one(g: int) -> np.ndarray:
        mat = np.ones((1, 1))
        for e in order:
            f = group.left_regular(g) if by_edge[e] == "L" else group.right_regular(g)
            mat = np.kron(mat, f)
        return mat

    if element is not None:
        if not 0 <= element < group.order:
            raise GroupError(f"element {element} out of range")
        return DenseOperator(support, one(element))
    acc = sum(one(g) for g in range(group.order)) / group.order
    return DenseOperator(support, acc)


def plaquette_operator(lattice: Lattice, face: tuple[int, int], group: GroupSpec,
                       character: int | None = None) -> DenseOperator:
    """Diagonal plaquette term at ``face``.

    ``character=None`` gives the projector onto trivial holonomy (the
    group word equal to the identity), which is defined for any group;
    an integer selects chi_k for abelian groups.
    """
    _check_torus(lattice, group)
    x, y = face
    signs = plaquette_edge_signs(lattice, x, y)
    support = Region(lattice, tuple(e for e, _ in signs))
    order = support.sites
    sign_of = dict(signs)
    n = group.order

    # word evaluated on every basis state of the 4 edges, vectorized
    grids = np.meshgrid(*([np.arange(n)] * 4), indexing="ij")
    state = {e: grids[i].ravel() for i, e in enumerate(order)}
    word = np.zeros(n ** 4, dtype=int)
    for e, s in signs:                     # multiply in b, r, t^-1, l^-1 order
        g = state[e] if s == +1 else group.inverse[state[e]]
        word = group.mult[word, g]

    if character is None:
        diag = (word == 0).astype(complex)
    else:
        if group.characters is None:
            raise HypothesisError("character labels need an abelian group")
        if not 0 <= character < n:
            raise GroupError(f"character {character} out of range")
        diag = group.characters[character][word]
    return DenseOperator(support, np.diag(diag))


def quantum_double(n: int, group: GroupSpec) -> Interaction:
    """H = -sum_v A_v - sum_f B_f on the n x n torus.

    Terms are stored negated so the ground space is the joint +1
    eigenspace of all the projectors; commutation is structural (see the
    orientation note above) and is certified by the test suite rather
    than a dense check.
    """
    lat = Lattice("torus_edges", n, group.order)
    _check_torus(lat, group)
    terms = []
    for x in range(n):
        for y in range(n):
            a = star_operator(lat, (x, y), group, None)
            terms.append(DenseOperator(a.support, -a.matrix))
    for x in range(n):
        for y in range(n):
            b = plaquette_operator(lat, (x, y), group, None)
            terms.append(DenseOperator(b.support, -b.matrix))
    return Interaction(lat, tuple(terms), _commuting=True)
