"""Gibbs states and closed-form thermal marginals.

The Ising ring and the abelian quantum double admit exact traced-out
forms of ``exp(-beta H)``; both are implemented here together with the
spectral sandwich that survives for nonabelian groups.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .algebra import DenseOperator, DensityMatrix, Lattice, Region, embed, hermitize
from .errors import (
    CapacityError,
    GeometryError,
    HypothesisError,
    IntervalError,
    ModelError,
    RegionError,
)
from .models import (
    DENSE_DIM_CAP,
    GroupSpec,
    Interaction,
    plaquette_edge_signs,
    quantum_double,
    star_edge_roles,
)

SANDWICH_VERIFY_CAP = 2 ** 14   # largest closure dimension checked densely


def gibbs_state(interaction: Interaction, beta: float) -> DensityMatrix:
    """exp(-beta H) / Z as a full-rank DensityMatrix (dense route)."""
    h = interaction.hamiltonian()
    energies, vecs = np.linalg.eigh(hermitize(h.matrix))
    w = np.exp(-beta * (energies - energies.min()))
    p = w / w.sum()
    order = np.argsort(p)                     # DensityMatrix wants ascending eigenvalues
    return DensityMatrix(h.support, (vecs * p) @ vecs.conj().T,
                         _eig=(p[order], vecs[:, order]))


def ising_partition_function(n: int, beta: float) -> float:
    """Z of the cyclic Ising ring, 2^n cosh(beta)^n (1 + tanh(beta)^n)."""
    if n < 2:
        raise GeometryError("the Ising ring needs at least 2 sites")
    return float(2.0 ** n * np.cosh(beta) ** n * (1.0 + np.tanh(beta) ** n))


def ising_marginal_closed(beta: float, region: Region) -> DenseOperator:
    """Unnormalized thermal marginal Tr_{I^c} exp(-beta H) on a cyclic interval.

    The result is diagonal; its trace equals the partition function.  For
    an interval of length m in a ring of n sites,

        2^(n-m) cosh(beta)^(n-m+1) (1 + tanh(beta)^(n-m+1) s_first s_last)
        * exp(beta * sum of interior bond products),

    evaluated per computational basis state (s = +1/-1 spins).
    """
    if region.lattice.kind != "ring" or region.lattice.local_dim != 2:
        raise GeometryError("closed-form marginals are for qubit rings")
    if region.is_empty:
        raise IntervalError("the marginal interval must be nonempty")
    n = region.lattice.site_count
    start, m = region.ring_window()
    window = [(start + j) % n for j in range(m)]
    pos = {s: i for i, s in enumerate(region.sites)}

    dim = 2 ** m
    idx = np.arange(dim)
    # spin of sorted-site slot i: +1 for bit 0, -1 for bit 1 (kron order)
    spins = 1.0 - 2.0 * ((idx[:, None] >> (m - 1 - np.arange(m))[None, :]) & 1)

    t = np.tanh(beta)
    bond = np.zeros(dim)
    for j in range(m - 1):
        bond += spins[:, pos[window[j]]] * spins[:, pos[window[j + 1]]]
    ends = spins[:, pos[window[0]]] * spins[:, pos[window[-1]]]
    diag = (2.0 ** (n - m) * np.cosh(beta) ** (n - m + 1)
            * (1.0 + t ** (n - m + 1) * ends) * np.exp(beta * bond))
    return DenseOperator(region, np.diag(diag.astype(complex)))


# --------------------------------------------------------------------------
# quantum double marginals

def qd_gamma_q(group_order: int, beta: float) -> tuple[float, float]:
    """The pair (gamma, q) = ((e^beta - 1)/|G|, gamma/(1+gamma))."""
    gamma = (np.exp(beta) - 1.0) / group_order
    return float(gamma), float(gamma / (1.0 + gamma))


def _incident_stars(lattice: Lattice, rset: set[int]):
    out = []
    for x in range(lattice.extent):
        for y in range(lattice.extent):
            roles = star_edge_roles(lattice, x, y)
            if any(e in rset for e, _ in roles):
                out.append(((x, y), roles))
    return out


def _incident_plaquettes(lattice: Lattice, rset: set[int]):
    out = []
    for x in range(lattice.extent):
        for y in range(lattice.extent):
            signs = plaquette_edge_signs(lattice, x, y)
            if any(e in rset for e, _ in signs):
                out.append(((x, y), signs))
    return out


def _connected(members, rset) -> bool:
    """BFS over operators; adjacency = sharing an edge that lies in R."""
    if not members:
        return True
    edge_sets = [{e for e, _ in roles if e in rset} for _, roles in members]
    seen = {0}
    queue = [0]
    while queue:
        i = queue.pop()
        for j in range(len(members)):
            if j not in seen and edge_sets[i] & edge_sets[j]:
                seen.add(j)
                queue.append(j)
    return len(seen) == len(members)


@dataclasses.dataclass
class ConnectivityReport:
    region: Region
    n_stars: int
    n_plaquettes: int
    star_connected: bool
    plaquette_connected: bool

    @property
    def connected(self) -> bool:
        return self.star_connected and self.plaquette_connected


def connectivity_check(region: Region) -> ConnectivityReport:
    """Connectivity of the incident star and plaquette clusters of a region."""
    lat = region.lattice
    if lat.kind != "torus_edges":
        raise GeometryError("connectivity_check applies to torus_edges regions")
    if region.is_empty:
        raise RegionError("connectivity of the empty region is undefined")
    rset = set(region.sites)
    stars = _incident_stars(lat, rset)
    plaqs = _incident_plaquettes(lat, rset)
    return ConnectivityReport(region, len(stars), len(plaqs),
                              _connected(stars, rset), _connected(plaqs, rset))


def _joint_star_projector(group: GroupSpec, lattice: Lattice,
                          edge_roles: dict[int, str]) -> DenseOperator:
    edges = tuple(sorted(edge_roles))
    support = Region(lattice, edges)
    if not edges:
        return DenseOperator(support, np.ones((1, 1), dtype=complex))
    acc = np.zeros((support.dim, support.dim), dtype=complex)
    for g in range(group.order):
        m = np.ones((1, 1))
        for e in edges:
            f = group.left_regular(g) if edge_roles[e] == "L" else group.right_regular(g)
            m = np.kron(m, f)
        acc += m
    return DenseOperator(support, acc / group.order)


def _joint_plaquette_projector(group: GroupSpec, lattice: Lattice,
                               edge_signs: dict[int, int]) -> DenseOperator:
    edges = tuple(sorted(edge_signs))
    support = Region(lattice, edges)
    if not edges:
        return DenseOperator(support, np.ones((1, 1), dtype=complex))
    n = group.order
    k = len(edges)
    idx = np.arange(n ** k)
    diag = np.zeros(n ** k, dtype=complex)
    digits = [(idx // n ** (k - 1 - i)) % n for i in range(k)]
    for c in range(n):
        row = group.characters[c]
        f = np.ones(n ** k, dtype=complex)
        for i, e in enumerate(edges):
            val = row[digits[i]]
            f *= val if edge_signs[e] > 0 else np.conj(val)
        diag += f
    return DenseOperator(support, np.diag(diag / n))


@dataclasses.dataclass
class QdMarginalForm:
    """Closed form of Tr_R exp(-beta H_R^boundary) for an abelian double.

    The traced operator lives on ``support`` (closure minus region) and
    equals kappa ((1-a) + |G| a A)((1-b) + |G| b B) with the two joint
    projectors acting on the singly covered edges.
    """

    group: GroupSpec
    beta: float
    region: Region
    support: Region
    n_stars: int
    n_plaquettes: int
    kappa: float
    a: float
    b: float
    star_factor: DenseOperator
    plaq_factor: DenseOperator

    def assembled(self) -> DenseOperator:
        g = self.group.order
        eye = np.eye(self.support.dim)
        sa = embed(self.star_factor, self.support).matrix
        pb = embed(self.plaq_factor, self.support).matrix
        mat = (self.kappa
               * ((1.0 - self.a) * eye + g * self.a * sa)
               @ ((1.0 - self.b) * eye + g * self.b * pb))
        return DenseOperator(self.support, mat)


def qd_marginal_closed(group: GroupSpec, beta: float, region: Region) -> QdMarginalForm:
    lat = region.lattice
    if lat.kind != "torus_edges":
        raise GeometryError("quantum double marginals live on torus_edges lattices")
    if lat.local_dim != group.order:
        raise ModelError(f"local_dim {lat.local_dim} does not match group order {group.order}")
    if region.is_empty:
        raise RegionError("the traced region must be nonempty")
    if not group.abelian:
        raise HypothesisError("the closed marginal form needs an abelian group")
    conn = connectivity_check(region)
    if not conn.connected:
        raise HypothesisError(
            "incident star/plaquette clusters are disconnected; the single-cluster "
            "closed form does not apply")

    rset = set(region.sites)
    stars = _incident_stars(lat, rset)
    plaqs = _incident_plaquettes(lat, rset)

    star_cover: dict[int, list[str]] = {}
    for _, roles in stars:
        for e, role in roles:
            star_cover.setdefault(e, []).append(role)
    plaq_cover: dict[int, list[int]] = {}
    for _, signs in plaqs:
        for e, s in signs:
            plaq_cover.setdefault(e, []).append(s)

    for e in rset:   # every region edge must be doubly covered on both sides
        if len(star_cover.get(e, [])) != 2 or len(plaq_cover.get(e, [])) != 2:
            raise HypothesisError(f"edge {e} of the region is not doubly covered")

    singly_star = {e: c[0] for e, c in star_cover.items() if len(c) == 1}
    singly_plaq = {e: c[0] for e, c in plaq_cover.items() if len(c) == 1}

    closure = Region(lat, tuple(set().union(*[{e for e, _ in r} for _, r in stars],
                                            *[{e for e, _ in s} for _, s in plaqs])))
    support = closure - region

    gamma, q = qd_gamma_q(group.order, beta)
    kappa = group.order ** len(region) * (1.0 + gamma) ** (len(stars) + len(plaqs))
    return QdMarginalForm(
        group=group, beta=beta, region=region, support=support,
        n_stars=len(stars), n_plaquettes=len(plaqs),
        kappa=float(kappa), a=float(q ** len(stars)), b=float(q ** len(plaqs)),
        star_factor=_joint_star_projector(group, lat, singly_star),
        plaq_factor=_joint_plaquette_projector(group, lat, singly_plaq),
    )


@dataclasses.dataclass
class SandwichReport:
    """Spectral bracket for Tr_R exp(-beta H_R^boundary), any finite group.

    ``defect_bound`` bounds the relative deviation of the traced operator
    from kappa times the identity.  ``verified`` is None when the dense
    check would exceed the capacity cap.
    """

    region: Region
    group_order: int
    beta: float
    n_stars: int
    n_plaquettes: int
    kappa: float
    q: float
    lower: float
    upper: float
    defect_bound: float
    verified: bool | None = None
    spectrum_min: float | None = None
    spectrum_max: float | None = None


def qd_trace_sandwich(group: GroupSpec, beta: float, region: Region,
                      *, verify: bool = True) -> SandwichReport:
    lat = region.lattice
    if lat.kind != "torus_edges":
        raise GeometryError("quantum double marginals live on torus_edges lattices")
    if region.is_empty:
        raise RegionError("the traced region must be nonempty")
    conn = connectivity_check(region)
    if not conn.connected:
        raise HypothesisError("the sandwich needs connected star/plaquette clusters")

    ns, np_ = conn.n_stars, conn.n_plaquettes
    g = group.order
    gamma, q = qd_gamma_q(g, beta)
    kappa = float(g ** len(region) * (1.0 + gamma) ** (ns + np_))
    lower = kappa * (1.0 - q ** np_) * (1.0 - q ** ns)
    upper = kappa * (1.0 + (g - 1.0) * q ** np_) * (1.0 + (g - 1.0) * q ** ns)
    defect = (g * g - 1.0) * q ** min(ns, np_)
    report = SandwichReport(region, g, beta, ns, np_, kappa, q,
                            float(lower), float(upper), float(defect))

    if verify:
        interaction = quantum_double(lat.extent, group)
        closure = interaction.closure(region)
        if closure.dim <= SANDWICH_VERIFY_CAP:
            hb = interaction.boundary_hamiltonian(region)
            energies, vecs = np.linalg.eigh(hermitize(hb.matrix))
            expm = (vecs * np.exp(-beta * energies)) @ vecs.conj().T
            from .algebra import ptrace_matrix
            traced = ptrace_matrix(expm, closure.sites,
                                   tuple(s for s in closure.sites if s not in set(region.sites)),
                                   lat.local_dim)
            spec = np.linalg.eigvalsh(hermitize(traced))
            tol = 1e-10 * max(abs(upper), 1.0)
            report.spectrum_min = float(spec[0])
            report.spectrum_max = float(spec[-1])
            report.verified = bool(lower - tol <= spec[0] and spec[-1] <= upper + tol)
    return report
