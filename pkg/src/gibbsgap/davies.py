"""Thermal-bath generators for commuting interactions.

Builds the weak-coupling generator attached to a commuting interaction
at inverse temperature beta, together with the machinery for checking
it: frequency decompositions of the local boundary terms, detailed
balance defects, purified dissipators, local primitivity, dissipator
gaps compared against the purified parent Hamiltonian, and dense
semigroup evolution with the spectral convergence bound.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .algebra import (
    DenseOperator,
    DensityMatrix,
    Lattice,
    Region,
    embed_matrix,
    gns_inner,
    herm_basis,
    herm_trace_norm,
    hermitize,
    hs_inner,
    opnorm,
    philox,
    ptrace_matrix,
)
from .errors import (
    CapabilityError,
    CapacityError,
    ContractError,
    DomainError,
    NumericalError,
    ParameterError,
    RegionError,
    VerificationError,
)
from .gibbs import gibbs_state
from .models import Interaction
from .purified import (
    DENSE_OP_CAP,
    SuperOperator,
    _lambda_max_estimate,
    purified_hamiltonian,
    spectral_gap,
)

GEN_OP_CAP = 65536        # largest operator-space dimension for a generator
FREQ_TOL_FACTOR = 1e-8    # frequency merging tolerance, relative to ||H||
COMPONENT_DROP = 1e-12    # relative Frobenius size below which S(w) is zero
REVERSIBILITY_TOL = 1e-8  # db_defect allowed before purification refuses
UNITALITY_TOL = 1e-10
STATIONARITY_TOL = 1e-8
KERNEL_TOL_FACTOR = 1e-10
POWER_ITERS = 120


@dataclasses.dataclass(frozen=True)
class BohrDecomposition:
    """Frequency components of a coupling under a Hermitian Hamiltonian.

    ``components[w]`` collects the matrix elements of the coupling
    between eigenspaces whose energy difference falls in the merged
    class ``w``; classes whose component vanishes are dropped, and the
    kept keys come in exact +/- pairs (zero included when present).
    """

    support: Region
    frequencies: tuple[float, ...]
    components: dict[float, DenseOperator]

    def reconstruction(self) -> np.ndarray:
        """Sum of all kept components."""
        acc = np.zeros((self.support.dim,) * 2, dtype=complex)
        for op in self.components.values():
            acc = acc + op.matrix
        return acc

    def modular_residual(self, sigma: DensityMatrix, beta: float) -> float:
        """Worst relative residual of sigma S(w) sigma^-1 = e^{beta w} S(w)."""
        if sigma.support != self.support:
            raise RegionError("state and decomposition live on different spaces")
        worst = 0.0
        for w, op in self.components.items():
            lhs = sigma.matrix @ op.matrix @ sigma.inv
            rhs = math.exp(beta * w) * op.matrix
            scale = max(np.linalg.norm(rhs), 1e-300)
            worst = max(worst, float(np.linalg.norm(lhs - rhs)) / scale)
        return worst


def _cluster_means(values: np.ndarray, tol: float) -> list[float]:
    """Group sorted values whose consecutive gaps stay within tol."""
    groups: list[float] = []
    start = 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i] - values[i - 1] > tol:
            groups.append(float(np.mean(values[start:i])))
            start = i
    return groups


def bohr_decompose(hamiltonian: DenseOperator, coupling: DenseOperator,
                   freq_tol: float | None = None) -> BohrDecomposition:
    """Split a coupling into eigenvector components of the modular flow.

    S(w) sums the blocks P_E S P_{E'} over eigenprojector pairs of the
    Hamiltonian with E' - E in the merged frequency class w.  Exactly
    degenerate spectra of commuting models fragment under naive float
    comparison, so eigenvalues and then difference magnitudes are merged
    within ``freq_tol`` (default 1e-8 ||H||).
    """
    if hamiltonian.support != coupling.support:
        raise RegionError("hamiltonian and coupling live on different spaces")
    h = hamiltonian.matrix
    scale = opnorm(h)
    if np.linalg.norm(h - h.conj().T) > 1e-10 * max(scale, 1.0):
        raise DomainError("hamiltonian must be hermitian")
    if freq_tol is None:
        freq_tol = FREQ_TOL_FACTOR * scale
    evals, evecs = np.linalg.eigh(hermitize(h))

    # cluster the spectrum, then project the coupling onto each block pair
    bounds = [0]
    for i in range(1, len(evals)):
        if evals[i] - evals[i - 1] > freq_tol:
            bounds.append(i)
    bounds.append(len(evals))
    means = []
    blocks = []
    s = coupling.matrix
    for i in range(len(bounds) - 1):
        idx = slice(bounds[i], bounds[i + 1])
        means.append(float(np.mean(evals[idx])))
        blocks.append(evecs[:, idx])
    nc = len(means)
    s_rot = [[blocks[i].conj().T @ s @ blocks[j] for j in range(nc)]
             for i in range(nc)]

    def assemble(pairs) -> np.ndarray:
        acc = np.zeros_like(s)
        for i, j in pairs:
            acc += blocks[i] @ s_rot[i][j] @ blocks[j].conj().T
        return acc

    mags = np.array(sorted(means[j] - means[i]
                           for i in range(nc) for j in range(i + 1, nc)))
    s_scale = max(float(np.linalg.norm(s)), 1e-300)
    components: dict[float, DenseOperator] = {}
    zero_part = assemble((i, i) for i in range(nc))
    if np.linalg.norm(zero_part) > COMPONENT_DROP * s_scale:
        components[0.0] = DenseOperator(hamiltonian.support, zero_part)
    for m in _cluster_means(mags, freq_tol):
        up = [(i, j) for i in range(nc) for j in range(i + 1, nc)
              if abs(means[j] - means[i] - m) <= freq_tol]
        plus = assemble(up)
        minus = assemble((j, i) for i, j in up)
        if max(np.linalg.norm(plus), np.linalg.norm(minus)) <= COMPONENT_DROP * s_scale:
            continue
        components[m] = DenseOperator(hamiltonian.support, plus)
        components[-m] = DenseOperator(hamiltonian.support, minus)
    out = BohrDecomposition(hamiltonian.support,
                            tuple(sorted(components)), components)
    resid = np.linalg.norm(out.reconstruction() - s)
    if resid > 1e-10 * s_scale:
        raise ContractError(
            f"frequency components do not sum back to the coupling: {resid:.3e}")
    return out


def default_couplings(lattice: Lattice) -> dict[int, tuple[np.ndarray, ...]]:
    """The d^2 - 1 non-identity orthonormal Hermitian basis elements at
    every site (normalized Paulis for d = 2); their joint one-site
    commutant is everything acting only on the other sites."""
    family = tuple(herm_basis(lattice.local_dim)[1:])
    return {x: family for x in lattice.sites()}


def rate_profile(name: str, beta: float) -> Callable[[float], float]:
    """Transition rates for the named bath profile.

    glauber: g(w) = min(1, e^{beta w});  sqrt: g(w) = e^{beta w / 2}.
    The negative-frequency rate is assembled as e^{-beta|w|} g(|w|), so
    the balance identity g(-w) = e^{-beta w} g(w) holds bit-exactly.
    """
    if beta < 0.0:
        raise DomainError("beta must be nonnegative")
    if name == "glauber":
        def positive(w: float) -> float:
            return 1.0
    elif name == "sqrt":
        def positive(w: float) -> float:
            return math.exp(0.5 * beta * w)
    else:
        raise ParameterError(f"unknown rate profile {name!r}")

    def g(w: float) -> float:
        w = float(w)
        if w >= 0.0:
            return positive(w)
        return math.exp(beta * w) * positive(-w)

    return g


@dataclasses.dataclass(frozen=True)
class Jump:
    """One Lindblad operator V = g(w)^{1/2} S_{x,a}(w) on the full lattice."""

    site: int
    alpha: int
    omega: float
    v: DenseOperator


def _lindblad_sum(support: Region, vs: Sequence[np.ndarray],
                  label: str) -> SuperOperator:
    """sum_j ( V_j^dag Q V_j - 1/2 {V_j^dag V_j, Q} ), with its dual."""
    if not vs:
        return SuperOperator.zero(support)
    triples = [(v, v.conj().T, v.conj().T @ v) for v in vs]

    def apply(q: np.ndarray) -> np.ndarray:
        out = np.zeros_like(q, dtype=complex)
        for v, vd, k in triples:
            out += vd @ q @ v - 0.5 * (k @ q + q @ k)
        return out

    def apply_stack(st: np.ndarray) -> np.ndarray:
        out = np.zeros_like(st, dtype=complex)
        for v, vd, k in triples:
            out += vd @ st @ v - 0.5 * (k @ st + st @ k)
        return out

    def adjoint(r: np.ndarray) -> np.ndarray:
        out = np.zeros_like(r, dtype=complex)
        for v, vd, k in triples:
            out += v @ r @ vd - 0.5 * (k @ r + r @ k)
        return out

    def adjoint_stack(st: np.ndarray) -> np.ndarray:
        out = np.zeros_like(st, dtype=complex)
        for v, vd, k in triples:
            out += v @ st @ vd - 0.5 * (k @ st + st @ k)
        return out

    return SuperOperator(support, apply, apply_stack, label=label,
                         _adjoint_apply=adjoint, _adjoint_stack=adjoint_stack)


def derivation(hamiltonian: DenseOperator) -> SuperOperator:
    """Q -> i[H, Q]; anti-self-adjoint, so the dual carries -i."""
    h = hamiltonian.matrix

    def apply(q: np.ndarray) -> np.ndarray:
        return 1j * (h @ q - q @ h)

    def adjoint(r: np.ndarray) -> np.ndarray:
        return -1j * (h @ r - r @ h)

    return SuperOperator(hamiltonian.support, apply, apply, label="i[H,.]",
                         _adjoint_apply=adjoint, _adjoint_stack=adjoint)


@dataclasses.dataclass
class DaviesGenerator:
    """Weak-coupling generator L = i[H,.] + sum_x D_x in Heisenberg form."""

    hamiltonian: DenseOperator
    beta: float
    sigma: DensityMatrix
    jumps: tuple[Jump, ...]
    site_dissipators: dict[int, SuperOperator]
    dissipative: SuperOperator
    generator: SuperOperator
    profile: str


def build_davies(interaction: Interaction, beta: float, *,
                 couplings: dict[int, Sequence[np.ndarray]] | None = None,
                 profile: str = "glauber") -> DaviesGenerator:
    """Davies generator of a commuting interaction at inverse temperature beta.

    Frequency components of the one-site couplings are taken from the
    local boundary Hamiltonians; for commuting interactions these agree
    with the global decomposition while keeping every jump supported on
    the closure of its site.  The stationarity of the Gibbs state and
    unitality of the result are checked before returning.
    """
    lat = interaction.lattice
    lam = lat.full_region()
    d = lat.local_dim
    if beta < 0.0:
        raise DomainError("beta must be nonnegative")
    if lam.dim ** 2 > GEN_OP_CAP:
        raise CapacityError(
            f"generator on operator dimension {lam.dim ** 2} exceeds {GEN_OP_CAP}")
    if not interaction.commuting:
        raise CapabilityError(
            "the construction needs a commuting interaction; otherwise the "
            "frequency components of one-site couplings are not local")
    rates = rate_profile(profile, beta)
    if couplings is None:
        couplings = default_couplings(lat)
    sigma = gibbs_state(interaction, beta)
    h_full = interaction.hamiltonian()

    jumps: list[Jump] = []
    site_dissipators: dict[int, SuperOperator] = {}
    for x in lam.sites:
        if x not in couplings or not len(couplings[x]):
            raise ParameterError(f"no coupling operators for site {x}")
        hx = interaction.boundary_hamiltonian(Region(lat, (x,)))
        clo = hx.support
        vs: list[np.ndarray] = []
        for alpha, s in enumerate(couplings[x]):
            s = np.asarray(s, dtype=complex)
            if s.shape != (d, d):
                raise ParameterError(
                    f"coupling {alpha} at site {x} has shape {s.shape}, want {(d, d)}")
            if np.linalg.norm(s - s.conj().T) > 1e-12 * max(np.linalg.norm(s), 1.0):
                raise ParameterError("coupling operators must be hermitian")
            s_clo = DenseOperator(clo, embed_matrix(s, (x,), clo.sites, d))
            decomp = bohr_decompose(hx, s_clo)
            for w in decomp.frequencies:
                v = math.sqrt(rates(w)) * decomp.components[w].matrix
                v_full = embed_matrix(v, clo.sites, lam.sites, d)
                jumps.append(Jump(x, alpha, float(w), DenseOperator(lam, v_full)))
                vs.append(v_full)
        site_dissipators[x] = _lindblad_sum(lam, vs, label=f"D{x}")

    dissipative = _lindblad_sum(lam, [j.v.matrix for j in jumps], label="D")
    gen = derivation(h_full) + dissipative
    unital = opnorm(gen.apply(np.eye(lam.dim, dtype=complex)))
    if unital > UNITALITY_TOL:
        raise ContractError(f"generator is not unital: ||L(1)|| = {unital:.3e}")
    stationary = opnorm(gen.hs_adjoint().apply(sigma.matrix))
    if stationary > STATIONARITY_TOL:
        raise ContractError(
            f"thermal state is not stationary: ||L*(sigma)|| = {stationary:.3e}")
    return DaviesGenerator(h_full, float(beta), sigma, tuple(jumps),
                           site_dissipators, dissipative, gen, profile)


def jump_dissipator(gen: DaviesGenerator, site: int, alpha: int,
                    omega: float) -> SuperOperator:
    """The paired unit at (site, alpha, +/-omega).

    Pairing a frequency with its negative is what makes the unit
    reversible on its own; its kernel is the commutant of {V, V^dag}.
    """
    vs = [j.v.matrix for j in gen.jumps
          if j.site == site and j.alpha == alpha and
          (j.omega == omega or j.omega == -omega)]
    if not vs:
        raise ParameterError(
            f"no jump at site {site}, coupling {alpha}, frequency {omega}")
    return _lindblad_sum(gen.hamiltonian.support, vs,
                         label=f"D{site},{alpha},{abs(omega)}")


def commutant_dimension(operators: Sequence[np.ndarray]) -> int:
    """dim of the algebra commuting with every given operator, via the
    nullity of the stacked commutator maps."""
    ops = [np.asarray(v, dtype=complex) for v in operators]
    if not ops:
        raise ParameterError("commutant of an empty family is everything")
    dim = ops[0].shape[0]
    eye = np.eye(dim)
    rows = np.concatenate(
        [np.kron(eye, v.T) - np.kron(v, eye) for v in ops], axis=0)
    svals = np.linalg.svd(rows, compute_uv=False)
    top = svals[0] if len(svals) else 0.0
    return int(np.sum(svals <= 1e-10 * max(top, 1.0))) + max(0, dim * dim - len(svals))


def _map_norm(apply: Callable[[np.ndarray], np.ndarray],
              adjoint: Callable[[np.ndarray], np.ndarray],
              dim: int, seed: int) -> float:
    """Spectral norm by power iteration on the PSD composition T* T."""

    def matvec(v: np.ndarray) -> np.ndarray:
        return adjoint(apply(v.reshape(dim, dim))).ravel()

    lam = _lambda_max_estimate(matvec, dim * dim, seed, iters=POWER_ITERS)
    return math.sqrt(max(lam, 0.0))


def db_defect(d_op: SuperOperator, sigma: DensityMatrix, *, seed: int = 0) -> float:
    """Relative detailed balance defect ||Gamma D - D* Gamma|| / ||D||.

    Gamma is right multiplication by sigma.  The numerator map is
    anti-self-adjoint, so both norms come from power iteration on the
    corresponding PSD compositions.  The zero map returns 0.
    """
    if sigma.support != d_op.support:
        raise RegionError("dissipator and state live on different spaces")
    s = sigma.matrix
    dual = d_op.hs_adjoint()

    def t_apply(q: np.ndarray) -> np.ndarray:
        return d_op.apply(q) @ s - dual.apply(q @ s)

    dim = d_op.dim
    nd = _map_norm(d_op.apply, dual.apply, dim, seed)
    if nd < 1e-300:
        return 0.0
    nt = _map_norm(t_apply, lambda q: -t_apply(q), dim, seed)
    return nt / nd


def purified_dissipator(d_op: SuperOperator, sigma: DensityMatrix, *,
                        seed: int = 0) -> SuperOperator:
    """Conjugate -D by the square root of right multiplication by sigma.

    Requires the dissipator to be reversible for sigma; the result is a
    Hilbert-Schmidt positive semidefinite map with the same spectrum as
    -D under the weighted inner product, which makes the dissipative gap
    computable by Hermitian eigensolvers.  Hermiticity and positivity
    are spot-checked on random probes.
    """
    defect = db_defect(d_op, sigma, seed=seed)
    if defect > REVERSIBILITY_TOL:
        raise ContractError(
            f"dissipator is not reversible for this state: defect {defect:.3e}")
    root = sigma.sqrt
    inv_root = sigma.inv_sqrt
    dual = d_op.hs_adjoint()

    def apply(q: np.ndarray) -> np.ndarray:
        return -(d_op.apply(q @ inv_root)) @ root

    def apply_stack(st: np.ndarray) -> np.ndarray:
        return -(d_op.apply_stack(st @ inv_root)) @ root

    def adjoint(r: np.ndarray) -> np.ndarray:
        return -(dual.apply(r @ root)) @ inv_root

    def adjoint_stack(st: np.ndarray) -> np.ndarray:
        return -(dual.apply_stack(st @ root)) @ inv_root

    out = SuperOperator(d_op.support, apply, apply_stack,
                        label=f"purified({d_op.label})",
                        _adjoint_apply=adjoint, _adjoint_stack=adjoint_stack)
    rng = philox(seed, 4242)
    dim = d_op.dim
    for _ in range(4):
        a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        b = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        pa, pb = out.apply(a), out.apply(b)
        scale = max(np.linalg.norm(pa) * np.linalg.norm(b),
                    np.linalg.norm(pb) * np.linalg.norm(a), 1e-300)
        if abs(hs_inner(a, pb) - hs_inner(pa, b)) > 1e-6 * scale:
            raise ContractError("purified dissipator failed the hermiticity probe")
        if hs_inner(a, pa).real < -1e-6 * np.linalg.norm(a) * max(np.linalg.norm(pa), 1e-300):
            raise ContractError("purified dissipator failed the positivity probe")
    return out


def local_primitivity_check(d_op: SuperOperator, site: int,
                            sigma: DensityMatrix, *,
                            tol: float = 1e-8) -> tuple[bool, np.ndarray]:
    """Does every kernel element act as the identity on ``site``?

    Diagonalizes the purified dissipator densely, pulls each kernel
    vector back through the square-root weighting and compares it with
    identity tensor its partial trace.  Returns the verdict and the
    kernel basis (in purified coordinates) for inspection.
    """
    lam = sigma.support
    if site not in lam.sites:
        raise RegionError(f"site {site} not in the state's support")
    pur = purified_dissipator(d_op, sigma)
    m = pur.dense()
    evals, evecs = np.linalg.eigh(hermitize(m))
    top = float(np.abs(evals).max())
    cut = KERNEL_TOL_FACTOR * max(top, 1.0)
    kernel = [evecs[:, i].reshape(d_op.dim, d_op.dim)
              for i in range(len(evals)) if abs(evals[i]) <= cut]
    d = lam.lattice.local_dim
    rest = tuple(s for s in lam.sites if s != site)
    ok = True
    for k_mat in kernel:
        q = k_mat @ sigma.inv_sqrt
        traced = ptrace_matrix(q, lam.sites, rest, d) / d
        back = embed_matrix(traced, rest, lam.sites, d)
        if np.linalg.norm(q - back) > tol * max(np.linalg.norm(q), 1e-300):
            ok = False
    basis = np.stack(kernel) if kernel else np.zeros((0, d_op.dim, d_op.dim), complex)
    return ok, basis


@dataclasses.dataclass(frozen=True)
class GapComparison:
    """Dissipative gap against the product of local gaps and parent gap."""

    site_gaps: dict[int, float]
    dissipative_gap: float
    parent_gap: float
    lower_bound: float
    margin: float


def dissipator_gaps(gen: DaviesGenerator, *, seed: int = 0) -> GapComparison:
    """Measure gap(D_x), gap(D) and gap of the parent Hamiltonian.

    Asserts the comparison gap(D) >= min_x gap(D_x) gap(H) - 1e-8, with
    the parent Hamiltonian built from the same thermal state.
    """
    sigma = gen.sigma
    site_gaps = {
        x: spectral_gap(purified_dissipator(dx, sigma, seed=seed)).value
        for x, dx in gen.site_dissipators.items()}
    global_gap = spectral_gap(purified_dissipator(gen.dissipative, sigma,
                                                  seed=seed)).value
    parent_gap = spectral_gap(purified_hamiltonian(sigma)).value
    lower = min(site_gaps.values()) * parent_gap
    margin = global_gap - lower
    if margin < -1e-8:
        raise VerificationError(
            f"dissipative gap {global_gap:.6e} undercuts the local bound "
            f"{lower:.6e} by {-margin:.3e}")
    return GapComparison(site_gaps, global_gap, parent_gap, lower, margin)


@dataclasses.dataclass(frozen=True)
class EvolutionResult:
    """Semigroup trajectory with the distance-to-equilibrium envelope."""

    times: tuple[float, ...]
    states: np.ndarray
    distances: tuple[float, ...]
    bounds: tuple[float, ...]
    dissipative_gap: float


def evolve(gen: DaviesGenerator, rho0: DensityMatrix,
           times: Sequence[float], *, seed: int = 0) -> EvolutionResult:
    """Run rho(t) = e^{t L*} rho0 densely and check the decay envelope.

    Each state must keep unit trace within 1e-9 and smallest eigenvalue
    above -1e-9; the trace distance to the thermal state must stay below
    sigma_min^{-1/2} e^{-t gap(D)} + 1e-8 pointwise.
    """
    lam = gen.hamiltonian.support
    if rho0.support != lam:
        raise RegionError("initial state lives on a different space")
    if gen.generator.op_dim > DENSE_OP_CAP:
        raise CapacityError(
            f"dense propagator on operator dimension {gen.generator.op_dim} "
            f"exceeds {DENSE_OP_CAP}")
    times = [float(t) for t in times]
    if any(t < 0.0 for t in times):
        raise DomainError("evolution times must be nonnegative")
    comp = dissipator_gaps(gen, seed=seed)
    dual_dense = gen.generator.hs_adjoint().dense()
    dim = lam.dim
    pref = gen.sigma.min_eigenvalue ** -0.5
    v0 = rho0.matrix.ravel()
    states = []
    distances = []
    bounds = []
    for t in times:
        rho = (scipy.linalg.expm(t * dual_dense) @ v0).reshape(dim, dim)
        if not np.all(np.isfinite(rho)):
            raise NumericalError(f"propagator at t={t} did not converge")
        tr = complex(np.trace(rho))
        if abs(tr - 1.0) > 1e-9:
            raise NumericalError(f"trace drifted to {tr} at t={t}")
        low = float(np.linalg.eigvalsh(hermitize(rho))[0])
        if low < -1e-9:
            raise NumericalError(f"negative eigenvalue {low:.3e} at t={t}")
        dist = herm_trace_norm(hermitize(rho) - gen.sigma.matrix)
        bound = pref * math.exp(-t * comp.dissipative_gap)
        if dist > bound + 1e-8:
            raise VerificationError(
                f"trace distance {dist:.6e} exceeds the envelope {bound:.6e} "
                f"at t={t}")
        states.append(rho)
        distances.append(dist)
        bounds.append(bound)
    return EvolutionResult(tuple(times), np.stack(states) if states else
                           np.zeros((0, dim, dim), complex),
                           tuple(distances), tuple(bounds),
                           comp.dissipative_gap)


def gns_negativity(gen: DaviesGenerator, *, probes: int = 8,
                   seed: int = 0) -> float:
    """Largest value of <Q, D_j(Q)>_sigma over random probes and jumps.

    Every paired unit is negative semidefinite for the weighted inner
    product, so the result should not exceed numerical noise.
    """
    rng = philox(seed, 515)
    dim = gen.hamiltonian.support.dim
    seen = set()
    worst = -math.inf
    for j in gen.jumps:
        key = (j.site, j.alpha, abs(j.omega))
        if key in seen:
            continue
        seen.add(key)
        unit = jump_dissipator(gen, j.site, j.alpha, j.omega)
        for _ in range(probes):
            q = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
            q /= np.linalg.norm(q)
            worst = max(worst, gns_inner(gen.sigma.matrix, q, unit.apply(q)).real)
    return worst
