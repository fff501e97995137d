"""Conditional mixing coefficients of a state across a four-way split.

delta(A : C | D) is the operator norm of the conditional covariance
bilinear form: observables on C u D against observables on A u D, each
normalized in the thermal (GNS) inner product of its marginal, tested
against sigma_ACD minus the Markov product sigma_AD sigma_D^{-1} sigma_DC.
The direct route whitens the form with marginal Cholesky factors and
takes a singular value; it agrees with the projector-difference norm
computed by :func:`gibbsgap.purified.martingale_defect`, and the
mean-zero-constrained route gives the same number a third way.
"""

from __future__ import annotations

import dataclasses
import itertools

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .algebra import (
    DenseOperator,
    DensityMatrix,
    Region,
    embed_matrix,
    herm_basis,
    herm_trace_norm,
    hermitize,
    matrix_sign,
    opnorm,
    philox,
    ptrace_matrix,
)
from .errors import (
    CapacityError,
    ContractError,
    GeometryError,
    NumericalError,
    ParameterError,
    PartitionError,
    RankError,
    VerificationError,
)

OP_SPACE_CAP = 4096        # largest operator-space dimension for the dense routes
ROUTE_TOL = 1e-8           # direct / constrained / projector routes must agree
CONSISTENCY_TOL = 1e-10    # witness value must reproduce the singular value
WITNESS_NORM_TOL = 1e-10   # GNS normalization of returned witnesses
CHOL_JITTER = 1e-14        # relative jitter added only if Cholesky fails
COMMUTING_TOL = 1e-10      # marginal commutator threshold for the commuting bound
SCAN_CAP = 4096            # product-basis pairs tried in the corr_lower scan
SVD_DENSE_CAP = 1 << 22    # whitened-form entries above which only the top
                           # singular triplet is computed (residual-checked)
SVD_TOP_TOL = 1e-9         # relative residual allowed for that triplet


@dataclasses.dataclass(frozen=True)
class Partition:
    """Pairwise disjoint regions A, B, C, D covering the whole lattice.

    B is the traced buffer between A and C; D is the conditioning
    shield shared by both sides.  B and D may be empty; A and C not.
    """

    a: Region
    b: Region
    c: Region
    d: Region

    def __post_init__(self):
        parts = (self.a, self.b, self.c, self.d)
        lat = self.a.lattice
        if any(p.lattice != lat for p in parts):
            raise PartitionError("partition blocks live on different lattices")
        if self.a.is_empty or self.c.is_empty:
            raise PartitionError("blocks A and C must be nonempty")
        names = "ABCD"
        for i in range(4):
            for j in range(i + 1, 4):
                over = set(parts[i].sites) & set(parts[j].sites)
                if over:
                    raise PartitionError(
                        f"blocks {names[i]} and {names[j]} overlap at "
                        f"sites {sorted(over)}")
        covered = set().union(*(p.sites for p in parts))
        missing = set(lat.sites()) - covered
        if missing:
            raise PartitionError(
                f"partition does not cover sites {sorted(missing)}")

    @property
    def lattice(self):
        return self.a.lattice

    def blocks(self) -> dict[str, Region]:
        return {"A": self.a, "B": self.b, "C": self.c, "D": self.d}

    def __repr__(self):
        fmt = lambda r: ",".join(map(str, r.sites))
        return (f"Partition(A={fmt(self.a)};B={fmt(self.b)};"
                f"C={fmt(self.c)};D={fmt(self.d)})")


@dataclasses.dataclass
class BoundRecord:
    """Spectral bounds on delta; entries are None when inapplicable.

    half_sum_upper always applies.  d_empty_upper is the one-sided
    norm available when D is empty; commuting_upper needs the ACD
    marginals to commute (residual reported); corr_lower is the
    operator-covariance lower bound, meaningful only for D empty.
    """

    half_sum_upper: float
    d_empty_upper: float | None
    commuting_upper: float | None
    corr_lower: float | None
    commutator_residual: float

    def uppers(self) -> list[float]:
        vals = (self.half_sum_upper, self.d_empty_upper, self.commuting_upper)
        return [v for v in vals if v is not None]


@dataclasses.dataclass
class MixingReport:
    """delta plus the GNS-normalized optimizers and the bound bracket."""

    partition: Partition
    delta: float
    method: str
    witness_q: DenseOperator    # on C u D
    witness_r: DenseOperator    # on A u D
    bounds: BoundRecord | None
    consistency: float          # |bilinear(witnesses)| minus the singular value
    jittered: bool = False


def _block_marginal(sigma: DensityMatrix, order: tuple[int, ...]) -> np.ndarray:
    """Marginal on the given sites, axes permuted into ``order``."""
    if not order:
        return np.ones((1, 1), dtype=complex)
    sorted_sites = tuple(sorted(order))
    mat = sigma.marginal(sorted_sites).matrix
    return embed_matrix(mat, sorted_sites, order, sigma.support.lattice.local_dim)


def _chol(mat: np.ndarray) -> tuple[np.ndarray, bool]:
    try:
        return np.linalg.cholesky(mat), False
    except np.linalg.LinAlgError:
        dim = mat.shape[0]
        jitter = CHOL_JITTER * max(float(np.trace(mat).real) / dim, 1e-300)
        try:
            return np.linalg.cholesky(mat + jitter * np.eye(dim)), True
        except np.linalg.LinAlgError:
            raise RankError(
                "GNS Gram matrix is not positive definite; "
                "the state is rank-deficient on a marginal") from None


def _markov_pieces(sigma: DensityMatrix, p: Partition):
    """Block-ordered marginals and the covariance kernel pieces on (A, C, D)."""
    d = sigma.support.lattice.local_dim
    a_s, c_s, d_s = p.a.sites, p.c.sites, p.d.sites
    acd = a_s + c_s + d_s
    sig_acd = _block_marginal(sigma, acd)
    sig_ad = _block_marginal(sigma, a_s + d_s)
    sig_cd = _block_marginal(sigma, c_s + d_s)
    sig_d = _block_marginal(sigma, d_s)
    inv_d = np.linalg.inv(sig_d)
    emb = lambda m, sup: embed_matrix(m, sup, acd, d)
    markov = emb(sig_ad, a_s + d_s) @ emb(inv_d, d_s) @ emb(sig_cd, c_s + d_s)
    return sig_acd, sig_ad, sig_cd, markov, acd


def _covariance_form(sigma: DensityMatrix, p: Partition) -> tuple[np.ndarray, ...]:
    """The bilinear form as a matrix W: vec(Q)^dag W vec(R), plus marginals."""
    da = p.a.dim
    dc = p.c.dim
    dd = p.d.dim
    if (dc * dd) ** 2 > OP_SPACE_CAP or (da * dd) ** 2 > OP_SPACE_CAP:
        raise CapacityError(
            "operator space too large for the dense covariance form; "
            "use the projector-difference route (martingale_defect)")
    sig_acd, sig_ad, sig_cd, markov, acd = _markov_pieces(sigma, p)
    k = sig_acd - markov
    k6 = k.reshape(da, dc, dd, da, dc, dd)
    # Tr[K (Q^dag x 1_A)(R x 1_C)] contracts the shared D leg of Q and R
    w8 = np.einsum("acdbef,gh->cgefbhad", k6, np.eye(dd))
    w = w8.reshape((dc * dd) ** 2, (da * dd) ** 2)
    return w, k, sig_cd, sig_ad, acd


def _svd_top(m: np.ndarray) -> tuple[np.ndarray, float, np.ndarray]:
    """Largest singular triplet of a form too big to factor in full.

    Lanczos with a fixed, shape-derived start vector (so repeated runs
    and parallel workers agree bit for bit); a handful of extra Ritz
    pairs guards against locking onto a lower triplet, and both
    residuals are checked before the top pair is trusted.
    """
    rng = philox(m.shape[0], m.shape[1], 71)
    v0 = rng.normal(size=min(m.shape))
    k = min(6, min(m.shape) - 1)
    u, s, vt = scipy.sparse.linalg.svds(m, k=k, v0=v0, maxiter=5000)
    top = int(np.argmax(s))
    uv, sv, vv = u[:, top], float(s[top]), vt[top]
    scale = max(sv, 1e-300)
    resid = max(float(np.linalg.norm(m @ vv.conj() - sv * uv)),
                float(np.linalg.norm(m.conj().T @ uv - sv * vv.conj())))
    if resid > SVD_TOP_TOL * scale:
        raise NumericalError(
            f"top singular triplet residual {resid:.3e} too large "
            f"for value {sv:.6e}")
    return uv, sv, vv


def _whitened_sup(w: np.ndarray, gram_q: np.ndarray, gram_r: np.ndarray):
    """sup |q^dag W r| over GNS-unit q, r with Grams I (x) marg^T."""
    dq = gram_q.shape[0]
    dr = gram_r.shape[0]
    lq, jq = _chol(gram_q.T)
    lr, jr = _chol(gram_r.T)
    mq = scipy.linalg.solve_triangular(lq, np.eye(dq), lower=True)
    mr = scipy.linalg.solve_triangular(lr, np.eye(dr), lower=True)
    w4 = w.reshape(dq, dq, dr, dr)
    wt = np.einsum("xj,kjab,yb->kxay", mq, w4, np.conj(mr),
                   optimize=True)
    mat = wt.reshape(dq * dq, dr * dr)
    if mat.size > SVD_DENSE_CAP:
        u_top, value, v_top = _svd_top(mat)
    else:
        u, s, vt = np.linalg.svd(mat)
        u_top, value, v_top = u[:, 0], float(s[0]), vt[0]
    q_mat = u_top.reshape(dq, dq) @ np.conj(mq)
    r_mat = v_top.conj().reshape(dr, dr) @ np.conj(mr)
    return value, q_mat, r_mat, jq or jr


def _bilinear_value(k: np.ndarray, q_mat, r_mat, q_sites, r_sites, acd, d) -> complex:
    qe = embed_matrix(q_mat, q_sites, acd, d)
    re = embed_matrix(r_mat, r_sites, acd, d)
    return complex(np.trace(k @ qe.conj().T @ re))


def _witness_operator(mat: np.ndarray, block_sites, marg: np.ndarray,
                      lattice) -> DenseOperator:
    """Package a block-ordered witness on sorted sites, checking its norm."""
    gns = complex(np.trace(marg @ mat.conj().T @ mat)).real
    if abs(gns - 1.0) > WITNESS_NORM_TOL:
        raise ContractError(f"witness GNS norm {gns:.3e} is not 1")
    region = Region(lattice, block_sites)
    sorted_mat = embed_matrix(mat, block_sites, region.sites, lattice.local_dim)
    return DenseOperator(region, sorted_mat)


def _sandwich_check(delta: float, bounds: BoundRecord) -> None:
    uppers = bounds.uppers()
    if uppers and delta > min(uppers) + ROUTE_TOL:
        raise ContractError(
            f"delta {delta:.6e} exceeds upper bound {min(uppers):.6e}")
    if bounds.corr_lower is not None and bounds.corr_lower - ROUTE_TOL > delta:
        raise ContractError(
            f"delta {delta:.6e} below correlation lower bound "
            f"{bounds.corr_lower:.6e}")


def delta_direct(sigma: DensityMatrix, partition: Partition) -> MixingReport:
    """delta(A : C | D) by whitened SVD of the covariance form.

    The report carries the witnesses (already permuted to sorted site
    order), the applicable upper/lower bounds, and the witness
    consistency residual.
    """
    d = sigma.support.lattice.local_dim
    w, k, sig_cd, sig_ad, acd = _covariance_form(sigma, partition)
    value, q_mat, r_mat, jittered = _whitened_sup(w, sig_cd, sig_ad)
    q_sites = partition.c.sites + partition.d.sites
    r_sites = partition.a.sites + partition.d.sites
    direct = _bilinear_value(k, q_mat, r_mat, q_sites, r_sites, acd, d)
    consistency = abs(abs(direct) - value)
    if consistency > CONSISTENCY_TOL * max(1.0, value):
        raise ContractError(
            f"witness consistency check failed: |{abs(direct):.3e}| vs {value:.3e}")
    lattice = sigma.support.lattice
    wq = _witness_operator(q_mat, q_sites, sig_cd, lattice)
    wr = _witness_operator(r_mat, r_sites, sig_ad, lattice)
    bounds = delta_upper_bounds(sigma, partition)
    _sandwich_check(value, bounds)
    return MixingReport(partition, value, "direct", wq, wr,
                        bounds, consistency, jittered)


def _constraint_matrix(sig_block: np.ndarray, d_traced: int, d_kept: int) -> np.ndarray:
    """vec(Q) -> vec(Tr_traced(Q sig_block)); block order (traced, kept)."""
    dq = d_traced * d_kept
    out = np.empty((d_kept * d_kept, dq * dq), dtype=complex)
    for col in range(dq * dq):
        e = np.zeros(dq * dq)
        e[col] = 1.0
        prod = e.reshape(dq, dq) @ sig_block
        t = prod.reshape(d_traced, d_kept, d_traced, d_kept)
        out[:, col] = np.einsum("ajai->ji", t).ravel()
    return out


def delta_constrained(sigma: DensityMatrix, partition: Partition) -> float:
    """Same supremum restricted to mean-zero observables on each side.

    The restriction removes the marginal-mean directions
    (Tr_C(Q sigma_CD) = 0 and Tr_A(R sigma_AD) = 0) without changing
    the value; agreement with delta_direct is asserted before the
    constrained number is returned.
    """
    d = sigma.support.lattice.local_dim
    w, k, sig_cd, sig_ad, acd = _covariance_form(sigma, partition)
    dc, dd, da = partition.c.dim, partition.d.dim, partition.a.dim

    null_q = scipy.linalg.null_space(_constraint_matrix(sig_cd, dc, dd))
    null_r = scipy.linalg.null_space(_constraint_matrix(sig_ad, da, dd))
    if null_q.shape[1] == 0 or null_r.shape[1] == 0:
        raise ParameterError("mean-zero constraint removed the whole space")

    gram_q = null_q.conj().T @ np.kron(np.eye(dc * dd), sig_cd.T) @ null_q
    gram_r = null_r.conj().T @ np.kron(np.eye(da * dd), sig_ad.T) @ null_r
    wc = null_q.conj().T @ w @ null_r

    lq, _ = _chol(hermitize(gram_q))
    lr, _ = _chol(hermitize(gram_r))
    mq = scipy.linalg.solve_triangular(lq, np.eye(lq.shape[0]), lower=True)
    mr = scipy.linalg.solve_triangular(lr, np.eye(lr.shape[0]), lower=True)
    u, s, vt = np.linalg.svd(mq @ wc @ mr.conj().T)
    value = float(s[0])
    q_mat = (null_q @ (mq.conj().T @ u[:, 0])).reshape(dc * dd, dc * dd)
    r_mat = (null_r @ (mr.conj().T @ vt[0].conj())).reshape(da * dd, da * dd)

    q_sites = partition.c.sites + partition.d.sites
    r_sites = partition.a.sites + partition.d.sites
    direct = _bilinear_value(k, q_mat, r_mat, q_sites, r_sites, acd, d)
    if abs(abs(direct) - value) > CONSISTENCY_TOL * max(1.0, value):
        raise ContractError(
            f"witness consistency check failed: |{abs(direct):.3e}| vs {value:.3e}")

    unconstrained = delta_direct(sigma, partition).delta
    if abs(value - unconstrained) > ROUTE_TOL:
        raise VerificationError(
            f"constrained supremum {value:.10e} disagrees with the "
            f"unconstrained value {unconstrained:.10e}")
    return value


def delta_upper_bounds(sigma: DensityMatrix, partition: Partition) -> BoundRecord:
    """Every applicable spectral bound on delta for this partition.

    The commuting form needs all three Markov factors to commute with
    each other (checked; largest relative commutator reported); the
    one-sided norm and the covariance lower bound need D empty.
    """
    sig_acd, sig_ad, sig_cd, markov, acd = _markov_pieces(sigma, partition)
    inv_acd = np.linalg.inv(sig_acd)
    eye = np.eye(sig_acd.shape[0])
    half_sum = 0.5 * (opnorm(eye - markov @ inv_acd) + opnorm(eye - inv_acd @ markov))

    d_empty = partition.d.is_empty
    d_empty_upper = opnorm(eye - markov @ inv_acd) if d_empty else None

    d = sigma.support.lattice.local_dim
    a_s, c_s, d_s = partition.a.sites, partition.c.sites, partition.d.sites
    emb = lambda m, sup: embed_matrix(m, sup, acd, d)
    pieces = [emb(sig_ad, a_s + d_s), emb(sig_cd, c_s + d_s),
              emb(_block_marginal(sigma, d_s), d_s)]
    resid = 0.0
    for i in range(len(pieces)):
        for j in range(i + 1, len(pieces)):
            comm = pieces[i] @ pieces[j] - pieces[j] @ pieces[i]
            scale = max(np.linalg.norm(pieces[i]) * np.linalg.norm(pieces[j]), 1e-300)
            resid = max(resid, float(np.linalg.norm(comm)) / scale)
    commuting = None
    if resid <= COMMUTING_TOL:
        commuting = 1.0 - 1.0 / opnorm(markov @ inv_acd)

    lower = corr_lower(sigma, partition.a, partition.c) if d_empty else None
    return BoundRecord(float(half_sum), d_empty_upper, commuting, lower, resid)


def _site_sign_basis(d: int) -> list[np.ndarray]:
    """Hermitian unitaries spanning one site: signs of a Hermitian basis."""
    return [matrix_sign(b) for b in herm_basis(d)]


def corr_lower(sigma: DensityMatrix, a: Region, c: Region, *,
               grid: int = 64, iters: int = 50) -> float:
    """Best covariance |Tr(sigma Qc Qa) - Tr(sigma Qc) Tr(sigma Qa)|
    found over Hermitian contractions; a lower bound on delta(A : C | empty).

    Seeded by a scan over tensor products of single-site Hermitian
    unitaries (Pauli-type on qubits), then improved by alternating
    ascent: freezing one side reduces the other to a trace functional,
    optimized exactly on a phase grid by a sign function.  Every
    iterate is feasible, so the result is a certified lower bound;
    no claim is made that the scan finds the global supremum.
    """
    if set(a.sites) & set(c.sites):
        raise PartitionError("corr_lower regions must be disjoint")
    lam = sigma.support
    d = lam.lattice.local_dim
    full = sigma.matrix

    def embed_full(q, sites):
        return embed_matrix(q, sites, lam.sites, d)

    def objective(qa, qc):
        qa_e = embed_full(qa, a.sites)
        qc_e = embed_full(qc, c.sites)
        joint = np.trace(full @ qc_e @ qa_e)
        return abs(complex(joint) - np.trace(full @ qc_e) * np.trace(full @ qa_e))

    def best_response(q_fixed, fixed_sites, free: Region):
        x = full @ embed_full(q_fixed, fixed_sites)
        kmat = ptrace_matrix(x - np.trace(x) * full, lam.sites, free.sites, d)
        best_val, best_q = -1.0, None
        for theta in np.linspace(0.0, np.pi, grid, endpoint=False):
            h = hermitize(np.exp(-1j * theta) * kmat)
            val = herm_trace_norm(h)
            if val > best_val:
                best_val, best_q = val, matrix_sign(h)
        return best_q

    def products(region: Region):
        singles = _site_sign_basis(d)
        for combo in itertools.product(singles, repeat=len(region.sites)):
            op = np.eye(1, dtype=complex)
            for factor in combo:
                op = np.kron(op, factor)
            yield op

    best = 0.0
    best_pair = None
    for qa, qc in itertools.islice(
            itertools.product(products(a), products(c)), SCAN_CAP):
        val = objective(qa, qc)
        if val > best:
            best, best_pair = val, (qa, qc)
    if best_pair is None:
        return 0.0
    qa, qc = best_pair
    for _ in range(iters):
        qc = best_response(qa, a.sites, c)
        qa = best_response(qc, c.sites, a)
        val = objective(qa, qc)
        if val <= best + 1e-12:
            best = max(best, val)
            break
        best = val
    return float(best)


def shield_partition(lattice, ell: int, *, a_len: int = 1, c_len: int = 1,
                     start: int = 0, conditioning: str = "none") -> Partition:
    """Ring partition A | I1 | C | I2 with both separating arcs >= ell.

    I1 has width exactly ell; ``conditioning`` picks D: "none"
    (D empty, both arcs buffered), "near" (D = I1), "far" (D = I2).
    """
    if lattice.kind != "ring":
        raise GeometryError("shield partitions are defined on rings")
    n = lattice.site_count
    i2_len = n - a_len - c_len - ell
    if ell < 1 or a_len < 1 or c_len < 1:
        raise PartitionError("block lengths must be positive")
    if i2_len < ell:
        raise PartitionError(
            f"ring of {n} sites cannot separate by {ell} on both sides "
            f"with |A|={a_len}, |C|={c_len}")
    cursor = start % n
    def take(length):
        nonlocal cursor
        sites = tuple((cursor + j) % n for j in range(length))
        cursor += length
        return Region(lattice, sites)
    a = take(a_len)
    i1 = take(ell)
    c = take(c_len)
    i2 = take(i2_len)
    if conditioning == "none":
        return Partition(a, i1 | i2, c, Region(lattice, ()))
    if conditioning == "near":
        return Partition(a, i2, c, i1)
    if conditioning == "far":
        return Partition(a, i1, c, i2)
    raise ParameterError(f"unknown conditioning {conditioning!r}")


def _ring_arcs(lattice, excluded: set[int]) -> list[tuple[int, ...]]:
    """Cyclically contiguous runs of the complement of ``excluded``."""
    n = lattice.site_count
    rest = [s for s in lattice.sites() if s not in excluded]
    arcs = []
    for s in rest:
        if (s - 1) % n in excluded:
            arc = [s]
            nxt = (s + 1) % n
            while nxt not in excluded and nxt != s:
                arc.append(nxt)
                nxt = (nxt + 1) % n
            arcs.append(tuple(arc))
    return arcs


def _check_shield_geometry(partition: Partition, ell: int) -> None:
    """A and C must be intervals separated by two arcs, the smaller of
    width ell, and D must be empty or a union of whole arcs."""
    lat = partition.lattice
    if lat.kind != "ring":
        raise GeometryError("decay scans run on ring lattices")
    if not (partition.a.is_ring_interval and partition.c.is_ring_interval):
        raise PartitionError("blocks A and C must be ring intervals")
    arcs = _ring_arcs(lat, set(partition.a.sites) | set(partition.c.sites))
    if len(arcs) != 2:
        raise PartitionError(
            f"A and C must be separated on both sides; found {len(arcs)} arcs")
    if min(len(arc) for arc in arcs) != ell:
        raise PartitionError(
            f"separation {min(len(a) for a in arcs)} does not match ell={ell}")
    d_set = set(partition.d.sites)
    allowed = [set(), set(arcs[0]), set(arcs[1]), set(arcs[0]) | set(arcs[1])]
    if d_set not in allowed:
        raise PartitionError("D must be empty or a union of separating arcs")


@dataclasses.dataclass
class DecayRow:
    ell: int
    delta: float
    envelope: float | None    # closed-form Ising bound, when applicable


def delta_decay_scan(interaction, beta: float,
                     partitions: list[tuple[int, Partition]]) -> list[DecayRow]:
    """delta at a sequence of separations; the workhorse behind decay plots.

    Each entry pairs a separation ell with a partition realizing the
    shielded ring geometry (A and C intervals, two buffer arcs, the
    narrower of width ell).  For the Ising ring the closed-form decay
    envelope rides along for comparison.
    """
    from .gibbs import gibbs_state
    from .models import is_ising_ring

    sigma = gibbs_state(interaction, beta)
    ising = is_ising_ring(interaction)
    envelope = None
    if ising:
        from .certify import ising_delta
        envelope = ising_delta
    rows = []
    for ell, partition in partitions:
        if partition.lattice != interaction.lattice:
            raise PartitionError("partition lattice does not match the model")
        _check_shield_geometry(partition, int(ell))
        value = delta_direct(sigma, partition).delta
        env = float(envelope(int(ell), beta)) if envelope is not None else None
        rows.append(DecayRow(int(ell), value, env))
    return rows
