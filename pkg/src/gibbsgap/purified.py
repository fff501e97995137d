"""Projectors and Hamiltonians on the purification side.

Operators ``Q`` carry the GNS weighting through the fixed square root:
the subspace attached to a region ``X`` is ``B(H_{X^c}) sigma^{1/2}``,
and ``pi_project(sigma, X)`` is the Hilbert-Schmidt orthogonal projector
onto it.  Summing the single-site complements gives the frustration-free
parent Hamiltonian whose kernel is the line through ``sigma^{1/2}``.
"""

from __future__ import annotations

import dataclasses
from typing import Callable

import numpy as np

from .algebra import (
    DensityMatrix,
    Region,
    embed_matrix,
    embed_stack,
    func_hermitian,
    hermitize,
    opnorm,
    philox,
    ptrace_matrix,
    ptrace_stack,
)
from .errors import (
    CapacityError,
    DomainError,
    NumericalError,
    ParameterError,
    PartitionError,
    RegionError,
)
from .models import Interaction

DENSE_OP_CAP = 4096          # largest operator-space dimension built densely
KERNEL_TOL_FACTOR = 1e-10    # kernel threshold, relative to the spectral radius
AMBIGUITY_FACTOR = 10.0      # eigenvalues within [tol, 10 tol) trigger a warning
ITER_RESIDUAL_TOL = 1e-8


@dataclasses.dataclass(eq=False)
class SuperOperator:
    """A linear map on operators over ``support``'s Hilbert space.

    Stays matrix-free; ``dense()`` materializes the op_dim x op_dim
    matrix in vec coordinates (row-major) and is capped at operator
    dimension 4096.
    """

    support: Region
    _apply: Callable[[np.ndarray], np.ndarray]
    _apply_stack: Callable[[np.ndarray], np.ndarray] | None = None
    label: str = ""
    _adjoint_apply: Callable[[np.ndarray], np.ndarray] | None = None
    _adjoint_stack: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        self._dense_cache: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.support.dim

    @property
    def op_dim(self) -> int:
        return self.support.dim ** 2

    def apply(self, q: np.ndarray) -> np.ndarray:
        return self._apply(q)

    __call__ = apply

    def apply_stack(self, stack: np.ndarray) -> np.ndarray:
        if self._apply_stack is not None:
            return self._apply_stack(stack)
        return np.stack([self._apply(q) for q in stack])

    def dense(self) -> np.ndarray:
        if self._dense_cache is not None:
            return self._dense_cache
        n = self.op_dim
        if n > DENSE_OP_CAP:
            raise CapacityError(
                f"dense superoperator on operator dimension {n} exceeds {DENSE_OP_CAP}")
        d = self.dim
        units = np.eye(n).reshape(n, d, d)
        out = np.empty((n, n), dtype=complex)
        block = max(1, (1 << 22) // n)
        for k0 in range(0, n, block):
            chunk = self.apply_stack(units[k0:k0 + block])
            out[:, k0:k0 + chunk.shape[0]] = chunk.reshape(chunk.shape[0], n).T
        self._dense_cache = out
        return out

    def compose(self, other: "SuperOperator") -> "SuperOperator":
        self._check_support(other)
        adj = adj_st = None
        if self._adjoint_apply is not None and other._adjoint_apply is not None:
            adj = lambda q: other._adjoint_apply(self._adjoint_apply(q))
            if self._adjoint_stack is not None and other._adjoint_stack is not None:
                adj_st = lambda st: other._adjoint_stack(self._adjoint_stack(st))
        return SuperOperator(
            self.support,
            lambda q: self._apply(other._apply(q)),
            lambda st: self.apply_stack(other.apply_stack(st)),
            label=f"({self.label} o {other.label})",
            _adjoint_apply=adj, _adjoint_stack=adj_st)

    __matmul__ = compose

    def __add__(self, other: "SuperOperator") -> "SuperOperator":
        self._check_support(other)
        adj = adj_st = None
        if self._adjoint_apply is not None and other._adjoint_apply is not None:
            adj = lambda q: self._adjoint_apply(q) + other._adjoint_apply(q)
            if self._adjoint_stack is not None and other._adjoint_stack is not None:
                adj_st = lambda st: self._adjoint_stack(st) + other._adjoint_stack(st)
        return SuperOperator(
            self.support,
            lambda q: self._apply(q) + other._apply(q),
            lambda st: self.apply_stack(st) + other.apply_stack(st),
            label=f"({self.label} + {other.label})",
            _adjoint_apply=adj, _adjoint_stack=adj_st)

    def __sub__(self, other: "SuperOperator") -> "SuperOperator":
        return self + (-1.0) * other

    def __rmul__(self, scalar) -> "SuperOperator":
        c = complex(scalar)
        adj = adj_st = None
        if self._adjoint_apply is not None:
            adj = lambda q: c.conjugate() * self._adjoint_apply(q)
            if self._adjoint_stack is not None:
                adj_st = lambda st: c.conjugate() * self._adjoint_stack(st)
        return SuperOperator(self.support,
                             lambda q: c * self._apply(q),
                             lambda st: c * self.apply_stack(st),
                             label=f"({scalar} * {self.label})",
                             _adjoint_apply=adj, _adjoint_stack=adj_st)

    def __neg__(self) -> "SuperOperator":
        return (-1.0) * self

    def hs_adjoint(self) -> "SuperOperator":
        """Adjoint for the Hilbert-Schmidt pairing.

        Uses the attached adjoint rule when the map was built with one;
        otherwise transposes the dense matrix, subject to the same
        capacity limit as ``dense()``.
        """
        if self._adjoint_apply is not None:
            return SuperOperator(self.support, self._adjoint_apply,
                                 self._adjoint_stack, label=self.label + "*",
                                 _adjoint_apply=self._apply,
                                 _adjoint_stack=self._apply_stack)
        m = self.dense().conj().T
        d = self.dim

        def apply(q: np.ndarray) -> np.ndarray:
            return (m @ np.asarray(q, dtype=complex).ravel()).reshape(d, d)

        def apply_stack(st: np.ndarray) -> np.ndarray:
            flat = np.asarray(st, dtype=complex).reshape(len(st), -1)
            return (flat @ m.T).reshape(np.shape(st))

        return SuperOperator(self.support, apply, apply_stack,
                             label=self.label + "*",
                             _adjoint_apply=self._apply,
                             _adjoint_stack=self._apply_stack)

    @classmethod
    def identity(cls, support: Region) -> "SuperOperator":
        one = lambda q: q
        return cls(support, one, one, label="Id",
                   _adjoint_apply=one, _adjoint_stack=one)

    @classmethod
    def zero(cls, support: Region) -> "SuperOperator":
        nil = lambda q: np.zeros_like(q, dtype=complex)
        return cls(support, nil, nil, label="0",
                   _adjoint_apply=nil, _adjoint_stack=nil)

    def _check_support(self, other: "SuperOperator") -> None:
        if self.support != other.support:
            raise RegionError("superoperators act on different spaces")

    def __repr__(self):
        return f"SuperOperator({self.label or 'anon'}, dim={self.dim})"


def pi_project(sigma: DensityMatrix, region: Region) -> SuperOperator:
    """HS-orthogonal projector whose image is B(H_{region^c}) sigma^{1/2}.

    Acts by weighting with sigma^{1/2}, tracing out ``region``, dividing
    by the complementary marginal and embedding back.
    """
    lam = sigma.support
    if region.lattice != lam.lattice or set(region.sites) - set(lam.sites):
        raise RegionError(f"region {region.sites} is not inside the state's support")
    if region.is_empty:
        return SuperOperator.identity(lam)
    d = lam.lattice.local_dim
    keep = tuple(s for s in lam.sites if s not in set(region.sites))
    root = sigma.sqrt
    inv_marg = sigma.marginal(keep).inv

    def apply(q: np.ndarray) -> np.ndarray:
        t = ptrace_matrix(q @ root, lam.sites, keep, d) @ inv_marg
        return embed_matrix(t, keep, lam.sites, d) @ root

    def apply_stack(st: np.ndarray) -> np.ndarray:
        t = ptrace_stack(st @ root, lam.sites, keep, d) @ inv_marg
        return embed_stack(t, keep, lam.sites, d) @ root

    return SuperOperator(lam, apply, apply_stack, label=f"Pi{region.sites}",
                         _adjoint_apply=apply, _adjoint_stack=apply_stack)


def purified_hamiltonian(sigma: DensityMatrix, region: Region | None = None) -> SuperOperator:
    """Sum over sites of ``region`` of (Id - single-site projector).

    Frustration-free and positive; for the full lattice its kernel is
    spanned by sigma^{1/2}.  The empty region gives the zero map.
    """
    lam = sigma.support
    if region is None:
        region = lam
    if region.is_empty:
        return SuperOperator.zero(lam)
    pis = [pi_project(sigma, Region(lam.lattice, (x,))) for x in region.sites]
    count = float(len(pis))

    def apply(q: np.ndarray) -> np.ndarray:
        out = count * q.astype(complex)
        for pi in pis:
            out -= pi.apply(q)
        return out

    def apply_stack(st: np.ndarray) -> np.ndarray:
        out = count * st.astype(complex)
        for pi in pis:
            out -= pi.apply_stack(st)
        return out

    return SuperOperator(lam, apply, apply_stack, label=f"H{region.sites}",
                         _adjoint_apply=apply, _adjoint_stack=apply_stack)


@dataclasses.dataclass
class GapResult:
    """Smallest nonzero eigenvalue of a positive HS-Hermitian map."""

    value: float
    kernel_dim: int
    kernel_tol: float
    max_eigenvalue: float
    method: str
    residual: float | None = None
    warnings: tuple[str, ...] = ()
    evals: np.ndarray | None = None


def _orthonormal_columns(vectors: list[np.ndarray]) -> np.ndarray:
    v = np.column_stack([np.asarray(x, dtype=complex).ravel() for x in vectors])
    q, r = np.linalg.qr(v)
    keep = np.abs(np.diag(r)) > 1e-12 * max(1.0, np.abs(np.diag(r)).max())
    return q[:, keep]


def _lambda_max_estimate(matvec, n: int, seed: int, iters: int = 80) -> float:
    rng = philox(seed, 7919)
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iters):
        w = matvec(v)
        nw = np.linalg.norm(w)
        if nw < 1e-300:
            return 0.0
        lam = float(np.real(np.vdot(v, w)))
        v = w / nw
    return max(lam, 0.0)


def spectral_gap(op: SuperOperator, *, known_kernel: list[np.ndarray] | None = None,
                 method: str | None = None, seed: int = 0) -> GapResult:
    """Gap above the kernel, dense for operator dimension <= 4096.

    Above the cap a deflation basis for the kernel must be supplied
    (``known_kernel``, operators or raveled vectors); the kernel block is
    shifted past the top of the spectrum and ARPACK runs on the rest,
    with an explicit residual check against the original map.
    """
    n = op.op_dim
    if method is None:
        method = "dense" if n <= DENSE_OP_CAP else "iterative"
    if method == "dense":
        return _gap_dense(op)
    if method != "iterative":
        raise ParameterError(f"unknown spectral_gap method {method!r}")
    if known_kernel is None:
        raise ParameterError("the iterative path needs known_kernel vectors to deflate")
    return _gap_iterative(op, known_kernel, seed)


def _gap_dense(op: SuperOperator) -> GapResult:
    m = op.dense()
    scale = float(np.linalg.norm(m))
    if scale == 0.0:
        return GapResult(0.0, op.op_dim, 0.0, 0.0, "dense",
                         warnings=("zero operator",), evals=np.zeros(op.op_dim))
    if np.linalg.norm(m - m.conj().T) > 1e-10 * scale:
        raise NumericalError("superoperator is not HS-Hermitian; no real spectrum")
    evals = np.linalg.eigvalsh(hermitize(m))
    top = float(np.abs(evals).max())
    tol = KERNEL_TOL_FACTOR * top
    warnings = []
    kernel_dim = int(np.sum(np.abs(evals) <= tol))
    band = int(np.sum((np.abs(evals) > tol) & (np.abs(evals) < AMBIGUITY_FACTOR * tol)))
    if band:
        warnings.append(f"{band} eigenvalue(s) in the ambiguity band [{tol:.3e}, {AMBIGUITY_FACTOR * tol:.3e})")
    if evals[0] < -tol:
        warnings.append(f"negative eigenvalue {evals[0]:.3e} below -tol")
    above = evals[evals > tol]
    if above.size == 0:
        return GapResult(0.0, kernel_dim, tol, top, "dense",
                         warnings=tuple(warnings + ["no spectrum above the kernel threshold"]),
                         evals=evals)
    return GapResult(float(above[0]), kernel_dim, tol, float(evals[-1]), "dense",
                     warnings=tuple(warnings), evals=evals)


def _gap_iterative(op: SuperOperator, known_kernel, seed: int) -> GapResult:
    import scipy.sparse.linalg as spla

    d = op.dim
    n = op.op_dim
    vbasis = _orthonormal_columns(list(known_kernel))
    if vbasis.shape[1] == 0:
        raise ParameterError("known_kernel vectors are numerically dependent or zero")

    def base_matvec(v: np.ndarray) -> np.ndarray:
        return op.apply(v.reshape(d, d)).ravel()

    lmax = _lambda_max_estimate(base_matvec, n, seed)
    if lmax == 0.0:
        return GapResult(0.0, n, 0.0, 0.0, "iterative", warnings=("zero operator",))
    shift = 1.25 * lmax

    def shifted_matvec(v: np.ndarray) -> np.ndarray:
        return base_matvec(v) + shift * (vbasis @ (vbasis.conj().T @ v))

    linop = spla.LinearOperator((n, n), matvec=shifted_matvec, dtype=complex)
    ncv = min(n - 1, 96)
    warnings = []
    for attempt in range(3):
        rng = philox(seed, attempt)
        v0 = rng.normal(size=n) + 1j * rng.normal(size=n)
        v0 -= vbasis @ (vbasis.conj().T @ v0)
        v0 /= np.linalg.norm(v0)
        lam = None
        vec = None
        try:
            vals, vecs = spla.eigsh(linop, k=1, which="SA", v0=v0, ncv=ncv, tol=1e-10)
            lam, vec = float(vals[0]), vecs[:, 0]
        except Exception as exc:   # ARPACK may stall; fall through to LOBPCG
            warnings.append(f"eigsh attempt {attempt} failed: {type(exc).__name__}")
        if lam is None:
            try:
                x0 = np.column_stack([v0, rng.normal(size=n) + 1j * rng.normal(size=n),
                                      rng.normal(size=n) + 1j * rng.normal(size=n)])
                base_linop = spla.LinearOperator((n, n), matvec=base_matvec, dtype=complex)
                vals, vecs = spla.lobpcg(base_linop, x0, Y=vbasis, largest=False,
                                         tol=1e-10, maxiter=3000)
                order = np.argsort(vals)
                lam, vec = float(vals[order[0]]), vecs[:, order[0]]
            except Exception as exc:
                warnings.append(f"lobpcg attempt {attempt} failed: {type(exc).__name__}")
                continue
        vec = vec / np.linalg.norm(vec)
        contamination = float(np.linalg.norm(vbasis.conj().T @ vec))
        residual = float(np.linalg.norm(base_matvec(vec) - lam * vec))
        if residual <= ITER_RESIDUAL_TOL * max(lmax, 1.0) and contamination < 1e-6:
            tol = KERNEL_TOL_FACTOR * max(lmax, abs(lam))
            if lam < tol:
                warnings.append(f"gap {lam:.3e} is inside the kernel threshold {tol:.3e}")
            return GapResult(float(lam), vbasis.shape[1], tol, lmax, "iterative",
                             residual=residual, warnings=tuple(warnings))
        warnings.append(
            f"attempt {attempt}: residual {residual:.3e} or contamination {contamination:.3e} too large")
    raise NumericalError("iterative gap did not converge: " + "; ".join(warnings))


def martingale_defect(sigma: DensityMatrix, a: Region, b: Region, c: Region,
                      *, seed: int = 0, tol: float = 1e-10) -> float:
    """Norm of Pi_AB Pi_BC - Pi_ABC by power iteration on the Gram map.

    The three regions must be pairwise disjoint; the complement of their
    union plays the shield.  Equals the conditional mixing coefficient
    of the state across (A : C | shield).
    """
    for x, y in ((a, b), (a, c), (b, c)):
        if set(x.sites) & set(y.sites):
            raise PartitionError("martingale regions must be pairwise disjoint")
    pi_ab = pi_project(sigma, a | b)
    pi_bc = pi_project(sigma, b | c)
    pi_abc = pi_project(sigma, (a | b) | c)

    def m_apply(q):
        return pi_ab.apply(pi_bc.apply(q)) - pi_abc.apply(q)

    def mdag_apply(q):
        return pi_bc.apply(pi_ab.apply(q)) - pi_abc.apply(q)

    d = sigma.dim
    n = d * d
    maxiter = 20000 if n <= DENSE_OP_CAP else 3000
    best = 0.0
    for restart in range(3):
        rng = philox(seed, restart, 33)
        v = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        v /= np.linalg.norm(v)
        lam = 0.0
        stable = 0
        for _ in range(maxiter):
            w = mdag_apply(m_apply(v))
            nw = float(np.linalg.norm(w))
            if nw < 1e-30:
                lam = 0.0
                break
            new_lam = float(np.real(np.vdot(v.ravel(), w.ravel())))
            v = w / nw
            if abs(new_lam - lam) <= tol * max(abs(new_lam), 1e-30):
                lam = new_lam
                stable += 1
                if stable >= 3:
                    break
            else:
                stable = 0
                lam = new_lam
        best = max(best, lam)
    return float(np.sqrt(max(best, 0.0)))


@dataclasses.dataclass
class EtaBound:
    """Multiplicative distortion witness; gap_lower = value**-4."""

    region: Region
    method: str
    value: float

    @property
    def gap_lower(self) -> float:
        return float(self.value) ** -4


def eta_bound(sigma: DensityMatrix | None, region: Region, *, method: str = "trivial",
              interaction: Interaction | None = None, beta: float | None = None) -> EtaBound:
    """Upper bound on the optimal outside-witness distortion for ``region``.

    ``trivial``        sqrt of the state's condition number (witness Q = 1);
    ``gibbs-boundary`` witness exp(-beta/2 H_{X^c}) from the terms fully
                       outside the region (needs state, interaction, beta);
    ``closed-form``    exp(beta |X| * interaction strength), no state needed.
    """
    if method == "trivial":
        if sigma is None:
            raise ParameterError("the trivial method needs a state")
        value = float(np.sqrt(sigma.evals[-1] / sigma.evals[0]))
    elif method == "closed-form":
        if interaction is None or beta is None:
            raise ParameterError("closed-form needs interaction and beta")
        if beta < 0.0:
            raise DomainError("closed-form needs beta >= 0")
        value = float(np.exp(beta * len(region) * interaction.strength))
    elif method == "gibbs-boundary":
        if sigma is None or interaction is None or beta is None:
            raise ParameterError("gibbs-boundary needs a state, interaction and beta")
        lam = sigma.support
        comp = Region(lam.lattice, tuple(s for s in lam.sites
                                         if s not in set(region.sites)))
        if comp.is_empty:
            hc_full = np.zeros((lam.dim, lam.dim), dtype=complex)
        else:
            hc = interaction.sub_hamiltonian(comp)
            hc_full = embed_matrix(hc.matrix, comp.sites, lam.sites,
                                   lam.lattice.local_dim)
        q = func_hermitian(hc_full, lambda w: np.exp(-0.5 * beta * w))
        q_inv = func_hermitian(hc_full, lambda w: np.exp(0.5 * beta * w))
        value = float(opnorm(q @ sigma.inv_sqrt) * opnorm(sigma.sqrt @ q_inv))
    else:
        raise ParameterError(f"unknown eta method {method!r}")
    return EtaBound(region, method, max(value, 1.0))


def small_region_gap_bound(eta: EtaBound) -> float:
    """eta**-4, the certified gap of the region Hamiltonian."""
    if eta.value < 1.0:
        raise ParameterError("eta values below 1 are not meaningful")
    return eta.gap_lower
