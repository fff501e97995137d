"""Dense operator algebra on small qudit lattices.

Conventions used everywhere downstream:

* tensor factors are ordered by increasing site index;
* ``np.kron(A, B)`` puts ``A`` on the more significant axes, so matrices
  built here list low site indices first;
* vectorization is row-major (C order), hence ``vec(A Q B) = (A (x) B^T) vec(Q)``.
"""

from __future__ import annotations

import dataclasses
from functools import cached_property

import numpy as np

from .errors import (
    ContractError,
    DimensionError,
    DomainError,
    GeometryError,
    IntervalError,
    RankError,
    RegionError,
)

HERM_RTOL = 1e-12   # relative tolerance for Hermiticity checks
TRACE_TOL = 1e-12   # absolute tolerance on Tr(rho) = 1
RANK_RTOL = 1e-12   # relative eigenvalue floor below which a state counts as singular
SQRT_RTOL = 1e-10   # relative tolerance on sqrt(rho) @ sqrt(rho) = rho


def philox(seed: int, *spawn_key: int) -> np.random.Generator:
    """Counter-based RNG; (seed, spawn_key) fully determines the stream."""
    ss = np.random.SeedSequence(seed, spawn_key=spawn_key)
    return np.random.Generator(np.random.Philox(ss))


@dataclasses.dataclass(frozen=True)
class Lattice:
    """Site bookkeeping for the two supported geometries.

    ``ring``: ``extent`` qudits on a cycle, sites ``0 .. extent-1``.
    ``torus_edges``: qudits on the ``2 * extent**2`` edges of an
    ``extent x extent`` periodic square grid.  The edge leaving vertex
    ``(x, y)`` rightward (to ``(x+1, y)``) has orientation 0, the edge
    leaving it upward (to ``(x, y+1)``) has orientation 1.
    """

    kind: str
    extent: int
    local_dim: int = 2

    def __post_init__(self):
        if self.kind not in ("ring", "torus_edges"):
            raise GeometryError(f"unknown lattice kind {self.kind!r}")
        if self.extent < 1:
            raise GeometryError("lattice extent must be positive")
        if self.local_dim < 2:
            raise DimensionError("local_dim must be at least 2")

    @property
    def site_count(self) -> int:
        if self.kind == "ring":
            return self.extent
        return 2 * self.extent * self.extent

    def sites(self) -> range:
        return range(self.site_count)

    def full_region(self) -> "Region":
        return Region(self, tuple(self.sites()))

    def region(self, sites) -> "Region":
        return Region(self, tuple(sites))

    # Edge indexing is the single source of truth for torus geometry;
    # stars, plaquettes and the CLI partition grammar all go through it.
    def edge_index(self, x: int, y: int, orient: int) -> int:
        if self.kind != "torus_edges":
            raise GeometryError("edge_index is only defined on torus_edges lattices")
        if orient not in (0, 1):
            raise GeometryError("orient must be 0 (horizontal) or 1 (vertical)")
        n = self.extent
        return ((x % n) * n + (y % n)) * 2 + orient

    def edge_coords(self, index: int) -> tuple[int, int, int]:
        if self.kind != "torus_edges":
            raise GeometryError("edge_coords is only defined on torus_edges lattices")
        if not 0 <= index < self.site_count:
            raise GeometryError(f"edge index {index} out of range")
        orient = index % 2
        cell = index // 2
        return cell // self.extent, cell % self.extent, orient


@dataclasses.dataclass(frozen=True)
class Region:
    """A sorted set of site indices on a lattice.  May be empty."""

    lattice: Lattice
    sites: tuple[int, ...]

    def __post_init__(self):
        sites = tuple(sorted({int(s) for s in self.sites}))
        if sites and not (0 <= sites[0] and sites[-1] < self.lattice.site_count):
            raise RegionError(f"sites {sites} fall outside the lattice")
        object.__setattr__(self, "sites", sites)

    def __len__(self) -> int:
        return len(self.sites)

    def __iter__(self):
        return iter(self.sites)

    def __contains__(self, site) -> bool:
        return site in set(self.sites)

    @property
    def dim(self) -> int:
        return self.lattice.local_dim ** len(self.sites)

    @property
    def is_empty(self) -> bool:
        return not self.sites

    @property
    def is_full(self) -> bool:
        return len(self.sites) == self.lattice.site_count

    def complement(self) -> "Region":
        inside = set(self.sites)
        return Region(self.lattice, tuple(s for s in self.lattice.sites() if s not in inside))

    def union(self, other: "Region") -> "Region":
        self._check_same_lattice(other)
        return Region(self.lattice, self.sites + other.sites)

    def intersection(self, other: "Region") -> "Region":
        self._check_same_lattice(other)
        common = set(self.sites) & set(other.sites)
        return Region(self.lattice, tuple(common))

    def difference(self, other: "Region") -> "Region":
        self._check_same_lattice(other)
        drop = set(other.sites)
        return Region(self.lattice, tuple(s for s in self.sites if s not in drop))

    __or__ = union
    __and__ = intersection
    __sub__ = difference

    def _check_same_lattice(self, other: "Region") -> None:
        if self.lattice != other.lattice:
            raise RegionError("regions live on different lattices")

    def position(self, site: int) -> int:
        """Tensor-factor slot of ``site`` within this region."""
        try:
            return self.sites.index(site)
        except ValueError:
            raise RegionError(f"site {site} not in region {self.sites}") from None

    def is_ring_interval(self) -> bool:
        """True for contiguous cyclic windows (the full ring counts)."""
        if self.lattice.kind != "ring":
            return False
        m = len(self.sites)
        n = self.lattice.site_count
        if m == 0:
            return False
        if m == n:
            return True
        inside = set(self.sites)
        breaks = sum(1 for s in self.sites if (s + 1) % n not in inside)
        return breaks == 1

    def ring_window(self) -> tuple[int, int]:
        """(start, length) of a cyclic interval; raises if not an interval."""
        if not self.is_ring_interval():
            raise IntervalError(f"{self.sites} is not a cyclic interval")
        n = self.lattice.site_count
        m = len(self.sites)
        if m == n:
            return 0, n
        inside = set(self.sites)
        start = next(s for s in self.sites if (s - 1) % n not in inside)
        return start, m


def embed_matrix(mat: np.ndarray, support: tuple[int, ...], target: tuple[int, ...],
                 d: int) -> np.ndarray:
    """Tensor identities onto ``target``'s extra sites and reorder axes.

    ``support`` and ``target`` are site tuples in any consistent order;
    the input matrix's factors must follow ``support`` order and the
    output follows ``target`` order (so this also permutes factors).
    """
    support = tuple(support)
    target = tuple(target)
    if set(support) - set(target):
        raise RegionError(f"support {support} not contained in target {target}")
    if mat.shape != (d ** len(support),) * 2:
        raise DimensionError(f"matrix shape {mat.shape} does not match support {support}")
    extra = tuple(s for s in target if s not in set(support))
    if support == target:
        return np.asarray(mat, dtype=complex)
    k = len(target)
    big = np.kron(np.asarray(mat, dtype=complex), np.eye(d ** len(extra)))
    order = support + extra
    perm = [order.index(s) for s in target]
    shape = (d,) * (2 * k)
    return (big.reshape(shape)
               .transpose(perm + [k + p for p in perm])
               .reshape(d ** k, d ** k))


def ptrace_matrix(mat: np.ndarray, support: tuple[int, ...], keep: tuple[int, ...],
                  d: int) -> np.ndarray:
    """Trace out the sites of ``support`` not listed in ``keep``."""
    support = tuple(support)
    keep_set = set(keep)
    if keep_set - set(support):
        raise RegionError(f"keep sites {sorted(keep_set)} not all inside {support}")
    k = len(support)
    if mat.shape != (d ** k,) * 2:
        raise DimensionError(f"matrix shape {mat.shape} does not match support {support}")
    kept = [i for i, s in enumerate(support) if s in keep_set]
    t = np.asarray(mat, dtype=complex).reshape((d,) * (2 * k))
    row = list(range(k))
    col = [k + i for i in range(k)]
    for i, s in enumerate(support):
        if s not in keep_set:
            col[i] = row[i]          # repeated label inside one operand: trace it
    out_labels = [row[i] for i in kept] + [col[i] for i in kept]
    out = np.einsum(t, row + col, out_labels)
    dk = d ** len(kept)
    return out.reshape(dk, dk)


def embed_stack(stack: np.ndarray, support: tuple[int, ...], target: tuple[int, ...],
                d: int) -> np.ndarray:
    """embed_matrix applied along axis 0 of a (k, m, m) stack."""
    support = tuple(support)
    target = tuple(target)
    extra = tuple(s for s in target if s not in set(support))
    stack = np.asarray(stack, dtype=complex)
    if support == target:
        return stack
    k = len(target)
    eye = np.eye(d ** len(extra))
    big = np.einsum("kij,ab->kiajb", stack, eye).reshape(stack.shape[0], d ** k, d ** k)
    order = support + extra
    perm = [order.index(s) for s in target]
    shape = (stack.shape[0],) + (d,) * (2 * k)
    axes = (0,) + tuple(1 + p for p in perm) + tuple(1 + k + p for p in perm)
    return big.reshape(shape).transpose(axes).reshape(stack.shape[0], d ** k, d ** k)


def ptrace_stack(stack: np.ndarray, support: tuple[int, ...], keep: tuple[int, ...],
                 d: int) -> np.ndarray:
    """ptrace_matrix applied along axis 0 of a (k, m, m) stack."""
    support = tuple(support)
    keep_set = set(keep)
    k = len(support)
    kept = [i for i, s in enumerate(support) if s in keep_set]
    t = np.asarray(stack, dtype=complex).reshape((stack.shape[0],) + (d,) * (2 * k))
    row = [1 + i for i in range(k)]
    col = [1 + k + i for i in range(k)]
    for i, s in enumerate(support):
        if s not in keep_set:
            col[i] = row[i]
    out_labels = [0] + [row[i] for i in kept] + [col[i] for i in kept]
    out = np.einsum(t, [0] + row + col, out_labels)
    dk = d ** len(kept)
    return out.reshape(stack.shape[0], dk, dk)


@dataclasses.dataclass(eq=False)
class DenseOperator:
    """A dense matrix attached to the region it acts on."""

    support: Region
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.matrix.shape != (self.support.dim,) * 2:
            raise DimensionError(
                f"matrix shape {self.matrix.shape} does not fit region of dim {self.support.dim}")

    @cached_property
    def is_hermitian(self) -> bool:
        scale = max(np.linalg.norm(self.matrix), 1.0)
        return np.linalg.norm(self.matrix - self.matrix.conj().T) <= HERM_RTOL * scale

    @property
    def norm(self) -> float:
        """Operator (spectral) norm."""
        if self.is_hermitian:
            return float(np.max(np.abs(np.linalg.eigvalsh(hermitize(self.matrix)))))
        return float(np.linalg.norm(self.matrix, 2))

    def embed_to(self, target: Region) -> "DenseOperator":
        return embed(self, target)

    def __repr__(self):
        return f"DenseOperator(sites={self.support.sites}, dim={self.support.dim})"


def embed(op: DenseOperator, target: Region) -> DenseOperator:
    if op.support.lattice != target.lattice:
        raise RegionError("operator and target live on different lattices")
    mat = embed_matrix(op.matrix, op.support.sites, target.sites, op.support.lattice.local_dim)
    return DenseOperator(target, mat)


def partial_trace(op: DenseOperator, traced) -> DenseOperator:
    """Trace out ``traced`` (a Region or an iterable of sites)."""
    traced_sites = set(traced.sites if isinstance(traced, Region) else traced)
    keep = tuple(s for s in op.support.sites if s not in traced_sites)
    mat = ptrace_matrix(op.matrix, op.support.sites, keep, op.support.lattice.local_dim)
    return DenseOperator(Region(op.support.lattice, keep), mat)


def hs_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product Tr(a^dag b), antilinear in ``a``."""
    return complex(np.vdot(a, b))


def gns_inner(sigma: np.ndarray, a: np.ndarray, b: np.ndarray) -> complex:
    """Tr(sigma a^dag b); all three on the same space."""
    return complex(np.trace(sigma @ a.conj().T @ b))


def herm_basis(d: int) -> np.ndarray:
    """Hermitian orthonormal basis of d x d matrices, identity first.

    Entry 0 is 1/sqrt(d); then the symmetric and antisymmetric
    off-diagonal pairs, then the traceless diagonals.  For d = 2 this is
    the normalized Pauli basis.
    """
    if d < 1:
        raise DimensionError("basis dimension must be positive")
    mats = [np.eye(d, dtype=complex) / np.sqrt(d)]
    for j in range(d):
        for k in range(j + 1, d):
            s = np.zeros((d, d), dtype=complex)
            s[j, k] = s[k, j] = 1.0 / np.sqrt(2.0)
            mats.append(s)
            a = np.zeros((d, d), dtype=complex)
            a[j, k] = -1j / np.sqrt(2.0)
            a[k, j] = 1j / np.sqrt(2.0)
            mats.append(a)
    for l in range(1, d):
        v = np.zeros(d)
        v[:l] = 1.0
        v[l] = -float(l)
        mats.append(np.diag(v).astype(complex) / np.sqrt(l * (l + 1.0)))
    return np.array(mats)


def hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def func_hermitian(m: np.ndarray, fn) -> np.ndarray:
    """Spectral calculus f(m) for Hermitian m."""
    w, v = np.linalg.eigh(hermitize(m))
    return (v * fn(w)) @ v.conj().T


def matrix_sign(m: np.ndarray) -> np.ndarray:
    """Hermitian sign function; eigenvalues at exactly 0 map to +1."""
    return func_hermitian(m, lambda w: np.where(w >= 0.0, 1.0, -1.0))


def opnorm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m, 2))


def herm_trace_norm(m: np.ndarray) -> float:
    return float(np.sum(np.abs(np.linalg.eigvalsh(hermitize(m)))))


class DensityMatrix:
    """Full-rank state with cached spectral data and marginals.

    The constructor re-symmetrizes, then rejects states whose trace is
    off by more than ``TRACE_TOL`` or whose smallest eigenvalue falls
    below ``RANK_RTOL`` times the largest.
    """

    def __init__(self, support: Region, matrix, _eig=None):
        self.support = support
        m = hermitize(np.asarray(matrix, dtype=complex))
        if m.shape != (support.dim,) * 2:
            raise DimensionError(
                f"matrix shape {m.shape} does not fit region of dim {support.dim}")
        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > TRACE_TOL:
            raise DomainError(f"density matrix trace {tr!r} is not 1 within {TRACE_TOL}")
        if _eig is None:
            evals, evecs = np.linalg.eigh(m)
        else:
            evals, evecs = _eig
            evals = np.asarray(evals, dtype=float)
            evecs = np.asarray(evecs, dtype=complex)
        if evals[-1] <= 0.0 or evals[0] <= RANK_RTOL * evals[-1]:
            raise RankError(
                f"state is numerically singular: eigenvalue range [{evals[0]:.3e}, {evals[-1]:.3e}]")
        self.matrix = m
        self.evals = evals
        self.evecs = evecs
        self._marginals: dict[tuple[int, ...], DensityMatrix] = {}

    @property
    def dim(self) -> int:
        return self.support.dim

    @property
    def min_eigenvalue(self) -> float:
        return float(self.evals[0])

    def _apply_spectral(self, fn) -> np.ndarray:
        return hermitize((self.evecs * fn(self.evals)) @ self.evecs.conj().T)

    @cached_property
    def sqrt(self) -> np.ndarray:
        root = self._apply_spectral(np.sqrt)
        err = np.linalg.norm(root @ root - self.matrix)
        if err > SQRT_RTOL * max(np.linalg.norm(self.matrix), 1e-300):
            raise ContractError(f"matrix square root check failed: residual {err:.3e}")
        return root

    @cached_property
    def inv_sqrt(self) -> np.ndarray:
        return self._apply_spectral(lambda w: 1.0 / np.sqrt(w))

    @cached_property
    def inv(self) -> np.ndarray:
        return self._apply_spectral(lambda w: 1.0 / w)

    def marginal(self, sites) -> "DensityMatrix":
        """Reduced state on ``sites`` (a Region or iterable), cached."""
        keep = tuple(sorted(set(sites.sites if isinstance(sites, Region) else sites)))
        if keep == self.support.sites:
            return self
        if keep not in self._marginals:
            mat = ptrace_matrix(self.matrix, self.support.sites, keep,
                                self.support.lattice.local_dim)
            self._marginals[keep] = DensityMatrix(Region(self.support.lattice, keep), mat)
        return self._marginals[keep]

    def __repr__(self):
        return f"DensityMatrix(sites={self.support.sites}, dim={self.dim})"
