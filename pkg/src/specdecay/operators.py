"""Finite weighted measure spaces and positive self-adjoint operators.

Operators are stored through their full (dense) eigensystem, orthonormal
for the weighted inner product ``<f, g> = sum_x <f(x), g(x)>_H mu(x)``.
States are arrays of shape ``(npoints, h)`` (or flat of length
``npoints * h``); matrices act on the flattened vectors and use the
*operator* convention ``(Af)(x) = sum_y A[x, y] f(y)``.  Kernels use the
kernel convention ``(Pf)(x) = sum_y K(x, y) f(y) mu(y)``.

The dense eigendecomposition is the reference path (desk scale,
n <= ~2000); every verification runs on it.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .profiles import (
    DecayProfile,
    ExponentialTail,
    MonotoneProfile,
    TIE_ABS,
    TIE_REL,
    step_profile,
    sum_exp_decay,
    tabulated_decay,
)

__all__ = [
    "MeasureSpace",
    "SpectralOperator",
    "KernelMatrix",
    "DensityState",
    "diagonalize",
    "projector",
    "heat",
    "ultra_norm",
    "density_vector",
    "decay_profiles",
    "heat_decay",
    "energy",
    "rho_energy",
    "rho_expectation",
    "sandwich_norm",
    "operator_norm_22",
    "dirichlet_counting",
    "dirichlet_profile",
    "dirichlet_counting_kernel_free",
    "cycle_laplacian",
    "path_laplacian",
    "complete_laplacian",
    "torus_laplacian",
    "graph_laplacian",
    "erdos_renyi_laplacian",
    "from_edge_list",
    "from_dense_json",
    "from_family",
    "block_copies",
]

DEFAULT_KERNEL_THRESHOLD = 1e-10


def tie_leq(eigenvalue, lam):
    """Membership of an eigenvalue in ]0, lam] with the documented slack."""
    return eigenvalue <= lam * (1.0 + TIE_REL) + TIE_ABS


@dataclass(frozen=True)
class MeasureSpace:
    """Ordered finite point set with strictly positive weights and fiber dim."""

    points: tuple
    weights: np.ndarray
    fiber_dim: int = 1

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or len(self.points) != w.size:
            raise ValueError("one weight per point required")
        if np.any(w <= 0):
            raise ValueError("weights must be strictly positive")
        if self.fiber_dim < 1:
            raise ValueError("fiber dimension must be >= 1")
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "weights", w)

    @property
    def npoints(self):
        return len(self.points)

    @property
    def dim(self):
        return self.npoints * self.fiber_dim

    def total_measure(self):
        return float(self.weights.sum())

    def measure(self, subset):
        idx = self.indices(subset)
        return float(self.weights[idx].sum())

    def indices(self, subset):
        """Positions of a point subset, given as labels or integer indices."""
        lookup = {p: i for i, p in enumerate(self.points)}
        out = []
        for s in subset:
            if s in lookup:
                out.append(lookup[s])
            elif isinstance(s, (int, np.integer)) and 0 <= s < self.npoints:
                out.append(int(s))
            else:
                raise KeyError(f"unknown point {s!r}")
        if len(set(out)) != len(out):
            raise ValueError("subset contains duplicate points")
        return np.asarray(out, dtype=int)

    def dof_indices(self, subset):
        idx = self.indices(subset)
        h = self.fiber_dim
        return (idx[:, None] * h + np.arange(h)[None, :]).ravel()

    def weight_vector(self):
        """Per-degree-of-freedom weights (each point repeated fiber_dim times)."""
        return np.repeat(self.weights, self.fiber_dim)

    def reshape_state(self, f):
        f = np.asarray(f, dtype=float)
        if f.shape == (self.npoints, self.fiber_dim):
            return f
        if f.shape == (self.dim,):
            return f.reshape(self.npoints, self.fiber_dim)
        if self.fiber_dim == 1 and f.shape == (self.npoints,):
            return f.reshape(self.npoints, 1)
        raise ValueError(f"state shape {f.shape} does not match space")


def counting_space(n, fiber_dim=1, labels=None):
    pts = tuple(range(n)) if labels is None else tuple(labels)
    return MeasureSpace(points=pts, weights=np.ones(n), fiber_dim=fiber_dim)


@dataclass(frozen=True)
class SpectralOperator:
    """Positive self-adjoint operator stored as a full eigensystem.

    ``vectors[:, j]`` is the j-th eigenvector in function representation,
    orthonormal for the weighted inner product.  ``kernel_flags[j]`` marks
    modes treated as kernel (eigenvalue clamped to exactly 0).
    """

    space: MeasureSpace
    eigenvalues: np.ndarray
    vectors: np.ndarray
    kernel_flags: np.ndarray
    matrix: np.ndarray
    kernel_threshold: float = DEFAULT_KERNEL_THRESHOLD
    invariant: bool = False

    @property
    def norm(self):
        return float(self.eigenvalues[-1]) if self.eigenvalues.size else 0.0

    def positive_eigenvalues(self):
        return self.eigenvalues[~self.kernel_flags]

    def lambda_min_positive(self):
        pos = self.positive_eigenvalues()
        return float(pos[0]) if pos.size else math.inf

    def eigenvalue_clusters(self):
        """Indices of eigenvalues grouped by the tie tolerance, ascending."""
        clusters = []
        for j, lam in enumerate(self.eigenvalues):
            if self.kernel_flags[j]:
                continue
            if clusters and tie_leq(lam, self.eigenvalues[clusters[-1][-1]]):
                clusters[-1].append(j)
            else:
                clusters.append([j])
        return clusters

    def kernel_indices(self):
        return np.nonzero(self.kernel_flags)[0]

    def digest(self):
        hsh = hashlib.sha256()
        hsh.update(np.ascontiguousarray(self.matrix).tobytes())
        hsh.update(np.ascontiguousarray(self.space.weights).tobytes())
        hsh.update(str(self.space.fiber_dim).encode())
        return hsh.hexdigest()[:12]

    def weighted_gram(self):
        w = self.space.weight_vector()
        return self.vectors.T @ (w[:, None] * self.vectors)


@dataclass(frozen=True)
class KernelMatrix:
    """Block kernel K(x, y) of an operator, shape (npts, npts, h, h)."""

    space: MeasureSpace
    blocks: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.blocks, dtype=float)
        n, h = self.space.npoints, self.space.fiber_dim
        if b.shape != (n, n, h, h):
            raise ValueError(f"kernel blocks must have shape {(n, n, h, h)}")
        object.__setattr__(self, "blocks", b)

    def to_matrix(self):
        """Operator-convention matrix: multiply columns by mu(y)."""
        n, h = self.space.npoints, self.space.fiber_dim
        mat = self.blocks.transpose(0, 2, 1, 3).reshape(n * h, n * h).copy()
        return mat * self.space.weight_vector()[None, :]

    @staticmethod
    def from_matrix(mat, space):
        """Kernel from an operator-convention matrix (divide columns by mu)."""
        n, h = space.npoints, space.fiber_dim
        k = np.asarray(mat, dtype=float) / space.weight_vector()[None, :]
        return KernelMatrix(space, k.reshape(n, h, n, h).transpose(0, 2, 1, 3))

    def compose(self, other):
        """Kernel of the product: integrates over the middle variable."""
        w = self.space.weights
        mid = self.blocks * w[None, :, None, None]
        blocks = np.einsum("xzij,zyjk->xyik", mid, other.blocks)
        return KernelMatrix(self.space, blocks)

    def apply(self, f):
        f = self.space.reshape_state(f)
        wf = f * self.space.weights[:, None]
        return np.einsum("xyij,yj->xi", self.blocks, wf)


def _weighted_vectors(space, columns):
    """Outer-product kernel sum_j c_j psi_j psi_j^* as blocks."""
    n, h = space.npoints, space.fiber_dim
    psi = columns.reshape(n, h, -1)
    return np.einsum("xim,yjm->xyij", psi, psi)


def diagonalize(matrix, space: MeasureSpace, kernel_threshold=DEFAULT_KERNEL_THRESHOLD,
                invariant=False) -> SpectralOperator:
    """Full eigensystem of a weighted-self-adjoint PSD matrix.

    The matrix must be self-adjoint for the weighted inner product within
    1e-10 and positive semidefinite up to ``kernel_threshold * ||A||``;
    eigenvalues below the threshold are clamped to 0 and flagged as
    kernel.  Output is deterministic: ascending eigenvalues, first
    nonzero eigenvector component positive.
    """
    mat = np.asarray(matrix, dtype=float)
    if mat.shape != (space.dim, space.dim):
        raise ValueError(f"matrix shape {mat.shape} does not match space dim {space.dim}")
    w = space.weight_vector()
    wa = w[:, None] * mat
    scale = max(np.abs(wa).max(), 1e-300)
    if np.abs(wa - wa.T).max() > 1e-10 * scale:
        raise ValueError("matrix is not self-adjoint for the weighted inner product")
    sqrt_w = np.sqrt(w)
    sym = (sqrt_w[:, None] * mat) / sqrt_w[None, :]
    sym = 0.5 * (sym + sym.T)
    eigvals, eigvecs = np.linalg.eigh(sym)
    anorm = float(np.abs(eigvals).max()) if eigvals.size else 0.0
    tol = kernel_threshold * anorm
    if eigvals.size and eigvals[0] < -tol:
        raise ValueError(f"matrix has negative eigenvalue {eigvals[0]} beyond tolerance")
    kernel_flags = eigvals <= tol
    eigvals = eigvals.copy()
    eigvals[kernel_flags] = 0.0
    vectors = eigvecs / sqrt_w[:, None]
    # deterministic sign: first component larger than jitter is positive
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        nz = np.nonzero(np.abs(col) > 1e-12 * np.abs(col).max())[0]
        if nz.size and col[nz[0]] < 0:
            vectors[:, j] = -col
    return SpectralOperator(space=space, eigenvalues=eigvals, vectors=vectors,
                            kernel_flags=kernel_flags, matrix=mat,
                            kernel_threshold=kernel_threshold, invariant=invariant)


def _mode_selection(op: SpectralOperator, flavor: str, lam: float):
    if flavor == "half_open":
        return (~op.kernel_flags) & tie_leq(op.eigenvalues, lam)
    if flavor == "closed":
        return op.kernel_flags | tie_leq(op.eigenvalues, lam)
    raise ValueError(f"unknown interval flavor {flavor!r}")


def projector(op: SpectralOperator, flavor: str, lam: float) -> KernelMatrix:
    """Kernel of the spectral projector for ]0, lam] or [0, lam]."""
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    sel = _mode_selection(op, flavor, lam)
    return KernelMatrix(op.space, _weighted_vectors(op.space, op.vectors[:, sel]))


def heat(op: SpectralOperator, t: float, exclude_kernel: bool = True) -> KernelMatrix:
    """Kernel of exp(-tA), optionally restricted off the kernel."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    sel = ~op.kernel_flags if exclude_kernel else np.ones(op.eigenvalues.size, dtype=bool)
    weights = np.exp(-t * op.eigenvalues[sel])
    cols = op.vectors[:, sel] * np.sqrt(weights)[None, :]
    return KernelMatrix(op.space, _weighted_vectors(op.space, cols))


def _block_opnorms(blocks):
    h = blocks.shape[-1]
    if h == 1:
        return np.abs(blocks[..., 0, 0])
    return np.linalg.svd(blocks, compute_uv=False)[..., 0]


def ultra_norm(K: KernelMatrix) -> float:
    """L1 -> Linf norm: the max over (x, y) of the block operator norm."""
    if K.blocks.size == 0:
        return 0.0
    return float(_block_opnorms(K.blocks).max())


def density_vector(K: KernelMatrix) -> np.ndarray:
    """Density function: fiber trace of the diagonal blocks."""
    diag = np.einsum("xxii->x", K.blocks)
    if np.any(diag < -1e-10 * max(1.0, np.abs(K.blocks).max())):
        raise ValueError("kernel diagonal is not positive")
    return np.maximum(diag, 0.0)


def kernel_trace(K: KernelMatrix) -> float:
    return float(density_vector(K) @ K.space.weights)


def _flavor_value(op, flavor, sel, region_idx=None, point_idx=None):
    """Profile functional of the projector onto the selected modes."""
    cols = op.vectors[:, sel]
    n, h = op.space.npoints, op.space.fiber_dim
    psi = cols.reshape(n, h, -1)
    dens = np.einsum("xim,xim->x", psi, psi)
    if flavor == "density":
        return float(dens.max()) if dens.size else 0.0
    if flavor == "pointwise":
        return float(dens[point_idx])
    if flavor == "region":
        return float(dens[region_idx] @ op.space.weights[region_idx])
    if flavor == "ultra":
        if not sel.any():
            return 0.0
        return ultra_norm(KernelMatrix(op.space, _weighted_vectors(op.space, cols)))
    raise ValueError(f"unknown profile flavor {flavor!r}")


def _flavor_indices(op, flavor, point=None, region=None):
    region_idx = point_idx = None
    if flavor == "region":
        if region is None or len(region) == 0:
            raise ValueError("region flavor requires a nonempty region")
        region_idx = op.space.indices(region)
    elif flavor == "pointwise":
        if point is None:
            raise ValueError("pointwise flavor requires a point")
        point_idx = int(op.space.indices([point])[0])
    return region_idx, point_idx


def decay_profiles(op: SpectralOperator, flavor: str, interval: str = "half_open",
                   point=None, region=None) -> MonotoneProfile:
    """Step profile of the projector family under the chosen functional.

    ``flavor`` is one of ``ultra`` (L1->Linf norm), ``density`` (max of the
    density function), ``pointwise`` (density at one point), ``region``
    (projector measure of a subset).  ``interval`` selects ]0, lam] or
    [0, lam]; in the closed flavor the kernel mass becomes the value at 0.
    """
    region_idx, point_idx = _flavor_indices(op, flavor, point, region)
    if interval not in ("half_open", "closed"):
        raise ValueError(f"unknown interval flavor {interval!r}")
    sel = op.kernel_flags.copy() if interval == "closed" else np.zeros_like(op.kernel_flags)
    v0 = _flavor_value(op, flavor, sel, region_idx, point_idx) if interval == "closed" else 0.0
    positions, increments = [], []
    prev = v0
    for cluster in op.eigenvalue_clusters():
        sel[cluster] = True
        value = _flavor_value(op, flavor, sel, region_idx, point_idx)
        if value > prev:
            positions.append(float(op.eigenvalues[cluster[0]]))
            increments.append(value - prev)
            prev = value
    return MonotoneProfile(kind="step", value_at_zero=v0,
                           positions=np.asarray(positions),
                           increments=np.asarray(increments))


DEFAULT_HEAT_POINTS_PER_DECADE = 64
DEFAULT_HEAT_SPAN = (1e-3, 10.0)


def heat_decay(op: SpectralOperator, flavor: str, exclude_kernel: bool = True,
               point=None, region=None, points_per_decade=DEFAULT_HEAT_POINTS_PER_DECADE,
               span=DEFAULT_HEAT_SPAN) -> DecayProfile:
    """Heat decay L(t) of exp(-tA) under a profile flavor.

    ``pointwise`` and ``region`` flavors are positive combinations of the
    eigenmodes and come back as exact sums of exponentials.  ``ultra`` and
    ``density`` take a max over points, which does not commute with the
    sum, so they are tabulated on a geometric t-grid (anchored at
    ``span[0]/lambda_max`` .. ``span[1]/lambda_min``) with the dominating
    exponential tail ``L(T) exp(-lambda_min (t - T))``.
    """
    region_idx, point_idx = _flavor_indices(op, flavor, point, region)
    if not exclude_kernel and op.kernel_flags.any() and flavor in ("ultra", "density"):
        raise ValueError("kernel modes make the heat decay non-integrable; exclude them")
    clusters = op.eigenvalue_clusters()
    if not clusters:
        return sum_exp_decay([], [])
    if flavor in ("pointwise", "region"):
        rates, coeffs = [], []
        for cluster in clusters:
            sel = np.zeros_like(op.kernel_flags)
            sel[cluster] = True
            coeffs.append(_flavor_value(op, flavor, sel, region_idx, point_idx))
            rates.append(float(op.eigenvalues[cluster[0]]))
        coeffs = np.asarray(coeffs)
        rates = np.asarray(rates)
        keep = coeffs > 0
        return sum_exp_decay(coeffs[keep], rates[keep])
    if flavor not in ("ultra", "density"):
        raise ValueError(f"unknown profile flavor {flavor!r}")
    lam_min = op.lambda_min_positive()
    lam_max = op.norm
    t_lo, t_hi = span[0] / lam_max, span[1] / lam_min
    ndecades = math.log10(t_hi / t_lo)
    npts = max(int(math.ceil(ndecades * points_per_decade)) + 1, 2)
    grid = np.concatenate([[0.0], np.geomspace(t_lo, t_hi, npts)])
    values = evaluate_heat_decay(op, grid, flavor)
    values = np.minimum.accumulate(values)
    tail = ExponentialTail(rate=lam_min, coefficient=float(values[-1]), start=float(grid[-1]))
    return tabulated_decay(grid, values, tail)


def evaluate_heat_decay(op: SpectralOperator, ts, flavor: str) -> np.ndarray:
    """Exact pointwise values of the kernel-free heat decay at times ts.

    Vectorized over ts; for PSD heat kernels the max over entries is
    attained on the diagonal, so only diagonal blocks are formed.
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    lams = op.eigenvalues[~op.kernel_flags]
    if lams.size == 0:
        return np.zeros_like(ts)
    n, h = op.space.npoints, op.space.fiber_dim
    psi = op.vectors[:, ~op.kernel_flags].reshape(n, h, -1)
    weights = np.exp(-np.outer(ts, lams))
    if h == 1:
        dens = psi[:, 0, :] ** 2
        per_point = weights @ dens.T
    else:
        diag = np.einsum("xim,xjm->xmij", psi, psi)
        blocks = np.einsum("tm,xmij->txij", weights, diag)
        per_point = np.linalg.eigvalsh(blocks)[..., -1]
    if flavor == "ultra":
        return per_point.max(axis=1)
    if flavor == "density":
        if h == 1:
            return per_point.max(axis=1)
        dens = np.einsum("tm,xmii->tx", weights, np.einsum("xim,xjm->xmij", psi, psi))
        return dens.max(axis=1)
    raise ValueError("evaluate_heat_decay supports ultra and density flavors")


# ---------------------------------------------------------------------------
# states and energies
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DensityState:
    """Positive operator rho on the same space (operator convention)."""

    space: MeasureSpace
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (self.space.dim, self.space.dim):
            raise ValueError("state matrix shape does not match space")
        object.__setattr__(self, "matrix", m)

    @staticmethod
    def pure(space, f):
        """Rank-one projection-like state f <f, .> (unnormalized)."""
        f = space.reshape_state(f).ravel()
        return DensityState(space, np.outer(f, f * space.weight_vector()))

    def sym(self):
        w = self.space.weight_vector()
        sw = np.sqrt(w)
        s = (sw[:, None] * self.matrix) / sw[None, :]
        return 0.5 * (s + s.T)

    def validate_psd(self, tol=1e-12):
        eigs = np.linalg.eigvalsh(self.sym())
        scale = max(float(np.abs(eigs).max()), 1e-300)
        if eigs[0] < -tol * scale:
            raise ValueError(f"state has negative eigenvalue {eigs[0]} beyond tolerance")

    def trace(self):
        return float(np.trace(self.matrix))

    def norm_22(self):
        eigs = np.linalg.eigvalsh(self.sym())
        return float(max(eigs[-1], 0.0)) if eigs.size else 0.0

    def sqrt_sym(self):
        eigvals, eigvecs = np.linalg.eigh(self.sym())
        eigvals = np.maximum(eigvals, 0.0)
        return (eigvecs * np.sqrt(eigvals)[None, :]) @ eigvecs.T

    def kernel(self):
        return KernelMatrix.from_matrix(self.matrix, self.space)

    def density(self):
        return density_vector(self.kernel())

    def digest(self):
        return hashlib.sha256(np.ascontiguousarray(self.matrix).tobytes()).hexdigest()[:12]


def energy(op: SpectralOperator, f) -> float:
    """Quadratic form <Af, f> computed spectrally."""
    f = op.space.reshape_state(f).ravel()
    if f.shape != (op.space.dim,):
        raise ValueError("state dimension mismatch")
    coeffs = op.vectors.T @ (op.space.weight_vector() * f)
    return float(op.eigenvalues @ coeffs**2)


def rho_energy(op: SpectralOperator, rho: DensityState) -> float:
    """Mixed-state energy tau(rho^(1/2) A rho^(1/2)) = sum_j lam_j <psi_j, rho psi_j>."""
    if rho.space.dim != op.space.dim:
        raise ValueError("state dimension mismatch")
    w = op.space.weight_vector()
    quad = np.einsum("ij,ij->j", op.vectors * w[:, None], rho.matrix @ op.vectors)
    return float(op.eigenvalues @ quad)


def rho_expectation(op: SpectralOperator, rho: DensityState) -> float:
    tr = rho.trace()
    if tr <= 0:
        raise ValueError("rho_expectation requires tau(rho) > 0")
    return rho_energy(op, rho) / tr


def operator_sym(op: SpectralOperator) -> np.ndarray:
    w = op.space.weight_vector()
    sw = np.sqrt(w)
    s = (sw[:, None] * op.matrix) / sw[None, :]
    return 0.5 * (s + s.T)


def sandwich_norm(op: SpectralOperator, rho: DensityState) -> float:
    """L2 -> L2 norm of rho^(1/2) A rho^(1/2) via the symmetric product."""
    root = rho.sqrt_sym()
    prod = root @ operator_sym(op) @ root
    prod = 0.5 * (prod + prod.T)
    eigs = np.linalg.eigvalsh(prod)
    return float(max(eigs[-1], 0.0)) if eigs.size else 0.0


def operator_norm_22(rho: DensityState) -> float:
    return rho.norm_22()


def project_off_kernel_state(op: SpectralOperator, f):
    """Remove the kernel component of a state; returns (state, residual)."""
    f = op.space.reshape_state(f).ravel()
    w = op.space.weight_vector()
    kernel = op.vectors[:, op.kernel_flags]
    coeffs = kernel.T @ (w * f)
    proj = f - kernel @ coeffs
    norm = math.sqrt(float((w * f) @ f))
    removed = math.sqrt(max(float((w * f) @ f - (w * proj) @ proj), 0.0))
    residual = removed / norm if norm > 0 else 0.0
    return proj, residual


def project_off_kernel_rho(op: SpectralOperator, rho: DensityState):
    """Compress a state to (ker A)-perp; returns (state, trace residual)."""
    w = op.space.weight_vector()
    kernel = op.vectors[:, op.kernel_flags]
    q = np.eye(op.space.dim) - kernel @ (kernel.T * w[None, :])
    proj = DensityState(op.space, q @ rho.matrix @ q)
    tr = rho.trace()
    residual = (tr - proj.trace()) / tr if tr > 0 else 0.0
    return proj, residual


# ---------------------------------------------------------------------------
# Dirichlet counting
# ---------------------------------------------------------------------------


def _dirichlet_eigenvalues(op: SpectralOperator, subset) -> np.ndarray:
    idx = op.space.dof_indices(subset)
    if idx.size == 0:
        raise ValueError("Dirichlet counting requires a nonempty region")
    sub = operator_sym(op)[np.ix_(idx, idx)]
    return np.linalg.eigvalsh(0.5 * (sub + sub.T))


def dirichlet_counting(op: SpectralOperator, subset, lam: float) -> int:
    """Dimension of the largest subspace supported in the subset with
    energy at most lam, by min-max of the compressed quadratic form."""
    eigs = _dirichlet_eigenvalues(op, subset)
    return int(np.count_nonzero(tie_leq(eigs, lam)))


def dirichlet_profile(op: SpectralOperator, subset) -> MonotoneProfile:
    """The whole Dirichlet counting function as a step profile."""
    eigs = _dirichlet_eigenvalues(op, subset)
    zero_tol = op.kernel_threshold * max(op.norm, float(np.abs(eigs).max()) if eigs.size else 0.0)
    v0 = int(np.count_nonzero(eigs <= zero_tol))
    positions, increments = [], []
    for lam in eigs[eigs > zero_tol]:
        if positions and tie_leq(lam, positions[-1]):
            increments[-1] += 1
        else:
            positions.append(float(lam))
            increments.append(1)
    return MonotoneProfile(kind="step", value_at_zero=float(v0),
                           positions=np.asarray(positions, dtype=float),
                           increments=np.asarray(increments, dtype=float))


def dirichlet_counting_kernel_free(op: SpectralOperator, subset):
    """Dirichlet eigenvalues of the form compressed to L2(subset) & (ker A)-perp.

    Returns the ascending eigenvalues of the generalized problem on the
    projected span of the subset's coordinate vectors.
    """
    idx = op.space.dof_indices(subset)
    if idx.size == 0:
        raise ValueError("Dirichlet counting requires a nonempty region")
    sym = operator_sym(op)
    w = op.space.weight_vector()
    kernel = op.vectors[:, op.kernel_flags] * np.sqrt(w)[:, None]
    t = np.eye(op.space.dim) - kernel @ kernel.T
    basis = t[:, idx]
    gram = basis.T @ basis
    stiff = basis.T @ sym @ basis
    gvals, gvecs = np.linalg.eigh(0.5 * (gram + gram.T))
    keep = gvals > 1e-12 * max(gvals[-1], 1e-300)
    if not keep.any():
        return np.empty(0)
    reduce = gvecs[:, keep] / np.sqrt(gvals[keep])[None, :]
    compressed = reduce.T @ stiff @ reduce
    return np.linalg.eigvalsh(0.5 * (compressed + compressed.T))


# ---------------------------------------------------------------------------
# operator families and i/o
# ---------------------------------------------------------------------------


def graph_laplacian(n, edges, invariant=False) -> SpectralOperator:
    """Laplacian of a weighted graph on n vertices (counting measure)."""
    lap = np.zeros((n, n))
    for edge in edges:
        u, v, w = (edge if len(edge) == 3 else (*edge, 1.0))
        u, v, w = int(u), int(v), float(w)
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge ({u}, {v}) out of range for {n} vertices")
        if u == v:
            continue
        lap[u, u] += w
        lap[v, v] += w
        lap[u, v] -= w
        lap[v, u] -= w
    return diagonalize(lap, counting_space(n), invariant=invariant)


def cycle_laplacian(n) -> SpectralOperator:
    if n < 2:
        raise ValueError("cycle needs n >= 2")
    edges = [(i, (i + 1) % n) for i in range(n)] if n > 2 else [(0, 1)]
    return graph_laplacian(n, edges, invariant=True)


def path_laplacian(n) -> SpectralOperator:
    if n < 2:
        raise ValueError("path needs n >= 2")
    return graph_laplacian(n, [(i, i + 1) for i in range(n - 1)])


def complete_laplacian(n) -> SpectralOperator:
    if n < 2:
        raise ValueError("complete graph needs n >= 2")
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    return graph_laplacian(n, edges, invariant=True)


def torus_laplacian(n, d) -> SpectralOperator:
    """Laplacian of the discrete torus (Z/n)^d."""
    if n < 2 or d < 1:
        raise ValueError("torus needs n >= 2 and d >= 1")
    npts = n**d
    coords = np.array(np.unravel_index(np.arange(npts), (n,) * d)).T
    index = {tuple(c): i for i, c in enumerate(coords)}
    edges = set()
    for i, c in enumerate(coords):
        for axis in range(d):
            nb = list(c)
            nb[axis] = (nb[axis] + 1) % n
            j = index[tuple(nb)]
            if i != j:
                edges.add((min(i, j), max(i, j)))
    return graph_laplacian(npts, sorted(edges), invariant=True)


def erdos_renyi_laplacian(n, p, rng) -> SpectralOperator:
    """Seeded random graph Laplacian; resamples until at least one edge."""
    for _ in range(1000):
        upper = rng.random((n, n)) < p
        iu = np.triu_indices(n, 1)
        mask = upper[iu]
        edges = [(int(i), int(j)) for i, j, m in zip(iu[0], iu[1], mask) if m]
        if edges:
            return graph_laplacian(n, edges)
    raise RuntimeError("failed to sample a graph with edges")


def from_edge_list(text) -> SpectralOperator:
    """Graph Laplacian from lines ``u v [weight]``; vertices are relabeled
    consecutively in sorted order."""
    edges = []
    verts = set()
    for ln, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ValueError(f"line {ln}: expected 'u v [weight]', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError as exc:
            raise ValueError(f"line {ln}: {exc}") from None
        if w <= 0:
            raise ValueError(f"line {ln}: edge weight must be positive")
        edges.append((u, v, w))
        verts.update((u, v))
    if not edges:
        raise ValueError("edge list is empty")
    order = {v: i for i, v in enumerate(sorted(verts))}
    return graph_laplacian(len(order), [(order[u], order[v], w) for u, v, w in edges])


def from_dense_json(obj) -> SpectralOperator:
    """Operator from ``{n, h, weights[], entries[][]}`` (operator convention)."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    n = int(obj["n"])
    h = int(obj.get("h", 1))
    weights = np.asarray(obj.get("weights", np.ones(n)), dtype=float)
    entries = np.asarray(obj["entries"], dtype=float)
    space = MeasureSpace(points=tuple(range(n)), weights=weights, fiber_dim=h)
    return diagonalize(entries, space)


def from_family(name, **params) -> SpectralOperator:
    """Generated operator families: cycle, path, complete, torus."""
    name = name.lower()
    if name == "cycle":
        return cycle_laplacian(int(params["n"]))
    if name == "path":
        return path_laplacian(int(params["n"]))
    if name == "complete":
        return complete_laplacian(int(params["n"]))
    if name == "torus":
        return torus_laplacian(int(params["n"]), int(params.get("d", 2)))
    raise ValueError(f"unknown operator family {name!r}")


def block_copies(op: SpectralOperator, copies: int) -> SpectralOperator:
    """The operator acting diagonally on C^copies-valued functions."""
    n = op.space.npoints
    if op.space.fiber_dim != 1:
        raise ValueError("block_copies expects a scalar operator")
    h = copies
    big = np.kron(op.matrix, np.eye(h))
    space = MeasureSpace(points=op.space.points, weights=op.space.weights, fiber_dim=h)
    return diagonalize(big, space, kernel_threshold=op.kernel_threshold,
                       invariant=op.invariant)
