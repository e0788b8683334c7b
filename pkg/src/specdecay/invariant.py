"""Spectral density profiles of translation-invariant operators.

The integrated density of states of a lattice symbol is computed on a
uniform midpoint grid over the dual torus [0, 2pi)^d; the grid-refinement
(Richardson) error is always estimated by a second pass at half the
resolution, never asserted a priori.  Closed forms cover the continuum
Laplacian profile and the resulting Sobolev/Moser constants.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import gammaln

from .profiles import MonotoneProfile, evaluate, power_profile, tabulated_profile

__all__ = [
    "TorusSymbol",
    "SymbolProfile",
    "lattice_laplacian_symbol",
    "discrete_bilaplacian_symbol",
    "symbol_density_profile",
    "rn_laplacian_profile",
    "sobolev_constant_rn",
    "moser_constant_rn",
    "ns_exponent_fit",
    "parse_symbol",
    "unit_ball_volume",
]

DEFAULT_RESOLUTION = 1024
DEFAULT_FIT_WINDOW = (1e-3, 1e-1)
DEFAULT_FIT_SAMPLES = 32


@dataclass(frozen=True)
class TorusSymbol:
    """Matrix symbol on the dual torus.

    ``scalar`` evaluates a batch of points ``xi`` with shape (..., d) to
    nonnegative reals; for ``fiber_dim > 1`` supply ``matrix`` returning
    self-adjoint PSD blocks of shape (..., h, h) instead.
    """

    dimension: int
    fiber_dim: int = 1
    scalar: Callable[[np.ndarray], np.ndarray] | None = None
    matrix: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = ""

    def eigenvalues_at(self, xi):
        """Eigenvalues of the symbol at a batch of points, shape (..., h)."""
        xi = np.asarray(xi, dtype=float)
        if self.fiber_dim == 1:
            vals = np.asarray(self.scalar(xi), dtype=float)
            return vals[..., None]
        blocks = np.asarray(self.matrix(xi))
        return np.linalg.eigvalsh(blocks)


def lattice_laplacian_symbol(d: int) -> TorusSymbol:
    """Symbol of the standard lattice Laplacian: sum_i 2(1 - cos xi_i)."""
    if d < 1:
        raise ValueError("dimension must be >= 1")

    def scalar(xi):
        return np.sum(2.0 - 2.0 * np.cos(xi), axis=-1)

    return TorusSymbol(dimension=d, scalar=scalar, name=f"lattice_laplacian d={d}")


def discrete_bilaplacian_symbol(d: int) -> TorusSymbol:
    if d < 1:
        raise ValueError("dimension must be >= 1")

    def scalar(xi):
        return np.sum(2.0 - 2.0 * np.cos(xi), axis=-1) ** 2

    return TorusSymbol(dimension=d, scalar=scalar, name=f"discrete_bilaplacian d={d}")


@dataclass(frozen=True)
class SymbolProfile:
    """Tabulated density-of-states profile with a refinement error estimate."""

    profile: MonotoneProfile
    error_estimate: float
    resolution: int


def _grid_counts(sym: TorusSymbol, lam_grid, resolution, kernel_threshold):
    """Cumulative counts of symbol eigenvalues in ]0, lam] over the grid.

    Accumulates slab by slab along the first axis so only
    ``resolution**(d-1)`` points are materialized at once; slabs are
    summed in a fixed order for determinism.
    """
    d = sym.dimension
    lam_grid = np.asarray(lam_grid, dtype=float)
    axis = 2.0 * np.pi * (np.arange(resolution) + 0.5) / resolution
    if d == 1:
        slabs = [axis[:, None]]
    else:
        mesh = np.meshgrid(*([axis] * (d - 1)), indexing="ij")
        rest = np.stack([m.ravel() for m in mesh], axis=-1)
        first_col = np.empty((rest.shape[0], 1))

        def _slab(x):
            first_col[:] = x
            return np.concatenate([first_col, rest], axis=1)

        slabs = (_slab(x) for x in axis)
    counts = np.zeros(lam_grid.size + 1, dtype=np.int64)
    for pts in slabs:
        eigs = sym.eigenvalues_at(pts).ravel()
        eigs = eigs[eigs > kernel_threshold]
        idx = np.searchsorted(lam_grid, eigs * (1.0 - 1e-12), side="left")
        counts += np.bincount(idx, minlength=lam_grid.size + 1)
    return np.cumsum(counts[:-1])


def symbol_density_profile(sym: TorusSymbol, lam_grid, resolution=DEFAULT_RESOLUTION,
                           kernel_threshold=1e-12, tol=None) -> SymbolProfile:
    """Integrated density of states F(lam) over the dual torus.

    F(lam) is the fraction of grid eigenvalues in ]0, lam] (midpoint rule
    for the normalized Plancherel measure).  The attached error estimate
    compares resolutions ``resolution`` and ``resolution // 2``; when
    ``tol`` is given and the estimate exceeds it the grid is rejected.
    """
    lam_grid = np.sort(np.asarray(lam_grid, dtype=float))
    if lam_grid.size == 0 or lam_grid[0] <= 0:
        raise ValueError("lam_grid must be positive ascending")
    if resolution < 8:
        raise ValueError("resolution must be >= 8 per axis")
    counts = _grid_counts(sym, lam_grid, resolution, kernel_threshold)
    values = counts / float(resolution) ** sym.dimension
    coarse_res = resolution // 2
    coarse = _grid_counts(sym, lam_grid, coarse_res, kernel_threshold)
    coarse_values = coarse / float(coarse_res) ** sym.dimension
    error = float(np.abs(values - coarse_values).max())
    if tol is not None and error > tol:
        raise ValueError(f"grid too coarse: refinement error {error:.3e} > tol {tol:.3e}")
    profile = tabulated_profile(lam_grid, np.maximum.accumulate(values))
    return SymbolProfile(profile=profile, error_estimate=error, resolution=resolution)


# ---------------------------------------------------------------------------
# continuum closed forms
# ---------------------------------------------------------------------------


def unit_ball_volume(n: int) -> float:
    return math.exp(0.5 * n * math.log(math.pi) - gammaln(0.5 * n + 1.0))


def _log_cn(n: int) -> float:
    """log of (2 pi)^(-n) vol(B_n)."""
    return -n * math.log(2.0 * math.pi) + 0.5 * n * math.log(math.pi) - gammaln(0.5 * n + 1.0)


def rn_laplacian_profile(n: int) -> MonotoneProfile:
    """Continuum Laplacian profile C_n lam^(n/2), C_n = (2 pi)^(-n) vol(B_n)."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    return power_profile(math.exp(_log_cn(n)), 0.5 * n)


def sobolev_constant_rn(n: int) -> float:
    """Sobolev constant (1/pi) (n vol(B_n)/(n-2))^(1/n) for n >= 3.

    Evaluated in log space so it stays finite for very large n.
    """
    if n < 3:
        raise ValueError("the Sobolev constant requires n >= 3")
    log_vol = 0.5 * n * math.log(math.pi) - gammaln(0.5 * n + 1.0)
    return math.exp((math.log(n) - math.log(n - 2.0) + log_vol) / n) / math.pi


def moser_constant_rn(n: int) -> float:
    """Moser constant 4^(1 + 2/n) C_n^(2/n) for n >= 1."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    return math.exp((1.0 + 2.0 / n) * math.log(4.0) + (2.0 / n) * _log_cn(n))


# ---------------------------------------------------------------------------
# exponent fitting
# ---------------------------------------------------------------------------


def ns_exponent_fit(F: MonotoneProfile, window, samples=DEFAULT_FIT_SAMPLES):
    """Least-squares slope of log F against log lam on a log-uniform sample.

    Returns ``(exponent, intercept, max_residual)``; the slope is the
    near-zero decay exponent of the profile.  Raises if F vanishes
    anywhere on the window.
    """
    lo, hi = float(window[0]), float(window[1])
    if not 0 < lo < hi:
        raise ValueError("window must satisfy 0 < lo < hi")
    lams = np.geomspace(lo, hi, samples)
    vals = np.array([evaluate(F, x) for x in lams])
    if np.any(vals <= 0):
        raise ValueError("profile vanishes on the fit window")
    logx = np.log(lams)
    logy = np.log(vals)
    slope, intercept = np.polyfit(logx, logy, 1)
    residual = float(np.abs(logy - (slope * logx + intercept)).max())
    return float(slope), float(intercept), residual


# ---------------------------------------------------------------------------
# symbol expression grammar
# ---------------------------------------------------------------------------

_TERM_RE = re.compile(
    r"""\s*(?P<sign>[+-])?\s*
        (?:(?P<coeff>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)\s*(?:\*\s*)?)?
        (?:(?P<fn>cos|sin)\s*\(\s*(?P<vec>-?\d+(?:\s*,\s*-?\d+)*)\s*\))?\s*""",
    re.VERBOSE,
)


def parse_symbol(text: str, dimension: int) -> TorusSymbol:
    """Parse a trigonometric polynomial symbol.

    Grammar: signed terms ``c``, ``c*cos(k1,...,kd)`` or ``c*sin(...)``
    summed together, where the integer vector is the frequency dotted with
    xi, e.g. ``"4 - 2*cos(1,0) - 2*cos(0,1)"``.  Parse errors carry the
    character position.
    """
    terms = []
    pos = 0
    text = text.strip()
    if not text:
        raise ValueError("empty symbol expression (position 0)")
    while pos < len(text):
        m = _TERM_RE.match(text, pos)
        if not m or m.end() == pos or (m.group("coeff") is None and m.group("fn") is None):
            raise ValueError(f"cannot parse symbol expression at position {pos}: "
                             f"{text[pos:pos + 12]!r}")
        if m.group("sign") is None and terms:
            raise ValueError(f"missing '+' or '-' between terms at position {pos}")
        sign = -1.0 if m.group("sign") == "-" else 1.0
        coeff = float(m.group("coeff")) if m.group("coeff") else 1.0
        if m.group("fn"):
            vec = np.array([int(v) for v in m.group("vec").split(",")], dtype=float)
            if vec.size != dimension:
                raise ValueError(
                    f"frequency vector {m.group('vec')!r} at position {pos} has "
                    f"{vec.size} components, expected {dimension}")
            terms.append((sign * coeff, m.group("fn"), vec))
        else:
            terms.append((sign * coeff, None, None))
        pos = m.end()

    def scalar(xi):
        xi = np.asarray(xi, dtype=float)
        out = np.zeros(xi.shape[:-1])
        for coeff, fn, vec in terms:
            if fn is None:
                out = out + coeff
            elif fn == "cos":
                out = out + coeff * np.cos(xi @ vec)
            else:
                out = out + coeff * np.sin(xi @ vec)
        return out

    return TorusSymbol(dimension=dimension, scalar=scalar, name=text)
