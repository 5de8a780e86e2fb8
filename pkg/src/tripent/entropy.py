"""Differential and discrete entropies, in bits.

Two families live here. The closed forms (Gaussian entropy, conditional
entropy from a covariance matrix, binary entropy) are exact. The histogram
estimators are plug-in estimates ``H + log2(width)`` or, for multi-resolution
partitions, the entropy of the piecewise-uniform maximum-entropy density.
Given exact bin masses either estimator is an upper bound on the true
differential entropy, so a bound built from them is conservative. No
smoothing or pseudo-counts are applied anywhere, because they would spoil
that direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.special import ndtr

from .core import DegenerateCorrelationsError, ValidationError

__all__ = [
    "Histogram1D",
    "MultiResHistogram",
    "CovarianceMatrix3",
    "gaussian_entropy",
    "binary_entropy",
    "discrete_entropy",
    "discretized_differential_entropy",
    "partition_differential_entropy",
    "gaussian_conditional_entropy",
    "histogram_from_samples",
    "gaussian_bin_masses",
    "normal_interval_mass",
    "joint_histogram_entropy",
]

LOG2_2PIE = math.log2(2.0 * math.pi * math.e)


@dataclass(frozen=True)
class Histogram1D:
    """Masses over contiguous bins.

    ``clipped_mass`` records how much of the input fell outside
    ``[edges[0], edges[-1]]`` and was folded into the edge bins.
    """

    edges: np.ndarray
    masses: np.ndarray
    clipped_mass: float = 0.0

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        masses = np.asarray(self.masses, dtype=float)
        if edges.ndim != 1 or masses.ndim != 1 or edges.size != masses.size + 1:
            raise ValidationError("need len(edges) == len(masses) + 1")
        if not np.all(np.isfinite(edges)) or np.any(np.diff(edges) <= 0):
            raise ValidationError("bin edges must be finite and strictly increasing")
        if np.any(masses < 0) or not np.all(np.isfinite(masses)):
            raise ValidationError("bin masses must be finite and nonnegative")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "masses", masses)

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    def uniform_width(self, rtol: float = 1e-9) -> Optional[float]:
        """Common bin width, or ``None`` if the bins are not uniform."""
        w = self.widths
        if np.allclose(w, w[0], rtol=rtol, atol=0.0):
            return math.fsum(w) / w.size
        return None

    def to_partition(self) -> "MultiResHistogram":
        return MultiResHistogram(
            root_lo=self.edges[:1],
            root_hi=self.edges[-1:],
            lo=self.edges[:-1, None],
            hi=self.edges[1:, None],
            masses=self.masses,
            depth=np.zeros(self.masses.size, dtype=int),
        )

    def __add__(self, other: "Histogram1D") -> "Histogram1D":
        if not np.array_equal(self.edges, other.edges):
            raise ValidationError("can only merge histograms with identical edges")
        return Histogram1D(self.edges, self.masses + other.masses, self.clipped_mass + other.clipped_mass)


@dataclass(frozen=True)
class MultiResHistogram:
    """Axis-aligned boxes tiling a root box, each carrying a mass.

    Arrays ``lo``/``hi`` have shape ``(n_leaves, dim)``. ``depth`` counts
    dyadic splits from the root (the initial 2-per-axis seeding is depth 1).
    """

    root_lo: np.ndarray
    root_hi: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    masses: np.ndarray
    depth: np.ndarray
    truncated: bool = False
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        root_lo = np.atleast_1d(np.asarray(self.root_lo, dtype=float))
        root_hi = np.atleast_1d(np.asarray(self.root_hi, dtype=float))
        lo = np.asarray(self.lo, dtype=float).reshape(-1, root_lo.size)
        hi = np.asarray(self.hi, dtype=float).reshape(-1, root_lo.size)
        masses = np.asarray(self.masses, dtype=float).reshape(-1)
        depth = np.asarray(self.depth, dtype=int).reshape(-1)
        if not (lo.shape[0] == hi.shape[0] == masses.size == depth.size):
            raise ValidationError("leaf arrays must have matching lengths")
        if np.any(masses < 0) or not np.all(np.isfinite(masses)):
            raise ValidationError("leaf masses must be finite and nonnegative")
        for name, value in (("root_lo", root_lo), ("root_hi", root_hi), ("lo", lo), ("hi", hi),
                            ("masses", masses), ("depth", depth)):
            object.__setattr__(self, name, value)

    @property
    def dim(self) -> int:
        return self.root_lo.size

    @property
    def n_leaves(self) -> int:
        return self.masses.size

    @property
    def volumes(self) -> np.ndarray:
        return np.prod(self.hi - self.lo, axis=1)

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    def check_partition(self, exhaustive: bool = False, rtol: float = 1e-9) -> None:
        """Raise ``ValidationError`` unless the leaves tile the root box.

        The cheap check is containment plus volume conservation. With
        ``exhaustive=True`` every pair of leaves is also tested for overlap,
        which together with volume conservation proves an exact tiling.
        """
        if np.any(self.hi <= self.lo):
            raise ValidationError("degenerate leaf (zero extent along some axis)")
        tol = rtol * np.max(self.root_hi - self.root_lo)
        if np.any(self.lo < self.root_lo - tol) or np.any(self.hi > self.root_hi + tol):
            raise ValidationError("leaf extends outside the root domain")
        root_volume = float(np.prod(self.root_hi - self.root_lo))
        if not math.isclose(self.volumes.sum(), root_volume, rel_tol=rtol):
            raise ValidationError("leaf volumes do not add up to the root volume")
        if exhaustive:
            for i in range(self.n_leaves - 1):
                overlap = np.all(
                    (np.minimum(self.hi[i], self.hi[i + 1:]) - np.maximum(self.lo[i], self.lo[i + 1:])) > tol,
                    axis=1,
                )
                if np.any(overlap):
                    raise ValidationError(f"leaf {i} overlaps another leaf")

    def with_masses(self, masses) -> "MultiResHistogram":
        return MultiResHistogram(self.root_lo, self.root_hi, self.lo, self.hi, masses, self.depth,
                                 self.truncated, dict(self.meta))


CountsLike = Union[Histogram1D, MultiResHistogram, np.ndarray]


def gaussian_entropy(variance: float) -> float:
    """Differential entropy of a normal distribution, ``0.5*log2(2*pi*e*var)``."""
    variance = float(variance)
    if not variance > 0.0 or not math.isfinite(variance):
        raise ValidationError(f"variance must be positive and finite, got {variance!r}")
    return 0.5 * (LOG2_2PIE + math.log2(variance))


def binary_entropy(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"probability must lie in [0, 1], got {p!r}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def _masses(hist: CountsLike) -> np.ndarray:
    if isinstance(hist, (Histogram1D, MultiResHistogram)):
        return hist.masses
    masses = np.asarray(hist, dtype=float).reshape(-1)
    if np.any(masses < 0):
        raise ValidationError("masses must be nonnegative")
    return masses


def _probabilities(masses: np.ndarray) -> np.ndarray:
    total = math.fsum(masses)
    if not total > 0:
        raise ValidationError("total mass must be positive")
    return masses / total


def _plogp_sum(p: np.ndarray, weights: Optional[np.ndarray] = None) -> float:
    # fsum is correctly rounded, so reordering bins cannot change the result
    nz = p > 0
    if weights is None:
        return -math.fsum(p[nz] * np.log2(p[nz]))
    return math.fsum(p[nz] * np.log2(weights[nz] / p[nz]))


def discrete_entropy(hist: CountsLike) -> float:
    """Shannon entropy of the normalized masses; empty bins contribute nothing."""
    return _plogp_sum(_probabilities(_masses(hist)))


def discretized_differential_entropy(hist: Histogram1D, bin_width: Optional[float] = None) -> float:
    """Plug-in differential entropy ``H(bins) + log2(width)`` of a uniform histogram."""
    width = hist.uniform_width()
    if width is None:
        raise ValidationError("bins are not uniform; use partition_differential_entropy")
    if bin_width is not None:
        if not math.isclose(bin_width, width, rel_tol=1e-9):
            raise ValidationError(f"bin_width {bin_width} disagrees with histogram width {width}")
        width = float(bin_width)
    if width <= 0:
        raise ValidationError("bin width must be positive")
    return discrete_entropy(hist) + math.log2(width)


def partition_differential_entropy(hist: Union[MultiResHistogram, Histogram1D]) -> float:
    """Entropy of the piecewise-uniform density matching the leaf masses.

    ``sum_l p_l * log2(vol_l / p_l)``. For a uniform partition this reduces
    to :func:`discretized_differential_entropy`.
    """
    if isinstance(hist, Histogram1D):
        hist = hist.to_partition()
    volumes = hist.volumes
    if np.any(volumes <= 0):
        raise ValidationError("partition contains zero-volume leaves")
    return _plogp_sum(_probabilities(hist.masses), volumes)


@dataclass(frozen=True)
class CovarianceMatrix3:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (3, 3) or not np.all(np.isfinite(m)):
            raise ValidationError("covariance must be a finite 3x3 matrix")
        scale = max(np.max(np.abs(m)), np.finfo(float).tiny)
        if np.max(np.abs(m - m.T)) > 1e-12 * scale:
            raise ValidationError("covariance matrix is not symmetric")
        m = 0.5 * (m + m.T)
        if np.min(np.linalg.eigvalsh(m)) < -1e-12 * np.trace(m):
            raise ValidationError("covariance matrix is not positive semi-definite")
        object.__setattr__(self, "matrix", m)

    def conditional_variance(self, target: int) -> float:
        """Variance of component ``target`` given the other two.

        Taken from the inverse-covariance diagonal, which equals the Schur
        complement but serves every target index with one code path.
        """
        if target not in (0, 1, 2):
            raise ValidationError(f"target index must be 0, 1 or 2, got {target!r}")
        # normalize first so that m-scale (1e-10) and rad/m-scale (1e5) entries behave alike
        d = np.sqrt(np.diag(self.matrix))
        if np.any(d == 0):
            raise DegenerateCorrelationsError("degenerate correlations: a component has zero variance")
        corr = self.matrix / np.outer(d, d)
        try:
            eigs = np.linalg.eigvalsh(corr)
            if eigs[0] <= 1e-14 * eigs[-1]:
                raise np.linalg.LinAlgError
            precision = np.linalg.inv(corr)
        except np.linalg.LinAlgError:
            raise DegenerateCorrelationsError(
                "degenerate correlations: covariance matrix is singular"
            ) from None
        return float(d[target] ** 2 / precision[target, target])


def gaussian_conditional_entropy(cov: Union[CovarianceMatrix3, np.ndarray], target: int) -> float:
    """``h(target | others)`` in bits for a jointly Gaussian triple."""
    if not isinstance(cov, CovarianceMatrix3):
        cov = CovarianceMatrix3(np.asarray(cov, dtype=float))
    return gaussian_entropy(cov.conditional_variance(target))


def histogram_from_samples(samples, bin_width: float, span: float = 8.0,
                           center: Optional[float] = None, scale: Optional[float] = None,
                           edges: Optional[np.ndarray] = None) -> Histogram1D:
    """Uniform-width histogram of 1D samples.

    By default the domain is ``mean +/- span * std`` of the samples, snapped
    outward to a whole number of bins. Samples outside the domain are counted
    in the nearest edge bin and their total is kept as ``clipped_mass``.
    Passing explicit ``edges`` overrides all of that.
    """
    x = np.asarray(samples, dtype=float).reshape(-1)
    if x.size == 0:
        raise ValidationError("no samples")
    if edges is None:
        if not bin_width > 0 or not math.isfinite(bin_width):
            raise ValidationError(f"bin_width must be positive, got {bin_width!r}")
        center = float(np.mean(x)) if center is None else float(center)
        scale = float(np.std(x)) if scale is None else float(scale)
        if scale <= 0:
            raise DegenerateCorrelationsError("samples have zero spread")
        half = math.ceil(span * scale / bin_width)
        edges = center + bin_width * np.arange(-half, half + 1)
    edges = np.asarray(edges, dtype=float)
    n_bins = edges.size - 1
    idx = np.searchsorted(edges, x, side="right") - 1
    outside = (idx < 0) | (idx >= n_bins)
    # the closed right edge belongs to the last bin
    idx[x == edges[-1]] = n_bins - 1
    outside &= x != edges[-1]
    np.clip(idx, 0, n_bins - 1, out=idx)
    counts = np.bincount(idx, minlength=n_bins).astype(float)
    return Histogram1D(edges, counts, clipped_mass=float(np.count_nonzero(outside)))


def normal_interval_mass(lo, hi, mean: float, std: float) -> np.ndarray:
    """Normal probability of each interval ``[lo, hi]``."""
    a = (np.asarray(lo, dtype=float) - mean) / std
    b = (np.asarray(hi, dtype=float) - mean) / std
    # difference of upper-tail values on the right half avoids cancellation
    right = a >= 0
    return np.where(right, ndtr(-a) - ndtr(-b), ndtr(b) - ndtr(a))


def gaussian_bin_masses(edges, mean: float, variance: float) -> np.ndarray:
    """Exact normal probabilities of each bin (error-function differences)."""
    if not variance > 0:
        raise ValidationError("variance must be positive")
    edges = np.asarray(edges, dtype=float)
    return normal_interval_mass(edges[:-1], edges[1:], mean, math.sqrt(variance))


def joint_histogram_entropy(x, y, width_x: float, width_y: float, span: float = 8.0) -> float:
    """Plug-in joint differential entropy ``h(x, y)`` on a uniform 2D grid."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ex = histogram_from_samples(x, width_x, span).edges
    ey = histogram_from_samples(y, width_y, span).edges
    counts, _, _ = np.histogram2d(np.clip(x, ex[0], ex[-1]), np.clip(y, ey[0], ey[-1]), bins=(ex, ey))
    return discrete_entropy(counts) + math.log2(width_x) + math.log2(width_y)
