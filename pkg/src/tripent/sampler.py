"""Monte-Carlo simulation of the coincidence-measurement campaign.

Triplets are drawn exactly: the triple-Gaussian state is a product of
independent normals along the principal axes (u, v, w), so samples are
drawn there and rotated back to party coordinates. Randomness comes from
numpy's counter-based Philox generator. Every stream is keyed by
``(seed, domain, purpose)`` and split into independent substreams with
``SeedSequence.spawn``.

Bounds are estimated from 1D projected scalars (the measured linear
combinations) rather than from a 3D histogram. The 3D adaptive histograms
exist to model the measurement scheme itself. Their leaf counts show how
much cheaper adaptive refinement is than a uniform grid.
"""

from __future__ import annotations

import csv
import enum
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import reduce
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .bounds import combination_variances, e3f_entropic_bound
from .core import (
    GHZ_LIKE_COEFFS,
    BoundMethod,
    BoundReport,
    CoefficientVectors,
    DegenerateCorrelationsError,
    TripartiteGaussianState,
    ValidationError,
    as_triple,
)
from .entropy import (
    Histogram1D,
    MultiResHistogram,
    discretized_differential_entropy,
    gaussian_bin_masses,
    histogram_from_samples,
    normal_interval_mass,
    partition_differential_entropy,
)
from .spdc import ROTATION

__all__ = [
    "Domain",
    "TripletSampleSet",
    "RefinementPolicy",
    "sample_triplets",
    "project_scalar",
    "adaptive_histogram",
    "gaussian_mass_oracle",
    "poisson_counts",
    "merge_histograms",
    "estimate_bound_from_samples",
    "exact_mass_bound",
    "poisson_bound",
    "write_samples_csv",
    "read_samples_csv",
    "write_histogram_csv",
    "read_histogram_csv",
    "DEFAULT_WIDTH_FRACTION",
]

DEFAULT_WIDTH_FRACTION = 1.0 / 16.0

# Stream keys mixed into SeedSequence so independent uses of one seed never collide.
_KEY_SAMPLES = 1
_KEY_POISSON = 2
_KEY_BOOTSTRAP = 3


class Domain(str, enum.Enum):
    POSITION = "position"
    MOMENTUM = "momentum"


def _domain(value) -> Domain:
    try:
        return Domain(value)
    except ValueError:
        raise ValidationError(f"domain must be 'position' or 'momentum', got {value!r}") from None


def _seed(seed) -> int:
    if isinstance(seed, bool) or int(seed) != seed or not 0 <= int(seed) < 2**64:
        raise ValidationError(f"seed must be an integer in [0, 2**64), got {seed!r}")
    return int(seed)


def _generator(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *key])))


@dataclass(frozen=True, eq=False)
class TripletSampleSet:
    """Samples of ``(A, B, C)`` in one domain, with the provenance needed to regenerate them."""

    domain: Domain
    samples: np.ndarray
    seed: int
    state: TripartiteGaussianState
    n_streams: int = 1

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 2 or samples.shape[1] != 3:
            raise ValidationError("samples must have shape (n, 3)")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "domain", _domain(self.domain))

    def __len__(self) -> int:
        return self.samples.shape[0]

    def identical(self, other: "TripletSampleSet") -> bool:
        """Bitwise equality of samples and provenance."""
        return (
            self.domain == other.domain
            and self.seed == other.seed
            and self.state == other.state
            and self.n_streams == other.n_streams
            and self.samples.shape == other.samples.shape
            and self.samples.tobytes() == other.samples.tobytes()
        )


@dataclass(frozen=True)
class RefinementPolicy:
    """Stopping rule for adaptive subdivision.

    A leaf whose share of the total mass exceeds ``threshold`` is split in
    two along every axis, unless it sits at ``max_depth``. Refinement
    stops early, and flags the result as truncated, once another round
    would exceed ``leaf_budget`` leaves.
    """

    threshold: float = 1.0 / 64.0
    max_depth: int = 10
    leaf_budget: int = 100_000
    initial_resolution: int = 2

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise ValidationError("threshold must lie strictly between 0 and 1")
        if int(self.max_depth) != self.max_depth or not 1 <= self.max_depth <= 30:
            raise ValidationError("max_depth must be an integer in [1, 30]")
        if int(self.leaf_budget) != self.leaf_budget or self.leaf_budget < 2:
            raise ValidationError("leaf_budget must be an integer >= 2")
        if self.initial_resolution != 2:
            raise ValidationError("initial resolution is fixed at 2 bins per axis")


def _draw_chunk(seq: np.random.SeedSequence, count: int, sigmas: np.ndarray) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(seq))
    return (rng.standard_normal((count, 3)) * sigmas) @ ROTATION


def sample_triplets(state: TripartiteGaussianState, domain, n: int, seed: int,
                    n_streams: int = 1, workers: int = 1) -> TripletSampleSet:
    """Draw ``n`` triplets from ``|psi|^2`` in position or momentum space.

    The samples are split into ``n_streams`` contiguous chunks, each drawn
    from its own spawned substream. The output depends on ``(seed, domain,
    n, n_streams)`` only. ``workers`` changes the wall-clock time but not a
    single bit of the result.
    """
    domain = _domain(domain)
    seed = _seed(seed)
    if int(n) != n or n < 1:
        raise ValidationError("n must be a positive integer")
    if int(n_streams) != n_streams or n_streams < 1:
        raise ValidationError("n_streams must be a positive integer")
    n, n_streams = int(n), int(n_streams)
    variances = state.position_variances if domain is Domain.POSITION else state.momentum_variances
    sigmas = np.sqrt(variances)
    root = np.random.SeedSequence([seed, _KEY_SAMPLES, 0 if domain is Domain.POSITION else 1])
    streams = root.spawn(n_streams)
    bounds = np.linspace(0, n, n_streams + 1).astype(int)
    counts = np.diff(bounds)
    if workers > 1 and n_streams > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_draw_chunk, streams, counts, itertools.repeat(sigmas)))
    else:
        chunks = [_draw_chunk(s, c, sigmas) for s, c in zip(streams, counts)]
    return TripletSampleSet(domain, np.concatenate(chunks), seed, state, n_streams)


def project_scalar(samples: Union[TripletSampleSet, np.ndarray], coeffs: Sequence[float]) -> np.ndarray:
    """``c_A a + c_B b + c_C c`` for every sample (all-zero coefficients give zeros)."""
    c = np.asarray(as_triple(coeffs, "coeffs"))
    data = samples.samples if isinstance(samples, TripletSampleSet) else np.asarray(samples, dtype=float)
    return data @ c


MassOracle = Callable[[np.ndarray, np.ndarray], np.ndarray]


def gaussian_mass_oracle(mean: float, variance: float) -> MassOracle:
    """Exact 1D normal mass of boxes given as ``(lo, hi)`` arrays of shape ``(L, 1)``."""
    if not variance > 0:
        raise ValidationError("variance must be positive")
    std = math.sqrt(variance)

    def oracle(lo, hi):
        return normal_interval_mass(np.asarray(lo, dtype=float)[:, 0], np.asarray(hi, dtype=float)[:, 0],
                                    mean, std)

    return oracle


def adaptive_histogram(data, policy: RefinementPolicy = RefinementPolicy(), *,
                       bounds: Optional[tuple] = None) -> MultiResHistogram:
    """Multi-resolution histogram seeded at 2 bins per axis and refined where bright.

    Args:
        data: samples (shape ``(n,)`` or ``(n, dim)``, or a TripletSampleSet),
            or a mass oracle ``f(lo, hi) -> masses`` over boxes.
        policy: subdivision threshold, depth limit and leaf budget.
        bounds: ``(lo, hi)`` of the root box. Required for an oracle. For
            samples it defaults to their bounding box.

    Returns:
        Leaves in refinement order. ``truncated`` is set when the leaf
        budget stopped refinement early. ``meta["depth_limited"]`` notes that
        some leaf still exceeds the threshold at ``max_depth``.
    """
    oracle = callable(data) and not isinstance(data, np.ndarray)
    if oracle:
        if bounds is None:
            raise ValidationError("a mass oracle needs explicit root bounds")
        root_lo = np.atleast_1d(np.asarray(bounds[0], dtype=float))
        root_hi = np.atleast_1d(np.asarray(bounds[1], dtype=float))
        n_samples = None
    else:
        x = data.samples if isinstance(data, TripletSampleSet) else np.asarray(data, dtype=float)
        x = x.reshape(x.shape[0], -1) if x.ndim > 1 else x.reshape(-1, 1)
        if x.shape[0] == 0:
            raise ValidationError("no samples")
        if not np.all(np.isfinite(x)):
            raise ValidationError("samples must be finite")
        if bounds is None:
            root_lo, root_hi = x.min(axis=0), x.max(axis=0)
        else:
            root_lo = np.atleast_1d(np.asarray(bounds[0], dtype=float))
            root_hi = np.atleast_1d(np.asarray(bounds[1], dtype=float))
        n_samples = x.shape[0]
    dim = root_lo.size
    if np.any(root_hi <= root_lo):
        raise DegenerateCorrelationsError("root box has zero extent along some axis")
    fanout = 2**dim
    if fanout > policy.leaf_budget:
        raise ValidationError("leaf budget is smaller than the initial 2-per-axis seeding")

    depth_max = policy.max_depth
    span = root_hi - root_lo
    offsets = np.array(list(itertools.product((0, 1), repeat=dim)), dtype=np.int64)[:, ::-1]
    # child offset -> position in `offsets`, with axis a contributing bit a
    child_rank = {int(sum(int(b) << a for a, b in enumerate(o))): i for i, o in enumerate(offsets)}
    rank_of_code = np.array([child_rank[c] for c in range(fanout)])

    depth = np.ones(fanout, dtype=np.int64)
    index = offsets.copy()

    if not oracle:
        cells = np.floor((x - root_lo) / span * 2**depth_max).astype(np.int64)
        np.clip(cells, 0, 2**depth_max - 1, out=cells)
        outside = np.any((x < root_lo) | (x > root_hi), axis=1)
        bits = (cells >> (depth_max - 1)) & 1
        assign = rank_of_code[(bits << np.arange(dim)).sum(axis=1)]

    def box(depth_, index_):
        width = span / (2.0 ** depth_)[:, None]
        lo = root_lo + index_ * width
        return lo, lo + width

    def masses_now():
        if oracle:
            lo, hi = box(depth, index)
            m = np.asarray(data(lo, hi), dtype=float)
            if m.shape != (depth.size,) or np.any(m < 0) or not np.all(np.isfinite(m)):
                raise ValidationError("mass oracle must return finite nonnegative masses, one per box")
            return m
        return np.bincount(assign, minlength=depth.size).astype(float)

    masses = masses_now()
    truncated = False
    while True:
        total = masses.sum()
        if total <= 0:
            raise DegenerateCorrelationsError("histogram has no mass")
        bright = masses / total > policy.threshold
        split = bright & (depth < depth_max)
        n_split = int(split.sum())
        if n_split == 0:
            break
        if depth.size + n_split * (fanout - 1) > policy.leaf_budget:
            truncated = True
            break
        keep = ~split
        new_id = np.full(depth.size, -1, dtype=np.int64)
        new_id[keep] = np.arange(int(keep.sum()))
        child_base = np.full(depth.size, -1, dtype=np.int64)
        child_base[split] = int(keep.sum()) + fanout * np.arange(n_split)
        parents_depth = depth[split]
        parents_index = index[split]
        child_depth = np.repeat(parents_depth + 1, fanout)
        child_index = (2 * parents_index[:, None, :] + offsets[None, :, :]).reshape(-1, dim)
        if not oracle:
            moving = split[assign]
            d = depth[assign[moving]]
            bits = (cells[moving] >> (depth_max - d - 1)[:, None]) & 1
            code = (bits << np.arange(dim)).sum(axis=1)
            updated = new_id[assign]
            updated[moving] = child_base[assign[moving]] + rank_of_code[code]
            assign = updated
        depth = np.concatenate([depth[keep], child_depth])
        index = np.concatenate([index[keep], child_index])
        masses = masses_now()

    lo, hi = box(depth, index)
    depth_limited = bool(np.any((masses / masses.sum() > policy.threshold) & (depth >= depth_max)))
    meta = {"depth_limited": depth_limited, "threshold": policy.threshold, "max_depth": depth_max}
    if n_samples is not None:
        meta["n_samples"] = n_samples
        meta["outside_samples"] = int(np.count_nonzero(outside))
    return MultiResHistogram(root_lo, root_hi, lo, hi, masses, depth, truncated, meta)


def poisson_counts(expected_masses, seed: int) -> np.ndarray:
    """Independent Poisson draws with the given means (coincidence counts per bin)."""
    lam = np.asarray(expected_masses, dtype=float)
    if np.any(lam < 0) or not np.all(np.isfinite(lam)):
        raise ValidationError("expected masses must be finite and nonnegative")
    return _generator(_seed(seed), _KEY_POISSON).poisson(lam)


def merge_histograms(parts: Sequence[Histogram1D]) -> Histogram1D:
    """Sum per-worker histograms that share bin edges (order does not matter)."""
    if not parts:
        raise ValidationError("nothing to merge")
    return reduce(lambda a, b: a + b, parts)


Binning = Union[None, RefinementPolicy, tuple]


def _histogram(values: np.ndarray, binning, which: int):
    if isinstance(binning, RefinementPolicy):
        return adaptive_histogram(values, binning)
    if binning is None:
        width = DEFAULT_WIDTH_FRACTION * float(np.std(values))
    else:
        width = float(binning[which])
    return histogram_from_samples(values, width)


def _entropy(hist) -> float:
    if isinstance(hist, MultiResHistogram):
        return partition_differential_entropy(hist)
    return discretized_differential_entropy(hist)


def _bootstrap(hist_x, hist_k, coeffs, n_boot: int, seed: int) -> np.ndarray:
    rng = _generator(seed, _KEY_BOOTSTRAP)
    out = np.empty(n_boot)
    px = hist_x.masses / hist_x.masses.sum()
    pk = hist_k.masses / hist_k.masses.sum()
    nx, nk = int(round(hist_x.masses.sum())), int(round(hist_k.masses.sum()))
    for b in range(n_boot):
        hx = _entropy(_with_masses(hist_x, rng.multinomial(nx, px)))
        hk = _entropy(_with_masses(hist_k, rng.multinomial(nk, pk)))
        out[b] = e3f_entropic_bound(hx, hk, coeffs).bound_gebits
    return out


def _with_masses(hist, masses):
    if isinstance(hist, MultiResHistogram):
        return hist.with_masses(masses)
    return Histogram1D(hist.edges, masses)


def estimate_bound_from_samples(x_samples: TripletSampleSet, k_samples: TripletSampleSet,
                                coeffs: CoefficientVectors = GHZ_LIKE_COEFFS, binning: Binning = None,
                                n_bootstrap: int = 50, bootstrap_seed: Optional[int] = None) -> BoundReport:
    """Entropic bound from sampled positions and momenta.

    Args:
        x_samples: position-domain samples.
        k_samples: momentum-domain samples of the same state.
        coeffs: combination coefficients.
        binning: ``None`` for a fixed width of 1/16 of each projection's
            sample standard deviation; a ``(x_width, k_width)`` pair of
            absolute widths; or a :class:`RefinementPolicy` for adaptive bins.
        n_bootstrap: number of resamples for the standard error. The
            resampling redraws bin counts multinomially with the bins held
            fixed, which is equivalent to resampling the raw values when
            the bins do not move.
        bootstrap_seed: defaults to the position-sample seed.

    The bootstrap standard error and a 95% percentile interval are reported
    alongside the bound. They are never folded into it.
    """
    if x_samples.domain is not Domain.POSITION or k_samples.domain is not Domain.MOMENTUM:
        raise ValidationError("need position-domain x_samples and momentum-domain k_samples")
    if x_samples.state != k_samples.state:
        raise ValidationError("sample sets come from different states")
    if n_bootstrap < 2:
        raise ValidationError("need at least two bootstrap resamples")
    sx = project_scalar(x_samples, coeffs.eta)
    sk = project_scalar(k_samples, coeffs.beta)
    for name, s in (("position", sx), ("momentum", sk)):
        if not np.std(s) > 0:
            raise DegenerateCorrelationsError(f"projected {name} combination has zero variance")
    hist_x = _histogram(sx, binning, 0)
    hist_k = _histogram(sk, binning, 1)
    hx, hk = _entropy(hist_x), _entropy(hist_k)
    base = e3f_entropic_bound(hx, hk, coeffs)
    seed = x_samples.seed if bootstrap_seed is None else _seed(bootstrap_seed)
    boots = _bootstrap(hist_x, hist_k, coeffs, int(n_bootstrap), seed)
    notes = []
    truncated = any(getattr(h, "truncated", False) for h in (hist_x, hist_k))
    if truncated:
        notes.append("refinement truncated")
    extra = {
        "n_x": len(x_samples),
        "n_k": len(k_samples),
        "binning": "adaptive" if isinstance(binning, RefinementPolicy) else "fixed",
        "ci95": [float(np.percentile(boots, 2.5)), float(np.percentile(boots, 97.5))],
        "n_bootstrap": int(n_bootstrap),
        "clipped_mass": float(getattr(hist_x, "clipped_mass", 0.0) + getattr(hist_k, "clipped_mass", 0.0)),
        "n_bins_x": int(hist_x.masses.size),
        "n_bins_k": int(hist_k.masses.size),
    }
    return BoundReport(
        base.bound_gebits, BoundMethod.SAMPLED, base.min_coeff_product, h_x=hx, h_k=hk,
        sigma_x=float(np.std(sx)), sigma_k=float(np.std(sk)),
        standard_error=float(np.std(boots, ddof=1)), notes=tuple(notes), extra=extra,
    )


def _exact_histograms(state: TripartiteGaussianState, coeffs: CoefficientVectors, binning, span: float):
    var_x, var_k = combination_variances(state, coeffs)
    hists = []
    for which, var in enumerate((var_x, var_k)):
        sigma = math.sqrt(var)
        half_range = span * sigma
        if isinstance(binning, RefinementPolicy):
            hists.append(adaptive_histogram(gaussian_mass_oracle(0.0, var), binning,
                                            bounds=([-half_range], [half_range])))
            continue
        width = DEFAULT_WIDTH_FRACTION * sigma if binning is None else float(binning[which])
        if not width > 0:
            raise ValidationError("bin widths must be positive")
        half = math.ceil(half_range / width)
        edges = width * np.arange(-half, half + 1)
        masses = gaussian_bin_masses(edges, 0.0, var)
        # fold the (numerically negligible) tails into the edge bins
        tail = max(0.0, 1.0 - masses.sum())
        masses[0] += tail / 2
        masses[-1] += tail / 2
        hists.append(Histogram1D(edges, masses, clipped_mass=tail))
    return hists


def exact_mass_bound(state: TripartiteGaussianState, coeffs: CoefficientVectors = GHZ_LIKE_COEFFS,
                     binning: Binning = None, span: float = 12.0) -> BoundReport:
    """The sampled pipeline with exact normal bin masses in place of counts.

    Fixed-width bins are aligned on multiples of the width around zero, so
    halving a width refines the previous grid. Because discretized entropies
    never undershoot the continuous ones, the result never exceeds
    :func:`~tripent.bounds.gaussian_pipeline_bound`.
    """
    hist_x, hist_k = _exact_histograms(state, coeffs, binning, span)
    hx, hk = _entropy(hist_x), _entropy(hist_k)
    base = e3f_entropic_bound(hx, hk, coeffs)
    return BoundReport(base.bound_gebits, BoundMethod.SAMPLED, base.min_coeff_product, h_x=hx, h_k=hk,
                       notes=("exact bin masses",),
                       extra={"n_bins_x": int(hist_x.masses.size), "n_bins_k": int(hist_k.masses.size)})


def poisson_bound(state: TripartiteGaussianState, n: float, seed: int,
                  coeffs: CoefficientVectors = GHZ_LIKE_COEFFS, binning: Binning = None,
                  span: float = 8.0) -> BoundReport:
    """Bound from Poisson-distributed counts with means ``n`` times the exact bin masses.

    This models the measurement scheme: each bin (mirror setting) is
    exposed for a fixed time and its coincidences counted.
    """
    hist_x, hist_k = _exact_histograms(state, coeffs, binning, span)
    hx_counts = _with_masses(hist_x, poisson_counts(n * hist_x.masses, seed))
    hk_counts = _with_masses(hist_k, poisson_counts(n * hist_k.masses, _seed(seed) ^ 0x5A5A5A5A))
    hx, hk = _entropy(hx_counts), _entropy(hk_counts)
    base = e3f_entropic_bound(hx, hk, coeffs)
    return BoundReport(base.bound_gebits, BoundMethod.SAMPLED, base.min_coeff_product, h_x=hx, h_k=hk,
                       notes=("poisson counts",),
                       extra={"counts_x": int(hx_counts.masses.sum()), "counts_k": int(hk_counts.masses.sum())})


# CSV schema ----------------------------------------------------------------
#
# Line 1: "# tripent-<kind>" followed by space-separated key=value pairs.
# Line 2: column names. Then one row per sample or per leaf. Floats are
# written with 17 significant digits so a read-back is bit-identical.

def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _header(kind: str, fields: dict) -> str:
    return "# tripent-" + kind + " " + " ".join(f"{k}={v}" for k, v in fields.items())


def _parse_header(line: str, kind: str) -> dict:
    parts = line.strip().split()
    if len(parts) < 2 or parts[0] != "#" or parts[1] != f"tripent-{kind}":
        raise ValidationError(f"not a tripent {kind} file")
    return dict(p.split("=", 1) for p in parts[2:])


def write_samples_csv(sample_set: TripletSampleSet, path) -> None:
    st = sample_set.state
    fields = {
        "domain": sample_set.domain.value,
        "seed": sample_set.seed,
        "n_streams": sample_set.n_streams,
        "sigma_u_sq": _fmt(st.sigma_u_sq),
        "sigma_v_sq": _fmt(st.sigma_v_sq),
        "sigma_w_sq": _fmt(st.sigma_w_sq),
        "n": len(sample_set),
    }
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(_header("samples", fields) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["a", "b", "c"])
        writer.writerows([_fmt(v) for v in row] for row in sample_set.samples)


def read_samples_csv(path) -> TripletSampleSet:
    with open(path, newline="", encoding="utf-8") as fh:
        meta = _parse_header(fh.readline(), "samples")
        rows = list(csv.reader(fh))
    data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, 3)
    state = TripartiteGaussianState(float(meta["sigma_u_sq"]), float(meta["sigma_v_sq"]),
                                    float(meta["sigma_w_sq"]))
    return TripletSampleSet(Domain(meta["domain"]), data, int(meta["seed"]), state, int(meta["n_streams"]))


def write_histogram_csv(hist: MultiResHistogram, path, extra: Optional[dict] = None) -> None:
    fields = {
        "dim": hist.dim,
        "truncated": int(hist.truncated),
        "root_lo": ";".join(_fmt(v) for v in hist.root_lo),
        "root_hi": ";".join(_fmt(v) for v in hist.root_hi),
    }
    fields.update(extra or {})
    cols = [f"lo_{i}" for i in range(hist.dim)] + [f"hi_{i}" for i in range(hist.dim)] + ["depth", "mass"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(_header("histogram", fields) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(cols)
        for lo, hi, d, m in zip(hist.lo, hist.hi, hist.depth, hist.masses):
            writer.writerow([_fmt(v) for v in lo] + [_fmt(v) for v in hi] + [int(d), _fmt(m)])


def read_histogram_csv(path) -> MultiResHistogram:
    with open(path, newline="", encoding="utf-8") as fh:
        meta = _parse_header(fh.readline(), "histogram")
        rows = list(csv.reader(fh))
    dim = int(meta["dim"])
    body = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, 2 * dim + 2)
    return MultiResHistogram(
        root_lo=[float(v) for v in meta["root_lo"].split(";")],
        root_hi=[float(v) for v in meta["root_hi"].split(";")],
        lo=body[:, :dim], hi=body[:, dim:2 * dim], masses=body[:, -1], depth=body[:, -2].astype(int),
        truncated=bool(int(meta["truncated"])),
        meta={k: v for k, v in meta.items() if k not in ("dim", "truncated", "root_lo", "root_hi")},
    )
