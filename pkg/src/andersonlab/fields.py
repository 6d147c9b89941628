"""Correlated non-negative random fields on Z^d.

The fields are finite-range moving averages V(x) = sum_u k(u) * xi(x-u)
of i.i.d. non-negative driving variables xi.  With kernel support radius
R, restrictions of the field to regions at distance > 2R are exactly
independent, which is the implementable surrogate for a strong mixing
condition; the conditional distribution of one site given the rest stays
absolutely continuous as long as k(0) > 0.

Driving variables are counter-based (see ``prng``): a sample is a pure
function of (spec, region, trial), and overlapping regions agree
site-by-site.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import prng
from .stats import covariance_with_se

#: Trial offset reserved for internal calibration draws, so they never
#: collide with experiment trial indices.
_CALIBRATION_OFFSET = 1 << 40


@dataclass(frozen=True)
class UniformBase:
    """Driving marginal: uniform on [0, a]."""

    a: float = 1.0

    def __post_init__(self):
        if self.a < 0:
            raise ValueError("uniform base needs a >= 0")

    def ppf(self, u):
        return self.a * np.asarray(u, dtype=np.float64)

    @property
    def mean(self) -> float:
        return self.a / 2.0

    @property
    def var(self) -> float:
        return self.a**2 / 12.0

    @property
    def sup(self) -> float:
        return self.a

    @property
    def inf(self) -> float:
        return 0.0


@dataclass(frozen=True)
class TruncatedExponentialBase:
    """Driving marginal: Exp(rate) conditioned on [0, vmax].

    Truncation keeps the single-site potential bounded so Gershgorin
    spectral envelopes stay finite.
    """

    rate: float = 1.0
    vmax: float = 10.0

    def __post_init__(self):
        if self.rate <= 0 or self.vmax <= 0:
            raise ValueError("truncated exponential needs rate > 0 and vmax > 0")

    def ppf(self, u):
        u = np.asarray(u, dtype=np.float64)
        scale = -math.expm1(-self.rate * self.vmax)  # 1 - e^(-rate*vmax)
        return -np.log1p(-u * scale) / self.rate

    @property
    def mean(self) -> float:
        # E[X | X <= vmax] for X ~ Exp(rate)
        z = self.rate * self.vmax
        return (1.0 / self.rate) - self.vmax * math.exp(-z) / (-math.expm1(-z))

    @property
    def var(self) -> float:
        z = self.rate * self.vmax
        denom = -math.expm1(-z)
        ex2 = (2.0 / self.rate**2) - math.exp(-z) * (
            self.vmax**2 + 2 * self.vmax / self.rate
        ) / denom
        return ex2 - self.mean**2

    @property
    def sup(self) -> float:
        return self.vmax

    @property
    def inf(self) -> float:
        return 0.0


@dataclass(frozen=True)
class ConstantBase:
    """Degenerate driving marginal xi = value, for deterministic fields.

    Not part of the random families; it exists so free and flat-potential
    reference operators can flow through the same assembly path.
    """

    value: float = 0.0

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("constant base must be non-negative")

    def ppf(self, u):
        return np.full_like(np.asarray(u, dtype=np.float64), self.value)

    @property
    def mean(self) -> float:
        return self.value

    @property
    def var(self) -> float:
        return 0.0

    @property
    def sup(self) -> float:
        return self.value

    @property
    def inf(self) -> float:
        return self.value


@dataclass(frozen=True)
class FieldSpec:
    """Recipe for a correlated non-negative field on Z^d.

    ``kernel`` maps integer offsets in Z^d (tuples) to non-negative
    weights; it must be finitely supported with kernel[0] > 0.
    """

    d: int
    base: UniformBase | TruncatedExponentialBase | ConstantBase
    kernel: dict = field(default_factory=lambda: {(0,): 1.0})
    seed: int = 0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("field dimension must be >= 1")
        norm = {}
        for off, w in self.kernel.items():
            off = (off,) if isinstance(off, int) else tuple(int(o) for o in off)
            if len(off) != self.d:
                raise ValueError(f"kernel offset {off} has wrong dimension")
            w = float(w)
            if w < 0:
                raise ValueError("kernel weights must be non-negative")
            if w > 0:
                norm[off] = w
        origin = (0,) * self.d
        if norm.get(origin, 0.0) <= 0:
            raise ValueError("kernel must have positive weight at the origin")
        object.__setattr__(self, "kernel", norm)

    @classmethod
    def iid(cls, d: int, base, seed: int = 0) -> "FieldSpec":
        """The kernel-delta special case: an i.i.d. field."""
        return cls(d=d, base=base, kernel={(0,) * d: 1.0}, seed=seed)

    @classmethod
    def constant(cls, d: int, value: float, seed: int = 0) -> "FieldSpec":
        """Deterministic field V = value everywhere."""
        return cls(d=d, base=ConstantBase(value), seed=seed)

    @property
    def radius(self) -> int:
        """Kernel support radius R in max-norm."""
        return max(max(abs(c) for c in off) for off in self.kernel)

    @property
    def weight_sum(self) -> float:
        return sum(self.kernel.values())

    @property
    def sup(self) -> float:
        """Almost-sure upper bound for single-site values."""
        return self.weight_sum * self.base.sup

    @property
    def marginal_mean(self) -> float:
        return self.weight_sum * self.base.mean

    def lag_covariance(self, h) -> float:
        """Closed-form moving-average covariance at lag h:
        sum_u k(u) k(u+h) Var(xi)."""
        h = (h,) if isinstance(h, int) else tuple(int(c) for c in h)
        acc = 0.0
        for off, w in self.kernel.items():
            other = tuple(o + c for o, c in zip(off, h))
            acc += w * self.kernel.get(other, 0.0)
        return acc * self.base.var


@dataclass(frozen=True)
class Box:
    """Axis-aligned box [lo, hi] (inclusive) in Z^d."""

    lo: tuple[int, ...]
    hi: tuple[int, ...]

    def __post_init__(self):
        lo = tuple(int(c) for c in self.lo)
        hi = tuple(int(c) for c in self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if len(lo) != len(hi):
            raise ValueError("box corners must have equal dimension")
        if any(h < l for l, h in zip(lo, hi)):
            raise ValueError(f"empty box: lo={lo}, hi={hi}")

    @classmethod
    def centered(cls, center, radius: int) -> "Box":
        center = (center,) if isinstance(center, int) else tuple(center)
        return cls(
            tuple(c - radius for c in center), tuple(c + radius for c in center)
        )

    @property
    def d(self) -> int:
        return len(self.lo)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(h - l + 1 for l, h in zip(self.lo, self.hi))

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def contains_box(self, other: "Box") -> bool:
        return all(sl <= ol for sl, ol in zip(self.lo, other.lo)) and all(
            oh <= sh for sh, oh in zip(self.hi, other.hi)
        )

    def inflate(self, pad: int) -> "Box":
        return Box(tuple(l - pad for l in self.lo), tuple(h + pad for h in self.hi))

    def sites(self) -> np.ndarray:
        """All sites as an (size, d) int array in lexicographic order."""
        grid = np.indices(self.shape, dtype=np.int64)
        return grid.reshape(self.d, -1).T + np.asarray(self.lo, dtype=np.int64)


@dataclass(frozen=True)
class FieldSample:
    """One realization of a field on a box; values indexed by site - lo."""

    region: Box
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != self.region.shape:
            raise ValueError(
                f"values shape {values.shape} != region shape {self.region.shape}"
            )
        if np.any(values < 0):
            raise ValueError("field values must be non-negative")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def value_at(self, sites) -> np.ndarray:
        """Field values at an (M, d) array of sites (or a single site)."""
        sites = np.atleast_2d(np.asarray(sites, dtype=np.int64))
        rel = sites - np.asarray(self.region.lo, dtype=np.int64)
        if np.any(rel < 0) or np.any(rel >= np.asarray(self.region.shape)):
            raise ValueError("site outside the sampled region")
        out = self.values[tuple(rel.T)]
        return out if out.size > 1 else out.reshape(())

    def to_rows(self):
        """(site coords..., value) rows for CSV export."""
        sites = self.region.sites()
        vals = self.values.reshape(-1)
        return sites, vals

    def write_csv(self, path) -> None:
        """Export as CSV: one row per site, coordinates then value."""
        sites, vals = self.to_rows()
        header = ",".join(f"x{k}" for k in range(self.region.d)) + ",value"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(header + "\n")
            for site, val in zip(sites, vals):
                coords = ",".join(str(int(c)) for c in site)
                fh.write(f"{coords},{float(val)!r}\n")


def driver_uniforms(spec: FieldSpec, sites: np.ndarray, trial) -> np.ndarray:
    """Counter-based uniforms for driving variables at given sites.

    ``trial`` may be a scalar or an array of trial indices; the result is
    (M,) or (T, M) accordingly.
    """
    return prng.counter_uniforms(spec.seed, trial, sites)


def sample_field(spec: FieldSpec, region: Box, trial: int) -> FieldSample:
    """Realize the field on ``region`` for one trial.

    The driving noise lives on the region inflated by the kernel radius;
    V(x) = sum_u k(u) xi(x - u).  Same (spec, region, trial) gives a
    bit-identical sample, and overlapping regions agree on the overlap.
    """
    if region.d != spec.d:
        raise ValueError("region dimension does not match the field spec")
    if trial < 0:
        raise ValueError("trial index must be non-negative")
    pad = spec.radius
    inflated = region.inflate(pad)
    u = driver_uniforms(spec, inflated.sites(), trial)
    xi = spec.base.ppf(u).reshape(inflated.shape)

    values = np.zeros(region.shape, dtype=np.float64)
    rel = tuple(
        slice(pad + 0, pad + s) for s in region.shape
    )  # region within the inflated box
    for off, w in spec.kernel.items():
        shifted = tuple(
            slice(sl.start - o, sl.stop - o) for sl, o in zip(rel, off)
        )
        values += w * xi[shifted]
    return FieldSample(region=region, values=values)


def truncate_field(sample: FieldSample, big_l: int, c: float) -> FieldSample:
    """Pointwise truncation V -> min(V, c * L^-2 / 3)."""
    if big_l < 1 or c <= 0:
        raise ValueError("need L >= 1 and c > 0")
    cap = c / 3.0 * float(big_l) ** -2
    return FieldSample(sample.region, np.minimum(sample.values, cap))


def _bulk_values_at(spec: FieldSpec, sites: np.ndarray, trials: np.ndarray):
    """Field values at a few sites for many trials at once, (T, M).

    Used by certification probes; must agree bit-for-bit with
    ``sample_field`` (tested), since both reduce to the same counters.
    """
    sites = np.atleast_2d(np.asarray(sites, dtype=np.int64))
    offsets = list(spec.kernel.items())
    driver_sites = np.concatenate(
        [sites - np.asarray(off, dtype=np.int64)[None, :] for off, _ in offsets]
    )
    u = prng.counter_uniforms(spec.seed, trials, driver_sites)  # (T, M*K)
    xi = spec.base.ppf(u).reshape(len(trials), len(offsets), sites.shape[0])
    weights = np.asarray([w for _, w in offsets])
    return np.einsum("k,tkm->tm", weights, xi)


def marginal_median(spec: FieldSpec, calibration_trials: int = 4096) -> float:
    """Monte Carlo estimate of the field's single-site median.

    Calibration draws use a reserved trial-index block so they are
    independent of any experiment trial.
    """
    trials = np.arange(calibration_trials, dtype=np.int64) + _CALIBRATION_OFFSET
    vals = _bulk_values_at(spec, np.zeros((1, spec.d), dtype=np.int64), trials)
    return float(np.median(vals))


def empirical_mixing(spec: FieldSpec, distance: int, trials: int):
    """Empirical dependence between median-threshold events L sites apart.

    Events are E' = {V(0) <= median} and E'' = {V(L*e1) <= median}; the
    return value is (|cov of the indicators|, standard error).  For a
    kernel of radius R and distance > 2R the two events are exactly
    independent by construction, so the estimate must sit at 0 within
    statistical noise.
    """
    if trials < 1000:
        raise ValueError("mixing estimate needs at least 10^3 trials")
    if distance < 1:
        raise ValueError("distance must be >= 1")
    med = marginal_median(spec)
    site0 = np.zeros((1, spec.d), dtype=np.int64)
    site1 = np.zeros((1, spec.d), dtype=np.int64)
    site1[0, 0] = distance
    tt = np.arange(trials, dtype=np.int64)
    vals = _bulk_values_at(spec, np.vstack([site0, site1]), tt)  # (T, 2)
    a = (vals[:, 0] <= med).astype(np.float64)
    b = (vals[:, 1] <= med).astype(np.float64)
    cov, se = covariance_with_se(a, b)
    return abs(cov), se


def conditional_continuity_probe(
    spec: FieldSpec,
    eps: float,
    trials: int,
    *,
    bins_per_site: int = 2,
    t_grid: int = 24,
) -> float:
    """Worst observed conditional-CDF increment of V(0) over a step eps.

    Conditions numerically on the sites within distance 2R of the origin
    (the only ones sharing driving noise with it), discretized into
    marginal-quantile bins.  Returns the largest empirical increment
    F(t + eps | bin) - F(t | bin) over bins with adequate occupancy and a
    grid of thresholds t.  Lipschitz conditional laws give values of
    order eps.
    """
    if not 0 <= eps < 1:
        raise ValueError("eps must lie in [0, 1)")
    if trials < 1000:
        raise ValueError("continuity probe needs at least 10^3 trials")
    if eps == 0:
        return 0.0

    r2 = 2 * spec.radius
    box = Box.centered((0,) * spec.d, max(r2, 0))
    sites = box.sites()
    origin_row = int(np.flatnonzero(np.all(sites == 0, axis=1))[0])
    neighbor_rows = [i for i in range(sites.shape[0]) if i != origin_row]

    tt = np.arange(trials, dtype=np.int64)
    vals = _bulk_values_at(spec, sites, tt)  # (T, M)
    v0 = vals[:, origin_row]

    if neighbor_rows and spec.base.var > 0:
        neigh = vals[:, neighbor_rows]
        # marginal-quantile bin per conditioning site
        qs = np.quantile(neigh, np.linspace(0, 1, bins_per_site + 1)[1:-1], axis=0)
        codes = np.zeros(trials, dtype=np.int64)
        for j in range(neigh.shape[1]):
            codes = codes * bins_per_site + np.searchsorted(
                qs[:, j], neigh[:, j], side="right"
            )
    else:
        codes = np.zeros(trials, dtype=np.int64)

    lo, hi = float(np.min(v0)), float(np.max(v0))
    if hi - lo <= eps:
        ts = np.array([lo])
    else:
        ts = np.linspace(lo, hi - eps, t_grid)

    unique_codes = np.unique(codes)
    # only bins with enough occupants give a usable conditional CDF
    min_count = max(30, trials // (4 * unique_codes.size))
    worst = 0.0
    for code in unique_codes:
        group = np.sort(v0[codes == code])
        if group.size < min_count:
            continue
        hi_counts = np.searchsorted(group, ts + eps, side="right")
        lo_counts = np.searchsorted(group, ts, side="right")
        inc = float(np.max(hi_counts - lo_counts)) / group.size
        worst = max(worst, inc)
    return worst
