"""Semivariogram estimators: classical (grid), product-kernel (general) and directional."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _backend
from .core import LagSet, SemivariogramEstimate, SpatialDataset
from .errors import ValidationError

KERNEL_FAMILIES = {"gaussian": 0, "epanechnikov": 1, "uniform": 2}
KERNEL_ALIASES = {"norm": "gaussian", "normal": "gaussian", "gauss": "gaussian", "epan": "epanechnikov", "unif": "uniform"}
DEFAULT_BANDWIDTH = 0.7
DEFAULT_TRUNCATION = 1.5


@dataclass(frozen=True)
class KernelSpec:
    """Smoothing kernel over lag components.

    ``truncation`` is the support radius in bandwidth units and only applies to
    the gaussian family; the other families have compact support on [-1, 1].
    """

    family: str = "gaussian"
    bandwidth: float = DEFAULT_BANDWIDTH
    truncation: float = DEFAULT_TRUNCATION

    def __post_init__(self):
        fam = KERNEL_ALIASES.get(self.family, self.family)
        if fam not in KERNEL_FAMILIES:
            raise ValidationError(f"unknown kernel family {self.family!r}")
        if not self.bandwidth > 0:
            raise ValidationError(f"bandwidth must be positive, got {self.bandwidth}")
        if not self.truncation > 0:
            raise ValidationError(f"truncation must be positive, got {self.truncation}")
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "bandwidth", float(self.bandwidth))
        object.__setattr__(self, "truncation", float(self.truncation))

    @property
    def reach(self) -> float:
        return self.truncation if self.family == "gaussian" else 1.0

    def to_dict(self) -> dict:
        return {"family": self.family, "bandwidth": self.bandwidth, "truncation": self.truncation}


@dataclass(frozen=True)
class DirectionalBinSpec:
    """Directions (degrees from the x axis) and distance bin edges for diagnostics."""

    angles: tuple[float, ...] = (0.0, 45.0, 90.0, 135.0)
    angle_tolerance: float = 22.5
    distance_bins: tuple[float, ...] | None = None

    def __post_init__(self):
        if not self.angles:
            raise ValidationError("at least one direction is required")
        if not self.angle_tolerance > 0:
            raise ValidationError(f"angle tolerance must be positive, got {self.angle_tolerance}")
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
        if self.distance_bins is not None:
            edges = tuple(float(e) for e in self.distance_bins)
            if len(edges) < 2 or any(b <= a for a, b in zip(edges, edges[1:])):
                raise ValidationError("distance bin edges must be strictly increasing with at least 2 edges")
            if edges[0] < 0:
                raise ValidationError("distance bin edges must be non-negative")
            object.__setattr__(self, "distance_bins", edges)


def _lattice_offset(value: float, spacing: float, what: str) -> int:
    steps = value / spacing
    rounded = round(steps)
    if abs(steps - rounded) > 1e-9 * max(1.0, abs(steps)):
        raise ValidationError(f"{what} {value:g} is not a multiple of the grid spacing {spacing:g}")
    return int(rounded)


def _grid_array(data: SpatialDataset) -> np.ndarray:
    dx, dy = data.design.delta_x, data.design.delta_y
    ix = np.round((data.x - data.x.min()) / dx).astype(np.intp)
    iy = np.round((data.y - data.y.min()) / dy).astype(np.intp)
    grid = np.full((ix.max() + 1, iy.max() + 1), np.nan)
    grid[ix, iy] = data.values
    return grid


def _shifted_pairs(grid: np.ndarray, a: int, b: int) -> tuple[np.ndarray, np.ndarray]:
    nx, ny = grid.shape
    if abs(a) >= nx or abs(b) >= ny:
        return np.empty(0), np.empty(0)
    src = grid[max(0, -a) : nx - max(0, a), max(0, -b) : ny - max(0, b)]
    dst = grid[max(0, a) : nx - max(0, -a), max(0, b) : ny - max(0, -b)]
    ok = ~(np.isnan(src) | np.isnan(dst))
    return src[ok], dst[ok]


def classical_semivariogram(data: SpatialDataset, lagset: LagSet) -> SemivariogramEstimate:
    """Classical moment estimator at lattice lags.

    Each gamma is half the mean squared difference over all location pairs
    separated exactly by the lag; ``support`` holds the pair counts.
    """
    if not data.design.is_grid:
        raise ValidationError("classical estimator requires a gridded design")
    if data.n < 2:
        raise ValidationError("need at least 2 locations")
    dx, dy = data.design.delta_x, data.design.delta_y
    grid = _grid_array(data)
    gammas = np.empty(lagset.k)
    counts = np.empty(lagset.k)
    for i, (h1, h2) in enumerate(lagset.lags):
        a = _lattice_offset(h1, dx, "lag x-component")
        b = _lattice_offset(h2, dy, "lag y-component")
        src, dst = _shifted_pairs(grid, a, b)
        if src.size == 0:
            raise ValidationError(f"no location pairs are separated by lag ({h1:g},{h2:g})")
        gammas[i] = np.sum((src - dst) ** 2) / (2.0 * src.size)
        counts[i] = src.size
    return SemivariogramEstimate(lagset, gammas, counts)


def kernel_semivariogram(data: SpatialDataset, lagset: LagSet, kernel: KernelSpec | None = None) -> SemivariogramEstimate:
    """Product-kernel smoothed semivariogram for arbitrary designs.

    Pair ``(i, j)`` with separation ``d`` gets weight
    ``K((h1 - d1)/bw) * K((h2 - d2)/bw)`` at lag ``h``, counted at both ``d``
    and ``-d``. ``support`` holds the weight sums.
    """
    kernel = kernel or KernelSpec()
    num, den = kernel_weight_sums(data, lagset, kernel)
    zero = np.flatnonzero(den <= 0)
    if zero.size:
        h = lagset.lags[zero[0]]
        near = _nearest_pair_distance(data, h)
        raise ValidationError(
            f"zero kernel weight at lag ({h[0]:g},{h[1]:g}); nearest pair separation is "
            f"{near:.4g} from the lag (bandwidth {kernel.bandwidth:g}, reach {kernel.reach * kernel.bandwidth:.4g})"
        )
    return SemivariogramEstimate(lagset, num / (2.0 * den), den)


def kernel_weight_sums(data: SpatialDataset, lagset: LagSet, kernel: KernelSpec) -> tuple[np.ndarray, np.ndarray]:
    """Raw ``(sum w * diff^2, sum w)`` per lag; zero weight sums are left for the caller."""
    if data.n < 2:
        return np.zeros(lagset.k), np.zeros(lagset.k)
    return _backend.kernel_sums(
        np.ascontiguousarray(data.locations),
        np.ascontiguousarray(data.values),
        np.ascontiguousarray(lagset.lags),
        KERNEL_FAMILIES[kernel.family],
        kernel.bandwidth,
        kernel.reach,
    )


def _nearest_pair_distance(data: SpatialDataset, h: np.ndarray) -> float:
    if data.n < 2:
        return math.inf
    i, j = np.triu_indices(data.n, 1)
    d = data.locations[j] - data.locations[i]
    dist = np.minimum(np.hypot(*(d - h).T), np.hypot(*(d + h).T))
    return float(dist.min())


def default_distance_bins(data: SpatialDataset, nbins: int = 13) -> tuple[float, ...]:
    """``nbins`` equal-width bins from 0 to half the diagonal of the data bounds."""
    xmin, xmax, ymin, ymax = data.bounds
    half = 0.5 * math.hypot(xmax - xmin, ymax - ymin)
    return tuple(np.linspace(0.0, half, nbins + 1).tolist())


def directional_semivariogram(data: SpatialDataset, bins: DirectionalBinSpec | None = None) -> list[tuple[float, float, float, float, int]]:
    """Directional semivariogram table ``(angle, bin_lo, bin_hi, gamma, npairs)``.

    A pair counts toward a direction when its separation angle (mod 180) is
    within the tolerance of that direction. Empty cells are omitted.
    """
    bins = bins or DirectionalBinSpec()
    edges = np.asarray(bins.distance_bins if bins.distance_bins is not None else default_distance_bins(data))
    sums, counts = _backend.directional_sums(
        np.ascontiguousarray(data.locations),
        np.ascontiguousarray(data.values),
        np.asarray(bins.angles, dtype=float),
        float(bins.angle_tolerance),
        np.ascontiguousarray(edges, dtype=float),
    )
    rows = []
    for a, angle in enumerate(bins.angles):
        for b in range(edges.size - 1):
            c = int(counts[a, b])
            if c:
                rows.append((angle, float(edges[b]), float(edges[b + 1]), float(sums[a, b] / (2.0 * c)), c))
    if not rows:
        raise ValidationError("no location pairs fall in any direction/distance cell")
    return rows


def write_directional_table(rows: Sequence[tuple], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["angle", "bin_lo", "bin_hi", "gamma", "npairs"])
    for angle, lo, hi, gamma, npairs in rows:
        w.writerow([repr(float(angle)), repr(float(lo)), repr(float(hi)), repr(float(gamma)), int(npairs)])
