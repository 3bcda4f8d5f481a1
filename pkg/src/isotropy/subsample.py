"""Region grids, moving-window subblocks and grid-based block resampling."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Design, SpatialDataset
from .errors import IsotropyWarning, ValidationError
from .numstats import RandomStream


@dataclass(frozen=True)
class RegionGrid:
    """Rectangular sampling region divided into ``ncols x nrows`` cells."""

    xlims: tuple[float, float]
    ylims: tuple[float, float]
    spacing: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        xlims = tuple(float(v) for v in self.xlims)
        ylims = tuple(float(v) for v in self.ylims)
        spacing = tuple(float(v) for v in self.spacing)
        if len(xlims) != 2 or len(ylims) != 2 or len(spacing) != 2:
            raise ValidationError("xlims, ylims and spacing each need two values")
        if not (xlims[1] > xlims[0] and ylims[1] > ylims[0]):
            raise ValidationError(f"degenerate region {xlims} x {ylims}")
        if not (spacing[0] > 0 and spacing[1] > 0):
            raise ValidationError(f"grid spacing must be positive, got {spacing}")
        object.__setattr__(self, "xlims", xlims)
        object.__setattr__(self, "ylims", ylims)
        object.__setattr__(self, "spacing", spacing)
        if self.ncols < 1 or self.nrows < 1:
            raise ValidationError("grid spacing is larger than the region")
        for name, extent, cells, step in (
            ("x", xlims[1] - xlims[0], self.ncols, spacing[0]),
            ("y", ylims[1] - ylims[0], self.nrows, spacing[1]),
        ):
            if abs(extent / step - cells) > 1e-3:
                warnings.warn(
                    f"{name} extent {extent:g} is not a whole number of cells of width {step:g}; using {cells}",
                    IsotropyWarning,
                    stacklevel=3,
                )

    @property
    def ncols(self) -> int:
        return int(round((self.xlims[1] - self.xlims[0]) / self.spacing[0]))

    @property
    def nrows(self) -> int:
        return int(round((self.ylims[1] - self.ylims[0]) / self.spacing[1]))

    @property
    def area(self) -> float:
        return (self.xlims[1] - self.xlims[0]) * (self.ylims[1] - self.ylims[0])

    @classmethod
    def for_lattice(cls, data: SpatialDataset) -> "RegionGrid":
        """One cell per lattice node, so window dims count locations."""
        if not data.design.is_grid:
            raise ValidationError("dataset is not gridded")
        dx, dy = data.design.delta_x, data.design.delta_y
        return cls(
            (data.x.min() - 0.5 * dx, data.x.max() + 0.5 * dx),
            (data.y.min() - 0.5 * dy, data.y.max() + 0.5 * dy),
            (dx, dy),
        )

    def check_contains(self, data: SpatialDataset) -> None:
        xmin, xmax, ymin, ymax = data.bounds
        if xmin < self.xlims[0] or xmax > self.xlims[1] or ymin < self.ylims[0] or ymax > self.ylims[1]:
            raise ValidationError(
                f"region {self.xlims} x {self.ylims} does not contain the data bounds {data.bounds}"
            )


@dataclass(frozen=True)
class WindowConfig:
    """Window size and shift in grid cells."""

    dims: tuple[int, int]
    stride: tuple[int, int] | None = None
    min_points: int | None = None

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != 2 or dims != tuple(self.dims) or min(dims) < 1:
            raise ValidationError(f"window dims must be two positive integers, got {self.dims}")
        stride = (1, 1) if self.stride is None else tuple(int(s) for s in self.stride)
        if len(stride) != 2 or min(stride) < 1:
            raise ValidationError(f"stride must be two positive integers, got {self.stride}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "stride", stride)

    @classmethod
    def moving(cls, dims, min_points: int | None = None) -> "WindowConfig":
        return cls(tuple(dims), (1, 1), min_points)

    @classmethod
    def tiling(cls, dims, min_points: int | None = None) -> "WindowConfig":
        return cls(tuple(dims), tuple(dims), min_points)


@dataclass(frozen=True)
class Window:
    """Axis-aligned subregion; membership is ``[lo, hi)`` unless the side is closed."""

    xlo: float
    xhi: float
    ylo: float
    yhi: float
    closed_x: bool = False
    closed_y: bool = False

    def contains(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        inx = (x >= self.xlo) & ((x <= self.xhi) if self.closed_x else (x < self.xhi))
        iny = (y >= self.ylo) & ((y <= self.yhi) if self.closed_y else (y < self.yhi))
        return inx & iny

    @property
    def area(self) -> float:
        return (self.xhi - self.xlo) * (self.yhi - self.ylo)


def window_count(ncols: int, nrows: int, cfg: WindowConfig) -> int:
    wx, wy = cfg.dims
    sx, sy = cfg.stride
    if wx > ncols or wy > nrows:
        return 0
    return ((ncols - wx) // sx + 1) * ((nrows - wy) // sy + 1)


def enumerate_windows(grid: RegionGrid, cfg: WindowConfig) -> list[Window]:
    """All windows of ``cfg.dims`` cells at offsets that are multiples of the stride.

    Windows are returned row-major (x varies fastest). A warning is issued when
    the stride does not evenly cover the region.
    """
    C, R = grid.ncols, grid.nrows
    wx, wy = cfg.dims
    sx, sy = cfg.stride
    if wx > C or wy > R:
        raise ValidationError(f"window of {wx}x{wy} cells does not fit a {C}x{R} grid")
    if (C - wx) % sx or (R - wy) % sy:
        warnings.warn(
            f"window dims {cfg.dims} with stride {cfg.stride} do not evenly cover the {C}x{R} grid; "
            "cells at the upper edges are left out",
            IsotropyWarning,
            stacklevel=2,
        )
    gx, gy = grid.spacing
    x0, y0 = grid.xlims[0], grid.ylims[0]
    windows = []
    for j in range(0, R - wy + 1, sy):
        for i in range(0, C - wx + 1, sx):
            top_x = i + wx == C
            top_y = j + wy == R
            windows.append(
                Window(
                    x0 + i * gx,
                    grid.xlims[1] if top_x else x0 + (i + wx) * gx,
                    y0 + j * gy,
                    grid.ylims[1] if top_y else y0 + (j + wy) * gy,
                    top_x,
                    top_y,
                )
            )
    return windows


def extract_subblock(data: SpatialDataset, window: Window) -> SpatialDataset:
    """Points inside ``window``, translated so its lower-left corner is the origin."""
    mask = window.contains(data.x, data.y)
    locs = data.locations[mask] - np.array([window.xlo, window.ylo])
    return SpatialDataset._trusted(
        locs,
        data.values[mask],
        data.design,
        (0.0, window.xhi - window.xlo, 0.0, window.yhi - window.ylo),
    )


def default_min_points(n: int, grid: RegionGrid, cfg: WindowConfig) -> int:
    """``ceil(0.5 * sqrt(expected points per window))`` under a uniform design."""
    expected = n * cfg.dims[0] * grid.spacing[0] * cfg.dims[1] * grid.spacing[1] / grid.area
    return max(1, math.ceil(0.5 * math.sqrt(expected)))


class TilePartition:
    """Tiling blocks of a region with their member points, reused across resamples."""

    def __init__(self, data: SpatialDataset, grid: RegionGrid, cfg: WindowConfig):
        if cfg.stride != cfg.dims:
            raise ValidationError(f"block resampling needs tiling blocks (stride {cfg.stride} != dims {cfg.dims})")
        self.tiles = enumerate_windows(grid, cfg)
        self.origins = np.array([[t.xlo, t.ylo] for t in self.tiles])
        self.members = [np.flatnonzero(t.contains(data.x, data.y)) for t in self.tiles]
        self.nonempty = [i for i, m in enumerate(self.members) if m.size]
        if not self.nonempty:
            raise ValidationError("every resampling block is empty")
        self.data = data
        self.bounds = (grid.xlims[0], grid.xlims[1], grid.ylims[0], grid.ylims[1])
        d = data.design
        tile_w, tile_h = cfg.dims[0] * grid.spacing[0], cfg.dims[1] * grid.spacing[1]
        keeps_lattice = (
            d.is_grid
            and abs(tile_w / d.delta_x - round(tile_w / d.delta_x)) < 1e-9
            and abs(tile_h / d.delta_y - round(tile_h / d.delta_y)) < 1e-9
        )
        self.design = d if keeps_lattice else Design.general()
        # local coordinates of every point relative to its own tile origin
        self.local = [data.locations[m] - self.origins[i] for i, m in enumerate(self.members)]

    def draw_sources(self, rng: RandomStream) -> np.ndarray:
        """Source tile index for every target tile position."""
        picks = rng.integers(len(self.nonempty), size=len(self.tiles))
        return np.asarray(self.nonempty)[picks]

    def assemble(self, sources: np.ndarray) -> SpatialDataset:
        locs = [self.local[src] + self.origins[target] for target, src in enumerate(sources)]
        vals = [self.data.values[self.members[src]] for src in sources]
        return SpatialDataset._trusted(np.concatenate(locs), np.concatenate(vals), self.design, self.bounds)

    def draw(self, rng: RandomStream) -> SpatialDataset:
        return self.assemble(self.draw_sources(rng))

    def tile_data(self, index: int) -> SpatialDataset:
        """Points of one tile in tile-local coordinates."""
        t = self.tiles[index]
        return SpatialDataset._trusted(
            self.local[index], self.data.values[self.members[index]], self.design, (0.0, t.xhi - t.xlo, 0.0, t.yhi - t.ylo)
        )


def resample_blocks(data: SpatialDataset, grid: RegionGrid, cfg: WindowConfig, rng: RandomStream) -> SpatialDataset:
    """One grid-based block bootstrap resample.

    Each tile position receives the points of a tile drawn uniformly with
    replacement from the non-empty tiles, shifted into place.
    """
    return TilePartition(data, grid, cfg).draw(rng)


def subblocks(data: SpatialDataset, grid: RegionGrid, cfg: WindowConfig) -> list[SpatialDataset]:
    return [extract_subblock(data, w) for w in enumerate_windows(grid, cfg)]


def partition_counts(data: SpatialDataset, windows: Sequence[Window]) -> np.ndarray:
    """How many of the windows contain each point (1 everywhere for a true partition)."""
    hits = np.zeros(data.n, dtype=int)
    for w in windows:
        hits += w.contains(data.x, data.y)
    return hits
