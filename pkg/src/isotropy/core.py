"""Domain types, dataset ingestion and hypothesis validation."""

from __future__ import annotations

import csv
import io
import math
import os
import warnings
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import IsotropyWarning, ValidationError

LATTICE_RTOL = 1e-9
MIN_LOCATIONS = 4


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Design:
    """Sampling design: ``grid`` with lattice spacings or ``general``."""

    kind: str
    delta_x: float | None = None
    delta_y: float | None = None

    @classmethod
    def grid(cls, delta_x: float, delta_y: float) -> "Design":
        if not (delta_x > 0 and delta_y > 0):
            raise ValidationError(f"grid spacings must be positive, got ({delta_x}, {delta_y})")
        return cls("grid", float(delta_x), float(delta_y))

    @classmethod
    def general(cls) -> "Design":
        return cls("general")

    @property
    def is_grid(self) -> bool:
        return self.kind == "grid"

    def to_dict(self) -> dict[str, Any]:
        if self.is_grid:
            return {"kind": "grid", "delta_x": self.delta_x, "delta_y": self.delta_y}
        return {"kind": "general"}


def _axis_spacing(coords: np.ndarray) -> float | None:
    """Minimal positive gap between distinct coordinate values, or None if all equal."""
    xs = np.unique(coords)
    if xs.size < 2:
        return None
    scale = max(float(np.max(np.abs(xs))), float(xs[-1] - xs[0]))
    gaps = np.diff(xs)
    gaps = gaps[gaps > LATTICE_RTOL * scale]
    if gaps.size == 0:
        return None
    return float(gaps.min())


def _on_lattice(coords: np.ndarray, spacing: float) -> bool:
    origin = float(coords.min())
    steps = np.round((coords - origin) / spacing)
    nodes = origin + steps * spacing
    tol = LATTICE_RTOL * np.maximum(np.maximum(np.abs(coords), abs(origin)), spacing)
    return bool(np.all(np.abs(coords - nodes) <= tol))


def detect_design(locations: np.ndarray) -> Design:
    """Return ``grid(dx, dy)`` when every location sits on a rectangular lattice.

    Spacings are the minimal positive coordinate differences per axis. The
    result does not depend on the order of the locations.
    """
    locations = np.asarray(locations, dtype=float)
    if locations.shape[0] < 2:
        return Design.general()
    dx = _axis_spacing(locations[:, 0])
    dy = _axis_spacing(locations[:, 1])
    if dx is None or dy is None:
        return Design.general()
    if _on_lattice(locations[:, 0], dx) and _on_lattice(locations[:, 1], dy):
        return Design.grid(dx, dy)
    return Design.general()


@dataclass(frozen=True)
class SpatialDataset:
    """Locations in the plane with one scalar response each.

    ``locations`` is an ``(n, 2)`` array and ``values`` has length ``n``. When
    ``design`` is omitted it is detected from the coordinates, and when
    ``bounds`` is omitted it is the bounding box of the locations. Subblocks may
    hold fewer than four points; the minimum size is enforced by
    :func:`load_dataset` and by the tests themselves.
    """

    locations: np.ndarray
    values: np.ndarray
    design: Design | None = None
    bounds: tuple[float, float, float, float] | None = None

    def __post_init__(self):
        locs = np.asarray(self.locations, dtype=float)
        if locs.size == 0:
            locs = locs.reshape(0, 2)
        vals = np.asarray(self.values, dtype=float).reshape(-1)
        if locs.ndim != 2 or locs.shape[1] != 2:
            raise ValidationError(f"locations must have shape (n, 2), got {locs.shape}")
        if locs.shape[0] != vals.shape[0]:
            raise ValidationError(
                f"{locs.shape[0]} locations but {vals.shape[0]} values"
            )
        if not np.all(np.isfinite(locs)):
            raise ValidationError("locations must be finite")
        if not np.all(np.isfinite(vals)):
            raise ValidationError("values must be finite")
        if locs.shape[0] > 1:
            uniq = np.unique(locs, axis=0)
            if uniq.shape[0] != locs.shape[0]:
                raise ValidationError(
                    f"duplicate locations: {locs.shape[0] - uniq.shape[0]} repeated coordinate pairs"
                )
        bounds = self.bounds
        if bounds is None:
            if locs.shape[0] == 0:
                raise ValidationError("bounds are required for an empty dataset")
            bounds = (locs[:, 0].min(), locs[:, 0].max(), locs[:, 1].min(), locs[:, 1].max())
        bounds = tuple(float(b) for b in bounds)
        if len(bounds) != 4 or bounds[0] > bounds[1] or bounds[2] > bounds[3]:
            raise ValidationError(f"invalid bounds {bounds}")
        if locs.shape[0]:
            if (
                locs[:, 0].min() < bounds[0]
                or locs[:, 0].max() > bounds[1]
                or locs[:, 1].min() < bounds[2]
                or locs[:, 1].max() > bounds[3]
            ):
                raise ValidationError(f"bounds {bounds} do not contain all locations")
        if self.design is None:
            object.__setattr__(self, "design", detect_design(locs))
        if self.design.is_grid and locs.shape[0] > 1:
            if not (_on_lattice(locs[:, 0], self.design.delta_x) and _on_lattice(locs[:, 1], self.design.delta_y)):
                raise ValidationError(
                    f"locations are not on a lattice with spacings ({self.design.delta_x}, {self.design.delta_y})"
                )
        object.__setattr__(self, "locations", _frozen(locs))
        object.__setattr__(self, "values", _frozen(vals))
        object.__setattr__(self, "bounds", bounds)

    @classmethod
    def _trusted(cls, locations, values, design, bounds) -> "SpatialDataset":
        # internal fast path for subsets/resamples of already validated data
        obj = object.__new__(cls)
        object.__setattr__(obj, "locations", _frozen(locations))
        object.__setattr__(obj, "values", _frozen(values))
        object.__setattr__(obj, "design", design)
        object.__setattr__(obj, "bounds", tuple(float(b) for b in bounds))
        return obj

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def x(self) -> np.ndarray:
        return self.locations[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.locations[:, 1]

    def with_values(self, values) -> "SpatialDataset":
        return SpatialDataset(self.locations, values, self.design, self.bounds)

    def scaled(self, factor: float) -> "SpatialDataset":
        """Coordinates divided by ``factor`` (used to express lags in grid units)."""
        if not factor > 0:
            raise ValidationError(f"scale factor must be positive, got {factor}")
        design = self.design
        if design.is_grid:
            design = Design.grid(design.delta_x / factor, design.delta_y / factor)
        b = self.bounds
        return SpatialDataset._trusted(
            self.locations / factor,
            self.values,
            design,
            (b[0] / factor, b[1] / factor, b[2] / factor, b[3] / factor),
        )

    def swapped(self) -> "SpatialDataset":
        """Dataset with the x and y coordinates exchanged."""
        design = self.design
        if design.is_grid:
            design = Design.grid(design.delta_y, design.delta_x)
        b = self.bounds
        return SpatialDataset._trusted(self.locations[:, ::-1], self.values, design, (b[2], b[3], b[0], b[1]))


@dataclass(frozen=True)
class LagSet:
    """Spatial lags at which the semivariogram is compared."""

    lags: np.ndarray

    def __post_init__(self):
        lags = np.asarray(self.lags, dtype=float)
        if lags.ndim != 2 or lags.shape[1] != 2:
            raise ValidationError(f"lags must have shape (k, 2), got {lags.shape}")
        if lags.shape[0] < 2:
            raise ValidationError(f"need at least 2 lags, got {lags.shape[0]}")
        if not np.all(np.isfinite(lags)):
            raise ValidationError("lags must be finite")
        for i, h in enumerate(lags):
            if h[0] == 0 and h[1] == 0:
                raise ValidationError(f"lag {i} is the zero vector")
            for j in range(i):
                if np.array_equal(h, lags[j]) or np.array_equal(h, -lags[j]):
                    raise ValidationError(f"lag {i} {tuple(h)} duplicates or negates lag {j}")
        object.__setattr__(self, "lags", _frozen(lags))

    @property
    def k(self) -> int:
        return int(self.lags.shape[0])

    def scaled(self, factor: float) -> "LagSet":
        return LagSet(self.lags / factor)

    def swapped(self) -> "LagSet":
        return LagSet(self.lags[:, ::-1])

    def labels(self) -> list[str]:
        return [f"({_fmt_num(a)},{_fmt_num(b)})" for a, b in self.lags]


def _fmt_num(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else f"{v:g}"


@dataclass(frozen=True)
class ContrastMatrix:
    """Full-row-rank contrast matrix whose rows each sum to zero."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.entries, dtype=float))
        if a.ndim != 2 or a.size == 0:
            raise ValidationError(f"contrast matrix must be 2-D and non-empty, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValidationError("contrast matrix entries must be finite")
        r, k = a.shape
        if r > k:
            raise ValidationError(f"contrast matrix has more rows ({r}) than columns ({k})")
        for i, row in enumerate(a):
            if abs(row.sum()) > 1e-12 * max(1.0, np.abs(row).sum()):
                raise ValidationError(f"contrast row {i} sums to {row.sum():g}, expected 0")
        sv = np.linalg.svd(a, compute_uv=False)
        if sv[-1] <= 1e-10 * sv[0]:
            raise ValidationError(f"contrast matrix is rank deficient (rank < {r})")
        object.__setattr__(self, "entries", _frozen(a))

    @property
    def r(self) -> int:
        return int(self.entries.shape[0])

    @property
    def k(self) -> int:
        return int(self.entries.shape[1])


def validate_hypothesis(lagset: LagSet, A: ContrastMatrix | np.ndarray) -> tuple[int, int]:
    """Check that ``A`` contrasts the lags of ``lagset``; return ``(k, r)``.

    ``r`` is the row rank of ``A`` and the degrees of freedom of the test.
    """
    if not isinstance(A, ContrastMatrix):
        A = ContrastMatrix(A)
    if A.k != lagset.k:
        raise ValidationError(f"contrast matrix has {A.k} columns but there are {lagset.k} lags")
    return lagset.k, A.r


@dataclass(frozen=True)
class SemivariogramEstimate:
    """Semivariogram values at each lag with their pair count or kernel weight."""

    lagset: LagSet
    gammas: np.ndarray
    support: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gammas, dtype=float)
        s = np.asarray(self.support, dtype=float)
        if g.shape != (self.lagset.k,) or s.shape != (self.lagset.k,):
            raise ValidationError("estimate length does not match the lag set")
        if np.any(g < 0) or not np.all(np.isfinite(g)):
            raise ValidationError("semivariogram estimates must be finite and >= 0")
        if np.any(s <= 0):
            i = int(np.argmin(s))
            raise ValidationError(f"lag {tuple(self.lagset.lags[i])} has no support")
        object.__setattr__(self, "gammas", _frozen(g))
        object.__setattr__(self, "support", _frozen(s))

    def to_list(self) -> list[dict[str, Any]]:
        return [
            {"lag": [float(h[0]), float(h[1])], "gamma": float(g), "support": float(s)}
            for h, g, s in zip(self.lagset.lags, self.gammas, self.support)
        ]


@dataclass(frozen=True)
class SubblockSource:
    count: int
    window_dims: tuple[int, int]
    mean_points: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": "subblocks",
            "count": self.count,
            "window_dims": list(self.window_dims),
            "mean_points": self.mean_points,
        }


@dataclass(frozen=True)
class BootstrapSource:
    replicates: int
    block_dims: tuple[int, int]
    seed: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": "bootstrap",
            "replicates": self.replicates,
            "block_dims": list(self.block_dims),
            "seed": self.seed,
        }


@dataclass(frozen=True)
class CovarianceEstimate:
    """Asymptotic-scale covariance of the lag estimates: Cov(G_hat) ~ matrix / n."""

    matrix: np.ndarray
    source: SubblockSource | BootstrapSource | None = None
    block_estimates: np.ndarray | None = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"covariance must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValidationError("covariance entries must be finite")
        if not np.allclose(m, m.T, rtol=0.0, atol=1e-10):
            raise ValidationError("covariance matrix is not symmetric within 1e-10")
        eig = np.linalg.eigvalsh(0.5 * (m + m.T))
        if eig.size and eig.min() < -1e-10 * max(np.trace(m), 0.0) - 1e-300:
            raise ValidationError(f"covariance matrix is not positive semidefinite (min eigenvalue {eig.min():.3g})")
        object.__setattr__(self, "matrix", _frozen(m))
        if self.block_estimates is not None:
            object.__setattr__(self, "block_estimates", _frozen(self.block_estimates))


@dataclass(frozen=True)
class TestResult:
    """Outcome of an isotropy test."""

    __test__ = False  # keep pytest from collecting this class

    test_name: str
    statistic: float
    df: int
    p_value: float
    estimates: SemivariogramEstimate
    sigma: CovarianceEstimate
    p_value_finite: float | None = None
    n_subblocks: int | None = None
    n_boot: int | None = None
    seed: int | None = None
    config: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "test": self.test_name,
            "statistic": float(self.statistic),
            "df": int(self.df),
            "p_value": float(self.p_value),
        }
        if self.p_value_finite is not None:
            out["p_value_finite"] = float(self.p_value_finite)
        out["estimates"] = self.estimates.to_list()
        out["sigma"] = {
            "matrix": [[float(v) for v in row] for row in self.sigma.matrix],
            "source": None if self.sigma.source is None else self.sigma.source.to_dict(),
        }
        if self.n_subblocks is not None:
            out["n_subblocks"] = int(self.n_subblocks)
        if self.n_boot is not None:
            out["n_boot"] = int(self.n_boot)
        if self.seed is not None:
            out["seed"] = int(self.seed)
        out["config"] = self.config
        return out


def load_dataset(
    path: str | os.PathLike | io.TextIOBase,
    *,
    drop_nonfinite: bool = False,
    bounds: Sequence[float] | None = None,
    design: Design | None = None,
) -> SpatialDataset:
    """Read an ``x,y,value`` CSV file into a validated dataset.

    The design is detected from the coordinates unless given. Rows whose
    response is not finite are rejected, or dropped with a warning when
    ``drop_nonfinite`` is set.
    """
    if isinstance(path, (str, os.PathLike)):
        if not os.path.exists(path):
            raise ValidationError(f"input file not found: {path}")
        with open(path, newline="", encoding="utf-8") as fh:
            rows = _parse_rows(fh)
    else:
        rows = _parse_rows(path)
    locs = np.array([r[:2] for r in rows], dtype=float).reshape(-1, 2)
    vals = np.array([r[2] for r in rows], dtype=float)
    bad = ~np.isfinite(vals)
    if bad.any():
        if not drop_nonfinite:
            first = int(np.flatnonzero(bad)[0]) + 1
            raise ValidationError(f"row {first}: response is not finite ({int(bad.sum())} such rows)")
        warnings.warn(f"dropped {int(bad.sum())} rows with non-finite response", IsotropyWarning, stacklevel=2)
        locs, vals = locs[~bad], vals[~bad]
    if vals.shape[0] < MIN_LOCATIONS:
        raise ValidationError(f"need at least {MIN_LOCATIONS} locations, got {vals.shape[0]}")
    if design is None:
        design = detect_design(locs)
    return SpatialDataset(locs, vals, design, None if bounds is None else tuple(bounds))


def _parse_rows(fh: Iterable[str]) -> list[tuple[float, float, float]]:
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise ValidationError("empty input: expected header 'x,y,value'") from None
    if [h.strip().lower() for h in header] != ["x", "y", "value"]:
        raise ValidationError(f"bad header {header!r}: expected 'x,y,value'")
    rows = []
    for i, rec in enumerate(reader, start=1):
        if not rec or all(not c.strip() for c in rec):
            continue
        if len(rec) != 3:
            raise ValidationError(f"row {i}: expected 3 fields, got {len(rec)}")
        try:
            x, y, v = (float(c) for c in rec)
        except ValueError:
            raise ValidationError(f"row {i}: cannot parse {rec!r} as three reals") from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValidationError(f"row {i}: coordinates must be finite")
        rows.append((x, y, v))
    return rows


def write_dataset(data: SpatialDataset, path: str | os.PathLike | io.TextIOBase) -> None:
    """Write ``data`` as ``x,y,value`` CSV using round-trip float formatting."""
    if isinstance(path, (str, os.PathLike)):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            _write_rows(data, fh)
    else:
        _write_rows(data, path)


def _write_rows(data: SpatialDataset, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["x", "y", "value"])
    for (x, y), v in zip(data.locations.tolist(), data.values.tolist()):
        w.writerow([repr(x), repr(y), repr(v)])
