"""Gaussian random fields with isotropic or geometrically anisotropic covariance."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import SpatialDataset, detect_design
from .errors import NumericalError, ValidationError
from .numstats import RandomStream

MAX_LOCATIONS = 4096
FAMILIES = {"exponential": "exponential", "exp": "exponential", "gaussian": "gaussian", "gauss": "gaussian"}


@dataclass(frozen=True)
class CovarianceModel:
    """Stationary covariance with optional geometric anisotropy.

    Lags are rotated by ``-angle`` degrees and their second coordinate is
    multiplied by ``ratio`` before the distance is taken, so correlation decays
    ``ratio`` times faster across the rotated y axis.
    """

    family: str = "exponential"
    sill: float = 1.0
    range: float = 1.0
    nugget: float = 0.0
    angle: float = 0.0
    ratio: float = 1.0

    def __post_init__(self):
        fam = FAMILIES.get(self.family)
        if fam is None:
            raise ValidationError(f"unknown covariance family {self.family!r}")
        object.__setattr__(self, "family", fam)
        if not self.sill > 0:
            raise ValidationError(f"sill must be positive, got {self.sill}")
        if not self.range > 0:
            raise ValidationError(f"range must be positive, got {self.range}")
        if not self.nugget >= 0:
            raise ValidationError(f"nugget must be non-negative, got {self.nugget}")
        if not self.ratio >= 1:
            raise ValidationError(f"anisotropy ratio must be >= 1, got {self.ratio}")
        if not math.isfinite(self.angle):
            raise ValidationError("anisotropy angle must be finite")

    def semivariogram(self, h) -> np.ndarray:
        """``C(0) - C(h)``."""
        return covariance_at(self, np.zeros(2)) - covariance_at(self, h)


def covariance_at(model: CovarianceModel, h) -> np.ndarray | float:
    """Covariance at lag(s) ``h``; ``h`` has shape ``(2,)`` or ``(..., 2)``."""
    h = np.asarray(h, dtype=float)
    theta = math.radians(model.angle)
    c, s = math.cos(theta), math.sin(theta)
    u = c * h[..., 0] + s * h[..., 1]
    v = (-s * h[..., 0] + c * h[..., 1]) * model.ratio
    d = np.hypot(u, v) / model.range
    if model.family == "exponential":
        cov = model.sill * np.exp(-d)
    else:
        cov = model.sill * np.exp(-(d * d))
    cov = cov + np.where((h[..., 0] == 0) & (h[..., 1] == 0), model.nugget, 0.0)
    return float(cov) if cov.ndim == 0 else cov


class GRFSampler:
    """Factorizes the covariance once and draws any number of fields."""

    def __init__(self, locations, model: CovarianceModel):
        locs = np.asarray(locations, dtype=float)
        if locs.ndim != 2 or locs.shape[1] != 2:
            raise ValidationError(f"locations must have shape (n, 2), got {locs.shape}")
        if locs.shape[0] > MAX_LOCATIONS:
            raise ValidationError(f"at most {MAX_LOCATIONS} locations are supported, got {locs.shape[0]}")
        self.locations = locs
        self.model = model
        self.design = detect_design(locs)
        diff = locs[:, None, :] - locs[None, :, :]
        cov = covariance_at(model, diff)
        self.factor = self._factorize(cov, model.sill)

    @staticmethod
    def _factorize(cov: np.ndarray, sill: float) -> np.ndarray:
        jitter = 1e-10 * sill
        while jitter <= 1e-6 * sill * (1 + 1e-9):
            try:
                return np.linalg.cholesky(cov + jitter * np.eye(cov.shape[0]))
            except np.linalg.LinAlgError:
                jitter *= 10.0
        raise NumericalError("covariance matrix is not positive definite even with jitter 1e-6 * sill")

    def draw(self, rng: RandomStream) -> SpatialDataset:
        z = rng.standard_normal(self.locations.shape[0])
        return SpatialDataset(self.locations, self.factor @ z, self.design)


def simulate_grf(locations, model: CovarianceModel, rng: RandomStream) -> SpatialDataset:
    """Mean-zero Gaussian random field at ``locations``."""
    return GRFSampler(locations, model).draw(rng)


def grid_locations(nx: int, ny: int, delta: float = 1.0, origin=(0.0, 0.0)) -> np.ndarray:
    """``nx * ny`` lattice nodes, x varying fastest."""
    if nx < 1 or ny < 1 or not delta > 0:
        raise ValidationError(f"invalid grid {nx}x{ny} with spacing {delta}")
    gx, gy = np.meshgrid(np.arange(nx) * delta + origin[0], np.arange(ny) * delta + origin[1])
    return np.column_stack([gx.ravel(), gy.ravel()])


def uniform_locations(n: int, xlims, ylims, rng: RandomStream) -> np.ndarray:
    """``n`` independent uniform points on the rectangle ``xlims x ylims``."""
    if n < 1:
        raise ValidationError(f"need at least one location, got {n}")
    (x0, x1), (y0, y1) = xlims, ylims
    if not (x1 > x0 and y1 > y0):
        raise ValidationError(f"degenerate rectangle {xlims} x {ylims}")
    u = rng.uniform((n, 2))
    return np.column_stack([x0 + (x1 - x0) * u[:, 0], y0 + (y1 - y0) * u[:, 1]])
