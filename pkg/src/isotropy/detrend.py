"""Polynomial trend surfaces fitted by least squares."""

from __future__ import annotations

import numpy as np

from .core import SpatialDataset
from .errors import ValidationError


def _design_matrix(x: np.ndarray, y: np.ndarray, degree: int) -> np.ndarray:
    cols = [x**i * y**j for total in range(degree + 1) for j in range(total + 1) for i in [total - j]]
    return np.column_stack(cols)


def polynomial_fit(data: SpatialDataset, degree: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """OLS fit of all monomials ``x^i y^j`` with ``i + j <= degree``.

    Returns ``(coefficients, fitted)``. Coefficients refer to coordinates
    centred on the data mean and divided by their standard deviation, ordered
    by total degree then by power of y.
    """
    if degree not in (1, 2, 3):
        raise ValidationError(f"degree must be 1, 2 or 3, got {degree}")
    x, y = data.x, data.y
    sx = x.std() or 1.0
    sy = y.std() or 1.0
    X = _design_matrix((x - x.mean()) / sx, (y - y.mean()) / sy, degree)
    if data.n <= X.shape[1]:
        raise ValidationError(f"need more than {X.shape[1]} locations for a degree-{degree} surface, got {data.n}")
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise ValidationError(f"design matrix for a degree-{degree} surface is rank deficient (collinear coordinates?)")
    coef, *_ = np.linalg.lstsq(X, data.values, rcond=None)
    return coef, X @ coef


def detrend(data: SpatialDataset, degree: int = 2) -> SpatialDataset:
    """Residuals from a polynomial trend surface, at the same locations."""
    _, fitted = polynomial_fit(data, degree)
    return data.with_values(data.values - fitted)
