"""Isotropy tests for gridded, uniformly scattered and general sampling designs."""

from __future__ import annotations

import numpy as np

from .core import (
    ContrastMatrix,
    CovarianceEstimate,
    LagSet,
    SemivariogramEstimate,
    SpatialDataset,
    TestResult,
    validate_hypothesis,
    MIN_LOCATIONS,
)
from .errors import NumericalError, ValidationError
from .numstats import RandomStream, chisq_survival, solve_spd
from .sigma import finite_sample_pvalue, sigma_from_bootstrap, sigma_from_subblocks
from .subsample import RegionGrid, WindowConfig
from .variogram import KernelSpec, classical_semivariogram, kernel_semivariogram

MAX_CONDITION = 1e12


def _as_contrast(A) -> ContrastMatrix:
    return A if isinstance(A, ContrastMatrix) else ContrastMatrix(A)


def test_statistic(
    ghat: SemivariogramEstimate | np.ndarray,
    sigma: CovarianceEstimate | np.ndarray,
    A: ContrastMatrix | np.ndarray,
    n: int,
) -> float:
    """Quadratic form ``n * (A G)^T (A S A^T)^{-1} (A G)``.

    Raises NumericalError when ``A S A^T`` is singular or its condition number
    exceeds 1e12.
    """
    g = ghat.gammas if isinstance(ghat, SemivariogramEstimate) else np.asarray(ghat, dtype=float)
    s = sigma.matrix if isinstance(sigma, CovarianceEstimate) else np.asarray(sigma, dtype=float)
    a = _as_contrast(A).entries
    if a.shape[1] != g.shape[0] or s.shape != (g.shape[0], g.shape[0]):
        raise ValidationError(f"shape mismatch: A {a.shape}, estimates {g.shape}, sigma {s.shape}")
    v = a @ g
    cov = a @ s @ a.T
    cov = 0.5 * (cov + cov.T)
    eig = np.linalg.eigvalsh(cov)
    if not eig[0] > 0 or eig[-1] / eig[0] > MAX_CONDITION:
        raise NumericalError(
            f"contrast covariance is singular or ill-conditioned (eigenvalues {eig[0]:.3g} .. {eig[-1]:.3g})"
        )
    if not np.any(v):
        return 0.0
    return max(0.0, float(n) * float(v @ solve_spd(cov, v)))


# keep pytest from collecting the function above when imported into test modules
test_statistic.__test__ = False


def _check_size(data: SpatialDataset) -> None:
    if data.n < MIN_LOCATIONS:
        raise ValidationError(f"need at least {MIN_LOCATIONS} locations, got {data.n}")


def guan_test_grid(
    data: SpatialDataset,
    lagset: LagSet,
    A: ContrastMatrix | np.ndarray,
    *,
    delta: float = 1.0,
    window_dims: tuple[int, int] = (2, 2),
    finite_adjust: bool = True,
) -> TestResult:
    """Subsampling test of isotropy for gridded locations.

    Lags are given in units of ``delta``; ``window_dims`` counts lattice nodes.
    The lag estimates come from the classical estimator and their covariance
    from moving windows over the lattice.
    """
    _check_size(data)
    if not data.design.is_grid:
        raise ValidationError("grid test requires gridded sampling locations")
    A = _as_contrast(A)
    _, r = validate_hypothesis(lagset, A)
    scaled = data.scaled(delta)
    ghat = classical_semivariogram(scaled, lagset)
    grid = RegionGrid.for_lattice(scaled)
    sigma = sigma_from_subblocks(scaled, grid, WindowConfig.moving(window_dims), lagset, "classical")
    ts = test_statistic(ghat, sigma, A, data.n)
    p_finite = finite_sample_pvalue(sigma.block_estimates, sigma, A, ts) if finite_adjust else None
    return TestResult(
        test_name="guan-grid",
        statistic=ts,
        df=r,
        p_value=chisq_survival(ts, r),
        estimates=ghat,
        sigma=sigma,
        p_value_finite=p_finite,
        n_subblocks=sigma.source.count,
        config={
            "delta": float(delta),
            "lags": lagset.lags.tolist(),
            "contrasts": A.entries.tolist(),
            "window_dims": list(window_dims),
            "finite_adjust": bool(finite_adjust),
            "design": data.design.to_dict(),
            "n": data.n,
        },
    )


def guan_test_unif(
    data: SpatialDataset,
    lagset: LagSet,
    A: ContrastMatrix | np.ndarray,
    grid: RegionGrid,
    *,
    kernel: KernelSpec | None = None,
    window_dims: tuple[int, int] = (2, 2),
    subblock_kernel: KernelSpec | None = None,
) -> TestResult:
    """Subsampling test of isotropy for uniformly scattered locations.

    Lag estimates use the product-kernel smoother on the whole region; the
    covariance comes from moving windows over ``grid`` with
    ``subblock_kernel`` (defaults to ``kernel``).
    """
    _check_size(data)
    kernel = kernel or KernelSpec()
    subblock_kernel = subblock_kernel or kernel
    A = _as_contrast(A)
    _, r = validate_hypothesis(lagset, A)
    grid.check_contains(data)
    ghat = kernel_semivariogram(data, lagset, kernel)
    sigma = sigma_from_subblocks(data, grid, WindowConfig.moving(window_dims), lagset, subblock_kernel)
    ts = test_statistic(ghat, sigma, A, data.n)
    return TestResult(
        test_name="guan-unif",
        statistic=ts,
        df=r,
        p_value=chisq_survival(ts, r),
        estimates=ghat,
        sigma=sigma,
        n_subblocks=sigma.source.count,
        config={
            "lags": lagset.lags.tolist(),
            "contrasts": A.entries.tolist(),
            "kernel": kernel.to_dict(),
            "subblock_kernel": subblock_kernel.to_dict(),
            "xlims": list(grid.xlims),
            "ylims": list(grid.ylims),
            "grid_spacing": list(grid.spacing),
            "window_dims": list(window_dims),
            "n": data.n,
        },
    )


def maity_test(
    data: SpatialDataset,
    lagset: LagSet,
    A: ContrastMatrix | np.ndarray,
    grid: RegionGrid,
    *,
    kernel: KernelSpec | None = None,
    block_dims: tuple[int, int] = (2, 2),
    n_boot: int = 100,
    seed: int = 0,
    pairs: str = "within",
) -> TestResult:
    """Block-bootstrap test of isotropy for general designs.

    The bootstrap only feeds the covariance estimate; the p-value is from the
    asymptotic chi-square distribution.
    """
    _check_size(data)
    kernel = kernel or KernelSpec()
    A = _as_contrast(A)
    _, r = validate_hypothesis(lagset, A)
    grid.check_contains(data)
    ghat = kernel_semivariogram(data, lagset, kernel)
    sigma = sigma_from_bootstrap(
        data, grid, WindowConfig.tiling(block_dims), lagset, kernel, n_boot, RandomStream(seed), pairs
    )
    ts = test_statistic(ghat, sigma, A, data.n)
    return TestResult(
        test_name="maity",
        statistic=ts,
        df=r,
        p_value=chisq_survival(ts, r),
        estimates=ghat,
        sigma=sigma,
        n_boot=int(n_boot),
        seed=int(seed),
        config={
            "lags": lagset.lags.tolist(),
            "contrasts": A.entries.tolist(),
            "kernel": kernel.to_dict(),
            "xlims": list(grid.xlims),
            "ylims": list(grid.ylims),
            "grid_spacing": list(grid.spacing),
            "block_dims": list(block_dims),
            "n_boot": int(n_boot),
            "seed": int(seed),
            "bootstrap_pairs": pairs,
            "n": data.n,
        },
    )
