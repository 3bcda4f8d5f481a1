"""Estimates of the asymptotic covariance of the lag estimates.

Covariances are on the asymptotic scale: ``Cov(G_hat) ~ sigma / n`` for a
dataset of ``n`` locations.
"""

from __future__ import annotations

import warnings

import numpy as np

from .core import (
    BootstrapSource,
    ContrastMatrix,
    CovarianceEstimate,
    LagSet,
    SpatialDataset,
    SubblockSource,
)
from .errors import IsotropyWarning, NumericalError, ValidationError
from .numstats import RandomStream, solve_spd
from .subsample import (
    RegionGrid,
    TilePartition,
    WindowConfig,
    default_min_points,
    enumerate_windows,
    extract_subblock,
)
from .variogram import KernelSpec, classical_semivariogram, kernel_weight_sums

BOOTSTRAP_REDRAWS = 10


def _plugin_covariance(estimates: np.ndarray) -> np.ndarray:
    # shifting by one row first keeps identical rows at exactly zero spread
    centered = estimates - estimates[0]
    centered -= centered.mean(axis=0)
    cov = centered.T @ centered / estimates.shape[0]
    return 0.5 * (cov + cov.T)


def _block_gammas(sub: SpatialDataset, lagset: LagSet, estimator) -> np.ndarray | None:
    if estimator == "classical":
        try:
            return classical_semivariogram(sub, lagset).gammas
        except ValidationError:
            return None
    num, den = kernel_weight_sums(sub, lagset, estimator)
    if np.any(den <= 0):
        return None
    return num / (2.0 * den)


def sigma_from_subblocks(
    data: SpatialDataset,
    grid: RegionGrid,
    cfg: WindowConfig,
    lagset: LagSet,
    estimator: str | KernelSpec = "classical",
) -> CovarianceEstimate:
    """Moving-window subsampling estimate of the asymptotic covariance.

    With block estimates ``G_m`` (m = 1..M), their mean ``G_bar`` and mean block
    size ``n_b``, returns ``n_b * mean((G_m - G_bar)(G_m - G_bar)^T)``. Blocks
    that are too sparse or do not support every lag are dropped with a warning.
    """
    if estimator != "classical" and not isinstance(estimator, KernelSpec):
        raise ValidationError(f"estimator must be 'classical' or a KernelSpec, got {estimator!r}")
    windows = enumerate_windows(grid, cfg)
    min_points = cfg.min_points
    if min_points is None:
        min_points = 2 if data.design.is_grid else default_min_points(data.n, grid, cfg)
    estimates, sizes = [], []
    sparse = unsupported = 0
    for w in windows:
        sub = extract_subblock(data, w)
        if sub.n < max(2, min_points):
            sparse += 1
            continue
        g = _block_gammas(sub, lagset, estimator)
        if g is None:
            unsupported += 1
            continue
        estimates.append(g)
        sizes.append(sub.n)
    if sparse or unsupported:
        warnings.warn(
            f"discarded {sparse} subblocks with fewer than {min_points} locations and "
            f"{unsupported} subblocks lacking support for some lag ({len(estimates)} of {len(windows)} kept)",
            IsotropyWarning,
            stacklevel=2,
        )
    if len(estimates) < 2:
        raise ValidationError(f"need at least 2 usable subblocks, got {len(estimates)}")
    blocks = np.array(estimates)
    n_b = float(np.mean(sizes))
    return CovarianceEstimate(
        n_b * _plugin_covariance(blocks),
        SubblockSource(len(estimates), cfg.dims, n_b),
        blocks,
    )


def sigma_from_bootstrap(
    data: SpatialDataset,
    grid: RegionGrid,
    cfg: WindowConfig,
    lagset: LagSet,
    kernel: KernelSpec,
    n_boot: int,
    rng: RandomStream,
    pairs: str = "within",
) -> CovarianceEstimate:
    """Grid-based block bootstrap estimate of the asymptotic covariance.

    Replicate ``b`` draws from ``rng.child(b)``, so the result does not depend
    on evaluation order. Returns ``n`` times the plug-in covariance of the
    replicate estimates.

    With ``pairs="within"`` a replicate estimate only uses pairs that lie in
    the same resampled block, which avoids pairing values from unrelated
    blocks across the seams; the per-block kernel sums are then computed once
    and added up per replicate. ``pairs="all"`` smooths over every pair of the
    assembled resample.
    """
    if pairs not in ("within", "all"):
        raise ValidationError(f"pairs must be 'within' or 'all', got {pairs!r}")
    if int(n_boot) != n_boot or n_boot < 2:
        raise ValidationError(f"n_boot must be an integer >= 2, got {n_boot}")
    if n_boot < 50:
        warnings.warn(f"only {n_boot} bootstrap samples; at least 50 are recommended", IsotropyWarning, stacklevel=2)
    if cfg.stride != cfg.dims:
        cfg = WindowConfig.tiling(cfg.dims, cfg.min_points)
    tiles = TilePartition(data, grid, cfg)
    if pairs == "within":
        per_tile = np.array([kernel_weight_sums(tiles.tile_data(i), lagset, kernel) for i in range(len(tiles.tiles))])
    reps = np.empty((n_boot, lagset.k))
    for b in range(n_boot):
        sub_rng = rng.child(b)
        for _ in range(BOOTSTRAP_REDRAWS):
            sources = tiles.draw_sources(sub_rng)
            if pairs == "within":
                num, den = per_tile[sources].sum(axis=0)
            else:
                num, den = kernel_weight_sums(tiles.assemble(sources), lagset, kernel)
            if np.all(den > 0):
                reps[b] = num / (2.0 * den)
                break
        else:
            raise NumericalError(
                f"bootstrap replicate {b} lacked support for some lag after {BOOTSTRAP_REDRAWS} draws"
            )
    return CovarianceEstimate(
        data.n * _plugin_covariance(reps),
        BootstrapSource(int(n_boot), cfg.dims, rng.master_seed),
        reps,
    )


def finite_sample_pvalue(
    block_estimates: np.ndarray,
    sigma: CovarianceEstimate,
    A: ContrastMatrix | np.ndarray,
    ts_full: float,
    block_size: float | None = None,
) -> float:
    """Empirical p-value of ``ts_full`` against per-block quadratic forms.

    ``T_m = n_b * u_m^T (A S A^T)^{-1} u_m`` with ``u_m = A (G_m - G_bar)``;
    returns ``(1 + #{T_m >= ts_full}) / (M + 1)``. ``block_size`` defaults to
    the mean subblock size recorded in ``sigma``.
    """
    a = A.entries if isinstance(A, ContrastMatrix) else np.atleast_2d(np.asarray(A, dtype=float))
    blocks = np.asarray(block_estimates, dtype=float)
    if blocks.ndim != 2 or blocks.shape[0] < 2:
        raise ValidationError("need at least 2 block estimates")
    if block_size is None:
        if not isinstance(sigma.source, SubblockSource):
            raise ValidationError("block size is required when sigma is not a subblock estimate")
        block_size = sigma.source.mean_points
    cov = a @ sigma.matrix @ a.T
    cov = 0.5 * (cov + cov.T)
    u = (blocks - blocks.mean(axis=0)) @ a.T
    try:
        stats = np.array([block_size * (um @ solve_spd(cov, um)) for um in u])
    except NumericalError as exc:
        raise NumericalError(f"contrast covariance is singular: {exc}") from exc
    m = blocks.shape[0]
    return float((1 + np.count_nonzero(stats >= ts_full)) / (m + 1))
