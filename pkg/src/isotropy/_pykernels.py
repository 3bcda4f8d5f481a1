"""Pure numpy implementations of the pair-loop kernels in ``_kernels.pyx``."""

from __future__ import annotations

import numpy as np

GAUSSIAN, EPANECHNIKOV, UNIFORM = 0, 1, 2

# pairs processed per chunk; bounds peak memory at a few tens of MB
_CHUNK = 1 << 20


def _weight(family: int, u1: np.ndarray, u2: np.ndarray, reach: float) -> np.ndarray:
    inside = (np.abs(u1) <= reach) & (np.abs(u2) <= reach)
    if family == GAUSSIAN:
        w = np.exp(-0.5 * (u1 * u1 + u2 * u2))
    elif family == EPANECHNIKOV:
        w = 0.5625 * (1.0 - u1 * u1) * (1.0 - u2 * u2)
    else:
        w = np.full(u1.shape, 0.25)
    return np.where(inside, w, 0.0)


def _pair_chunks(n: int):
    # yields (i, j) index arrays over i < j in row-major order, in bounded chunks
    rows_per_chunk = max(1, _CHUNK // max(n, 1))
    for start in range(0, n, rows_per_chunk):
        stop = min(n, start + rows_per_chunk)
        ii, jj = [], []
        for i in range(start, stop):
            j = np.arange(i + 1, n)
            ii.append(np.full(j.size, i))
            jj.append(j)
        if ii:
            yield np.concatenate(ii), np.concatenate(jj)


def kernel_sums(locs, vals, lags, family, bandwidth, reach):
    locs = np.asarray(locs, dtype=float)
    vals = np.asarray(vals, dtype=float)
    lags = np.asarray(lags, dtype=float)
    k = lags.shape[0]
    num = np.zeros(k)
    den = np.zeros(k)
    span = reach * bandwidth
    max1 = np.abs(lags[:, 0]).max() + span
    max2 = np.abs(lags[:, 1]).max() + span
    for i, j in _pair_chunks(locs.shape[0]):
        d1 = locs[j, 0] - locs[i, 0]
        d2 = locs[j, 1] - locs[i, 1]
        near = (np.abs(d1) <= max1) & (np.abs(d2) <= max2)
        if not near.any():
            continue
        d1, d2 = d1[near], d2[near]
        sq = (vals[i[near]] - vals[j[near]]) ** 2
        for l in range(k):
            h1, h2 = lags[l]
            w = _weight(family, (h1 - d1) / bandwidth, (h2 - d2) / bandwidth, reach)
            w += _weight(family, (h1 + d1) / bandwidth, (h2 + d2) / bandwidth, reach)
            num[l] += np.sum(w * sq)
            den[l] += np.sum(w)
    return num, den


def directional_sums(locs, vals, angles, tolerance, edges):
    locs = np.asarray(locs, dtype=float)
    vals = np.asarray(vals, dtype=float)
    angles = np.asarray(angles, dtype=float)
    edges = np.asarray(edges, dtype=float)
    nb = edges.size - 1
    sums = np.zeros((angles.size, nb))
    counts = np.zeros((angles.size, nb), dtype=np.int64)
    for i, j in _pair_chunks(locs.shape[0]):
        d1 = locs[j, 0] - locs[i, 0]
        d2 = locs[j, 1] - locs[i, 1]
        dist = np.sqrt(d1 * d1 + d2 * d2)
        keep = (dist >= edges[0]) & (dist <= edges[-1])
        if not keep.any():
            continue
        d1, d2, dist = d1[keep], d2[keep], dist[keep]
        sq = (vals[i[keep]] - vals[j[keep]]) ** 2
        bins = np.searchsorted(edges, dist, side="right") - 1
        bins[dist == edges[-1]] = nb - 1
        theta = np.mod(np.degrees(np.arctan2(d2, d1)), 180.0)
        for a, ang in enumerate(angles):
            delta = np.mod(np.abs(theta - ang), 180.0)
            delta = np.minimum(delta, 180.0 - delta)
            hit = delta <= tolerance
            np.add.at(sums[a], bins[hit], sq[hit])
            np.add.at(counts[a], bins[hit], 1)
    return sums, counts
