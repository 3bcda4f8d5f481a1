"""Chi-square tail probabilities, small SPD solves and seedable random streams."""

from __future__ import annotations

import math

import numpy as np

from .errors import NumericalError, ValidationError

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10_000


def _lower_series(a: float, x: float) -> float:
    # regularized lower incomplete gamma P(a, x), valid for x < a + 1
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    else:
        raise NumericalError(f"incomplete gamma series did not converge (a={a}, x={x})")
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _upper_fraction(a: float, x: float) -> float:
    # regularized upper incomplete gamma Q(a, x) by modified Lentz, valid for x >= a + 1
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    else:
        raise NumericalError(f"incomplete gamma fraction did not converge (a={a}, x={x})")
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def gamma_q(a: float, x: float) -> float:
    """Regularized upper incomplete gamma function Q(a, x)."""
    if a <= 0:
        raise ValidationError(f"shape must be positive, got {a}")
    if x < 0:
        raise ValidationError(f"argument must be non-negative, got {x}")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _lower_series(a, x))
    return min(1.0, _upper_fraction(a, x))


def chisq_survival(x: float, df: int) -> float:
    """Upper-tail probability P(X > x) of a chi-square variable with ``df`` degrees of freedom.

    >>> round(chisq_survival(2 * math.log(2), 2), 12)
    0.5
    """
    if not math.isfinite(x) or x < 0:
        raise ValidationError(f"chi-square statistic must be finite and >= 0, got {x}")
    if int(df) != df or df < 1:
        raise ValidationError(f"degrees of freedom must be a positive integer, got {df}")
    return gamma_q(0.5 * df, 0.5 * x)


def cholesky(m: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor of a symmetric positive definite matrix.

    Raises NumericalError naming the first pivot that is not positive.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}")
    if not np.allclose(m, m.T, rtol=0.0, atol=1e-10):
        raise ValidationError("matrix is not symmetric within 1e-10")
    k = m.shape[0]
    low = np.zeros_like(m)
    for j in range(k):
        pivot = m[j, j] - low[j, :j] @ low[j, :j]
        if not pivot > 0.0:
            raise NumericalError(
                f"Cholesky breakdown at pivot {j}: value {pivot:.6g} is not positive"
            )
        low[j, j] = math.sqrt(pivot)
        for i in range(j + 1, k):
            low[i, j] = (m[i, j] - low[i, :j] @ low[j, :j]) / low[j, j]
    return low


def solve_spd(m: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Solve ``m @ w = v`` for symmetric positive definite ``m`` via Cholesky."""
    low = cholesky(m)
    v = np.asarray(v, dtype=float)
    if v.shape != (low.shape[0],):
        raise ValidationError(f"right-hand side has shape {v.shape}, expected ({low.shape[0]},)")
    k = low.shape[0]
    z = np.empty(k)
    for i in range(k):
        z[i] = (v[i] - low[i, :i] @ z[:i]) / low[i, i]
    w = np.empty(k)
    for i in reversed(range(k)):
        w[i] = (z[i] - low[i + 1 :, i] @ w[i + 1 :]) / low[i, i]
    return w


class RandomStream:
    """Reproducible uniform/normal stream keyed by ``(master_seed, stream_id)``.

    Distinct stream ids are derived through :class:`numpy.random.SeedSequence`
    spawn keys, so they share no state. A stream must not be consumed by
    concurrent callers; derive a :meth:`child` per worker instead.
    """

    def __init__(self, master_seed: int, stream_id: int = 0, *, _key: tuple[int, ...] | None = None):
        if not 0 <= int(master_seed) < 2**64:
            raise ValidationError(f"master_seed must be a 64-bit unsigned integer, got {master_seed}")
        if not 0 <= int(stream_id) < 2**64:
            raise ValidationError(f"stream_id must be a 64-bit unsigned integer, got {stream_id}")
        self.master_seed = int(master_seed)
        self.stream_id = int(stream_id)
        self._key = _key if _key is not None else (self.stream_id,)
        seq = np.random.SeedSequence(self.master_seed, spawn_key=self._key)
        self._gen = np.random.Generator(np.random.PCG64(seq))

    def __repr__(self) -> str:
        return f"RandomStream(master_seed={self.master_seed}, key={self._key})"

    def child(self, index: int) -> "RandomStream":
        """Independent substream, e.g. one per bootstrap replicate."""
        return RandomStream(self.master_seed, self.stream_id, _key=self._key + (int(index),))

    def uniform(self, size=None):
        """Uniform draws on [0, 1)."""
        return self._gen.random(size)

    def integers(self, high: int, size=None):
        """Uniform integers on {0, ..., high - 1}."""
        return self._gen.integers(0, high, size=size)

    def standard_normal(self, size=None):
        """Standard normal draws by the Marsaglia polar method."""
        count = 1 if size is None else int(np.prod(size))
        out = np.empty(count)
        filled = 0
        while filled < count:
            need = count - filled
            pairs = int(need * 0.65) + 8
            u = 2.0 * self._gen.random(pairs) - 1.0
            v = 2.0 * self._gen.random(pairs) - 1.0
            s = u * u + v * v
            ok = (s > 0.0) & (s < 1.0)
            u, v, s = u[ok], v[ok], s[ok]
            scale = np.sqrt(-2.0 * np.log(s) / s)
            z = np.empty(2 * u.size)
            z[0::2] = u * scale
            z[1::2] = v * scale
            take = min(need, z.size)
            out[filled : filled + take] = z[:take]
            filled += take
        if size is None:
            return float(out[0])
        return out.reshape(size)


def standard_normal(rng: RandomStream, size=None):
    """Draw standard normal variates from ``rng``."""
    return rng.standard_normal(size)
