import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from isotropy import NumericalError, RandomStream, ValidationError, chisq_survival, solve_spd, standard_normal
from isotropy.numstats import cholesky, gamma_q


class TestChisqSurvival:
    def test_published_anchor(self):
        assert chisq_survival(34.433, 2) == pytest.approx(3.335e-08, rel=1e-3)

    @pytest.mark.parametrize("df", [1, 2, 3, 7, 30])
    def test_zero_is_one(self, df):
        assert chisq_survival(0.0, df) == 1.0

    def test_df2_median(self):
        assert chisq_survival(2 * math.log(2), 2) == pytest.approx(0.5, abs=1e-14)

    @pytest.mark.parametrize("df", [1, 2, 3, 4, 5, 10, 25, 60])
    def test_matches_scipy(self, df):
        xs = np.concatenate([np.linspace(0, 5, 51), np.linspace(5, 700, 300)])
        for x in xs:
            assert abs(chisq_survival(float(x), df) - stats.chi2.sf(x, df)) <= 1e-12

    def test_deep_tail_relative(self):
        for df in (1, 2, 5):
            for x in (100.0, 300.0, 700.0):
                assert chisq_survival(x, df) == pytest.approx(stats.chi2.sf(x, df), rel=1e-10)

    @pytest.mark.parametrize("x,df", [(-1.0, 2), (1.0, 0), (1.0, 1.5), (math.nan, 2)])
    def test_invalid(self, x, df):
        with pytest.raises(ValidationError):
            chisq_survival(x, df)

    @given(st.floats(0, 600), st.floats(0.01, 50), st.integers(1, 40))
    def test_strictly_decreasing(self, x, dx, df):
        lo, hi = chisq_survival(x, df), chisq_survival(x + dx, df)
        assert 0 < hi <= 1 and 0 < lo <= 1
        assert hi <= lo
        if lo > 1e-300 and lo < 1 - 1e-15:
            assert hi < lo

    def test_gamma_q_exponential(self):
        # Q(1, x) = exp(-x)
        for x in (0.1, 1.0, 2.5, 40.0):
            assert gamma_q(1.0, x) == pytest.approx(math.exp(-x), rel=1e-13)


class TestSolveSpd:
    def test_identity(self):
        v = np.array([1.5, -2.0, 3.0])
        np.testing.assert_array_equal(solve_spd(np.eye(3), v), v)

    def test_diagonal(self):
        np.testing.assert_allclose(solve_spd(np.diag([2.0, 4.0]), np.array([2.0, 8.0])), [1.0, 2.0], rtol=0, atol=1e-15)

    def test_two_by_two(self):
        np.testing.assert_allclose(solve_spd(np.array([[4.0, 2.0], [2.0, 3.0]]), np.array([2.0, 5.0])), [-0.5, 2.0], atol=1e-14)

    def test_breakdown_reports_pivot(self):
        m = np.array([[1.0, 2.0], [2.0, 1.0]])
        with pytest.raises(NumericalError, match="pivot 1"):
            solve_spd(m, np.ones(2))

    def test_asymmetric_rejected(self):
        with pytest.raises(ValidationError):
            solve_spd(np.array([[1.0, 0.5], [0.0, 1.0]]), np.ones(2))

    @staticmethod
    def _spd(seed, k, logcond):
        rng = np.random.default_rng(seed)
        q, _ = np.linalg.qr(rng.standard_normal((k, k)))
        m = (q * np.logspace(0, logcond, k)) @ q.T
        return 0.5 * (m + m.T), rng.standard_normal(k)

    @settings(max_examples=60)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 8), st.floats(0, 5))
    def test_relative_residual(self, seed, k, logcond):
        m, v = self._spd(seed, k, logcond)
        w = solve_spd(m, v)
        assert np.linalg.norm(m @ w - v) <= 1e-10 * np.linalg.norm(v)

    @settings(max_examples=60)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 8), st.floats(0, 8))
    def test_backward_stable_residual(self, seed, k, logcond):
        # past cond ~1e5 only the backward-error form of the bound is attainable in doubles
        m, v = self._spd(seed, k, logcond)
        w = solve_spd(m, v)
        assert np.linalg.norm(m @ w - v) <= 1e-13 * np.linalg.norm(m, 2) * np.linalg.norm(w)

    def test_cholesky_matches_numpy(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal((6, 6))
        m = x @ x.T + 6 * np.eye(6)
        np.testing.assert_allclose(cholesky(m), np.linalg.cholesky(m), atol=1e-12)


class TestRandomStream:
    def test_reproducible(self):
        a = RandomStream(42, 3).standard_normal(1000)
        b = RandomStream(42, 3).standard_normal(1000)
        np.testing.assert_array_equal(a, b)

    def test_scalar_draw(self):
        x = standard_normal(RandomStream(5))
        assert isinstance(x, float)

    def test_moments(self):
        z = standard_normal(RandomStream(2024), 100_000)
        assert abs(z.mean()) <= 0.02
        assert 0.97 <= z.var() <= 1.03

    def test_distinct_streams_uncorrelated(self):
        a = RandomStream(7, 0).standard_normal(100_000)
        b = RandomStream(7, 1).standard_normal(100_000)
        assert abs(np.corrcoef(a, b)[0, 1]) <= 0.02
        assert not np.array_equal(a[:10], b[:10])

    def test_children_independent_of_consumption(self):
        parent = RandomStream(11)
        first = parent.child(4).uniform(5)
        parent.uniform(1000)
        np.testing.assert_array_equal(parent.child(4).uniform(5), first)

    def test_normality_ks(self):
        z = RandomStream(99).standard_normal(20_000)
        assert stats.kstest(z, "norm").pvalue > 1e-3

    @pytest.mark.parametrize("seed", [-1, 2**64])
    def test_seed_range(self, seed):
        with pytest.raises(ValidationError):
            RandomStream(seed)
