import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from leadtime_lab.errors import InvalidConfig, SeriesTooShort
from leadtime_lab.resampling import (
    HacSpec,
    block_bootstrap_mean,
    block_length,
    circular_block_indices,
    simulate_supf_null,
    supf_pvalue,
)
from leadtime_lab.breaks import supf_statistic
from leadtime_lab.synth import generate_break_series


def ar1(n, phi, rng):
    e = rng.standard_normal(n + 200)
    x = np.empty_like(e)
    x[0] = e[0]
    for t in range(1, e.size):
        x[t] = phi * x[t - 1] + e[t]
    return x[200:]


class TestBlockLength:
    @pytest.mark.parametrize("n,b", [(1, 1), (2557, 14), (27, 3), (8, 2), (9, 3), (1000, 10), (1001, 11)])
    def test_values(self, n, b):
        assert block_length(n) == b

    @given(st.integers(1, 10**7))
    def test_is_integer_cube_root_ceiling(self, n):
        b = block_length(n)
        assert b**3 >= n and (b - 1) ** 3 < n


class TestBootstrap:
    def test_constant_series(self):
        r = block_bootstrap_mean(np.full(50, 5.0), 200, seed=1)
        assert (r.point, r.ci_low, r.ci_high) == (5.0, 5.0, 5.0)

    def test_iid_width_near_analytic(self):
        x = np.random.default_rng(3).standard_normal(2000)
        r = block_bootstrap_mean(x, 1000, seed=3)
        width = r.ci_high - r.ci_low
        analytic = 2 * 1.96 / np.sqrt(2000)
        assert 0.7 * analytic <= width <= 1.4 * analytic

    def test_dependent_series_wider_than_iid_formula(self):
        x = ar1(5000, 0.5, np.random.default_rng(4))
        r = block_bootstrap_mean(x, 1000, seed=4)
        iid = 2 * 1.96 * x.std(ddof=1) / np.sqrt(x.size)
        assert r.ci_high - r.ci_low > iid

    def test_deterministic(self):
        x = np.random.default_rng(5).standard_normal(300)
        assert block_bootstrap_mean(x, 500, seed=9) == block_bootstrap_mean(x, 500, seed=9)

    def test_interval_contains_point(self):
        x = np.random.default_rng(6).exponential(size=40)
        r = block_bootstrap_mean(x, 100, seed=0)
        assert r.ci_low <= r.point <= r.ci_high
        assert r.block_len == 4 and r.replicates == 100

    def test_wider_at_smaller_n(self):
        w = {1000: [], 4000: []}
        for s in range(50):
            for n in w:
                r = block_bootstrap_mean(ar1(n, 0.5, np.random.default_rng(s)), 200, seed=s)
                w[n].append(r.ci_high - r.ci_low)
        assert np.mean(w[4000]) < np.mean(w[1000])

    def test_too_short(self):
        with pytest.raises(SeriesTooShort):
            block_bootstrap_mean([1.0], 100)

    def test_circular_indices_are_contiguous_blocks(self):
        idx = circular_block_indices(10, 3, 4, np.random.default_rng(0))
        assert idx.shape == (4, 10)
        for row in idx:
            for b in range(0, 9, 3):
                blk = row[b:b + 3]
                assert np.all(np.diff(blk) % 10 == 1)


class TestSupfNull:
    def test_sorted_and_cached(self):
        a = simulate_supf_null(60, HacSpec(0.1), 200, seed=1)
        assert np.all(np.diff(a) >= 0) and a.size == 200
        assert simulate_supf_null(60, HacSpec(0.1), 200, seed=1) is a

    def test_rank_bounds(self):
        null = simulate_supf_null(60, HacSpec(0.1), 200, seed=1)
        assert supf_pvalue(np.median(null) * 0.5, null) >= 0.5
        assert supf_pvalue(null[-1] * 2, null) <= 1 / 200
        assert supf_pvalue(-1.0, null) == 1.0

    def test_injected_break_rejected(self):
        x = generate_break_series(400, [200], [0.0, 3.0], 1.0, seed=2)
        null = simulate_supf_null(400, HacSpec(), 999, seed=42)
        assert supf_pvalue(supf_statistic(x, 0.05), null) < 0.01

    @pytest.mark.parametrize("kw", [dict(n=39), dict(n=100, draws=199)])
    def test_invalid(self, kw):
        with pytest.raises(InvalidConfig):
            simulate_supf_null(**kw)

    def test_bad_trim(self):
        with pytest.raises(InvalidConfig):
            HacSpec(0.6)
