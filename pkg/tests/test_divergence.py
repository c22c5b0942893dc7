import datetime as dt

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from leadtime_lab.composition import cdf, make_pair
from leadtime_lab.divergence import crps, divergence_series, kld, wasserstein1
from leadtime_lab.errors import DuplicateDates, EmptyInput, NonMonotoneCdf, UnsortedDates
from leadtime_lab.synth import ScenarioSpec, generate_panel

from conftest import N, point_mass, random_pmf, sparse_pmfs
from oracles import cvm_loop, kld_loop, ot_linprog


class TestWasserstein:
    def test_identical_is_zero(self, rng):
        x = random_pmf(rng)
        assert wasserstein1(x, x) == 0.0

    def test_point_masses(self):
        assert wasserstein1(point_mass(0), point_mass(10)) == pytest.approx(10.0, abs=1e-12)

    def test_three_point_against_lp(self):
        p = np.array([0.5, 0.5, 0.0])
        q = np.array([0.0, 0.5, 0.5])
        assert wasserstein1(p, q) == pytest.approx(1.0, abs=1e-12)
        assert ot_linprog(p, q) == pytest.approx(1.0, abs=1e-9)

    def test_matches_lp_on_small_supports(self, rng):
        for _ in range(50):
            n = rng.integers(2, 11)
            p, q = random_pmf(rng, n), random_pmf(rng, n)
            assert wasserstein1(p, q) == pytest.approx(ot_linprog(p, q), abs=1e-9)

    @given(sparse_pmfs(), sparse_pmfs(), sparse_pmfs())
    def test_metric_axioms(self, p, q, r):
        assert wasserstein1(p, q) >= 0
        assert abs(wasserstein1(p, q) - wasserstein1(q, p)) <= 1e-10
        assert wasserstein1(p, r) <= wasserstein1(p, q) + wasserstein1(q, r) + 1e-10

    @given(sparse_pmfs(n=300), st.integers(0, 65))
    def test_shift_moves_by_k(self, p, k):
        x = np.concatenate([p, np.zeros(66)])
        shifted = np.roll(x, k)
        assert abs(wasserstein1(x, shifted) - k) <= 1e-10

    def test_bounded_by_support_width(self):
        assert wasserstein1(point_mass(0), point_mass(365)) == 365.0


class TestDivergenceSeries:
    def _days(self, rng, n, same=False):
        base = dt.date(2020, 1, 1)
        out = []
        for d in range(n):
            x = random_pmf(rng)
            out.append(make_pair(base + dt.timedelta(d), x, x if same else random_pmf(rng)))
        return out

    def test_identical_pairs_give_zeros(self, rng):
        s = divergence_series(self._days(rng, 5, same=True))
        assert np.all(s.w1 == 0)

    def test_elementwise(self, rng):
        days = self._days(rng, 3)
        s = divergence_series(days)
        assert s.dates == tuple(d.date for d in days)
        for d, w in zip(days, s.w1):
            assert w == wasserstein1(d.nights, d.gbv)

    def test_full_length_panel(self):
        days = generate_panel(ScenarioSpec(n_days=2557, gbv_shift=0.1))
        s = divergence_series(days)
        assert len(s) == 2557
        assert np.all((s.w1 >= 0) & (s.w1 <= 365))

    def test_date_checks(self, rng):
        days = self._days(rng, 3)
        with pytest.raises(UnsortedDates):
            divergence_series([days[1], days[0]])
        with pytest.raises(DuplicateDates):
            divergence_series([days[0], days[0]])
        with pytest.raises(EmptyInput):
            divergence_series([])


class TestKld:
    def test_self_divergence(self, rng):
        x = random_pmf(rng)
        assert abs(kld(x, x)) <= 1e-12

    def test_point_mass_against_uniform(self):
        assert kld(point_mass(0), np.full(N, 1 / N)) == pytest.approx(np.log(366), abs=1e-6)

    def test_uniform_pair(self):
        u = np.full(N, 1 / N)
        assert abs(kld(u, u)) <= 1e-12

    def test_matches_loop(self, rng):
        for _ in range(5):
            x, y = random_pmf(rng, sparsity=0.3), random_pmf(rng, sparsity=0.3)
            assert kld(x, y) == pytest.approx(kld_loop(x, y), rel=1e-10, abs=1e-12)

    @given(sparse_pmfs(), sparse_pmfs())
    def test_gibbs(self, x, y):
        assert kld(x, y) >= -1e-12


class TestCrps:
    def test_perfect_fit(self, rng):
        x = random_pmf(rng)
        assert crps(cdf(x), x) == pytest.approx(0.0, abs=1e-24)

    def test_unit_gaps(self):
        assert crps(cdf(point_mass(0)), point_mass(3)) == pytest.approx(3.0, abs=1e-12)

    def test_same_point_mass(self):
        assert crps(cdf(point_mass(0)), point_mass(0)) == 0.0

    def test_matches_cvm_loop(self, rng):
        for _ in range(20):
            f, x = random_pmf(rng), random_pmf(rng)
            assert crps(cdf(f), x) == pytest.approx(cvm_loop(cdf(f), x), rel=1e-12, abs=1e-14)

    @given(sparse_pmfs(), sparse_pmfs())
    def test_nonnegative_and_zero_only_on_equality(self, f, x):
        v = crps(cdf(f), x)
        assert v >= 0
        if np.max(np.abs(cdf(f) - cdf(x))) > 1e-6:
            assert v > 0

    def test_rejects_decreasing(self):
        F = np.ones(N)
        F[10] = 0.5
        with pytest.raises(NonMonotoneCdf):
            crps(F, point_mass(0))

    def test_rejects_bad_end(self):
        F = np.full(N, 0.9)
        with pytest.raises(NonMonotoneCdf):
            crps(F, point_mass(0))
