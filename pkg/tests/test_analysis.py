import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from drfed.analysis import (
    AggregateSeries,
    aggregate,
    auc,
    fit_log_regret,
    gnuplot_script,
    sweep_summary,
    tail_exceedance,
    tidy_csv,
)


class TestAggregate:
    def test_identical_runs(self):
        s = aggregate([np.arange(5.0)] * 4)
        assert np.all(s.half_width == 0) and s.runs == 4

    def test_two_runs_by_hand(self):
        s = aggregate([np.array([0.0]), np.array([2.0])])
        assert s.mean[0] == 1.0
        assert s.half_width[0] == pytest.approx(1.96)

    def test_single_run_has_no_interval(self):
        assert np.isnan(aggregate([np.ones(3)]).half_width).all()

    def test_grid_mismatch(self):
        with pytest.raises(ValueError):
            aggregate([np.ones(3), np.ones(4)])
        with pytest.raises(ValueError):
            aggregate([])

    @given(st.lists(st.lists(st.floats(0, 100), min_size=4, max_size=4), min_size=2, max_size=8), st.randoms())
    def test_permutation_invariant(self, runs, rnd):
        arr = [np.array(r) for r in runs]
        shuffled = arr[:]
        rnd.shuffle(shuffled)
        a, b = aggregate(arr), aggregate(shuffled)
        assert np.array_equal(a.mean, b.mean) and np.array_equal(a.half_width, b.half_width)

    @given(st.lists(st.lists(st.floats(0, 100), min_size=3, max_size=3), min_size=2, max_size=8))
    def test_interval_nonnegative(self, runs):
        s = aggregate([np.array(r) for r in runs])
        assert np.all(s.half_width >= 0)
        assert np.all(s.ci_lo <= s.ci_hi)


class TestLogFit:
    def test_exact_log_series(self):
        t = np.arange(1, 1001)
        fit = fit_log_regret(t, values=3 * np.log(t))
        assert fit.slope == pytest.approx(3, abs=1e-9) and fit.r_squared == pytest.approx(1.0)

    @given(st.floats(-50, 50), st.floats(-100, 100))
    @settings(max_examples=30)
    def test_recovers_planted_line(self, slope, intercept):
        if abs(slope) < 1e-3:
            slope = 1.0
        t = np.arange(10, 500)
        fit = fit_log_regret(t, t_min=10, values=slope * np.log(t) + intercept)
        assert fit.slope == pytest.approx(slope, abs=1e-9)
        assert fit.intercept == pytest.approx(intercept, abs=1e-9)

    def test_linear_series_discriminated(self):
        t = np.arange(1, 50001)
        lin = fit_log_regret(t, t_min=1000, values=t.astype(float))
        log = fit_log_regret(t, t_min=1000, values=5 * np.log(t) + 0.01 * np.sin(t))
        assert lin.r_squared < 0.9 < log.r_squared

    def test_preconditions(self):
        with pytest.raises(ValueError):
            fit_log_regret(np.arange(1, 6), values=np.arange(5.0))
        with pytest.raises(ValueError):
            fit_log_regret(np.arange(1, 30), values=np.ones(29))

    def test_accepts_series(self):
        t = np.arange(1, 101)
        s = AggregateSeries(t, 2 * np.log(t), np.zeros(100), 3)
        slope, _, r2 = fit_log_regret(s, 5)
        assert slope == pytest.approx(2) and r2 == pytest.approx(1)


class TestTail:
    def test_infinite_bound(self):
        assert tail_exceedance([(0.5, 3, 10), (0.9, 1, 2)], lambda n, t: np.inf) == 0.0

    def test_zero_bound(self):
        assert tail_exceedance([(0.5, 3, 10), (0.9, 1, 2)], lambda n, t: 0.0) == 1.0

    def test_uses_counts(self):
        rate = tail_exceedance(np.array([[0.5, 1, 10], [0.5, 100, 10]]), lambda n, t: 1 / np.sqrt(n))
        assert rate == 0.5

    def test_empty(self):
        assert tail_exceedance([], lambda n, t: 0) == 0.0


class TestSweep:
    def test_increasing(self):
        tab = sweep_summary({0.3: (30, 1), 0.1: (10, 1), 0.2: (20, 1)}, "h")
        assert [r.value for r in tab.rows] == [0.1, 0.2, 0.3]
        assert tab.verdict is True

    def test_slack(self):
        ok = sweep_summary({1: (10.0, 2.0), 2: (9.0, 2.0)}, "K")
        bad = sweep_summary({1: (10.0, 0.5), 2: (9.0, 0.5)}, "K")
        assert ok.verdict is True and bad.verdict is False
        assert bad.worst_excess == pytest.approx(0.5)

    def test_decreasing_for_c(self):
        assert sweep_summary({0.2: (30, 1), 1.0: (10, 1)}, "c").verdict is True
        assert sweep_summary({0.2: (10, 1), 1.0: (30, 1)}, "c").verdict is False

    def test_no_direction_for_M(self):
        tab = sweep_summary({5: (1, 0), 8: (3, 0), 12: (2, 0)}, "M")
        assert tab.verdict is None and "none asserted" in tab.to_text()

    def test_single_value(self):
        tab = sweep_summary({0.1: (1, 0)}, "h")
        assert tab.verdict is None and "no verdict" in tab.to_text()

    def test_from_raw_finals(self):
        tab = sweep_summary({1: [1.0, 3.0], 2: [5.0, 5.0]}, "K")
        assert tab.rows[0].mean == 2.0 and tab.rows[0].half_width == pytest.approx(1.96)


class TestExport:
    def test_tidy_and_gnuplot(self):
        t = np.arange(1, 11)
        s = AggregateSeries(t, t * 1.0, np.ones(10), 5)
        text = tidy_csv({"a": s}, stride=3)
        lines = text.strip().splitlines()
        assert lines[0] == "param,t,mean,ci_lo,ci_hi"
        assert [int(l.split(",")[1]) for l in lines[1:]] == [1, 4, 7, 10]
        assert lines[-1] == "a,10,10,9,11"
        script = gnuplot_script("agg.csv", ["a"])
        assert "agg.csv" in script and "'a'" in script

    def test_auc(self):
        t = np.arange(1, 4)
        assert auc(AggregateSeries(t, np.array([0.0, 1.0, 2.0]), np.zeros(3), 2)) == 2.0
