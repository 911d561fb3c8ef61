"""Tests for hourly binning, the Mann-Kendall test, Sen's slope and ageing deltas.

The Mann-Kendall and Sen's slope tests compare the vectorised
implementations against independent brute-force oracles written out
directly from the textbook definitions.
"""

from collections import Counter

import numpy as np
import pytest

from agesim.errors import (
    EmptySeriesError,
    InsufficientDataError,
    MissingPhaseBinError,
)
from agesim.trendstats import (
    AgeingSummary,
    HourlySeries,
    IndicatorSeries,
    PhaseMarks,
    TrendVerdict,
    ageing_summary,
    bin_hourly,
    classify_z,
    evaluate_indicator,
    mann_kendall,
    rebased,
    sens_slope,
)

# ── Independent oracles ──────────────────────────────────────────────────


def brute_mann_kendall(values):
    """S and var(S) by direct pairwise enumeration and tie-group counting."""
    n = len(values)
    s = 0
    for i in range(n):
        for j in range(i + 1, n):
            d = values[j] - values[i]
            s += (d > 0) - (d < 0)
    ties = sum(
        t * (t - 1) * (2 * t + 5) for t in Counter(values).values() if t > 1
    )
    var = (n * (n - 1) * (2 * n + 5) - ties) / 18.0
    return s, var


def brute_sens_slope(values):
    """Median pairwise slope by explicit enumeration over index pairs."""
    n = len(values)
    slopes = sorted(
        (values[j] - values[i]) / (j - i)
        for i in range(n)
        for j in range(i + 1, n)
    )
    m = len(slopes)
    mid = m // 2
    if m % 2:
        return slopes[mid]
    return (slopes[mid - 1] + slopes[mid]) / 2.0


def series_of(samples, name="metric", unit="gigabytes"):
    return IndicatorSeries(name=name, unit=unit, samples=tuple(samples))


# ── Mann-Kendall ─────────────────────────────────────────────────────────


class TestMannKendall:
    def test_strictly_increasing_twelve_points(self):
        """1..12 gives S = 66 and an upward verdict."""
        r = mann_kendall(list(range(1, 13)))
        assert r.n == 12
        assert r.s_statistic == 66
        assert r.z_score > 1.96
        assert r.verdict is TrendVerdict.UPWARD

    def test_all_tied_values(self):
        """Identical values give S = 0, variance 0, Z = 0, no trend."""
        r = mann_kendall([5.0] * 12)
        assert r.s_statistic == 0
        assert r.variance == 0.0
        assert r.z_score == 0.0
        assert r.verdict is TrendVerdict.NO_TREND

    def test_nine_points_insufficient(self):
        """Fewer than 10 samples yields InsufficientData with S reported."""
        r = mann_kendall(list(range(9)))
        assert r.verdict is TrendVerdict.INSUFFICIENT_DATA
        assert r.s_statistic == 36

    def test_ten_points_sufficient(self):
        """Exactly 10 samples is enough for a verdict."""
        r = mann_kendall(list(range(10)))
        assert r.verdict is TrendVerdict.UPWARD

    def test_strictly_decreasing(self):
        """A strictly decreasing series is flagged downward."""
        r = mann_kendall(list(range(24, 0, -1)))
        assert r.s_statistic == -276
        assert r.verdict is TrendVerdict.DOWNWARD

    def test_matches_oracle_on_random_series(self):
        """S and var(S) match brute force bit-for-bit on random data with ties."""
        rng = np.random.default_rng(2024)
        for _ in range(200):
            n = int(rng.integers(10, 61))
            # Small integer alphabet forces plenty of tie groups.
            values = [float(v) for v in rng.integers(0, 8, size=n)]
            expected_s, expected_var = brute_mann_kendall(values)
            r = mann_kendall(values)
            assert r.s_statistic == expected_s
            assert r.variance == expected_var

    def test_continuity_correction_positive(self):
        """For S > 0 the score is (S - 1) / sqrt(var)."""
        values = [1.0, 3.0, 2.0, 4.0, 6.0, 5.0, 7.0, 9.0, 8.0, 10.0]
        s, var = brute_mann_kendall(values)
        assert s > 0
        r = mann_kendall(values)
        assert r.z_score == (s - 1) / np.sqrt(var)

    def test_continuity_correction_negative(self):
        """For S < 0 the score is (S + 1) / sqrt(var)."""
        values = [10.0, 8.0, 9.0, 7.0, 5.0, 6.0, 4.0, 2.0, 3.0, 1.0]
        s, var = brute_mann_kendall(values)
        assert s < 0
        r = mann_kendall(values)
        assert r.z_score == (s + 1) / np.sqrt(var)

    def test_antisymmetry_under_reversal(self):
        """Reversing a series negates S and leaves var(S) unchanged."""
        rng = np.random.default_rng(7)
        for _ in range(50):
            values = [float(v) for v in rng.integers(0, 15, size=20)]
            fwd = mann_kendall(values)
            rev = mann_kendall(values[::-1])
            assert rev.s_statistic == -fwd.s_statistic
            assert rev.variance == fwd.variance

    def test_extremal_s_for_monotone_series(self):
        """Strictly monotone series reach S = +/- n(n-1)/2."""
        for n in (10, 17, 40):
            up = mann_kendall(list(range(n)))
            down = mann_kendall(list(range(n, 0, -1)))
            assert up.s_statistic == n * (n - 1) // 2
            assert down.s_statistic == -(n * (n - 1) // 2)

    def test_shift_invariance(self):
        """Adding a constant changes neither S, var(S) nor the verdict."""
        rng = np.random.default_rng(13)
        values = [float(v) for v in rng.integers(0, 10, size=30)]
        base = mann_kendall(values)
        shifted = mann_kendall([v + 1000.0 for v in values])
        assert shifted.s_statistic == base.s_statistic
        assert shifted.variance == base.variance
        assert shifted.verdict is base.verdict

    def test_positive_scaling_preserves_verdict(self):
        """Multiplying by a positive constant preserves S and the verdict."""
        rng = np.random.default_rng(17)
        values = [float(v) for v in rng.integers(0, 10, size=30)]
        base = mann_kendall(values)
        scaled = mann_kendall([v * 3.5 for v in values])
        assert scaled.s_statistic == base.s_statistic
        assert scaled.verdict is base.verdict

    def test_alpha_recorded(self):
        """The significance level used for the verdict is stored."""
        assert mann_kendall(list(range(12))).alpha == 0.05


class TestClassifyZ:
    def test_boundary_is_no_trend(self):
        """|Z| equal to 1.96 is not significant; the inequalities are strict."""
        assert classify_z(1.96, 24) is TrendVerdict.NO_TREND
        assert classify_z(-1.96, 24) is TrendVerdict.NO_TREND

    def test_beyond_boundary(self):
        assert classify_z(1.9601, 24) is TrendVerdict.UPWARD
        assert classify_z(-1.9601, 24) is TrendVerdict.DOWNWARD

    def test_small_n_wins_over_large_z(self):
        assert classify_z(8.0, 9) is TrendVerdict.INSUFFICIENT_DATA


# ── Sen's slope ──────────────────────────────────────────────────────────


class TestSensSlope:
    def test_constant_series(self):
        """A flat series has slope zero."""
        assert sens_slope([5.0, 5.0, 5.0, 5.0]) == 0.0

    def test_linear_hourly_series(self):
        """Values 1,3,5,7 at one-hour spacing give 2.0 per hour."""
        assert sens_slope([1.0, 3.0, 5.0, 7.0]) == pytest.approx(2.0)

    def test_matches_oracle_on_random_series(self):
        """Matches explicit pairwise enumeration on random series."""
        rng = np.random.default_rng(99)
        for _ in range(100):
            n = int(rng.integers(2, 40))
            values = [float(v) for v in rng.normal(0, 5, size=n)]
            expected = brute_sens_slope(values)
            got = sens_slope(values)
            assert got == pytest.approx(expected, rel=1e-12, abs=1e-15)

    def test_repeated_values_use_index_distance(self):
        """Pairs with equal values contribute zero slopes instead of NaN."""
        values = [1.0, 1.0, 2.0, 2.0, 3.0, 3.0]
        got = sens_slope(values)
        assert got == pytest.approx(brute_sens_slope(values), rel=1e-12)

    def test_spacing_scales_to_per_hour(self):
        """Half-hour spacing doubles the per-hour slope."""
        values = [0.0, 1.0, 2.0, 3.0]
        assert sens_slope(values, spacing_hours=0.5) == pytest.approx(2.0)

    def test_single_point_raises(self):
        """Fewer than two samples cannot define a slope."""
        with pytest.raises(InsufficientDataError):
            sens_slope([1.0])

    def test_shift_invariance(self):
        rng = np.random.default_rng(5)
        values = [float(v) for v in rng.normal(0, 2, size=15)]
        assert sens_slope([v + 50.0 for v in values]) == pytest.approx(
            sens_slope(values), rel=1e-9, abs=1e-12
        )

    def test_scaling(self):
        rng = np.random.default_rng(6)
        values = [float(v) for v in rng.normal(0, 2, size=15)]
        assert sens_slope([v * 4.0 for v in values]) == pytest.approx(
            4.0 * sens_slope(values), rel=1e-9, abs=1e-12
        )


# ── Hourly binning ───────────────────────────────────────────────────────


class TestBinHourly:
    def test_single_bin_mean(self):
        """Samples at 10s and 100s average into hour 0."""
        binned = bin_hourly(series_of([(10.0, 2.0), (100.0, 4.0)]))
        assert binned.hours == (0,)
        assert binned.means == (3.0,)

    def test_gap_hours_are_absent(self):
        """Hours without samples do not appear; they are never zero-filled."""
        binned = bin_hourly(series_of([(0.0, 1.0), (7300.0, 5.0)]))
        assert binned.hours == (0, 2)
        assert binned.means == (1.0, 5.0)

    def test_ramp_binned_means(self):
        """A 24 h linear ramp sampled every 30 s bins to ~h+0.5 per hour."""
        samples = [(t, t / 3600.0) for t in range(0, 86400, 30)]
        binned = bin_hourly(series_of(samples))
        assert binned.hours == tuple(range(24))
        for h, mean in zip(binned.hours, binned.means):
            # True deviation is exactly 1/240; leave room for float rounding.
            assert abs(mean - (h + 0.5)) <= 1.0 / 240.0 + 1e-12
            # Cross-check against a direct mean over the bin's samples.
            window = [v for t, v in samples if h * 3600 <= t < (h + 1) * 3600]
            assert mean == pytest.approx(sum(window) / len(window))

    def test_empty_series_rejected(self):
        with pytest.raises(EmptySeriesError):
            bin_hourly(series_of([]))

    def test_phase_marks_from_boundaries(self):
        """Bins at or past the boundaries are marked rejuvenation then post."""
        samples = [(h * 3600.0 + 10.0, 1.0) for h in range(27)]
        binned = bin_hourly(series_of(samples), phase_boundaries=(86400.0, 90000.0))
        assert binned.phase_marks.rejuvenation == (24,)
        assert binned.phase_marks.post_rejuvenation == (25, 26)
        assert binned.stress_hours() == tuple(range(24))

    def test_exclude_windows_mark_bins(self):
        """Bins inside an excluded window drop out of the stress set."""
        samples = [(h * 3600.0 + 5.0, float(h)) for h in range(6)]
        binned = bin_hourly(
            series_of(samples),
            phase_boundaries=(),
            exclude_windows=((7200.0, 14400.0),),
        )
        assert binned.phase_marks.excluded == (2, 3)
        assert binned.stress_hours() == (0, 1, 4, 5)

    def test_unsorted_boundaries_rejected(self):
        with pytest.raises(ValueError):
            bin_hourly(series_of([(0.0, 1.0)]), phase_boundaries=(90000.0, 86400.0))


# ── Ageing summary ───────────────────────────────────────────────────────


def ramp_hourly(vr=0.1):
    """Stress bins 0..23 with mean h/10 plus a post-rejuvenation bin."""
    hours = tuple(range(24)) + (25,)
    means = tuple(h / 10.0 for h in range(24)) + (vr,)
    return HourlySeries(
        name="metric",
        unit="gigabytes",
        hours=hours,
        means=means,
        phase_marks=PhaseMarks(rejuvenation=(24,), post_rejuvenation=(25,)),
    )


class TestAgeingSummary:
    def test_ramp_deltas(self):
        """v(h) = 0.1h over hours 0..23 with vr = 0.1 gives A = 2.3, R = 2.2."""
        s = ageing_summary(ramp_hourly())
        assert s.v0 == 0.0
        assert s.vb == 2.3
        assert s.vr == 0.1
        assert s.ageing_a == 2.3 - 0.0
        assert s.rejuvenation_r == 2.3 - 0.1
        assert s.sens_slope == pytest.approx(0.1, abs=1e-9)

    def test_deltas_are_exact_differences(self):
        """A and R are stored without rounding."""
        binned = HourlySeries(
            name="m",
            unit="gigabytes",
            hours=(0, 23, 25),
            means=(1.234567891, 7.77777777, 3.3333333),
            phase_marks=PhaseMarks(post_rejuvenation=(25,)),
        )
        s = ageing_summary(binned)
        assert s.ageing_a == 7.77777777 - 1.234567891
        assert s.rejuvenation_r == 7.77777777 - 3.3333333

    def test_negative_rejuvenation_delta(self):
        """vr above vb yields a negative R, reported as-is."""
        s = ageing_summary(ramp_hourly(vr=5.0))
        assert s.rejuvenation_r == 2.3 - 5.0

    def test_last_populated_stress_hour_used(self):
        """With hour 23 missing, vb falls back to the last populated bin."""
        binned = HourlySeries(
            name="m",
            unit="gigabytes",
            hours=(0, 1, 17, 25),
            means=(1.0, 2.0, 9.0, 4.0),
            phase_marks=PhaseMarks(post_rejuvenation=(25,)),
        )
        s = ageing_summary(binned)
        assert s.vb == 9.0
        assert s.ageing_a == 8.0

    def test_missing_first_stress_hour(self):
        binned = HourlySeries(
            name="m",
            unit="gigabytes",
            hours=(3, 4, 25),
            means=(1.0, 2.0, 3.0),
            phase_marks=PhaseMarks(post_rejuvenation=(25,)),
        )
        with pytest.raises(MissingPhaseBinError) as exc:
            ageing_summary(binned)
        assert "stress hour 0" in str(exc.value)

    def test_missing_post_rejuvenation_bin(self):
        binned = HourlySeries(
            name="m",
            unit="gigabytes",
            hours=(0, 1, 2),
            means=(1.0, 2.0, 3.0),
        )
        with pytest.raises(MissingPhaseBinError) as exc:
            ageing_summary(binned)
        assert "post-rejuvenation" in str(exc.value)

    def test_single_stress_bin_has_no_slope(self):
        binned = HourlySeries(
            name="m",
            unit="gigabytes",
            hours=(0, 25),
            means=(1.0, 0.5),
            phase_marks=PhaseMarks(post_rejuvenation=(25,)),
        )
        s = ageing_summary(binned)
        assert s.vb == s.v0 == 1.0
        assert s.sens_slope is None


# ── End-to-end indicator evaluation ──────────────────────────────────────


class TestEvaluateIndicator:
    def test_ramp_series(self):
        """Raw ramp samples produce an upward verdict and the ramp slope."""
        samples = [(t, t / 36000.0) for t in range(0, 86400, 30)]
        samples.append((89970.0, 2.35))
        samples += [(90000.0 + k * 30.0, 0.1) for k in range(120)]
        series = series_of(samples)
        analysis = evaluate_indicator(series, phase_boundaries=(86400.0, 90000.0))
        assert analysis.trend.verdict is TrendVerdict.UPWARD
        assert analysis.trend.n == 24
        assert analysis.ageing is not None
        assert analysis.ageing.sens_slope == pytest.approx(0.1, abs=1e-6)
        assert analysis.ageing_unavailable is None

    def test_rejuvenation_bin_not_in_trend_input(self):
        """The rejuvenation-hour bin is excluded from the trend test."""
        samples = [(h * 3600.0, float(h)) for h in range(24)]
        samples.append((89970.0, 100.0))  # rejuvenation-slot sample
        series = series_of(samples)
        analysis = evaluate_indicator(series, phase_boundaries=(86400.0, 90000.0))
        assert analysis.trend.n == 24
        assert analysis.hourly.phase_marks.rejuvenation == (24,)

    def test_empty_series_is_well_formed(self):
        """An empty series reports InsufficientData instead of raising."""
        analysis = evaluate_indicator(series_of([]), phase_boundaries=(86400.0,))
        assert analysis.trend.n == 0
        assert analysis.trend.verdict is TrendVerdict.INSUFFICIENT_DATA
        assert analysis.ageing is None
        assert analysis.ageing_unavailable

    def test_short_series_reports_reason(self):
        """Too few bins for the ageing summary yields a reason, not an error."""
        analysis = evaluate_indicator(
            series_of([(0.0, 1.0), (3700.0, 2.0)]), phase_boundaries=(86400.0,)
        )
        assert analysis.trend.verdict is TrendVerdict.INSUFFICIENT_DATA
        assert analysis.ageing is None
        assert "post-rejuvenation" in analysis.ageing_unavailable


# ── Series plumbing ──────────────────────────────────────────────────────


class TestIndicatorSeries:
    def test_timestamps_must_increase(self):
        with pytest.raises(ValueError):
            series_of([(10.0, 1.0), (10.0, 2.0)])

    def test_unit_required(self):
        with pytest.raises(ValueError):
            IndicatorSeries(name="m", unit="", samples=((0.0, 1.0),))

    def test_rebased_starts_at_zero(self):
        series = series_of([(1000.0, 1.0), (1060.0, 2.0)])
        shifted = rebased(series)
        assert shifted.samples[0][0] == 0.0
        assert shifted.samples[1][0] == 60.0
        assert [v for _, v in shifted.samples] == [1.0, 2.0]
