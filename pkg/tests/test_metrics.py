import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from affectbench.bridge import AffectSample, AffectSequence
from affectbench.errors import ValidationError
from affectbench.metrics import (
    AgreementStats,
    DeviationSeries,
    agreement_stats,
    aggregate,
    align,
    ccc,
    deviation,
    pearson,
    trend_frequency,
)


def seq(participant, condition, points):
    """points: list of (frame_index, arousal, valence) or (frame_index, None)."""
    samples = []
    for point in points:
        if point[1] is None:
            samples.append(AffectSample(point[0], None, None, False))
        else:
            samples.append(AffectSample(point[0], point[1], point[2], True))
    return AffectSequence(participant, condition, samples)


def dev_series(deltas, dimension="arousal"):
    return DeviationSeries("p", "lighter", dimension, list(enumerate(deltas)))


finite_series = st.lists(
    st.floats(-1.0, 1.0, allow_nan=False, width=64), min_size=2, max_size=60
)


class TestAlign:
    def test_full_overlap(self):
        orig = seq("p", "original", [(0, 0.1, 0.2), (1, 0.3, 0.4)])
        cond = seq("p", "lighter", [(0, 0.2, 0.2), (1, 0.4, 0.4)])
        assert len(align(orig, cond)) == 2

    def test_index_intersection(self):
        orig = seq("p", "original", [(0, 0.1, 0.1), (1, 0.1, 0.1), (2, 0.1, 0.1)])
        cond = seq("p", "lighter", [(1, 0.2, 0.2), (2, 0.2, 0.2), (3, 0.2, 0.2)])
        paired = align(orig, cond)
        assert [p.frame_index for p in paired.pairs] == [1, 2]

    def test_invalid_samples_are_dropped(self):
        orig = seq("p", "original", [(0, 0.1, 0.1), (1, 0.1, 0.1)])
        cond = seq("p", "noise", [(0, None), (1, 0.2, 0.2)])
        paired = align(orig, cond)
        assert [p.frame_index for p in paired.pairs] == [1]

    def test_participant_mismatch_rejected(self):
        orig = seq("p1", "original", [(0, 0.1, 0.1)])
        cond = seq("p2", "lighter", [(0, 0.1, 0.1)])
        with pytest.raises(ValidationError, match="participant mismatch"):
            align(orig, cond)

    def test_same_condition_rejected(self):
        a = seq("p", "lighter", [(0, 0.1, 0.1)])
        b = seq("p", "lighter", [(0, 0.1, 0.1)])
        with pytest.raises(ValidationError):
            align(a, b)


class TestDeviation:
    def test_self_comparison_is_zero(self):
        orig = seq("p", "original", [(0, 0.3, 0.1), (1, 0.5, 0.2)])
        cond = seq("p", "lighter", [(0, 0.3, 0.1), (1, 0.5, 0.2)])
        dev = deviation(align(orig, cond), "arousal")
        assert [d for _, d in dev.deltas] == [0.0, 0.0]

    def test_overestimation_is_positive(self):
        orig = seq("p", "original", [(0, 0.3, 0.0), (1, 0.3, 0.0)])
        cond = seq("p", "lighter", [(0, 0.5, 0.0), (1, 0.3, 0.0)])
        dev = deviation(align(orig, cond), "arousal")
        assert dev.deltas[0][1] == pytest.approx(0.2)

    def test_underestimation_is_negative(self):
        orig = seq("p", "original", [(0, 0.5, 0.0), (1, 0.5, 0.0)])
        cond = seq("p", "motion", [(0, -0.5, 0.0), (1, 0.5, 0.0)])
        dev = deviation(align(orig, cond), "arousal")
        assert dev.deltas[0][1] == -1.0

    def test_antisymmetry(self):
        orig = seq("p", "original", [(i, v, -v) for i, v in enumerate([0.1, -0.4, 0.9])])
        cond = seq("p", "gaussian", [(i, v / 2, v) for i, v in enumerate([0.5, 0.2, -0.1])])
        forward = deviation(align(orig, cond), "arousal")
        backward = deviation(align(cond, orig), "arousal")
        for (_, df), (_, db) in zip(forward.deltas, backward.deltas):
            assert df == -db


class TestTrendFrequency:
    def test_mixed_signs(self):
        assert trend_frequency(dev_series([0.1, -0.1, 0.2, 0.3])) == (75.0, 25.0, 0.0)

    def test_all_zero(self):
        assert trend_frequency(dev_series([0.0, 0.0, 0.0])) == (0.0, 0.0, 100.0)

    def test_tolerance_bucketing(self):
        assert trend_frequency(dev_series([0.005, -0.2]), zero_tolerance=0.01) == (0.0, 50.0, 50.0)

    def test_empty_series_rejected(self):
        with pytest.raises(ValidationError):
            trend_frequency(dev_series([]))

    @given(deltas=st.lists(st.floats(-2, 2, allow_nan=False), min_size=1, max_size=50))
    @settings(max_examples=60, deadline=None)
    def test_percentages_sum_to_100(self, deltas):
        pos, neg, zero = trend_frequency(dev_series(deltas))
        assert abs(pos + neg + zero - 100.0) < 1e-9


class TestPearson:
    def test_self_correlation(self):
        x = [0.1, 0.5, -0.3, 0.9]
        assert pearson(x, x).value == pytest.approx(1.0)

    def test_anti_correlation(self):
        x = np.array([0.1, 0.5, -0.3, 0.9])
        assert pearson(x, -x).value == pytest.approx(-1.0)

    def test_hand_computed_example(self):
        assert pearson([1, 2, 3, 4], [1, 3, 2, 4]).value == 0.8

    def test_constant_input_degenerates_to_zero(self):
        result = pearson([1.0, 1.0, 1.0], [0.1, 0.2, 0.3])
        assert result.value == 0.0
        assert result.degenerate

    def test_too_short_rejected(self):
        with pytest.raises(ValidationError):
            pearson([1.0], [1.0])

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            pearson([1.0, 2.0], [1.0, 2.0, 3.0])


class TestCcc:
    def test_perfect_concordance(self):
        x = [0.2, -0.4, 0.8, 0.0]
        assert ccc(x, x) == 1.0

    def test_zero_mean_antisymmetric(self):
        x = np.array([-0.5, 0.0, 0.5])
        assert ccc(x, -x) == pytest.approx(-1.0, abs=1e-15)

    def test_pure_mean_shift_closed_form(self):
        assert ccc([-1.0, 0.0, 1.0], [0.0, 1.0, 2.0]) == pytest.approx(4 / 7, rel=1e-12)

    def test_constant_condition_scores_zero(self):
        assert ccc([0.1, 0.2, 0.3], [0.5, 0.5, 0.5]) == 0.0

    def test_equal_constants_score_one(self):
        assert ccc([0.5, 0.5], [0.5, 0.5]) == 1.0

    def test_scale_sensitivity_vs_pearson_invariance(self):
        # Pearson ignores positive affine maps; CCC penalizes them
        x = np.array([0.1, -0.2, 0.4, 0.3, -0.5])
        y = 2.0 * x
        assert pearson(x, y).value == pytest.approx(1.0)
        assert ccc(x, y) < 1.0

    @given(x=finite_series, y=finite_series)
    @settings(max_examples=80, deadline=None)
    def test_symmetry_and_range(self, x, y):
        n = min(len(x), len(y))
        x, y = x[:n], y[:n]
        value = ccc(x, y)
        assert value == ccc(y, x)
        assert -1.0 <= value <= 1.0

    @given(x=finite_series)
    @settings(max_examples=40, deadline=None)
    def test_magnitude_bounded_by_pearson(self, x):
        y = [v + 0.1 * ((-1) ** i) for i, v in enumerate(x)]
        rho = pearson(x, y)
        if not rho.degenerate and np.std(x) > 0:
            assert abs(ccc(x, y)) <= abs(rho.value) + 1e-12
            if rho.value != 0:
                assert math.copysign(1, ccc(x, y)) == math.copysign(1, rho.value) or ccc(x, y) == 0


class TestAgreementStats:
    def test_self_agreement_cell(self):
        orig = seq("p", "original", [(i, 0.1 * i - 0.3, 0.05 * i) for i in range(6)])
        cond = seq("p", "lighter", [(i, 0.1 * i - 0.3, 0.05 * i) for i in range(6)])
        stats = agreement_stats(align(orig, cond), "arousal")
        assert stats.ccc == 1.0
        assert stats.pos_pct == 0.0
        assert stats.neg_pct == 0.0
        assert stats.zero_pct == 100.0
        assert stats.n == 6

    def test_too_few_pairs_rejected(self):
        orig = seq("p", "original", [(0, 0.1, 0.1), (1, 0.2, 0.2)])
        cond = seq("p", "noise", [(0, 0.1, 0.1), (2, 0.2, 0.2)])
        with pytest.raises(ValidationError, match="at least 2"):
            agreement_stats(align(orig, cond), "arousal")


def make_stats(ccc_value, n=10, pos=50.0, neg=30.0):
    return AgreementStats(
        ccc=ccc_value,
        pearson=ccc_value,
        pearson_degenerate=False,
        pos_pct=pos,
        neg_pct=neg,
        zero_pct=100.0 - pos - neg,
        mean_delta=0.0,
        min_delta=-0.1,
        max_delta=0.1,
        n=n,
    )


class TestAggregate:
    def test_singleton_min_equals_max(self):
        stats = {("p1", "lighter", "arousal"): make_stats(0.42)}
        [summary] = aggregate(stats, conditions=["lighter"])
        assert summary.ccc_min == summary.ccc_max == 0.42

    def test_two_participant_spread(self):
        stats = {
            ("p1", "lighter", "arousal"): make_stats(0.2),
            ("p2", "lighter", "arousal"): make_stats(0.6),
        }
        [summary] = aggregate(stats, conditions=["lighter"])
        assert summary.ccc_min == 0.2
        assert summary.ccc_max == 0.6
        assert summary.ccc_mean == pytest.approx(0.4)

    def test_paper_shaped_range_row(self):
        # Table-style row: lighter arousal spanning [0.0825, 0.9715]
        stats = {
            ("p1", "lighter", "arousal"): make_stats(0.0825),
            ("p2", "lighter", "arousal"): make_stats(0.5),
            ("p3", "lighter", "arousal"): make_stats(0.9715),
        }
        [summary] = aggregate(stats, conditions=["lighter"])
        assert summary.ccc_min == 0.0825
        assert summary.ccc_max == 0.9715

    def test_pooled_vs_mean_trend_weighting(self):
        stats = {
            ("p1", "noise", "arousal"): make_stats(0.1, n=10, pos=100.0, neg=0.0),
            ("p2", "noise", "arousal"): make_stats(0.2, n=30, pos=0.0, neg=100.0),
        }
        [summary] = aggregate(stats, conditions=["noise"])
        assert summary.trend_mean.pos_pct == 50.0
        assert summary.trend_pooled.pos_pct == 25.0
        assert summary.total_n == 40

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            aggregate({})
