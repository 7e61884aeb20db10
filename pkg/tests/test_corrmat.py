import datetime as dt
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from centriport.corrmat import (
    CorrelationMatrix,
    TransformTag,
    apply_transform,
    exp_weights,
    shrink,
    weighted_correlation,
)
from centriport.errors import DataError, InvalidParameterError
from centriport.panel import ReturnsPanel

from oracles import shrink_oracle, single_index_cov_oracle, weighted_corr_oracle


def make_panel(values, start=dt.date(2000, 1, 3)):
    values = np.asarray(values, dtype=float)
    dates = []
    d = start
    while len(dates) < values.shape[0]:
        if d.weekday() < 5:
            dates.append(d)
        d += dt.timedelta(days=1)
    tickers = tuple(f"T{i}" for i in range(values.shape[1]))
    return ReturnsPanel(tuple(dates), tickers, values)


class TestExpWeights:
    def test_tau_one_forced_by_normalization(self):
        assert exp_weights(1).tolist() == [1.0]

    def test_tau_two_matches_direct_evaluation(self):
        e = math.exp(-0.5)
        expected = np.array([e / (1 + e), 1 / (1 + e)])
        np.testing.assert_allclose(exp_weights(2), expected, atol=1e-15)
        np.testing.assert_allclose(expected, [0.37754, 0.62246], atol=5e-6)

    def test_tau_zero_rejected(self):
        with pytest.raises(InvalidParameterError):
            exp_weights(0)

    @given(st.integers(min_value=2, max_value=500))
    @settings(max_examples=60, deadline=None)
    def test_positive_increasing_normalized(self, tau):
        w = exp_weights(tau)
        assert np.all(w > 0)
        assert np.all(np.diff(w) > 0)
        assert abs(w.sum() - 1.0) <= 1e-14


class TestWeightedCorrelation:
    def test_small_tau_rejected(self):
        panel = make_panel(np.random.default_rng(0).normal(size=(10, 2)))
        for tau in (0, 1):
            with pytest.raises(InvalidParameterError):
                weighted_correlation(panel, tau, 9)

    def test_perfectly_correlated_columns(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=20)
        panel = make_panel(np.column_stack([x, 2.0 * x]))
        corr = weighted_correlation(panel, 5, 19)
        assert corr.C[0, 1] == pytest.approx(1.0, abs=1e-12)

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(2)
        values = rng.normal(size=(25, 3)) * 0.01
        panel = make_panel(values)
        tau = 6
        got = weighted_correlation(panel, tau, 24)
        expected = weighted_corr_oracle(values, tau, 24)
        np.testing.assert_allclose(got.C, expected, atol=1e-12)

    def test_insufficient_history_names_earliest_date(self):
        rng = np.random.default_rng(3)
        panel = make_panel(rng.normal(size=(30, 2)))
        tau = 10  # needs 19 rows
        with pytest.raises(DataError, match=panel.dates[18].isoformat()):
            weighted_correlation(panel, tau, 10)

    def test_zero_variance_names_ticker(self):
        rng = np.random.default_rng(4)
        values = rng.normal(size=(15, 3))
        values[-4:, 1] = 0.5  # constant inside the most recent window
        panel = make_panel(values)
        with pytest.raises(DataError, match="T1"):
            weighted_correlation(panel, 4, 14)

    def test_output_invariants(self):
        rng = np.random.default_rng(5)
        for trial in range(5):
            values = rng.normal(size=(41, 6)) * 0.02
            panel = make_panel(values)
            corr = weighted_correlation(panel, 8, 40 - trial * 2)
            C = corr.C
            assert np.max(np.abs(C - C.T)) <= 1e-12
            np.testing.assert_allclose(np.diag(C), 1.0, atol=0)
            assert np.all(C >= -1 - 1e-10) and np.all(C <= 1 + 1e-10)


class TestShrink:
    @pytest.fixture
    def setup(self):
        rng = np.random.default_rng(6)
        values = rng.normal(size=(60, 5)) * 0.01
        panel = make_panel(values)
        corr = weighted_correlation(panel, 12, 59)
        return panel, corr

    def test_intensity_zero_is_identity(self, setup):
        panel, corr = setup
        out = shrink(corr, panel, intensity=0.0)
        np.testing.assert_allclose(out.C, corr.C, atol=1e-12)
        assert out.shrunk

    def test_intensity_one_is_single_index_correlation(self, setup):
        panel, corr = setup
        out = shrink(corr, panel, intensity=1.0)
        F = single_index_cov_oracle(panel.values, panel.values.mean(axis=1))
        d = np.sqrt(np.diag(F))
        expected = F / np.outer(d, d)
        np.testing.assert_allclose(out.C, expected, atol=1e-12)

    def test_half_intensity_matches_blend_oracle(self, setup):
        panel, corr = setup
        out = shrink(corr, panel, intensity=0.5)
        expected = shrink_oracle(corr.C, panel.values, panel.values.mean(axis=1), 0.5)
        np.testing.assert_allclose(out.C, expected, atol=1e-12)

    def test_estimated_intensity_in_range_and_diag_one(self, setup):
        panel, corr = setup
        out = shrink(corr, panel)
        np.testing.assert_allclose(np.diag(out.C), 1.0, atol=0)
        assert np.max(np.abs(out.C - out.C.T)) <= 1e-12

    def test_out_of_range_intensity_clamped(self, setup):
        panel, corr = setup
        hi = shrink(corr, panel, intensity=1.5)
        one = shrink(corr, panel, intensity=1.0)
        np.testing.assert_allclose(hi.C, one.C, atol=0)

    def test_explicit_market_proxy(self, setup):
        panel, corr = setup
        proxy = panel.values @ np.array([0.5, 0.2, 0.1, 0.1, 0.1])
        out = shrink(corr, panel, market_proxy=proxy, intensity=0.5)
        expected = shrink_oracle(corr.C, panel.values, proxy, 0.5)
        np.testing.assert_allclose(out.C, expected, atol=1e-12)


class TestTransforms:
    def test_toy_entry_under_each_tag(self, toy_c):
        corr = CorrelationMatrix(tuple("ABCDE"), toy_c)
        assert apply_transform(corr, TransformTag.A2)[0, 1] == 0.0
        assert apply_transform(corr, TransformTag.A3)[0, 1] == pytest.approx(0.1378)
        assert apply_transform(corr, TransformTag.A4)[0, 1] == pytest.approx(0.1378)

    def test_diagonal_behaviour(self, toy_c):
        corr = CorrelationMatrix(tuple("ABCDE"), toy_c)
        for tag in (TransformTag.A1, TransformTag.A2, TransformTag.A4):
            np.testing.assert_allclose(np.diag(apply_transform(corr, tag)), 1.0)
        np.testing.assert_allclose(np.diag(apply_transform(corr, TransformTag.A3)), 0.0)

    def test_a1_returns_input_unchanged(self, toy_c):
        corr = CorrelationMatrix(tuple("ABCDE"), toy_c)
        np.testing.assert_array_equal(apply_transform(corr, TransformTag.A1), toy_c)

    @given(st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_a4_equals_a2_plus_a3_exactly(self, seed):
        rng = np.random.default_rng(seed)
        C = rng.uniform(-1, 1, size=(4, 4))
        C = 0.5 * (C + C.T)
        np.fill_diagonal(C, 1.0)
        a2 = apply_transform(C, TransformTag.A2)
        a3 = apply_transform(C, TransformTag.A3)
        a4 = apply_transform(C, TransformTag.A4)
        np.testing.assert_array_equal(a4, a2 + a3)
