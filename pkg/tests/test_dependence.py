import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uspectral.dependence import (
    DependenceSequence,
    MeasureKind,
    TimeSeries,
    autocovariance_brute,
    autocovariance_lag,
    dependence_sequence,
    kendall_tau_brute,
    kendall_tau_lag,
    lag_pairs,
    spearman_rho_brute,
    spearman_rho_lag,
)
from uspectral.validation import PreconditionError, TieValueWarning


def rng(seed=0):
    return np.random.default_rng(seed)


class TestLagPairs:
    def test_lag_one(self):
        assert lag_pairs([1.0, 2.0, 3.0], 1) == [(1.0, 2.0), (2.0, 3.0)]

    def test_lag_zero_duplicates(self):
        assert lag_pairs([1.0, 2.0, 3.0], 0) == [(1.0, 1.0), (2.0, 2.0), (3.0, 3.0)]

    def test_lag_two(self):
        assert lag_pairs([5.0, 1.0, 4.0, 2.0], 2) == [(5.0, 4.0), (1.0, 2.0)]

    def test_out_of_range(self):
        with pytest.raises(PreconditionError):
            lag_pairs([1.0, 2.0, 3.0, 4.0], 3)


class TestKendall:
    def test_monotone(self):
        assert kendall_tau_lag([1.0, 2.0, 3.0, 4.0], 1) == 1.0

    def test_hand_case(self):
        # lagged pairs (1,3),(3,2),(2,4): one concordant, two discordant
        assert kendall_tau_lag([1.0, 3.0, 2.0, 4.0], 1) == pytest.approx(-1 / 3, abs=1e-15)

    def test_lag_zero_is_one(self):
        x = rng(1).normal(size=30)
        assert kendall_tau_lag(x, 0) == 1.0

    def test_matches_brute_force(self):
        for seed in range(8):
            x = rng(seed).normal(size=40)
            for k in (0, 1, 5, 17):
                assert kendall_tau_lag(x, k) == kendall_tau_brute(x, k)

    def test_kernel_forms_agree(self):
        # pair-product kernel vs joint-indicator representation, tie-free data
        for seed in range(8):
            x = rng(100 + seed).normal(size=35)
            for k in (0, 2, 9):
                a = kendall_tau_brute(x, k, kernel_form="product")
                b = kendall_tau_brute(x, k, kernel_form="concordance")
                assert a == b

    def test_lag_bound(self):
        with pytest.raises(PreconditionError):
            kendall_tau_lag(np.arange(10.0), 8)


class TestSpearman:
    def test_monotone_lag_zero(self):
        assert spearman_rho_lag([1.0, 2.0, 3.0, 4.0, 5.0], 0) == 1.0

    def test_matches_brute_force(self):
        x = rng(7).normal(size=6)
        assert spearman_rho_lag(x, 1) == spearman_rho_brute(x, 1)
        for seed in range(6):
            y = rng(200 + seed).normal(size=25)
            for k in (0, 1, 2, 7):
                assert spearman_rho_lag(y, k) == spearman_rho_brute(y, k)

    def test_range(self):
        for seed in range(5):
            x = rng(300 + seed).normal(size=50)
            for k in range(0, 20, 4):
                assert -1.0 <= spearman_rho_lag(x, k) <= 1.0

    def test_lag_bound(self):
        with pytest.raises(PreconditionError):
            spearman_rho_lag(np.arange(10.0), 7)


class TestAutocovariance:
    def test_constant_series(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TieValueWarning)
            assert autocovariance_lag([3.0, 3.0, 3.0, 3.0], 1) == 0.0

    def test_hand_case(self):
        # pair kernel mean over C(4,2) pairs of (x_i - x_j)^2 / 2
        assert autocovariance_lag([1.0, 2.0, 3.0, 4.0], 0) == pytest.approx(5 / 3, abs=1e-14)

    def test_lag_zero_is_sample_variance(self):
        x = rng(4).normal(size=60)
        assert autocovariance_lag(x, 0) == pytest.approx(np.var(x, ddof=1), rel=1e-12)

    def test_matches_brute_force(self):
        for seed in range(6):
            x = rng(400 + seed).normal(size=45)
            for k in (0, 1, 6):
                fast = autocovariance_lag(x, k)
                brute = autocovariance_brute(x, k)
                assert fast == pytest.approx(brute, rel=1e-10, abs=1e-12)


class TestInvariances:
    def transforms(self):
        from scipy.special import expit

        return [np.exp, expit, lambda v: v**3, lambda v: 5.0 * v - 2.0]

    def test_rank_invariance_bit_identical(self):
        x = rng(11).normal(size=80)
        for g in self.transforms():
            y = g(x)
            for k in (0, 1, 3, 10):
                assert kendall_tau_lag(y, k) == kendall_tau_lag(x, k)
                assert spearman_rho_lag(y, k) == spearman_rho_lag(x, k)

    def test_negation_invariance(self):
        x = rng(12).normal(size=60)
        for k in (1, 4):
            assert kendall_tau_lag(-x, k) == kendall_tau_lag(x, k)
            assert spearman_rho_lag(-x, k) == spearman_rho_lag(x, k)
            assert autocovariance_lag(-x, k) == pytest.approx(
                autocovariance_lag(x, k), rel=1e-12
            )

    def test_time_reversal_invariance(self):
        # reversal swaps the kernel's coordinate roles, which it is symmetric in
        x = rng(13).normal(size=50)
        for k in (0, 2, 5):
            assert kendall_tau_lag(x[::-1], k) == kendall_tau_lag(x, k)
            assert spearman_rho_lag(x[::-1], k) == spearman_rho_lag(x, k)
            assert autocovariance_lag(x[::-1], k) == pytest.approx(
                autocovariance_lag(x, k), rel=1e-12
            )


class TestSeriesAndSequence:
    def test_tie_warning(self):
        with pytest.warns(TieValueWarning):
            TimeSeries.from_values([1.0, 2.0, 2.0, 3.0, 4.0])

    def test_tie_count(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TieValueWarning)
            s = TimeSeries.from_values([1.0, 2.0, 2.0, 2.0, 5.0])
        assert s.tie_count == 2

    def test_short_series_rejected(self):
        with pytest.raises(PreconditionError):
            TimeSeries.from_values([1.0, 2.0, 3.0])

    def test_nonfinite_rejected(self):
        with pytest.raises(PreconditionError):
            TimeSeries.from_values([1.0, np.nan, 3.0, 4.0, 5.0])

    def test_monotone_tau_sequence(self):
        seq = dependence_sequence(np.arange(10.0), MeasureKind.TAU, 2)
        assert np.array_equal(seq.xi, [1.0, 1.0, 1.0])

    def test_single_lag(self):
        x = rng(5).normal(size=20)
        seq = dependence_sequence(x, "rho", 0)
        assert len(seq) == 1
        assert seq.xi[0] == spearman_rho_lag(x, 0)

    def test_matches_per_lag(self):
        x = rng(6).normal(size=30)
        seq = dependence_sequence(x, MeasureKind.RHO, 5)
        for k in range(6):
            assert seq.xi[k] == spearman_rho_lag(x, k)

    def test_max_lag_bound(self):
        with pytest.raises(PreconditionError):
            dependence_sequence(np.arange(10.0), "tau", 7)

    def test_kind_aliases(self):
        assert MeasureKind.coerce("kendall") is MeasureKind.TAU
        assert MeasureKind.coerce("spearman") is MeasureKind.RHO
        assert MeasureKind.coerce("autocovariance") is MeasureKind.COV
        with pytest.raises(PreconditionError):
            MeasureKind.coerce("pearson")

    def test_kernel_orders(self):
        assert MeasureKind.TAU.kernel_order == 2
        assert MeasureKind.RHO.kernel_order == 3
        assert MeasureKind.COV.kernel_order == 2

    def test_sequence_lags(self):
        seq = dependence_sequence(rng(2).normal(size=16), "cov", 4)
        assert isinstance(seq, DependenceSequence)
        assert np.array_equal(seq.lags, np.arange(5))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(min_value=0, max_value=10**6), min_size=8, max_size=24, unique=True),
       st.integers(min_value=0, max_value=3))
def test_property_fast_equals_brute(values, k):
    x = np.asarray(values, dtype=np.float64)
    assert kendall_tau_lag(x, k) == kendall_tau_brute(x, k)
    assert spearman_rho_lag(x, k) == spearman_rho_brute(x, k)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(min_value=-100, max_value=100, allow_nan=False), min_size=8,
                max_size=20, unique=True))
def test_property_lag_zero_units(values):
    x = np.asarray(values, dtype=np.float64)
    assert kendall_tau_lag(x, 0) == 1.0
    assert spearman_rho_lag(x, 0) == 1.0
