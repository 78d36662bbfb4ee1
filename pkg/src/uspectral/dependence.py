"""Serial dependence measures estimated as U-statistics over lagged pairs.

For a series x_1, ..., x_n and lag k, the estimators run over the aligned
windows a = (x_1, ..., x_{n-k}) and b = (x_{1+k}, ..., x_n) of common length
N = n - k:

* ``kendall_tau_lag``     pair kernel 4*(I(a_s<a_t)-1/2)*(I(b_s<b_t)-1/2),
  averaged over the C(N, 2) time-ordered pairs s < t,
* ``spearman_rho_lag``    triple kernel summing I(a_p<a_q) == I(b_p<b_r)
  over the six permutations of each triple, minus 3, averaged over C(N, 3)
  triples,
* ``autocovariance_lag``  pair kernel (a_s-a_t)*(b_s-b_t)/2, averaged over
  C(N, 2) pairs, which reduces to the usual unbiased cross-moment.

The rank measures have exact integer numerators.  The fast paths below
compute those same integers with O(N log N) sort-based algorithms, so they
match the brute-force kernel enumerations (also provided, as oracles)
bit for bit.  Ties are supported: the indicator kernels are simply evaluated
as written, and a ``TieValueWarning`` is raised on input so the caller knows
the rank measures no longer live on the full +/-1 scale.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels
from .validation import (
    PreconditionError,
    TieValueWarning,
    check_lag,
    check_max_lag,
    check_series_values,
)

__all__ = [
    "MeasureKind",
    "TimeSeries",
    "DependenceSequence",
    "lag_pairs",
    "kendall_tau_lag",
    "spearman_rho_lag",
    "autocovariance_lag",
    "dependence_sequence",
    "kendall_tau_brute",
    "spearman_rho_brute",
    "autocovariance_brute",
]


class MeasureKind(str, Enum):
    """Which dependence measure a sequence or spectrum refers to."""

    TAU = "tau"
    RHO = "rho"
    COV = "cov"

    @property
    def kernel_order(self) -> int:
        """Number of observations the defining kernel takes (2 or 3)."""
        return 3 if self is MeasureKind.RHO else 2

    @classmethod
    def coerce(cls, value) -> "MeasureKind":
        if isinstance(value, MeasureKind):
            return value
        key = str(value).strip().lower()
        aliases = {
            "tau": cls.TAU,
            "kendall": cls.TAU,
            "rho": cls.RHO,
            "spearman": cls.RHO,
            "cov": cls.COV,
            "autocov": cls.COV,
            "autocovariance": cls.COV,
        }
        if key not in aliases:
            raise PreconditionError(
                f"unknown measure {value!r}; expected one of tau, rho, cov"
            )
        return aliases[key]


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """A validated univariate series plus its tie count."""

    values: np.ndarray
    tie_count: int

    @property
    def n(self) -> int:
        return self.values.size

    @classmethod
    def from_values(cls, values, warn_ties: bool = True) -> "TimeSeries":
        arr = check_series_values(values)
        ties = int(arr.size - np.unique(arr).size)
        if ties and warn_ties:
            warnings.warn(
                f"series contains {ties} tied value(s); rank kernels use "
                "strict inequalities and will not reach +/-1",
                TieValueWarning,
                stacklevel=3,
            )
        return cls(values=arr, tie_count=ties)


def _as_series(values) -> TimeSeries:
    if isinstance(values, TimeSeries):
        return values
    return TimeSeries.from_values(values)


def lag_pairs(values, k: int):
    """Time-ordered pairs (x_t, x_{t+k}); accepts series as short as 2."""
    if isinstance(values, TimeSeries):
        x = values.values
    else:
        x = np.asarray(values, dtype=np.float64).reshape(-1)
        if x.size < 2:
            raise PreconditionError(f"need at least 2 values, got {x.size}")
        if not np.all(np.isfinite(x)):
            raise PreconditionError("values must be finite")
    check_lag(x.size, k, x.size - 2, "lag_pairs")
    return list(zip(x[: x.size - k], x[k:]))


def _windows(series: TimeSeries, k: int):
    x = series.values
    return x[: series.n - k], x[k:]


def kendall_tau_lag(values, k: int) -> float:
    """Kendall's tau between the series and its lag-k shift."""
    series = _as_series(values)
    check_lag(series.n, k, series.n - 3, "kendall_tau_lag")
    a, b = _windows(series, k)
    m = a.size * (a.size - 1) // 2
    if series.tie_count:
        num = _kernels.kendall_numerator_pairs(a, b)
    else:
        num = m - 2 * _inversion_count(a, b)
    return float(num) / float(m)


def spearman_rho_lag(values, k: int) -> float:
    """Spearman's rho between the series and its lag-k shift."""
    series = _as_series(values)
    check_lag(series.n, k, series.n - 4, "spearman_rho_lag")
    a, b = _windows(series, k)
    size = a.size
    # single-index sums S_p = 2*#{q != p : a_p < a_q} - (N-1), exact ints
    sa = _centered_rank_sums(a)
    sb = _centered_rank_sums(b)
    if series.tie_count:
        opt = int(_kernels.ordered_product_pair_sum(a, b))
    else:
        m = size * (size - 1) // 2
        opt = 2 * (m - 2 * _inversion_count(a, b))
    total = (int(np.dot(sa, sb)) - opt) // 2
    return float(total) / float(math.comb(size, 3))


def autocovariance_lag(values, k: int) -> float:
    """Unbiased lag-k autocovariance (pair-difference U-statistic)."""
    series = _as_series(values)
    check_lag(series.n, k, series.n - 3, "autocovariance_lag")
    a, b = _windows(series, k)
    da = a - a.mean()
    db = b - b.mean()
    return float(np.dot(da, db) / (a.size - 1))


def _inversion_count(a: np.ndarray, b: np.ndarray) -> int:
    """Discordant pair count: b reordered by a's sort order, then inversions."""
    order = np.argsort(a, kind="stable")
    reordered = np.ascontiguousarray(b[order])
    return int(_kernels.count_inversions(reordered))


def _centered_rank_sums(a: np.ndarray) -> np.ndarray:
    sorted_a = np.sort(a)
    cle = np.searchsorted(sorted_a, a, side="right")
    return (2 * (a.size - cle) - (a.size - 1)).astype(np.int64)


@dataclass(frozen=True, eq=False)
class DependenceSequence:
    """Estimated dependence measure at lags 0..max_lag of one series."""

    kind: MeasureKind
    n: int
    max_lag: int
    xi: np.ndarray
    tie_count: int

    @property
    def lags(self) -> np.ndarray:
        return np.arange(self.max_lag + 1)

    def __len__(self) -> int:
        return self.max_lag + 1


_MEASURE_FUNCS = {
    MeasureKind.TAU: kendall_tau_lag,
    MeasureKind.RHO: spearman_rho_lag,
    MeasureKind.COV: autocovariance_lag,
}


def dependence_sequence(values, kind, max_lag: int) -> DependenceSequence:
    """Evaluate one measure at every lag 0..max_lag.

    All lags share the ``max_lag <= n - 4`` bound of the most demanding
    measure so that switching measures never changes which lags are legal.
    """
    series = _as_series(values)
    kind = MeasureKind.coerce(kind)
    check_max_lag(series.n, max_lag)
    func = _MEASURE_FUNCS[kind]
    xi = np.empty(max_lag + 1)
    for k in range(max_lag + 1):
        xi[k] = func(series, k)
    return DependenceSequence(
        kind=kind,
        n=series.n,
        max_lag=max_lag,
        xi=xi,
        tie_count=series.tie_count,
    )


# ---------------------------------------------------------------------------
# Brute-force oracles.  Same preconditions as the fast paths; every kernel is
# enumerated term by term.


def kendall_tau_brute(values, k: int, kernel_form: str = "product") -> float:
    """Direct kernel enumeration for Kendall's tau.

    ``kernel_form`` picks between the product-of-indicators kernel and the
    equivalent concordance-count form 2*I(both rise) + 2*I(both fall) - 1;
    on tie-free data the two coincide term by term.
    """
    series = _as_series(values)
    check_lag(series.n, k, series.n - 3, "kendall_tau_brute")
    a, b = _windows(series, k)
    if kernel_form == "product":
        num = _kernels.kendall_numerator_pairs(a, b)
    elif kernel_form == "concordance":
        num = _kernels.kendall_numerator_concordance(a, b)
    else:
        raise ValueError(f"unknown kernel_form {kernel_form!r}")
    return float(num) / float(math.comb(a.size, 2))


def spearman_rho_brute(values, k: int) -> float:
    series = _as_series(values)
    check_lag(series.n, k, series.n - 4, "spearman_rho_brute")
    a, b = _windows(series, k)
    num = _kernels.spearman_numerator_triples(a, b)
    return float(num) / float(math.comb(a.size, 3))


def autocovariance_brute(values, k: int) -> float:
    series = _as_series(values)
    check_lag(series.n, k, series.n - 3, "autocovariance_brute")
    a, b = _windows(series, k)
    num = _kernels.autocov_numerator_pairs(a, b)
    return float(num) / float(math.comb(a.size, 2))
