"""Lag-window spectral estimates, asymptotic inference, bandwidth selection.

The point estimate at frequency omega is the cosine sum

    f_hat(w) = (1/2pi) * [xi_0 + 2 * sum_{k=1}^{floor(r_n)} w(k/r_n) xi_k cos(k w)]

over the lag-k dependence estimates xi_k, which is real by construction
(negative lags enter through the symmetry xi_{-k} = xi_k).  Inference rides
on the limit theory:

* standard error     se(w)^2   = sigma2(w) * r_n / n with
  sigma2(w) = scale(kind) * (1 + 1{w in {0, pi}}) * f_base(w)^2 * int w^2,
  where f_base is the Spearman spectrum for both rank measures (scale 4/9
  for Kendall, 1 for Spearman) and the estimate's own spectrum for the
  autocovariance,
* smoothing bias     bias_hat(w) = -c_w * r_n^{-d} * f_d_hat(w) with f_d_hat
  the plug-in generalized d-th derivative,
* confidence bounds  center +/- z_{1-alpha/2} * se, centered at
  f_hat - bias_hat (or at f_hat when bias correction is disabled).

``select_bandwidth`` implements the two-stage plug-in rule minimizing the
asymptotic MSE  sigma2 * r/n + b^2 * r^{-2d}  at a target frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.stats import norm

from .dependence import (
    DependenceSequence,
    MeasureKind,
    TimeSeries,
    _as_series,
    autocovariance_lag,
    dependence_sequence,
)
from .validation import (
    PreconditionError,
    check_alpha,
    check_bandwidth,
    check_frequencies,
)
from .windows import LagWindow, get_window, weights

__all__ = [
    "Bandwidth",
    "GeneralizedDerivative",
    "SpectralEstimate",
    "VARIANCE_SCALE",
    "default_grid",
    "spectrum_from_sequence",
    "generalized_derivative",
    "estimate_spectrum",
    "infer",
    "select_bandwidth",
]

TWO_PI = 2.0 * math.pi

# tolerance for detecting the variance-doubling frequencies 0 and +/-pi
BOUNDARY_TOL = 1e-9

# scale(kind) in the asymptotic variance sigma2 = scale * (1+1{0,pi}) * f_base^2 * int w^2
VARIANCE_SCALE = {
    MeasureKind.TAU: 4.0 / 9.0,
    MeasureKind.RHO: 1.0,
    MeasureKind.COV: 1.0,
}


def default_grid(grid_size: int = 64) -> np.ndarray:
    """Frequencies pi*j/G for j = 0..G."""
    if grid_size < 1:
        raise PreconditionError(f"grid_size must be >= 1, got {grid_size}")
    return np.pi * np.arange(grid_size + 1) / grid_size


@dataclass(frozen=True)
class Bandwidth:
    """Smoothing scale r_n plus how it was chosen."""

    r_n: float
    origin: str = "user"  # "user" or "plugin"
    fallback: bool = False
    pilot: Optional[float] = None

    def __float__(self) -> float:
        return self.r_n


def as_bandwidth(r_n, n: int) -> Bandwidth:
    if isinstance(r_n, Bandwidth):
        check_bandwidth(r_n.r_n, n)
        return r_n
    value = float(r_n)
    check_bandwidth(value, n)
    return Bandwidth(r_n=value, origin="user")


@dataclass(frozen=True, eq=False)
class GeneralizedDerivative:
    """Plug-in generalized d-th derivative values on a frequency grid."""

    d: int
    omegas: np.ndarray
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class SpectralEstimate:
    """Per-frequency estimate; inference fields are filled in by ``infer``."""

    kind: MeasureKind
    window: LagWindow
    n: int
    bandwidth: Bandwidth
    omegas: np.ndarray
    f_hat: np.ndarray
    xi: DependenceSequence
    bias_hat: Optional[np.ndarray] = None
    se: Optional[np.ndarray] = None
    ci_low: Optional[np.ndarray] = None
    ci_high: Optional[np.ndarray] = None
    degenerate_flag: Optional[np.ndarray] = None
    alpha: Optional[float] = None
    bias_corrected: Optional[bool] = None

    @property
    def r_n(self) -> float:
        return self.bandwidth.r_n


def boundary_indicator(omegas) -> np.ndarray:
    """1.0 at frequencies within tolerance of 0 or +/-pi, else 0.0."""
    w = np.abs(np.asarray(omegas, dtype=np.float64))
    return np.where((w <= BOUNDARY_TOL) | (np.abs(w - np.pi) <= BOUNDARY_TOL), 1.0, 0.0)


def _xi_values(seq) -> np.ndarray:
    if isinstance(seq, DependenceSequence):
        return seq.xi
    return np.asarray(seq, dtype=np.float64)


def _prepare(seq, window, r_n, omegas):
    win = get_window(window)
    r = float(r_n)
    omegas = check_frequencies(np.atleast_1d(np.asarray(omegas, dtype=np.float64)))
    xi = _xi_values(seq)
    kmax = math.floor(r)
    if xi.size < kmax + 1:
        raise PreconditionError(
            f"need dependence values through lag floor(r_n) = {kmax}, have {xi.size - 1}"
        )
    w = weights(win, r, kmax)
    return win, r, omegas, xi, kmax, w


def spectrum_from_sequence(seq, window, r_n, omegas) -> np.ndarray:
    """Cosine-sum spectral estimate from precomputed dependence values."""
    _, r, omegas, xi, kmax, w = _prepare(seq, window, r_n, omegas)
    if kmax == 0:
        return np.full(omegas.shape, xi[0] / TWO_PI)
    ks = np.arange(1, kmax + 1)
    cosines = np.cos(np.outer(ks, omegas))
    return (xi[0] + 2.0 * (w[1:] * xi[1 : kmax + 1]) @ cosines) / TWO_PI


def generalized_derivative(seq, window, r_n, d=None, omegas=None) -> GeneralizedDerivative:
    """Plug-in estimate of the generalized d-th derivative.

    f_d_hat(w) = (1/2pi) * 2 * sum_{k=1}^{floor(r_n)} w(k/r_n) k^d xi_k cos(k w);
    the k = 0 term vanishes since 0^d = 0 for d >= 1.  ``d`` must match the
    window's characteristic exponent (the only use is the bias constant).
    """
    win = get_window(window)
    if d is None:
        d = win.d
    if d != win.d:
        raise PreconditionError(
            f"derivative order {d} must equal the window's exponent {win.d}"
        )
    if omegas is None:
        omegas = default_grid()
    _, r, omegas, xi, kmax, w = _prepare(seq, win, r_n, omegas)
    if kmax == 0:
        values = np.zeros(omegas.shape)
    else:
        ks = np.arange(1, kmax + 1)
        cosines = np.cos(np.outer(ks, omegas))
        values = 2.0 * ((w[1:] * ks**d * xi[1 : kmax + 1]) @ cosines) / TWO_PI
    return GeneralizedDerivative(d=d, omegas=omegas, values=values)


def estimate_spectrum(values, kind, window, r_n, omegas=None) -> SpectralEstimate:
    """Point estimate of the dependence-measure spectrum of one series.

    Returns a SpectralEstimate without inference fields; pass it through
    ``infer`` (together with a Spearman base estimate and a derivative
    plug-in at the same grid and bandwidth) to fill them.
    """
    series = _as_series(values)
    kind = MeasureKind.coerce(kind)
    win = get_window(window)
    bw = as_bandwidth(r_n, series.n)
    if omegas is None:
        omegas = default_grid()
    omegas = check_frequencies(np.atleast_1d(np.asarray(omegas, dtype=np.float64)))
    seq = dependence_sequence(series, kind, math.floor(bw.r_n))
    f_hat = spectrum_from_sequence(seq, win, bw.r_n, omegas)
    return SpectralEstimate(
        kind=kind,
        window=win,
        n=series.n,
        bandwidth=bw,
        omegas=omegas,
        f_hat=f_hat,
        xi=seq,
    )


def _expected_base_kind(kind: MeasureKind) -> MeasureKind:
    # rank-measure variances are driven by the Spearman spectrum; the
    # autocovariance estimator's variance scales with its own spectrum
    return MeasureKind.RHO if kind in (MeasureKind.TAU, MeasureKind.RHO) else MeasureKind.COV


def infer(
    estimate: SpectralEstimate,
    rho_estimate: SpectralEstimate,
    f_d_hat: GeneralizedDerivative,
    n: int,
    alpha: float = 0.05,
    bias_correct: bool = True,
    degenerate_floor: float = 1e-3,
) -> SpectralEstimate:
    """Attach bias estimate, standard errors and confidence bounds.

    ``rho_estimate`` supplies the plug-in base spectrum entering the
    variance; it must live on the same grid and be the Spearman estimate for
    the rank measures (for the autocovariance, pass the estimate itself).
    """
    check_alpha(alpha)
    if n != estimate.n:
        raise PreconditionError(f"n = {n} does not match the estimate's n = {estimate.n}")
    expected = _expected_base_kind(estimate.kind)
    if rho_estimate.kind is not expected:
        raise PreconditionError(
            f"variance base estimate must have kind {expected.value!r}, "
            f"got {rho_estimate.kind.value!r}"
        )
    if not np.array_equal(estimate.omegas, rho_estimate.omegas) or not np.array_equal(
        estimate.omegas, f_d_hat.omegas
    ):
        raise PreconditionError("estimate, base estimate and derivative grids differ")
    if f_d_hat.d != estimate.window.d:
        raise PreconditionError(
            f"derivative order {f_d_hat.d} does not match window exponent {estimate.window.d}"
        )

    win = estimate.window
    r = estimate.r_n
    base = rho_estimate.f_hat
    scale = VARIANCE_SCALE[estimate.kind]
    sigma2 = scale * (1.0 + boundary_indicator(estimate.omegas)) * base**2 * win.w2_integral
    se = np.sqrt(sigma2 * r / n)
    bias_hat = -win.c_w * r ** (-win.d) * f_d_hat.values
    center = estimate.f_hat - bias_hat if bias_correct else estimate.f_hat
    z = norm.ppf(1.0 - alpha / 2.0)
    return replace(
        estimate,
        bias_hat=bias_hat,
        se=se,
        ci_low=center - z * se,
        ci_high=center + z * se,
        degenerate_flag=np.abs(base) < degenerate_floor,
        alpha=alpha,
        bias_corrected=bias_correct,
    )


def _null_lag_variance(kind: MeasureKind, sizes: np.ndarray, var0: float) -> np.ndarray:
    """Approximate variance of the lag estimators under serial independence."""
    if kind is MeasureKind.TAU:
        return 2.0 * (2.0 * sizes + 5.0) / (9.0 * sizes * (sizes - 1.0))
    if kind is MeasureKind.RHO:
        return 1.0 / sizes
    return var0**2 / sizes


def select_bandwidth(
    values,
    kind,
    window,
    omega: float = 0.0,
    pilot_factor: float = 1.0,
) -> Bandwidth:
    """Two-stage plug-in bandwidth minimizing the asymptotic MSE at omega.

    Stage one evaluates the generalized derivative and the base spectrum at
    the pilot bandwidth pilot_factor * n^{1/(2d+1)}; stage two returns

        r_n = (2d * b_hat^2 * n / sigma2_hat)^{1/(2d+1)}

    clamped to [2, sqrt(n)/log10(n)].  When the squared bias factor b_hat^2
    is lost in estimation noise (below the null-hypothesis variance of the
    derivative plug-in, or below 1e-12 outright) or sigma2_hat vanishes, the
    rule has no signal to work with; the fallback returns n^{1/(2d+1)} with
    ``fallback=True``.
    """
    series = _as_series(values)
    kind = MeasureKind.coerce(kind)
    win = get_window(window)
    n = series.n
    if n < 50:
        raise PreconditionError(f"bandwidth selection needs n >= 50, got {n}")
    if not (pilot_factor > 0.0) or not math.isfinite(pilot_factor):
        raise PreconditionError(f"pilot_factor must be positive, got {pilot_factor}")
    omega = float(omega)
    check_frequencies(np.array([omega]))

    d = win.d
    exponent = 1.0 / (2.0 * d + 1.0)
    r_pilot = min(max(pilot_factor * n**exponent, 1.0), float(n - 4))
    kmax = math.floor(r_pilot)

    seq = dependence_sequence(series, kind, kmax)
    base_kind = _expected_base_kind(kind)
    base_seq = seq if base_kind is kind else dependence_sequence(series, base_kind, kmax)

    f_d = generalized_derivative(seq, win, r_pilot, d, [omega]).values[0]
    f_base = spectrum_from_sequence(base_seq, win, r_pilot, [omega])[0]

    b2 = (win.c_w * f_d) ** 2
    sigma2 = (
        VARIANCE_SCALE[kind]
        * (1.0 + boundary_indicator([omega])[0])
        * f_base**2
        * win.w2_integral
    )

    # noise gate: under serial independence f_d is pure estimation noise with
    # a computable scale, so demand the squared bias factor clear it
    ks = np.arange(1, kmax + 1)
    sizes = (n - ks).astype(np.float64)
    var0_base = autocovariance_lag(series, 0) if kind is MeasureKind.COV else 0.0
    lag_var = _null_lag_variance(kind, sizes, var0_base)
    w_k = weights(win, r_pilot, kmax)[1:]
    var0_fd = np.sum(w_k**2 * ks ** (2 * d) * np.cos(ks * omega) ** 2 * lag_var) / math.pi**2
    gate = max(1e-12, win.c_w**2 * var0_fd)

    r_max = max(2.0, math.sqrt(n) / math.log10(n))
    if b2 < gate or sigma2 < 1e-12:
        r = min(max(n**exponent, 2.0), r_max)
        return Bandwidth(r_n=float(r), origin="plugin", fallback=True, pilot=float(r_pilot))
    r = (2.0 * d * b2 * n / sigma2) ** exponent
    r = min(max(r, 2.0), r_max)
    return Bandwidth(r_n=float(r), origin="plugin", fallback=False, pilot=float(r_pilot))
