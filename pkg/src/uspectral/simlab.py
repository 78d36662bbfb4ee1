"""Processes with known rank-dependence structure and Monte Carlo drivers.

Three generators: serially independent uniforms, a stationary Gaussian
AR(1), and the same AR(1) pushed through a strictly monotone marginal (same
copula, different marginal law).  For the Gaussian family the lag-k pair
copula is Gaussian with correlation phi^k, so the rank measures have the
classical closed forms

    tau_k = (2/pi) * arcsin(phi^k),      rho_k = (6/pi) * arcsin(phi^k / 2),

and the autocovariance is phi^k / (1 - phi^2) on the identity marginal.
True spectra are truncated cosine series with a geometric envelope bound on
the dropped tail.

The experiment drivers replicate simulation + estimation with per-replicate
child seeds and write into index-addressed slots, so reports are
bit-identical for any thread count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Union

import numpy as np
from scipy.signal import lfilter
from scipy.special import expit, logit
from scipy.stats import kstest, kurtosis, skew

from ._parallel import run_indexed
from .dependence import MeasureKind, TimeSeries, dependence_sequence
from .spectral import (
    VARIANCE_SCALE,
    Bandwidth,
    boundary_indicator,
    estimate_spectrum,
    generalized_derivative,
    infer,
    select_bandwidth,
    spectrum_from_sequence,
)
from .validation import PreconditionError, check_frequencies
from .windows import get_window

__all__ = [
    "MODEL_NAMES",
    "SimulationModel",
    "marginal_transform",
    "simulate",
    "true_xi",
    "true_spectrum",
    "true_derivative",
    "windowed_mean_spectrum",
    "McReport",
    "clt_experiment",
    "BiasTable",
    "bias_experiment",
]

MODEL_NAMES = ("iid-uniform", "gaussian-ar1", "gaussian-copula-ar1-with-marginal")

_MARGINALS: Dict[str, tuple] = {
    "id": (lambda x: x, lambda y: y),
    "exp": (np.exp, np.log),
    "logistic": (expit, logit),
    "cubic": (lambda x: x**3, np.cbrt),
}


def marginal_transform(name: str):
    """(forward, inverse) pair of a strictly increasing marginal map."""
    key = str(name).strip().lower()
    if key not in _MARGINALS:
        known = ", ".join(sorted(_MARGINALS))
        raise PreconditionError(f"unknown marginal {name!r}; expected one of {known}")
    return _MARGINALS[key]


@dataclass(frozen=True)
class SimulationModel:
    """A named generator plus its parameters."""

    name: str
    phi: float = 0.0
    marginal: str = "id"

    def __post_init__(self):
        if self.name not in MODEL_NAMES:
            known = ", ".join(MODEL_NAMES)
            raise PreconditionError(f"unknown model {self.name!r}; expected one of {known}")
        if not -1.0 < self.phi < 1.0:
            raise PreconditionError(f"AR(1) coefficient must lie in (-1, 1), got {self.phi}")
        marginal_transform(self.marginal)
        if self.name == "iid-uniform" and self.phi != 0.0:
            raise PreconditionError("iid-uniform has no AR coefficient; leave phi at 0")
        if self.name != "gaussian-copula-ar1-with-marginal" and self.marginal != "id":
            raise PreconditionError(f"model {self.name!r} does not take a marginal transform")


SeedLike = Union[int, np.random.SeedSequence, np.random.Generator, None]


def _gaussian_ar1_path(rng: np.random.Generator, n: int, phi: float) -> np.ndarray:
    shocks = rng.standard_normal(n)
    # stationary start: X_1 ~ N(0, 1/(1-phi^2)), then X_t = phi X_{t-1} + e_t
    shocks[0] /= math.sqrt(1.0 - phi * phi)
    return lfilter([1.0], [1.0, -phi], shocks)


def simulate(model: SimulationModel, n: int, seed: SeedLike = None) -> TimeSeries:
    """Draw one series; deterministic for a fixed integer seed."""
    if n < 8:
        raise PreconditionError(f"need n >= 8, got {n}")
    rng = np.random.default_rng(seed)
    if model.name == "iid-uniform":
        values = rng.random(n)
    else:
        values = _gaussian_ar1_path(rng, n, model.phi)
        if model.name == "gaussian-copula-ar1-with-marginal":
            forward, _ = marginal_transform(model.marginal)
            values = forward(values)
    return TimeSeries.from_values(values, warn_ties=False)


def true_xi(model: SimulationModel, kind, k: int) -> float:
    """Population dependence measure of the model at lag k."""
    kind = MeasureKind.coerce(kind)
    if k < 0:
        raise PreconditionError(f"lag must be nonnegative, got {k}")
    if model.name == "iid-uniform":
        if kind is MeasureKind.COV:
            return 1.0 / 12.0 if k == 0 else 0.0
        return 1.0 if k == 0 else 0.0
    r = model.phi**k
    if kind is MeasureKind.TAU:
        return 2.0 * math.asin(r) / math.pi
    if kind is MeasureKind.RHO:
        return 6.0 * math.asin(r / 2.0) / math.pi
    if model.marginal != "id":
        raise PreconditionError(
            "autocovariance truth is only closed-form on the identity marginal"
        )
    return r / (1.0 - model.phi**2)


def _envelope(model: SimulationModel, kind: MeasureKind):
    """(c0, ratio) with |xi_k| <= c0 * ratio^k for k >= 1."""
    if model.name == "iid-uniform":
        return 0.0, 0.0
    ratio = abs(model.phi)
    if kind is MeasureKind.TAU:
        return 1.0, ratio  # |arcsin(x)| <= (pi/2)|x|
    if kind is MeasureKind.RHO:
        return 1.5, ratio
    return 1.0 / (1.0 - model.phi**2), ratio


def _truncation_lag(model: SimulationModel, kind: MeasureKind, tail_tol: float) -> int:
    if not tail_tol > 0.0:
        raise PreconditionError(f"tail_tol must be positive, got {tail_tol}")
    c0, ratio = _envelope(model, kind)
    if c0 == 0.0 or ratio == 0.0:
        return 0
    # smallest K with (1/pi) * c0 * ratio^(K+1) / (1-ratio) < tail_tol
    bound = tail_tol * math.pi * (1.0 - ratio) / c0
    k = max(0, math.ceil(math.log(bound) / math.log(ratio)) - 1)
    return min(k, 10**6)


def _truth_sequence(model: SimulationModel, kind: MeasureKind, max_lag: int) -> np.ndarray:
    return np.array([true_xi(model, kind, k) for k in range(max_lag + 1)])


def true_spectrum(model: SimulationModel, kind, omegas, tail_tol: float = 1e-10) -> np.ndarray:
    """Truncated cosine series for the model's dependence spectrum."""
    kind = MeasureKind.coerce(kind)
    omegas = check_frequencies(np.atleast_1d(np.asarray(omegas, dtype=np.float64)))
    kmax = _truncation_lag(model, kind, tail_tol)
    xi = _truth_sequence(model, kind, kmax)
    if kmax == 0:
        return np.full(omegas.shape, xi[0] / (2.0 * math.pi))
    ks = np.arange(1, kmax + 1)
    cosines = np.cos(np.outer(ks, omegas))
    return (xi[0] + 2.0 * xi[1:] @ cosines) / (2.0 * math.pi)


def true_derivative(model: SimulationModel, kind, omegas, d: int, tail_tol: float = 1e-10) -> np.ndarray:
    """Truncated generalized d-th derivative of the true spectrum."""
    kind = MeasureKind.coerce(kind)
    if d < 1:
        raise PreconditionError(f"derivative order must be >= 1, got {d}")
    omegas = check_frequencies(np.atleast_1d(np.asarray(omegas, dtype=np.float64)))
    c0, ratio = _envelope(model, kind)
    if c0 == 0.0 or ratio == 0.0:
        return np.zeros(omegas.shape)
    # grow K until the k^d-weighted geometric tail bound clears the tolerance
    k = _truncation_lag(model, kind, tail_tol)
    while True:
        k += 1
        growth = ratio * (1.0 + 1.0 / (k + 1.0)) ** d
        if growth < 1.0:
            tail = c0 * (k + 1.0) ** d * ratio ** (k + 1) / (math.pi * (1.0 - growth))
            if tail < tail_tol:
                break
        if k > 10**6:
            raise PreconditionError("derivative tail bound did not converge")
    xi = _truth_sequence(model, kind, k)
    ks = np.arange(1, k + 1)
    cosines = np.cos(np.outer(ks, omegas))
    return 2.0 * ((ks.astype(np.float64) ** d * xi[1:]) @ cosines) / (2.0 * math.pi)


def windowed_mean_spectrum(model: SimulationModel, kind, window, r_n: float, omegas) -> np.ndarray:
    """Exact expectation of the lag-window estimate at bandwidth r_n.

    The per-lag estimators are unbiased for the model truth, so the mean of
    the estimate is the window-tapered truth, a finite sum with no
    truncation error.
    """
    kind = MeasureKind.coerce(kind)
    win = get_window(window)
    xi = _truth_sequence(model, kind, math.floor(float(r_n)))
    return spectrum_from_sequence(xi, win, float(r_n), omegas)


def _resolve_rule(bandwidth_rule, n: int):
    """Fixed-number, callable, or "auto" bandwidth specification."""
    if isinstance(bandwidth_rule, str):
        if bandwidth_rule.strip().lower() == "auto":
            return "auto"
        raise PreconditionError(f"unknown bandwidth rule {bandwidth_rule!r}")
    if callable(bandwidth_rule):
        return float(bandwidth_rule(n))
    return float(bandwidth_rule)


@dataclass(frozen=True, eq=False)
class McReport:
    """Per-replicate statistics and distributional summary at each frequency."""

    model: SimulationModel
    kind: MeasureKind
    window: str
    bandwidth_rule: str
    n: int
    reps: int
    master_seed: int
    alpha: float
    bias_corrected: bool
    omegas: np.ndarray
    f_true: np.ndarray
    sigma_true: np.ndarray
    f_hat: np.ndarray  # (reps, n_omegas)
    z: np.ndarray
    z_flat: np.ndarray
    covered: np.ndarray
    r_values: np.ndarray
    fallback: np.ndarray
    summary: Dict[str, np.ndarray]

    def to_dict(self) -> dict:
        return {
            "model": {
                "name": self.model.name,
                "phi": self.model.phi,
                "marginal": self.model.marginal,
            },
            "measure": self.kind.value,
            "window": self.window,
            "bandwidth_rule": self.bandwidth_rule,
            "n": self.n,
            "reps": self.reps,
            "master_seed": self.master_seed,
            "alpha": self.alpha,
            "bias_corrected": self.bias_corrected,
            "omegas": self.omegas.tolist(),
            "f_true": self.f_true.tolist(),
            "sigma_true": self.sigma_true.tolist(),
            "f_hat": self.f_hat.tolist(),
            "z": self.z.tolist(),
            "z_flat": self.z_flat.tolist(),
            "covered": self.covered.astype(int).tolist(),
            "r_values": self.r_values.tolist(),
            "fallback": self.fallback.astype(int).tolist(),
            "summary": {k: v.tolist() for k, v in self.summary.items()},
        }


def clt_experiment(
    model: SimulationModel,
    kind,
    window,
    bandwidth_rule,
    omega,
    n: int,
    reps: int,
    master_seed: int = 0,
    alpha: float = 0.05,
    bias_correct: bool = True,
    bandwidth_omega: float = 0.0,
    n_jobs=None,
) -> McReport:
    """Replicated estimation with exact standardization against the truth.

    Each replicate standardizes as z = sqrt(n/r) * (f_hat - E[f_hat]) /
    sigma_true(w), with E[f_hat] the exact window-tapered truth at the
    replicate's bandwidth and sigma_true from the limit variance formula
    (true base spectrum).  ``z_flat`` drops the boundary-doubling indicator
    from the scale so the doubling at w in {0, pi} can be read off as a
    variance ratio.  Coverage uses the plug-in intervals at level alpha.
    """
    kind = MeasureKind.coerce(kind)
    win = get_window(window)
    if reps < 100:
        raise PreconditionError(f"need reps >= 100 for a stable report, got {reps}")
    omegas = check_frequencies(np.atleast_1d(np.asarray(omega, dtype=np.float64)))
    m = omegas.size

    f_true = true_spectrum(model, kind, omegas, tail_tol=1e-12)
    base_kind = MeasureKind.RHO if kind in (MeasureKind.TAU, MeasureKind.RHO) else MeasureKind.COV
    f_base = true_spectrum(model, base_kind, omegas, tail_tol=1e-12)
    sigma_flat = np.sqrt(VARIANCE_SCALE[kind] * f_base**2 * win.w2_integral)
    if np.any(sigma_flat <= 0.0):
        raise PreconditionError("true base spectrum vanishes; z-scores undefined")
    sigma_true = sigma_flat * np.sqrt(1.0 + boundary_indicator(omegas))

    rule = _resolve_rule(bandwidth_rule, n)
    children = np.random.SeedSequence(master_seed).spawn(reps)
    f_hat = np.empty((reps, m))
    z = np.empty((reps, m))
    z_flat = np.empty((reps, m))
    covered = np.empty((reps, m), dtype=bool)
    r_values = np.empty(reps)
    fallback = np.zeros(reps, dtype=bool)

    def task(i: int) -> None:
        series = simulate(model, n, children[i])
        if rule == "auto":
            bw = select_bandwidth(series, kind, win, omega=bandwidth_omega)
        else:
            bw = Bandwidth(r_n=rule, origin="user")
        est = estimate_spectrum(series, kind, win, bw, omegas)
        if base_kind is kind:
            base_est = est
        else:
            base_est = estimate_spectrum(series, base_kind, win, bw, omegas)
        f_d = generalized_derivative(est.xi, win, bw.r_n, win.d, omegas)
        done = infer(est, base_est, f_d, n, alpha=alpha, bias_correct=bias_correct)
        mean_exact = windowed_mean_spectrum(model, kind, win, bw.r_n, omegas)
        scale = math.sqrt(n / bw.r_n)
        f_hat[i] = est.f_hat
        z[i] = scale * (est.f_hat - mean_exact) / sigma_true
        z_flat[i] = scale * (est.f_hat - mean_exact) / sigma_flat
        covered[i] = (done.ci_low <= f_true) & (f_true <= done.ci_high)
        r_values[i] = bw.r_n
        fallback[i] = bw.fallback

    run_indexed(task, reps, n_jobs)

    summary = {
        "mean": f_hat.mean(axis=0),
        "variance": f_hat.var(axis=0, ddof=1),
        "bias": f_hat.mean(axis=0) - f_true,
        "var_z": z.var(axis=0, ddof=1),
        "var_z_flat": z_flat.var(axis=0, ddof=1),
        "ks_p": np.array([kstest(z[:, j], "norm").pvalue for j in range(m)]),
        "skew_z": np.array([skew(z[:, j]) for j in range(m)]),
        "ex_kurt_z": np.array([kurtosis(z[:, j]) for j in range(m)]),
        "coverage": covered.mean(axis=0),
    }
    return McReport(
        model=model,
        kind=kind,
        window=win.name,
        bandwidth_rule=str(bandwidth_rule),
        n=n,
        reps=reps,
        master_seed=master_seed,
        alpha=alpha,
        bias_corrected=bias_correct,
        omegas=omegas,
        f_true=f_true,
        sigma_true=sigma_true,
        f_hat=f_hat,
        z=z,
        z_flat=z_flat,
        covered=covered,
        r_values=r_values,
        fallback=fallback,
        summary=summary,
    )


@dataclass(frozen=True, eq=False)
class BiasTable:
    """Mean estimation bias per bandwidth and its log-log slope."""

    model: SimulationModel
    kind: MeasureKind
    window: str
    omega: float
    n: int
    reps: int
    master_seed: int
    bandwidths: np.ndarray
    f_true: float
    mean_f_hat: np.ndarray
    bias: np.ndarray
    mc_se: np.ndarray
    slope: float

    def to_dict(self) -> dict:
        return {
            "model": {
                "name": self.model.name,
                "phi": self.model.phi,
                "marginal": self.model.marginal,
            },
            "measure": self.kind.value,
            "window": self.window,
            "omega": self.omega,
            "n": self.n,
            "reps": self.reps,
            "master_seed": self.master_seed,
            "bandwidths": self.bandwidths.tolist(),
            "f_true": self.f_true,
            "mean_f_hat": self.mean_f_hat.tolist(),
            "bias": self.bias.tolist(),
            "mc_se": self.mc_se.tolist(),
            "slope": self.slope,
        }


def bias_experiment(
    model: SimulationModel,
    kind,
    window,
    omega: float,
    n: int,
    reps: int,
    bandwidth_list,
    master_seed: int = 0,
    n_jobs=None,
) -> BiasTable:
    """Mean bias across bandwidths, sharing each replicate's lag sequence.

    All bandwidths are evaluated on the same per-replicate dependence
    sequence, so the bias curve across r_n is not confounded by independent
    simulation noise; the log-log slope of |bias| against r_n estimates the
    window's bias order -d.
    """
    kind = MeasureKind.coerce(kind)
    win = get_window(window)
    omega = float(omega)
    check_frequencies(np.array([omega]))
    bandwidths = np.asarray([float(r) for r in bandwidth_list], dtype=np.float64)
    if bandwidths.size < 2:
        raise PreconditionError("need at least two bandwidths for a slope")
    if np.any(bandwidths < 1.0):
        raise PreconditionError("bandwidths must be >= 1")
    kmax = math.floor(float(np.max(bandwidths)))
    if kmax > n - 4:
        raise PreconditionError(f"largest bandwidth needs floor(r_n) <= n - 4 = {n - 4}")
    if reps < 2:
        raise PreconditionError("need reps >= 2")

    f_true = float(true_spectrum(model, kind, [omega], tail_tol=1e-12)[0])
    children = np.random.SeedSequence(master_seed).spawn(reps)
    f_hat = np.empty((reps, bandwidths.size))

    def task(i: int) -> None:
        series = simulate(model, n, children[i])
        seq = dependence_sequence(series, kind, kmax)
        for j, r in enumerate(bandwidths):
            f_hat[i, j] = spectrum_from_sequence(seq, win, r, [omega])[0]

    run_indexed(task, reps, n_jobs)

    mean_f_hat = f_hat.mean(axis=0)
    bias = mean_f_hat - f_true
    mc_se = f_hat.std(axis=0, ddof=1) / math.sqrt(reps)
    if np.all(np.abs(bias) > 0.0):
        slope = float(np.polyfit(np.log(bandwidths), np.log(np.abs(bias)), 1)[0])
    else:
        slope = float("nan")
    return BiasTable(
        model=model,
        kind=kind,
        window=win.name,
        omega=omega,
        n=n,
        reps=reps,
        master_seed=master_seed,
        bandwidths=bandwidths,
        f_true=f_true,
        mean_f_hat=mean_f_hat,
        bias=bias,
        mc_se=mc_se,
        slope=slope,
    )
