"""Exact Hoeffding decomposition of the lag-pair U-statistics.

Given an analytic model for the lag-k pair law (a copula with uniform
marginals), the estimator error splits exactly into

    xi_hat - xi = (m/N) * sum_t h1(z_t)  +  sum_{c=2}^{m} C(m,c) * U^(c)(h_c)

where m is the kernel order, N = n - k, and the projection kernels h_c come
from the usual conditional-centering recursion under the model law.  The
machinery here serves as a correctness oracle: every term is enumerated
directly, the first-order kernels have closed forms driven by the copula's
cdf C(u, v) and partial mean g(u) = E[V * 1{U <= u}], and the residual of
the identity is pure float roundoff.

Only analytic copulas are supported (independence, comonotone, Gaussian);
an empirical plug-in would destroy the exactness that makes the residual
check meaningful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

import numpy as np
from numba import njit
from scipy.special import ndtr, ndtri, owens_t

from ._parallel import run_indexed
from .dependence import MeasureKind, _as_series
from .validation import PreconditionError, check_lag

__all__ = [
    "bvn_cdf",
    "Copula",
    "IndependenceCopula",
    "ComonotoneCopula",
    "CountermonotoneCopula",
    "GaussianCopula",
    "gaussian_copula",
    "HoeffdingModel",
    "lag_model",
    "h1",
    "DecompositionReport",
    "decompose",
    "DecayTable",
    "degenerate_decay_experiment",
]


def bvn_cdf(x, y, rho: float):
    """Standard bivariate normal CDF P(X <= x, Y <= y) at correlation rho.

    Owen's T representation, exact up to owens_t's accuracy; vectorized and
    fast enough for dense pairwise grids.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if not -1.0 <= rho <= 1.0:
        raise PreconditionError(f"correlation must lie in [-1, 1], got {rho}")
    if rho == 0.0:
        out = ndtr(x) * ndtr(y)
        return float(out) if out.ndim == 0 else out
    if rho == 1.0:
        out = ndtr(np.minimum(x, y))
        return float(out) if out.ndim == 0 else out
    if rho == -1.0:
        out = np.maximum(ndtr(x) + ndtr(y) - 1.0, 0.0)
        return float(out) if out.ndim == 0 else out

    x, y = np.broadcast_arrays(x, y)
    s = math.sqrt(1.0 - rho * rho)
    xz = x == 0.0
    yz = y == 0.0
    safe_x = np.where(xz, 1.0, x)
    safe_y = np.where(yz, 1.0, y)
    t1 = owens_t(x, (y - rho * x) / (safe_x * s))
    t2 = owens_t(y, (x - rho * y) / (safe_y * s))
    # T(0, a) -> sign(a)/4 as |a| -> inf, reached when one coordinate is 0
    t1 = np.where(xz, np.sign(y) / 4.0, t1)
    t2 = np.where(yz, np.sign(x) / 4.0, t2)
    beta = np.where((x * y < 0.0) | ((x * y == 0.0) & ((x < 0.0) | (y < 0.0))), 0.5, 0.0)
    out = 0.5 * (ndtr(x) + ndtr(y)) - t1 - t2 - beta
    both_zero = xz & yz
    if np.any(both_zero):
        out = np.where(both_zero, 0.25 + math.asin(rho) / (2.0 * math.pi), out)
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


_EPS = 1e-15


class Copula:
    """Analytic bivariate copula: cdf, partial mean, population measures."""

    name = "copula"

    def cdf(self, u, v):
        raise NotImplementedError

    def partial_mean(self, u):
        """g(u) = E[V * 1{U <= u}]."""
        raise NotImplementedError

    @property
    def tau(self) -> float:
        raise NotImplementedError

    @property
    def rho(self) -> float:
        raise NotImplementedError

    @property
    def cov(self) -> float:
        # uniform marginals make the covariance a rescaled Spearman rho
        return self.rho / 12.0


class IndependenceCopula(Copula):
    name = "independence"

    def cdf(self, u, v):
        return np.asarray(u, dtype=np.float64) * np.asarray(v, dtype=np.float64)

    def partial_mean(self, u):
        return np.asarray(u, dtype=np.float64) / 2.0

    tau = 0.0
    rho = 0.0


class ComonotoneCopula(Copula):
    name = "comonotone"

    def cdf(self, u, v):
        return np.minimum(np.asarray(u, dtype=np.float64), np.asarray(v, dtype=np.float64))

    def partial_mean(self, u):
        return np.asarray(u, dtype=np.float64) ** 2 / 2.0

    tau = 1.0
    rho = 1.0


class CountermonotoneCopula(Copula):
    name = "countermonotone"

    def cdf(self, u, v):
        s = np.asarray(u, dtype=np.float64) + np.asarray(v, dtype=np.float64) - 1.0
        return np.maximum(s, 0.0)

    def partial_mean(self, u):
        # V = 1 - U, so E[V 1{U<=u}] = u - u^2/2
        u = np.asarray(u, dtype=np.float64)
        return u - u**2 / 2.0

    tau = -1.0
    rho = -1.0


@dataclass(frozen=True)
class GaussianCopula(Copula):
    """Gaussian copula with correlation r in (-1, 1)."""

    r: float
    name: str = field(default="gaussian", init=False)

    def __post_init__(self):
        if not -1.0 < self.r < 1.0:
            raise PreconditionError(
                f"Gaussian copula correlation must lie in (-1, 1), got {self.r}"
            )

    def cdf(self, u, v):
        u = np.clip(np.asarray(u, dtype=np.float64), _EPS, 1.0 - _EPS)
        v = np.clip(np.asarray(v, dtype=np.float64), _EPS, 1.0 - _EPS)
        return bvn_cdf(ndtri(u), ndtri(v), self.r)

    def partial_mean(self, u):
        # g(u) = P(W <= a*X, X <= ndtri(u)) with a = r/sqrt(2-r^2) reduces to
        # a bivariate normal orthant probability at correlation -r/sqrt(2)
        u = np.clip(np.asarray(u, dtype=np.float64), _EPS, 1.0 - _EPS)
        return bvn_cdf(0.0, ndtri(u), -self.r / math.sqrt(2.0))

    @property
    def tau(self) -> float:
        return 2.0 * math.asin(self.r) / math.pi

    @property
    def rho(self) -> float:
        return 6.0 * math.asin(self.r / 2.0) / math.pi


def gaussian_copula(r: float) -> Copula:
    """Gaussian-copula family closed at the endpoints."""
    if r == 0.0:
        return IndependenceCopula()
    if r == 1.0:
        return ComonotoneCopula()
    if r == -1.0:
        return CountermonotoneCopula()
    return GaussianCopula(r)


@dataclass(frozen=True)
class HoeffdingModel:
    """Analytic lag-pair law: measure kind, copula, optional marginal map.

    ``marginal_cdf`` maps raw series values to copula (uniform) scale; None
    means the series is already uniform.
    """

    kind: MeasureKind
    copula: Copula
    marginal_cdf: Optional[Callable] = None

    @property
    def kernel_order(self) -> int:
        return self.kind.kernel_order

    @property
    def xi_true(self) -> float:
        if self.kind is MeasureKind.TAU:
            return float(self.copula.tau)
        if self.kind is MeasureKind.RHO:
            return float(self.copula.rho)
        return float(self.copula.cov)

    def to_uniform(self, values: np.ndarray) -> np.ndarray:
        u = values if self.marginal_cdf is None else self.marginal_cdf(values)
        u = np.asarray(u, dtype=np.float64)
        if np.any(u < 0.0) or np.any(u > 1.0):
            raise PreconditionError(
                "series does not map into [0, 1]; wrong marginal for this model"
            )
        return u


def lag_model(model_name: str, kind, k: int, phi: float = 0.0, marginal: str = "id") -> HoeffdingModel:
    """Analytic lag-k pair law of a simulation model.

    iid-uniform has the independence copula at k >= 1 and the comonotone one
    at k = 0; the Gaussian AR(1) family has the Gaussian copula with
    correlation phi^k and a normal marginal of variance 1/(1-phi^2).
    """
    kind = MeasureKind.coerce(kind)
    if k < 0:
        raise PreconditionError(f"lag must be nonnegative, got {k}")
    name = str(model_name).strip().lower()
    if name == "iid-uniform":
        cop = ComonotoneCopula() if k == 0 else IndependenceCopula()
        return HoeffdingModel(kind=kind, copula=cop)
    if name in ("gaussian-ar1", "gaussian-copula-ar1-with-marginal"):
        if not -1.0 < phi < 1.0:
            raise PreconditionError(f"AR(1) coefficient must lie in (-1, 1), got {phi}")
        scale = math.sqrt(1.0 - phi * phi)
        if name == "gaussian-ar1":
            to_u = lambda x: ndtr(np.asarray(x, dtype=np.float64) * scale)
        else:
            from .simlab import marginal_transform

            _, inverse = marginal_transform(marginal)
            to_u = lambda x: ndtr(inverse(np.asarray(x, dtype=np.float64)) * scale)
        return HoeffdingModel(kind=kind, copula=gaussian_copula(phi**k), marginal_cdf=to_u)
    raise PreconditionError(f"no analytic lag model for {model_name!r}")


def h1(model: HoeffdingModel, u, v):
    """First-order projection kernel at copula-scale points (u, v).

    The closed forms only need the copula cdf and partial mean; both rank
    measures assume an exchangeable copula (true for every supported one),
    so the two coordinate partial means coincide.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    cop = model.copula
    if model.kind is MeasureKind.TAU:
        out = 4.0 * cop.cdf(u, v) - 2.0 * u - 2.0 * v + 1.0 - cop.tau
    elif model.kind is MeasureKind.RHO:
        out = (
            4.0 * (0.5 - u) * (0.5 - v)
            + 2.0 * u
            - 4.0 * cop.partial_mean(u)
            + 2.0 * v
            - 4.0 * cop.partial_mean(v)
            - cop.rho
        )
    else:
        out = 0.5 * (u - 0.5) * (v - 0.5) - cop.cov / 2.0
    out = np.asarray(out, dtype=np.float64)
    return float(out) if out.ndim == 0 else out


def _pair_conditional_mean(model: HoeffdingModel, u, v) -> np.ndarray:
    """E[h(z_i, z_j, Z)] over the third argument, for all pairs (i, j).

    Returns the full matrix indexed [i, j]; only the order-3 (Spearman)
    kernel needs this.
    """
    cop = model.copula
    a_lt = (u[:, None] < u[None, :]).astype(np.float64)  # I(u_i < u_j)
    b_lt = (v[:, None] < v[None, :]).astype(np.float64)
    half_u = 0.5 - u
    half_v = 0.5 - v
    cuv = np.asarray(cop.cdf(u[:, None], v[None, :]), dtype=np.float64)  # C(u_i, v_j)
    t1 = (a_lt - 0.5) * half_v[:, None]
    t2 = (a_lt.T - 0.5) * half_v[None, :]
    t3 = half_u[:, None] * (b_lt - 0.5)
    t4 = half_u[None, :] * (b_lt.T - 0.5)
    t5 = cuv - u[:, None] / 2.0 - v[None, :] / 2.0 + 0.25
    t6 = cuv.T - u[None, :] / 2.0 - v[:, None] / 2.0 + 0.25
    return 2.0 * (t1 + t2 + t3 + t4 + t5 + t6)


@njit(cache=True, nogil=True)
def _rho_triple_sums(u, v, h1v, h2m, rho):
    """Kernel sum and residual third-order sum over all triples (Kahan)."""
    n = u.size
    ksum = 0
    total = 0.0
    comp = 0.0
    for i in range(n - 2):
        for j in range(i + 1, n - 1):
            base_h1 = h1v[i] + h1v[j]
            base_h2 = h2m[i, j]
            for l in range(j + 1, n):
                cnt = 0
                if (u[i] < u[j]) == (v[i] < v[l]):
                    cnt += 1
                if (u[i] < u[l]) == (v[i] < v[j]):
                    cnt += 1
                if (u[j] < u[i]) == (v[j] < v[l]):
                    cnt += 1
                if (u[j] < u[l]) == (v[j] < v[i]):
                    cnt += 1
                if (u[l] < u[i]) == (v[l] < v[j]):
                    cnt += 1
                if (u[l] < u[j]) == (v[l] < v[i]):
                    cnt += 1
                kval = cnt - 3
                ksum += kval
                val = (
                    kval
                    - rho
                    - (base_h1 + h1v[l])
                    - (base_h2 + h2m[i, l] + h2m[j, l])
                )
                y = val - comp
                t = total + y
                comp = (t - total) - y
                total = t
    return ksum, total


@dataclass(frozen=True, eq=False)
class DecompositionReport:
    """Exact split of xi_hat - xi into projection terms at one lag."""

    kind: MeasureKind
    k: int
    n: int
    size: int
    xi_hat: float
    xi_true: float
    total: float
    linear_part: float
    degenerate_parts: Dict[int, float]
    residual: float


def decompose(values, model: HoeffdingModel, k: int) -> DecompositionReport:
    """Enumerate every Hoeffding term of the lag-k estimator error.

    The series must be a sample whose lag-k pair law matches the model
    (after the model's marginal map).  All terms are computed by direct
    enumeration; the residual is roundoff only.
    """
    series = _as_series(values)
    n = series.n
    check_lag(n, k, n - 4, "decompose")
    m = model.kernel_order
    if m == 3 and n > 500:
        raise PreconditionError(f"triple enumeration is guarded at n <= 500, got {n}")
    if m == 2 and n > 2000:
        raise PreconditionError(f"pair enumeration is guarded at n <= 2000, got {n}")

    u_full = model.to_uniform(series.values)
    size = n - k
    u = u_full[:size]
    v = u_full[k:]
    xi = model.xi_true
    h1v = h1(model, u, v)
    linear = m / size * float(np.sum(h1v))
    iu = np.triu_indices(size, 1)

    if m == 2:
        if model.kind is MeasureKind.TAU:
            a = (u[:, None] < u[None, :]).astype(np.float64)
            b = (v[:, None] < v[None, :]).astype(np.float64)
            hmat = 4.0 * (a - 0.5) * (b - 0.5)
        else:
            hmat = 0.5 * (u[:, None] - u[None, :]) * (v[:, None] - v[None, :])
        pair_vals = hmat[iu]
        xi_hat = float(np.mean(pair_vals))
        h2_vals = pair_vals - xi - h1v[iu[0]] - h1v[iu[1]]
        u2 = float(np.mean(h2_vals))
        degenerate = {2: u2}
    else:
        g2 = _pair_conditional_mean(model, u, v)
        h2m = g2 - xi - h1v[:, None] - h1v[None, :]
        u2 = float(np.mean(h2m[iu]))
        ksum, h3_sum = _rho_triple_sums(u, v, h1v, h2m, xi)
        triples = math.comb(size, 3)
        xi_hat = float(ksum) / triples
        u3 = h3_sum / triples
        degenerate = {2: 3.0 * u2, 3: u3}

    total = xi_hat - xi
    residual = total - linear - sum(degenerate.values())
    return DecompositionReport(
        kind=model.kind,
        k=k,
        n=n,
        size=size,
        xi_hat=xi_hat,
        xi_true=xi,
        total=total,
        linear_part=linear,
        degenerate_parts=degenerate,
        residual=residual,
    )


@dataclass(frozen=True, eq=False)
class DecayTable:
    """Empirical second moments of the first degenerate term across n."""

    kind: MeasureKind
    k: int
    sizes: np.ndarray
    reps: int
    mean_sq: np.ndarray
    slope: float


def _u2_single(model: HoeffdingModel, x: np.ndarray, k: int) -> float:
    """U^(2)(h_2) for one replicate series on copula scale."""
    size = x.size - k
    u = x[: size]
    v = x[k:]
    h1v = h1(model, u, v)
    xi = model.xi_true
    if model.kernel_order == 2:
        # identity route: the linear term is subtracted from the exact error
        if model.kind is MeasureKind.TAU:
            from .dependence import kendall_tau_lag

            xi_hat = kendall_tau_lag(x, k)
        else:
            from .dependence import autocovariance_lag

            xi_hat = autocovariance_lag(x, k)
        return xi_hat - xi - 2.0 / size * float(np.sum(h1v))
    # order-3 kernel: direct pair enumeration of h_2
    g2 = _pair_conditional_mean(model, u, v)
    h2m = g2 - xi - h1v[:, None] - h1v[None, :]
    iu = np.triu_indices(size, 1)
    return float(np.mean(h2m[iu]))


def degenerate_decay_experiment(
    model: HoeffdingModel,
    sizes,
    reps: int,
    k: int = 1,
    master_seed: int = 0,
    n_jobs=None,
) -> DecayTable:
    """Monte Carlo decay of E[(U^(2))^2] across sample sizes.

    Only serially independent models can be sampled here (uniform iid
    draws), which is exactly the setting of the decay property being
    checked.  The log-log slope across sizes should sit at or below -1;
    when the degenerate part vanishes identically (comonotone lag 0) the
    slope is reported as -inf.
    """
    if not isinstance(model.copula, (IndependenceCopula, ComonotoneCopula)):
        raise PreconditionError("decay experiment requires a serially independent model")
    if model.marginal_cdf is not None:
        raise PreconditionError("decay experiment samples on copula scale; marginal must be id")
    sizes = np.asarray(sizes, dtype=np.int64)
    if sizes.size < 2:
        raise PreconditionError("need at least two sizes for a slope")
    if np.any(sizes > 1000):
        raise PreconditionError("sizes are guarded at n <= 1000")
    if np.any(sizes < k + 4):
        raise PreconditionError("smallest size must exceed the lag by at least 4")
    if reps < 1:
        raise PreconditionError("reps must be >= 1")

    children = np.random.SeedSequence(master_seed).spawn(sizes.size * reps)
    u2 = np.empty((sizes.size, reps))

    def task(idx: int) -> None:
        s, r = divmod(idx, reps)
        rng = np.random.default_rng(children[idx])
        x = rng.random(int(sizes[s]))
        u2[s, r] = _u2_single(model, x, k)

    run_indexed(task, sizes.size * reps, n_jobs)

    mean_sq = np.mean(u2**2, axis=1)
    if np.all(mean_sq > 0.0):
        slope = float(np.polyfit(np.log(sizes.astype(np.float64)), np.log(mean_sq), 1)[0])
    else:
        slope = float("-inf")
    return DecayTable(kind=model.kind, k=k, sizes=sizes, reps=reps, mean_sq=mean_sq, slope=slope)
