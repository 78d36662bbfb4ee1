"""Input validation helpers shared across the package.

Errors are split into three families so that callers (in particular the
command line interface) can map them to distinct exit codes:

* :class:`PreconditionError` -- the caller handed us data or parameters that
  violate a documented precondition (bad lag, bad bandwidth, alpha outside
  (0, 1), series too short, non-finite values).
* :class:`InputFormatError` -- raw input could not be parsed at all.
* :class:`InternalInvariantError` -- an internal consistency check failed;
  this is a bug in the package, never the caller's fault.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "PreconditionError",
    "InputFormatError",
    "InternalInvariantError",
    "TieValueWarning",
    "check_series_values",
    "check_lag",
    "check_max_lag",
    "check_alpha",
    "check_bandwidth",
    "check_frequencies",
]


class PreconditionError(ValueError):
    """A documented precondition on arguments or data was violated."""


class InputFormatError(ValueError):
    """Raw input text could not be parsed into a numeric series."""


class InternalInvariantError(RuntimeError):
    """An internal invariant failed; indicates a bug, not a usage error."""


class TieValueWarning(UserWarning):
    """Emitted when a series contains tied values.

    Rank-based kernels use strict inequalities, so ties are allowed but
    shrink the measures toward the tie-breaking convention of the kernel.
    """


def check_series_values(values, min_length: int = 4) -> np.ndarray:
    """Coerce ``values`` to a finite 1-D float64 array of length >= ``min_length``."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise PreconditionError(
            f"series must be one-dimensional, got shape {arr.shape}"
        )
    if arr.size < min_length:
        raise PreconditionError(
            f"series needs at least {min_length} observations, got {arr.size}"
        )
    if not np.all(np.isfinite(arr)):
        raise PreconditionError("series contains non-finite values")
    return np.ascontiguousarray(arr)


def check_lag(n: int, k: int, max_allowed: int, what: str) -> int:
    """Validate an integer lag ``k`` against ``0 <= k <= max_allowed``."""
    k = int(k)
    if k < 0 or k > max_allowed:
        raise PreconditionError(
            f"lag k={k} out of range for {what} with n={n}: need 0 <= k <= {max_allowed}"
        )
    return k

def check_max_lag(n: int, max_lag: int) -> int:
    max_lag = int(max_lag)
    if max_lag < 0 or max_lag > n - 4:
        raise PreconditionError(
            f"max_lag={max_lag} out of range: need 0 <= max_lag <= n-4 = {n - 4}"
        )
    return max_lag


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise PreconditionError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def check_bandwidth(r_n: float, n: int) -> float:
    """A bandwidth attached to a series of length n must satisfy 1 <= r_n and floor(r_n) <= n-4."""
    r_n = float(r_n)
    if not np.isfinite(r_n) or r_n < 1.0:
        raise PreconditionError(f"bandwidth r_n={r_n} must be finite and >= 1")
    if int(np.floor(r_n)) > n - 4:
        raise PreconditionError(
            f"bandwidth r_n={r_n} too large for series of length {n}: floor(r_n) <= n-4 required"
        )
    return r_n


def check_frequencies(omegas) -> np.ndarray:
    """Frequencies must be finite, sorted non-decreasing, and inside (-pi, pi]."""
    arr = np.atleast_1d(np.asarray(omegas, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise PreconditionError("frequency grid must be a non-empty 1-D array")
    if not np.all(np.isfinite(arr)):
        raise PreconditionError("frequency grid has non-finite entries")
    if np.any(arr <= -np.pi - 1e-12) or np.any(arr > np.pi + 1e-12):
        raise PreconditionError("frequencies must lie in (-pi, pi]")
    if np.any(np.diff(arr) < 0):
        raise PreconditionError("frequency grid must be sorted")
    return arr
