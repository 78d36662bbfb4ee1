"""Lag windows and their smoothing constants.

Each window w lives on [-1, 1], has w(0) = 1, and vanishes outside the
support.  Two constants drive the asymptotics:

* ``d`` and ``c_w``: the characteristic exponent and scale of the expansion
  1 - w(u) = c_w * |u|**d + o(|u|**d) near zero, which set the smoothing
  bias order,
* ``w2_integral``: the integral of w(u)**2 over [-1, 1], which scales the
  variance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .validation import PreconditionError

__all__ = ["LagWindow", "WINDOWS", "builtin_window", "get_window", "weights"]


@dataclass(frozen=True)
class LagWindow:
    name: str
    d: int
    c_w: float
    w2_integral: float
    _fn: Callable[[np.ndarray], np.ndarray]

    def __call__(self, u):
        """Evaluate w at scalar or array u, zero outside [-1, 1]."""
        arr = np.abs(np.asarray(u, dtype=np.float64))
        inside = arr <= 1.0
        out = np.zeros(arr.shape)
        out[inside] = self._fn(arr[inside])
        if np.ndim(u) == 0:
            return float(out)
        return out


def _bartlett(u):
    return 1.0 - u


def _parzen(u):
    near = u <= 0.5
    out = np.empty_like(u)
    out[near] = 1.0 - 6.0 * u[near] ** 2 + 6.0 * u[near] ** 3
    out[~near] = 2.0 * (1.0 - u[~near]) ** 3
    return out


def _tukey_hanning(u):
    return 0.5 * (1.0 + np.cos(np.pi * u))


WINDOWS = {
    "bartlett": LagWindow("bartlett", d=1, c_w=1.0, w2_integral=2.0 / 3.0, _fn=_bartlett),
    "parzen": LagWindow("parzen", d=2, c_w=6.0, w2_integral=151.0 / 280.0, _fn=_parzen),
    "tukey-hanning": LagWindow(
        "tukey-hanning",
        d=2,
        c_w=math.pi**2 / 4.0,
        w2_integral=3.0 / 4.0,
        _fn=_tukey_hanning,
    ),
}


def builtin_window(name: str) -> LagWindow:
    """Look up one of the built-in windows by name."""
    key = str(name).strip().lower().replace("_", "-")
    if key not in WINDOWS:
        known = ", ".join(sorted(WINDOWS))
        raise PreconditionError(f"unknown window {name!r}; expected one of {known}")
    return WINDOWS[key]


def get_window(window) -> LagWindow:
    """Coerce a name or LagWindow instance to a LagWindow."""
    if isinstance(window, LagWindow):
        return window
    return builtin_window(window)


def weights(window, r_n, max_lag: int) -> np.ndarray:
    """Window weights w(k / r_n) for lags k = 0..max_lag.

    ``max_lag`` must reach floor(r_n) so the nonzero part of the taper is
    never silently truncated.
    """
    win = get_window(window)
    r = float(r_n)
    if not math.isfinite(r) or r <= 0.0:
        raise PreconditionError(f"bandwidth must be finite and positive, got {r_n}")
    if max_lag < math.floor(r):
        raise PreconditionError(
            f"max_lag must be at least floor(r_n) = {math.floor(r)}, got {max_lag}"
        )
    return win(np.arange(max_lag + 1) / r)
