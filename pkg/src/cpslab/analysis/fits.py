"""Power-law fits of density decay."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .density import DensityTrace


@dataclass(frozen=True)
class RateFit:
    c: float
    alpha: float
    residual: float  # rms of log-residuals
    window: tuple[float, float]
    n_points: int

    def predict(self, t):
        return self.c * np.asarray(t, dtype=float) ** -self.alpha

    def to_json(self) -> dict:
        d = asdict(self)
        d["window"] = list(self.window)
        return d


def geometric_times(t_max: float, t_min: float = 1.0, include_zero: bool = True) -> list[float]:
    """{0, t_min, 2 t_min, 4 t_min, ...} capped at t_max."""
    out = [0.0] if include_zero else []
    t = float(t_min)
    while t <= t_max:
        out.append(t)
        t *= 2
    return out


def fit_power_law(trace, window: tuple[float, float] | None = None, r=None) -> RateFit:
    """Least-squares line through (log t, log r) for t in the closed window.

    ``trace`` is a DensityTrace, or an array of times with ``r`` given.
    """
    if isinstance(trace, DensityTrace):
        t, r = trace.t, trace.r
    else:
        t = np.asarray(trace, dtype=float)
        r = np.asarray(r, dtype=float)
    if window is None:
        window = (float(t.min()), float(t.max()))
    lo, hi = window
    m = (t >= lo) & (t <= hi)
    t, r = t[m], r[m]
    if t.size < 3:
        raise ValueError(f"need at least 3 points in the window, got {t.size}")
    if np.any(r <= 0) or np.any(t <= 0):
        raise ValueError("densities and times in the window must be strictly positive")
    x, y = np.log(t), np.log(r)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return RateFit(c=math.exp(intercept), alpha=float(-slope), residual=float(np.sqrt(np.mean(resid**2))),
                   window=(float(lo), float(hi)), n_points=int(t.size))


def scan_decrement_time(t, p, r, t0: float) -> float | None:
    """First sampled s >= t0 with r(s) <= r(t0) - p(t0)/4, or None.

    Exploratory only: a coarse time grid can only overestimate the first
    such time.
    """
    t = np.asarray(t, dtype=float)
    i0 = int(np.searchsorted(t, t0))
    if i0 >= t.size or t[i0] != t0:
        raise ValueError(f"t0={t0} is not a sampled time")
    target = r[i0] - p[i0] / 4
    for i in range(i0, t.size):
        if r[i] <= target:
            return float(t[i])
    return None
