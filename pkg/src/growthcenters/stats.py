"""Time-series and cross-sectional statistics of simulated or observed activity.

J-curve detection, windowed log growth rates and their convergence, spread of
the distribution over time, log-space histograms, Pearson and partial
correlation.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .dynamics import Trajectory
from .errors import DegenerateError, InputError


def fit_log_slope(times, values) -> float:
    """OLS slope of log(values) against time."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.shape != v.shape or t.size < 2:
        raise InputError("need at least two (time, value) samples of equal length")
    if np.any(v <= 0):
        raise InputError("log-slope fit needs positive values")
    y = np.log(v)
    tc = t - t.mean()
    return float(np.dot(tc, y - y.mean()) / np.dot(tc, tc))


@dataclass(frozen=True)
class LogisticFit:
    """Verhulst solution with non-positive rate a and competition b >= 0.

    W(t) = w0 e^{a s} / (1 + q (1 - e^{a s})),  s = t - t0,  q = b w0 / |a|
    """

    t0: float
    w0: float
    a: float
    q: float
    sse: float

    def __call__(self, t):
        e = np.exp(self.a * (np.asarray(t, dtype=float) - self.t0))
        return self.w0 * e / (1.0 + self.q * (1.0 - e))

    @property
    def b(self) -> float:
        return self.q * abs(self.a) / self.w0


def _logistic_sse(s, logy, a, q):
    """SSE in log space and the optimal log(w0) for every (a, q) on a broadcast grid."""
    e = np.exp(a[..., None] * s)
    shape = a[..., None] * s - np.log1p(q[..., None] * (1.0 - e))
    logw0 = np.mean(logy - shape, axis=-1)
    r = logy - shape - logw0[..., None]
    return np.einsum("...k,...k->...", r, r), logw0


def fit_decaying_logistic(times, values, rounds: int = 25) -> LogisticFit:
    """Least squares in log space, by a grid over (a, q) repeatedly refined around the best cell.

    w0 is solved in closed form for each (a, q).
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.size < 3:
        raise InputError("logistic fit needs at least three samples")
    if np.any(y <= 0):
        raise InputError("logistic fit needs positive values")
    s = t - t[0]
    logy = np.log(y)
    span = s[-1] if s[-1] > 0 else 1.0
    steepest = np.max(np.abs(np.diff(logy) / np.diff(s)))
    a_lo, a_hi = -4.0 * steepest - 1.0 / span, 0.0
    u_lo, u_hi = -6.0, 4.0  # q = 10**u; q = 0 is always on the grid too

    best = (np.inf, 0.0, 0.0, 0.0)
    for _ in range(rounds):
        a_grid = np.linspace(a_lo, a_hi, 41)
        q_grid = np.concatenate([[0.0], 10.0 ** np.linspace(u_lo, u_hi, 41)])
        aa, qq = np.meshgrid(a_grid, q_grid, indexing="ij")
        sse, logw0 = _logistic_sse(s, logy, aa, qq)
        i, j = np.unravel_index(np.argmin(sse), sse.shape)
        if sse[i, j] < best[0]:
            best = (float(sse[i, j]), float(aa[i, j]), float(qq[i, j]), float(logw0[i, j]))
        _, a_b, q_b, _ = best
        da = (a_hi - a_lo) / 8.0
        du = (u_hi - u_lo) / 8.0
        a_lo, a_hi = a_b - da, min(0.0, a_b + da)
        u_c = math.log10(q_b) if q_b > 0 else u_lo
        u_lo, u_hi = u_c - du, u_c + du
    sse, a, q, logw0 = best
    return LogisticFit(float(t[0]), math.exp(logw0), a, q, sse)


@dataclass(frozen=True)
class JCurveReport:
    is_j_curve: bool
    direction: str | None  # "decreasing"/"increasing" when there is no interior trough
    initial_slope_sign: str
    trough_time: float
    trough_value: float
    recovery_rate: float | None
    logistic_extrapolation_gap: float | None
    tail_rate: float  # log-slope over the last tail_fraction of the whole series

    def to_dict(self) -> dict:
        return asdict(self)


def detect_j_curve(times, values, tail_fraction: float = 0.5) -> JCurveReport:
    """Locate decay-then-growth in an aggregate series.

    The trough is the global minimum (earliest on ties). ``recovery_rate`` is
    the log-slope over the last ``tail_fraction`` of the post-trough samples,
    which keeps the bend right after the trough out of the fit.
    ``logistic_extrapolation_gap`` is actual/predicted - 1 at the final time,
    the prediction being a decaying logistic fitted to samples up to the
    trough; a value of 1 means the fit under-predicts by a factor of two.
    A series whose minimum sits at either end is reported as not a J-curve,
    with ``direction`` set; ``tail_rate`` is reported either way.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.shape != v.shape or t.size < 4:
        raise InputError("J-curve detection needs at least 4 samples")
    if not 0 < tail_fraction <= 1:
        raise InputError("tail_fraction must be in (0, 1]")
    k = int(np.argmin(v))
    m = max(2, int(math.ceil(tail_fraction * t.size)))
    tail_rate = fit_log_slope(t[-m:], v[-m:])
    sign = "negative" if v[1] - v[0] < 0 else "non-negative"

    gap = None
    if k + 1 >= 3:
        fit = fit_decaying_logistic(t[: k + 1], v[: k + 1])
        gap = float(v[-1] / fit(t[-1]) - 1.0)

    if k == 0 or k == t.size - 1:
        direction = "increasing" if k == 0 else "decreasing"
        return JCurveReport(False, direction, sign, float(t[k]), float(v[k]), None, gap, tail_rate)

    post = np.arange(k + 1, t.size)
    tail = post[-max(2, int(math.ceil(tail_fraction * post.size))):]
    rate = fit_log_slope(t[tail], v[tail]) if tail.size >= 2 else None
    return JCurveReport(True, None, sign, float(t[k]), float(v[k]), rate, gap, tail_rate)


@dataclass(frozen=True)
class GrowthRateSeries:
    times: np.ndarray  # window start times
    rates: np.ndarray  # (windows, n)
    window: float

    def spread(self) -> np.ndarray:
        return self.rates.max(axis=1) - self.rates.min(axis=1)


def growth_rates(trajectory: Trajectory, window: float | None = None) -> GrowthRateSeries:
    """Per-unit log growth rates over consecutive windows of length ``window``."""
    window = trajectory.step if window is None else float(window)
    stride = window / trajectory.step
    if round(stride) < 1 or abs(stride - round(stride)) > 1e-9 * stride:
        raise InputError(f"window {window} must be a positive multiple of the step {trajectory.step}")
    idx = np.arange(0, len(trajectory), int(round(stride)))
    if idx.size < 2:
        raise InputError("trajectory too short for one window")
    w = trajectory.w[idx]
    if np.any(w <= 0):
        r, i = np.argwhere(w <= 0)[0]
        raise InputError(f"non-positive sample W[{i}] at t = {trajectory.times[idx[r]]}")
    dt = np.diff(trajectory.times[idx])
    rates = np.diff(np.log(w), axis=0) / dt[:, None]
    return GrowthRateSeries(trajectory.times[idx[:-1]], rates, window)


def convergence_time(rates: GrowthRateSeries, eps: float) -> float | None:
    """Earliest window start after which the cross-unit spread stays below ``eps``.

    None means the spread had not settled by the end of the series.
    """
    if not eps > 0:
        raise InputError("eps must be positive")
    ok = rates.spread() < eps
    if not ok[-1]:
        return None
    bad = np.flatnonzero(~ok)
    first = 0 if bad.size == 0 else bad[-1] + 1
    return float(rates.times[first])


@dataclass(frozen=True)
class DispersionSeries:
    times: np.ndarray
    log_std: np.ndarray
    spread: np.ndarray


def dispersion_series(trajectory: Trajectory) -> DispersionSeries:
    if np.any(trajectory.w <= 0):
        raise InputError("dispersion needs positive samples")
    return DispersionSeries(
        trajectory.times,
        np.log(trajectory.w).std(axis=1),
        trajectory.w.max(axis=1) - trajectory.w.min(axis=1),
    )


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray  # linear units, equally spaced in log10
    counts: np.ndarray


def log_histogram(values, bins: int = 20) -> Histogram:
    v = np.asarray(values, dtype=float).ravel()
    if bins < 2:
        raise InputError("need at least two bins")
    if v.size == 0 or np.any(v <= 0):
        raise InputError("log histogram needs positive values")
    lv = np.log10(v)
    lo, hi = lv.min(), lv.max()
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    counts, edges = np.histogram(lv, bins=bins, range=(lo, hi))
    return Histogram(10.0 ** edges, counts)


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 3:
        raise InputError("pearson needs two vectors of equal length >= 3")
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = np.dot(xc, xc)
    syy = np.dot(yc, yc)
    if sxx == 0 or syy == 0:
        raise DegenerateError("zero variance")
    r = np.dot(xc, yc) / math.sqrt(sxx * syy)
    return float(min(1.0, max(-1.0, r)))


def partial_correlation(x, y, z) -> float:
    """Correlation of x and y with the linear effect of z removed from both."""
    r_xy, r_xz, r_yz = pearson(x, y), pearson(x, z), pearson(y, z)
    den = (1.0 - r_xz**2) * (1.0 - r_yz**2)
    if abs(r_xz) >= 1.0 or abs(r_yz) >= 1.0 or den <= 0:
        raise DegenerateError("z is perfectly correlated with x or y")
    return float((r_xy - r_xz * r_yz) / math.sqrt(den))
