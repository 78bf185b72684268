"""Jeffreys-prior binomial posteriors and maximum-likelihood linear trends."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize, minimize_scalar

JEFFREYS = 0.5
# log-likelihood drop bounding a 95% profile region (chi^2_1 quantile / 2)
PROFILE_DROP = 0.5 * 3.841458820694124


@dataclass(frozen=True)
class PosteriorEstimate:
    median: float
    lo: float
    hi: float
    F: int
    N: int

    def to_dict(self) -> dict:
        return asdict(self)

    def render(self) -> str:
        return render_estimate(self)


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    slope_uncertainty: float
    intercept_uncertainty: float
    slope_interval: tuple[float, float]
    intercept_interval: tuple[float, float]
    log_likelihood: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["slope_interval"] = list(self.slope_interval)
        d["intercept_interval"] = list(self.intercept_interval)
        return d


# -- regularized incomplete beta ----------------------------------------------


def _log_beta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _betacf(a: float, b: float, x: float, max_iter: int = 20000, eps: float = 1e-16) -> float:
    """Continued fraction for I_x(a, b), modified Lentz evaluation."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = tiny if abs(d) < tiny else d
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("shape parameters must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = a * math.log(x) + b * math.log1p(-x) - _log_beta(a, b)
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _betacf(a, b, x) / a
    return 1.0 - math.exp(log_front) * _betacf(b, a, 1.0 - x) / b


def betainc_inv(a: float, b: float, q: float, rtol: float = 1e-13) -> float:
    """x with I_x(a, b) = q, by bisection to relative width ``rtol``."""
    if not 0.0 <= q <= 1.0:
        raise ValueError("quantile must lie in [0, 1]")
    if q == 0.0:
        return 0.0
    if q == 1.0:
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if betainc(a, b, mid) < q:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rtol * hi:
            break
    return 0.5 * (lo + hi)


def beta_logpdf(p: np.ndarray | float, a: float, b: float) -> np.ndarray | float:
    return (a - 1.0) * np.log(p) + (b - 1.0) * np.log1p(-p) - _log_beta(a, b)


# -- posterior ----------------------------------------------------------------


def beta_posterior(F: int, N: int) -> PosteriorEstimate:
    """Median and central 95% interval of Beta(1/2 + F, 1/2 + N - F)."""
    F, N = int(F), int(N)
    if N < 0 or F < 0:
        raise ValueError("counts must be non-negative")
    if F > N:
        raise ValueError(f"failures ({F}) exceed trials ({N})")
    a, b = JEFFREYS + F, JEFFREYS + N - F
    return PosteriorEstimate(
        median=betainc_inv(a, b, 0.5),
        lo=betainc_inv(a, b, 0.025),
        hi=betainc_inv(a, b, 0.975),
        F=F,
        N=N,
    )


def _decimals_for(delta: float) -> int:
    """Decimal places (in percent) that keep one significant digit of ``delta``."""
    if delta <= 0:
        return 3
    return max(0, -math.floor(math.log10(delta)))


def render_estimate(est: PosteriorEstimate) -> str:
    """Percent rendering, precision set by the leading digit of the lower error bar."""
    m, lo, hi = 100 * est.median, 100 * est.lo, 100 * est.hi
    dec = _decimals_for(m - lo)
    return f"{m:.{dec}f}% -{m - lo:.{dec}f}% +{hi - m:.{dec}f}%"


# -- linear fit ---------------------------------------------------------------

_CLIP = 1e-12


def _loglik(points: np.ndarray, slope: float, intercept: float) -> float:
    r, F, N = points[:, 0], points[:, 1], points[:, 2]
    p = np.clip(slope * r + intercept, _CLIP, 1.0 - _CLIP)
    a, b = JEFFREYS + F, JEFFREYS + N - F
    ll = (a - 1.0) * np.log(p) + (b - 1.0) * np.log1p(-p)
    ll -= np.array([_log_beta(x, y) for x, y in zip(a, b)])
    return float(ll.sum())


def _best_intercept(points: np.ndarray, slope: float, span: tuple[float, float]) -> tuple[float, float]:
    res = minimize_scalar(lambda c: -_loglik(points, slope, c), bounds=span, method="bounded",
                          options={"xatol": 1e-12})
    return float(res.x), -float(res.fun)


def _best_slope(points: np.ndarray, intercept: float, span: tuple[float, float]) -> tuple[float, float]:
    res = minimize_scalar(lambda s: -_loglik(points, s, intercept), bounds=span, method="bounded",
                          options={"xatol": 1e-12})
    return float(res.x), -float(res.fun)


def _profile_edge(f, x0: float, step: float, target: float) -> float:
    """First x beyond ``x0`` (moving by signed ``step``) with f(x) = target, bisected."""
    inner, outer = x0, x0 + step
    for _ in range(60):
        if f(outer) < target:
            break
        inner, outer = outer, outer + step
        step *= 2
    for _ in range(100):
        mid = 0.5 * (inner + outer)
        if f(mid) < target:
            outer = mid
        else:
            inner = mid
        if abs(outer - inner) < 1e-12:
            break
    return 0.5 * (inner + outer)


def ml_linear_fit(points: Sequence[tuple[float, int, int]]) -> LinearFit:
    """Maximize the product of Jeffreys posteriors evaluated at slope * r + intercept."""
    pts = np.array([(float(r), float(F), float(N)) for r, F, N in points], dtype=float)
    if pts.ndim != 2 or len(pts) < 2:
        raise ValueError("need at least two points")
    if len(np.unique(pts[:, 0])) < 2:
        raise ValueError("degenerate points: need at least two distinct round counts")
    if np.any(pts[:, 1] > pts[:, 2]) or np.any(pts[:, 1] < 0):
        raise ValueError("each point needs 0 <= F <= N")
    r = pts[:, 0]
    rate = (pts[:, 1] + JEFFREYS) / (pts[:, 2] + 2 * JEFFREYS)
    s0, c0 = np.polyfit(r, rate, 1)
    scale = max(float(rate.max()), 1e-6)
    rspan = float(r.max() - r.min())

    # coarse grid around the least-squares line, then local refinement
    best = (-math.inf, s0, c0)
    for ds in np.linspace(-1, 1, 41):
        for dc in np.linspace(-1, 1, 41):
            s, c = s0 + ds * scale / rspan, c0 + dc * scale
            ll = _loglik(pts, s, c)
            if ll > best[0]:
                best = (ll, s, c)
    res = minimize(lambda v: -_loglik(pts, v[0], v[1]), x0=[best[1], best[2]], method="Nelder-Mead",
                   options={"xatol": 1e-13, "fatol": 1e-12, "maxiter": 20000})
    slope, intercept = float(res.x[0]), float(res.x[1])
    llmax = -float(res.fun)
    target = llmax - PROFILE_DROP

    cspan = (intercept - 10 * scale, intercept + 10 * scale)
    sspan = (slope - 10 * scale / rspan, slope + 10 * scale / rspan)
    prof_s = lambda s: _best_intercept(pts, s, cspan)[1]
    prof_c = lambda c: _best_slope(pts, c, sspan)[1]
    step_s = 0.01 * scale / rspan
    step_c = 0.01 * scale
    s_lo = _profile_edge(prof_s, slope, -step_s, target)
    s_hi = _profile_edge(prof_s, slope, step_s, target)
    c_lo = _profile_edge(prof_c, intercept, -step_c, target)
    c_hi = _profile_edge(prof_c, intercept, step_c, target)
    return LinearFit(
        slope=slope,
        intercept=intercept,
        slope_uncertainty=0.5 * (s_hi - s_lo),
        intercept_uncertainty=0.5 * (c_hi - c_lo),
        slope_interval=(s_lo, s_hi),
        intercept_interval=(c_lo, c_hi),
        log_likelihood=llmax,
    )
