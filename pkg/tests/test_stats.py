import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats as sps

from ftlab.stats import beta_posterior, betainc, betainc_inv, ml_linear_fit, render_estimate

# reference (r, F, N) counts for the two unencoded baselines
CNOT_BASELINE = [(1, 345, 80000), (2, 305, 40000), (3, 477, 40000)]
TELEPORT_BASELINE = [(1, 401, 40000), (2, 347, 20000), (3, 504, 20000)]


@pytest.mark.parametrize("F,N", [(0, 10), (3, 10), (1367, 274400), (0, 17389), (125, 16000), (26, 15483), (1, 7008), (500, 1000)])
def test_posterior_against_scipy(F, N):
    est = beta_posterior(F, N)
    dist = sps.beta(0.5 + F, 0.5 + N - F)
    for got, q in ((est.median, 0.5), (est.lo, 0.025), (est.hi, 0.975)):
        assert got == pytest.approx(dist.ppf(q), rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.1, 50), st.floats(0.1, 50), st.floats(0.001, 0.999))
def test_betainc_against_scipy(a, b, x):
    assert betainc(a, b, x) == pytest.approx(sps.beta.cdf(x, a, b), rel=1e-10, abs=1e-14)


def test_inverse_round_trip():
    for q in (1e-6, 0.025, 0.5, 0.975):
        x = betainc_inv(2.5, 400.5, q)
        assert betainc(2.5, 400.5, x) == pytest.approx(q, rel=1e-10)


def test_posterior_invariants():
    est = beta_posterior(0, 1000)
    assert 0 < est.lo <= est.median <= est.hi < 1
    with pytest.raises(ValueError):
        beta_posterior(5, 4)
    with pytest.raises(ValueError):
        beta_posterior(-1, 4)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5000), st.data())
def test_monotone_in_failures(N, data):
    F = data.draw(st.integers(0, N - 1))
    a, b = beta_posterior(F, N), beta_posterior(F + 1, N)
    assert b.median >= a.median and b.lo >= a.lo and b.hi >= a.hi


@pytest.mark.parametrize("F,N", [(0, 50), (7, 300), (120, 1000)])
def test_mirror_symmetry(F, N):
    a, b = beta_posterior(F, N), beta_posterior(N - F, N)
    assert b.median == pytest.approx(1 - a.median, abs=1e-12)
    assert b.lo == pytest.approx(1 - a.hi, abs=1e-12)
    assert b.hi == pytest.approx(1 - a.lo, abs=1e-12)


@pytest.mark.parametrize("N", [10_000, 100_000, 1_000_000])
def test_zero_failures_upper_bound(N):
    hi = beta_posterior(0, N).hi
    bound = math.log(20) / N
    assert abs(hi - bound) <= 0.25 * bound
    # large-N limit of the Beta(1/2, N) quantile: chi^2_1 quantile over 2N
    assert hi == pytest.approx(sps.chi2.ppf(0.975, 1) / (2 * N), rel=1e-3)


def test_rendering():
    assert render_estimate(beta_posterior(1367, 274400)) == "0.50% -0.03% +0.03%"
    assert render_estimate(beta_posterior(125, 16000)) == "0.8% -0.1% +0.1%"
    assert render_estimate(beta_posterior(26, 15483)) == "0.17% -0.06% +0.07%"


def test_fit_recovers_exact_line():
    N = 10**12
    pts = [(r, round((0.004 * r + 0.001) * N), N) for r in (1, 2, 3, 4)]
    f = ml_linear_fit(pts)
    assert f.slope == pytest.approx(0.004, rel=0.01)
    assert f.intercept == pytest.approx(0.001, rel=0.01)
    assert f.slope_uncertainty >= 0 and f.intercept_uncertainty >= 0


def test_fit_is_deterministic():
    assert ml_linear_fit(CNOT_BASELINE) == ml_linear_fit(CNOT_BASELINE)


def test_fit_degenerate():
    with pytest.raises(ValueError, match="degenerate"):
        ml_linear_fit([(2, 3, 100), (2, 4, 100)])
    with pytest.raises(ValueError):
        ml_linear_fit([(1, 3, 100)])


def test_fit_interval_coverage():
    # counts drawn from the true line, true parameters checked against the 95% profile region
    r = np.random.default_rng(2024)
    slope, intercept = 0.005, 0.002
    rs, N = (1, 2, 3), 20000
    hit_s = hit_c = 0
    trials = 200
    for _ in range(trials):
        pts = [(x, int(r.binomial(N, slope * x + intercept)), N) for x in rs]
        f = ml_linear_fit(pts)
        hit_s += f.slope_interval[0] <= slope <= f.slope_interval[1]
        hit_c += f.intercept_interval[0] <= intercept <= f.intercept_interval[1]
    # 95% nominal; binomial sd over 200 trials is about 1.5%
    assert hit_s / trials >= 0.91
    assert hit_c / trials >= 0.91


@pytest.mark.xfail(strict=True, reason="reference CNOT-baseline counts give 0.37% +- 0.05% per round, not 0.42% +- 0.02%")
def test_cnot_baseline_slope():
    f = ml_linear_fit(CNOT_BASELINE)
    assert abs(f.slope - 0.0042) <= 0.0002
    assert abs(f.slope_uncertainty - 0.0002) <= 0.0001


def test_teleport_baseline_slope():
    f = ml_linear_fit(TELEPORT_BASELINE)
    assert abs(f.slope - 0.007) <= 0.001
    assert f.slope_interval[0] < 0.007 < f.slope_interval[1]
