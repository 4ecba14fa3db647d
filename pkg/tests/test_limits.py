import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hngarch_portfolio import (
    InvalidDelta,
    Preferences,
    convergence_sweep,
    heston_schedule,
    limit_moment_check,
    long_run_variance,
    merton_schedule,
    merton_weight,
    scale_params,
    solve_optimal,
)

from conftest import stationary_params


def test_unit_delta_is_identity(cp):
    sc = scale_params(cp, 1.0)
    assert sc.scaled == cp and sc.delta == 1.0


@given(stationary_params(), st.floats(1e-4, 1.0))
def test_leverage_invariant_and_stationary(params, delta):
    sc = scale_params(params, delta)
    s = sc.scaled
    assert s.alpha * s.theta**2 == pytest.approx(params.alpha * params.theta**2, rel=1e-12, abs=1e-300)
    assert s.persistence == pytest.approx(1 - (1 - params.persistence) * delta, rel=1e-12)
    assert s.persistence < 1
    assert s.lam == params.lam and s.r == pytest.approx(params.r * delta)


def test_half_day_example(cp):
    s = scale_params(cp, 0.5).scaled
    assert s.alpha == pytest.approx(9.15e-7, rel=1e-12)
    assert s.theta == pytest.approx(256.8, rel=1e-12)
    # per-period long-run variance scales with the period length
    assert long_run_variance(s) == pytest.approx(0.5 * long_run_variance(cp), rel=0.02)


@pytest.mark.parametrize("delta", [0.0, -0.5, 1.5, float("nan")])
def test_invalid_delta(cp, delta):
    with pytest.raises(InvalidDelta):
        scale_params(cp, delta)


def test_heston_limit_coefficients(cp):
    lim = scale_params(cp, 0.25).heston_limit
    assert lim["kappa"] == pytest.approx(1 - cp.persistence)
    assert lim["theta_v"] == pytest.approx(long_run_variance(cp))
    assert lim["sigma"] == pytest.approx(2 * cp.alpha * cp.theta)
    assert lim["rho"] == -1.0 and lim["lambda_bar"] == cp.lam + 0.5


def test_merton_schedule_examples(cp):
    s = merton_schedule(cp, Preferences(-5.0, 30))
    assert s.label == "merton" and len(s) == 30
    np.testing.assert_array_equal(s.pi, 3.272 / 6)
    assert merton_weight(cp.with_(lam=-0.5), -5.0) == 0.0
    assert merton_weight(cp, -1e9) < 1e-8


def test_heston_schedule_properties(cp):
    prefs = Preferences(-5.0, 252)
    hs = heston_schedule(cp, prefs)
    assert hs.label == "heston" and hs.meta["delta_ref"] == 2.0**-10 and "convention" in hs.meta
    m = merton_weight(cp, -5.0)
    # hedging demand decays towards the horizon
    assert abs(hs[-1] - m) < abs(hs[0] - m)
    assert np.all(np.diff(hs.pi) < 0)
    flat = heston_schedule(cp.with_(alpha=0.0), prefs, delta_ref=2.0**-6)
    np.testing.assert_allclose(flat.pi, m, rtol=1e-14)


def test_heston_schedule_cauchy(cp):
    prefs = Preferences(-5.0, 252)
    coarse = heston_schedule(cp, prefs, delta_ref=2.0**-8)
    fine = heston_schedule(cp, prefs, delta_ref=2.0**-10)
    assert np.max(np.abs(coarse.pi - fine.pi)) < 1e-4


def test_heston_schedule_rejects_bad_grid(cp):
    with pytest.raises(InvalidDelta):
        heston_schedule(cp, Preferences(-5.0, 10), delta_ref=0.3)


def test_single_rebalance_is_merton(cp):
    for gamma in (-10.0, -5.0, -0.5, 0.5):
        rows = convergence_sweep(cp, Preferences(gamma, 1), 1.0, deltas=[1.0], delta_ref=2.0**-6)
        assert rows[0].pi_0 == pytest.approx(merton_weight(cp, gamma), abs=1e-12)


def test_convergence_positive_gamma_monotone(cp):
    rows = convergence_sweep(cp, Preferences(0.5, 252), 252)
    gaps = np.abs([r.gap for r in rows])
    assert np.all(np.diff(gaps) < 0)
    assert rows[-1].gap == 0.0 and rows[0].n_periods == 252


def test_convergence_matches_daily_solution(cp):
    rows = convergence_sweep(cp, Preferences(-5.0, 252), 252, deltas=[1.0], delta_ref=2.0**-4)
    assert rows[0].pi_0 == solve_optimal(cp, Preferences(-5.0, 252)).pi[0]


def test_convergence_rejects_fractional_periods(cp):
    with pytest.raises(ValueError):
        convergence_sweep(cp, Preferences(-5.0, 10), 10.3, deltas=[1.0], delta_ref=2.0**-4)


def test_moment_limits(cp):
    v, pi = 1.5 * long_run_variance(cp), 0.6
    coarse = limit_moment_check(cp, 1e-3, pi, v)
    fine = limit_moment_check(cp, 1e-4, pi, v)
    for res in (coarse, fine):
        r = res.residuals
        # mean, variance and covariance of the discrete step are exact
        assert abs(r["mean"]) < 1e-12 * abs(res.limit["mean"])
        assert abs(r["variance"]) < 1e-10 * res.limit["variance"]
        assert abs(r["covariance"]) < 1e-10 * abs(res.limit["covariance"])
        assert abs(r["variance_drift"]) < 1e-8 * abs(res.limit["variance_drift"]) + 1e-18
    for key in ("variance_variance", "correlation"):
        assert abs(fine.residuals[key]) < abs(coarse.residuals[key]) / 5
    assert fine.discrete["correlation"] == pytest.approx(-1.0, abs=1e-4)
    neg = limit_moment_check(cp.with_(theta=-cp.theta), 1e-4, pi, v)
    assert neg.discrete["correlation"] == pytest.approx(1.0, abs=1e-4)
