import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy.optimize import brentq

from hngarch_portfolio import (
    CHRISTOFFERSEN,
    ConjecturedOptimalityWarning,
    GarchParams,
    InadmissibleCoefficient,
    MismatchedHorizon,
    Preferences,
    StrategySchedule,
    ValidationError,
    as_schedule,
    check_monotone_E,
    decompose,
    evaluate_suboptimal,
    expected_utility,
    long_run_variance,
    merton_schedule,
    merton_weight,
    solve_optimal,
    value_at,
    wealth_equivalent_loss,
)

from conftest import negative_gamma, stationary_params


def merton(p, gamma):
    return (p.lam + 0.5) / (1.0 - gamma)


# -- preferences ---------------------------------------------------------------


@pytest.mark.parametrize("gamma", [0.0, 1.0, 1.5, float("nan")])
def test_gamma_domain(gamma):
    with pytest.raises(ValidationError, match="gamma must be nonzero and below 1"):
        Preferences(gamma, 10)


@pytest.mark.parametrize("T", [0, -3, 2.5])
def test_horizon_domain(T):
    with pytest.raises(ValidationError):
        Preferences(-5.0, T)


def test_regime_labels(cp):
    assert Preferences(-2.0, 5).regime == "proved-optimal"
    assert Preferences(0.5, 5).regime == "conjectured-optimal"
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        solve_optimal(cp, Preferences(0.5, 5))
    assert any(issubclass(w.category, ConjecturedOptimalityWarning) for w in caught)


# -- solve_optimal ---------------------------------------------------------------


def test_christoffersen_one_period_values(cp):
    table = solve_optimal(cp, Preferences(-5.0, 252))
    assert table.pi[251] == pytest.approx(3.272 / 6, abs=1e-15)
    assert table.pi[251] == pytest.approx(0.545333, abs=1e-6)
    assert table.E[251] == pytest.approx(-5 * 3.272**2 / 12, rel=1e-14)
    assert table.E[251] == pytest.approx(-4.46083, abs=1e-5)
    assert table.D[252] == 0.0 and table.E[252] == 0.0
    assert table.is_admissible


@given(stationary_params(), negative_gamma, st.integers(1, 300))
def test_terminal_anchor_and_merton_base_case(params, gamma, T):
    table = solve_optimal(params, Preferences(gamma, T), strict=False)
    assert table.D[T] == 0.0 and table.E[T] == 0.0
    assert table.pi[T - 1] == pytest.approx(merton(params, gamma), rel=1e-12, abs=1e-12)


def test_zero_alpha_gives_merton_everywhere(cp):
    p = cp.with_(alpha=0.0)
    table = solve_optimal(p, Preferences(-3.0, 100))
    np.testing.assert_allclose(table.pi.pi, merton(p, -3.0), rtol=1e-14)
    np.testing.assert_array_equal(table.hedging(), 0.0)


def test_decompose_examples(cp):
    prefs = Preferences(-5.0, 252)
    myo, hed = decompose(0.0, cp, prefs)
    assert hed == 0.0 and myo == pytest.approx(3.272 / 6, abs=1e-15)
    table = solve_optimal(cp, prefs)
    myo, hed = decompose(table.E[251], cp, prefs)
    assert table.E[251] == pytest.approx(-4.46083, abs=1e-5)
    assert myo + hed == pytest.approx(table.pi[250], abs=1e-12)
    with pytest.raises(InadmissibleCoefficient):
        decompose(1.0 / cp.alpha, cp, prefs)


@given(stationary_params(), negative_gamma, st.integers(1, 200))
def test_decomposition_identity(params, gamma, T):
    prefs = Preferences(gamma, T)
    table = solve_optimal(params, prefs, strict=False)
    assume(table.is_admissible)
    total = table.myopic() + table.hedging()
    np.testing.assert_allclose(total, table.pi.pi, rtol=1e-12, atol=1e-12)


@given(stationary_params(), negative_gamma, st.integers(1, 200))
def test_second_order_condition(params, gamma, T):
    table = solve_optimal(params, Preferences(gamma, T), strict=False)
    assume(table.is_admissible)
    curvature = gamma**2 / (1.0 - 2.0 * params.alpha * table.E[1:]) - gamma
    assert np.all(curvature > 0)


@given(stationary_params(), negative_gamma, st.integers(1, 200), st.floats(0.0, 1e-3))
def test_strategy_independent_of_r(params, gamma, T, r2):
    prefs = Preferences(gamma, T)
    a = solve_optimal(params, prefs, strict=False)
    b = solve_optimal(params.with_(r=r2), prefs, strict=False)
    assume(a.is_admissible)
    np.testing.assert_array_equal(a.pi.pi, b.pi.pi)
    np.testing.assert_array_equal(a.E, b.E)
    shift = gamma * (r2 - params.r) * (T - np.arange(T + 1))
    np.testing.assert_allclose(b.D - a.D, shift, rtol=1e-9, atol=1e-12)


def test_strategy_increasing_in_lambda(cp):
    lams = np.linspace(-0.4, 6.0, 33)
    pis = np.array([solve_optimal(cp.with_(lam=l), Preferences(-5.0, 252)).pi.pi for l in lams])
    assert np.all(np.diff(pis, axis=0) > 0)
    # exactly linear one period before the horizon
    np.testing.assert_allclose(pis[:, -1], (lams + 0.5) / 6.0, rtol=1e-14)


def test_hedging_decays_towards_horizon(cp):
    table = solve_optimal(cp, Preferences(-5.0, 252))
    gap = np.abs(table.pi.pi - merton(cp, -5.0))
    assert gap[-1] == 0.0
    assert np.all(np.diff(gap[-20:]) < 0)


def test_monotone_E_examples(cp):
    table = solve_optimal(cp, Preferences(-5.0, 252))
    assert check_monotone_E(table) and np.all(table.E <= 0)
    one = solve_optimal(cp, Preferences(-5.0, 1))
    assert check_monotone_E(one) and one.E[0] < 0


@given(stationary_params(), negative_gamma, st.integers(1, 200))
def test_monotone_E_empirically(params, gamma, T):
    table = solve_optimal(params, Preferences(gamma, T), strict=False)
    assume(table.is_admissible)
    assert check_monotone_E(table)


def _inadmissible_setup():
    p = GarchParams(omega=1e-6, beta=0.9, alpha=1e-4, theta=0.0, lam=2.772)
    return p, Preferences(0.9, 2520)


def test_inadmissible_raises_with_step():
    p, prefs = _inadmissible_setup()
    with pytest.raises(InadmissibleCoefficient) as err:
        solve_optimal(p, prefs)
    t = err.value.t
    assert 0 <= t < prefs.T and f"t={t}" in str(err.value)
    table = solve_optimal(p, prefs, strict=False)
    assert table.first_violation == t and not table.is_admissible
    assert np.all(np.isnan(table.E[: t + 1])) and np.all(np.isfinite(table.E[t + 1 :]))
    assert not check_monotone_E(table)


# -- brute-force two-period oracle ---------------------------------------------------


def _two_period_foc_and_value(p, gamma, h1, pi0, pi1, nodes=80):
    """Expected utility and its pi0-derivative by nested Gauss-Hermite quadrature."""
    x, w = np.polynomial.hermite_e.hermegauss(nodes)
    w = w / w.sum()
    sq1 = math.sqrt(h1)
    excess1 = p.lam * h1 + sq1 * x
    dw1 = p.r + pi0 * excess1 + 0.5 * (pi0 - pi0**2) * h1
    h2 = p.omega + p.beta * h1 + p.alpha * (x - p.theta * sq1) ** 2
    # inner expectation over z2 for every z1 node
    dw2 = (
        p.r + pi1 * (p.lam * h2[:, None] + np.sqrt(h2)[:, None] * x[None, :])
        + 0.5 * (pi1 - pi1**2) * h2[:, None]
    )
    inner = np.exp(gamma * dw2) @ w
    util = np.exp(gamma * dw1) * inner
    value = (w @ util) / gamma
    dvalue = w @ (util * (excess1 + (0.5 - pi0) * h1))
    return value, dvalue


@pytest.mark.parametrize(
    "params, gamma, h1",
    [
        (CHRISTOFFERSEN, -5.0, 9.88e-5),
        (GarchParams(omega=1e-6, beta=0.6, alpha=2e-5, theta=120.0, lam=2.0, r=1e-4), -3.0, 4e-4),
        (GarchParams(omega=0.0, beta=0.5, alpha=5e-5, theta=-60.0, lam=1.0, r=0.0), -0.5, 1e-3),
    ],
)
def test_two_period_against_quadrature(params, gamma, h1):
    prefs = Preferences(gamma, 2)
    table = solve_optimal(params, prefs)
    pi1 = merton(params, gamma)
    root = brentq(lambda q: _two_period_foc_and_value(params, gamma, h1, q, pi1)[1],
                  -2.0, 4.0, xtol=1e-15, rtol=1e-15)
    assert table.pi[0] == pytest.approx(root, abs=1e-10)
    value, _ = _two_period_foc_and_value(params, gamma, h1, table.pi[0], pi1)
    assert value_at(table, 0, 0.0, h1) == pytest.approx(value, rel=1e-10)


# -- suboptimal schedules and WEL ------------------------------------------------------


def test_suboptimal_at_optimum_matches(cp):
    prefs = Preferences(-5.0, 2520)
    opt = solve_optimal(cp, prefs)
    sub = evaluate_suboptimal(cp, prefs, opt.pi)
    np.testing.assert_allclose(sub.E, opt.E, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(sub.D, opt.D, rtol=1e-12, atol=1e-12)
    assert wealth_equivalent_loss(opt, sub, 0, long_run_variance(cp)).loss == pytest.approx(0.0, abs=1e-12)
    assert wealth_equivalent_loss(opt, opt, 0, long_run_variance(cp)).loss == 0.0


def test_zero_schedule_is_pure_bond(cp):
    T, gamma = 300, -4.0
    sub = evaluate_suboptimal(cp, Preferences(gamma, T), np.zeros(T))
    np.testing.assert_array_equal(sub.E, 0.0)
    np.testing.assert_allclose(sub.D, gamma * cp.r * (T - np.arange(T + 1)), rtol=1e-12)


def test_merton_strictly_dominated(cp):
    prefs = Preferences(-5.0, 252)
    h = long_run_variance(cp)
    opt = solve_optimal(cp, prefs)
    sub = evaluate_suboptimal(cp, prefs, merton_schedule(cp, prefs))
    assert value_at(opt, 0, 0.0, h) > value_at(sub, 0, 0.0, h)
    assert expected_utility(cp, prefs, opt.pi, h) == pytest.approx(value_at(opt, 0, 0.0, h), rel=1e-14)


def test_value_at_terminal(cp):
    table = solve_optimal(cp, Preferences(-5.0, 10))
    assert value_at(table, 10, 0.0, 1e-4) == pytest.approx(-0.2, rel=1e-15)
    assert value_at(table, 10, 0.3, 5.0) == pytest.approx(math.exp(-1.5) / -5.0, rel=1e-15)
    with pytest.raises(IndexError):
        value_at(table, 11, 0.0, 1e-4)


@given(
    stationary_params(), negative_gamma, st.integers(1, 120),
    st.integers(0, 2**32 - 1), st.floats(0.001, 1.0), st.floats(1e-6, 1e-3),
)
def test_optimizer_dominance(params, gamma, T, seed, scale, h):
    prefs = Preferences(gamma, T)
    opt = solve_optimal(params, prefs, strict=False)
    assume(opt.is_admissible)
    rng = np.random.default_rng(seed)
    pi = opt.pi.pi + scale * rng.standard_normal(T)
    sub = evaluate_suboptimal(params, prefs, pi, strict=False)
    assume(sub.is_admissible)
    t = int(rng.integers(0, T + 1))
    w = float(rng.normal())
    vs = value_at(sub, t, w, h)
    assert value_at(opt, t, w, h) >= vs - 1e-12 * abs(vs)
    if t < T:
        assert wealth_equivalent_loss(opt, sub, t, h).loss >= -1e-12


def test_wel_small_horizon_merton_zero(cp):
    # with one period the Merton weight is optimal
    prefs = Preferences(-5.0, 1)
    opt = solve_optimal(cp, prefs)
    sub = evaluate_suboptimal(cp, prefs, merton_schedule(cp, prefs))
    assert abs(wealth_equivalent_loss(opt, sub, 0, 1e-4).loss) < 1e-15


def test_wel_grows_with_lambda(cp):
    h = long_run_variance(cp)

    def loss(p):
        prefs = Preferences(-5.0, 2520)
        opt = solve_optimal(p, prefs)
        sub = evaluate_suboptimal(p, prefs, merton_schedule(p, prefs))
        return wealth_equivalent_loss(opt, sub, 0, h).loss

    assert loss(cp.with_(lam=2 * cp.lam)) > loss(cp) > 0


def test_wel_rejects_mismatched_tables(cp):
    a = solve_optimal(cp, Preferences(-5.0, 10))
    b = solve_optimal(cp, Preferences(-5.0, 11))
    c = solve_optimal(cp, Preferences(-4.0, 10))
    d = solve_optimal(cp.with_(lam=1.0), Preferences(-5.0, 10))
    for other in (b, c, d):
        with pytest.raises(MismatchedHorizon):
            wealth_equivalent_loss(a, other, 0, 1e-4)


def test_schedule_validation():
    with pytest.raises(MismatchedHorizon):
        as_schedule([0.1, 0.2], 3)
    with pytest.raises(ValidationError):
        StrategySchedule([0.1, float("inf")])
    s = StrategySchedule([0.1, 0.2], label="x")
    with pytest.raises(ValueError):
        s.pi[0] = 1.0
    assert len(s) == 2 and s[1] == 0.2 and np.asarray(s).shape == (2,)


def test_table_arrays_read_only(cp):
    table = solve_optimal(cp, Preferences(-5.0, 5))
    with pytest.raises(ValueError):
        table.E[0] = 0.0
