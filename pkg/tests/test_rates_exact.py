import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from analysis.rates_exact import (
    MODEL_LOG, MODEL_POWER, ErrorCurve, decade_windows, default_window, error_by_regularization,
    error_curve, error_exact, error_exact_many, exact_rate_constants, fit_log_rate, fit_power_law,
    fit_power_rate, log_negative_control, log_rate_confirmed, log_spread, lower_bound_violation, rate_constant,
    shrinking_windows, window_growth
)
from core.errors import CannotFitLogError, InvalidArgumentError, WindowError
from core.utils import log_grid
from entities.filters import iterated_tikhonov, landweber, tikhonov
from entities.index_functions import holder, logarithmic
from entities.operators import SourceProfile, SpectralVector, make_operator, make_solution_from_profile

RATE_WINDOW = [1e-7, 1e-2]


def test_single_mode_error(single_mode):
    op, xdag = single_mode
    assert error_exact(op, xdag, tikhonov(), 1.0) == 0.25


def test_two_mode_error(two_modes):
    op, xdag = two_modes
    assert error_exact(op, xdag, tikhonov(), 0.5) == pytest.approx(17.0 / 9.0)


def test_error_vanishes_for_small_alpha(rng):
    op = make_operator("polynomial", 1000, 0.5)
    assert op.lam_min == pytest.approx(1e-3)
    coeffs = rng.standard_normal(len(op))
    xdag = SpectralVector(coeffs / np.linalg.norm(coeffs))
    assert error_exact(op, xdag, tikhonov(), 1e-12) <= 1e-6


def test_error_rejects_non_positive_alpha(single_mode):
    op, xdag = single_mode
    with pytest.raises(InvalidArgumentError):
        error_exact(op, xdag, tikhonov(), 0.0)
    with pytest.raises(InvalidArgumentError):
        error_exact_many(op, xdag, tikhonov(), [1.0, -1.0])


@pytest.mark.parametrize("family", [tikhonov(), iterated_tikhonov(2), landweber()])
def test_spectral_sum_matches_regularisation(small_op, family):
    xdag = make_solution_from_profile(small_op, SourceProfile(holder(0.5)))
    for alpha in (1e-2, 0.1, 1.0):
        direct = error_exact(small_op, xdag, family, alpha)
        assert error_by_regularization(small_op, xdag, family, alpha) == pytest.approx(direct, rel=1e-10)


@given(coeffs=st.lists(st.floats(-5, 5), min_size=1, max_size=30), alpha=st.floats(1e-10, 1e3))
@settings(max_examples=50, deadline=None)
def test_error_bounded_by_solution_norm(coeffs, alpha):
    op = make_operator("polynomial", len(coeffs), 1.0)
    xdag = SpectralVector(coeffs)
    assert error_exact(op, xdag, tikhonov(), alpha) <= xdag.norm_sq * (1 + 1e-12)


@pytest.mark.parametrize("family", [tikhonov(), iterated_tikhonov(3), landweber()])
def test_lower_bound_holds_on_the_grid(small_op, family):
    xdag = make_solution_from_profile(small_op, SourceProfile(holder(0.5)))
    alphas = log_grid(1e-6, 1.0)
    worst = lower_bound_violation(small_op, xdag, family, alphas)
    assert worst <= 1e-12 * xdag.norm_sq


def test_curve_is_descending_and_monotone(small_op):
    xdag = make_solution_from_profile(small_op, SourceProfile(holder(0.5)))
    curve = error_curve(small_op, xdag, tikhonov(), log_grid(1e-6, 1.0), {"case": "test"})
    assert np.all(np.diff(curve.alpha) < 0)
    assert curve.is_monotone
    assert curve.provenance == {"case": "test"}
    again = error_curve(small_op, xdag, tikhonov(), log_grid(1e-6, 1.0))
    assert np.array_equal(curve.err_sq, again.err_sq)


def test_zero_solution_gives_zero_curve_and_no_fit(small_op):
    curve = error_curve(small_op, SpectralVector.zeros(len(small_op)), tikhonov(), log_grid(1e-6, 1.0))
    assert not np.any(curve.err_sq)
    with pytest.raises(CannotFitLogError):
        fit_power_rate(curve, window=[1e-5, 1e-1])


def test_exact_power_law_fit():
    alpha = log_grid(1e-6, 1.0)
    fit = fit_power_law(alpha, 3.0 * alpha ** 0.8)
    assert fit.model == MODEL_POWER
    assert fit.slope == pytest.approx(0.8, abs=1e-9)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.intercept == pytest.approx(math.log(3.0))


def test_power_fit_needs_enough_points():
    alpha = log_grid(1e-2, 1.0, count=5)
    with pytest.raises(CannotFitLogError):
        fit_power_law(alpha, alpha)


def test_default_window_drops_two_decades():
    assert default_window(log_grid(1e-10, 1.0)) == pytest.approx([1e-8, 1e-2])
    with pytest.raises(WindowError):
        default_window(log_grid(1e-2, 1.0))


@pytest.mark.parametrize("nu", [0.25, 0.5, 0.75])
def test_hoelder_rate_slope(rate_op, nu):
    xdag = make_solution_from_profile(rate_op, SourceProfile(holder(2 * nu)))
    alphas = log_grid(1e-10, 1.0)
    curve = error_curve(rate_op, xdag, tikhonov(), alphas)
    fit = fit_power_rate(curve, window=RATE_WINDOW)
    assert fit.slope == pytest.approx(2 * nu, abs=0.05)
    assert lower_bound_violation(rate_op, xdag, tikhonov(), alphas) <= 1e-12 * xdag.norm_sq


def test_hoelder_curve_is_sandwiched(rate_op):
    nu = 0.25
    xdag = make_solution_from_profile(rate_op, SourceProfile(holder(2 * nu)))
    curve = error_curve(rate_op, xdag, tikhonov(), log_grid(1e-7, 1e-2))
    lower = (1 - 0.5) ** 2 * curve.alpha ** (2 * nu)
    assert np.all(curve.err_sq >= lower * (1 - 1e-12))
    assert rate_constant(curve, holder(2 * nu)) < 10.0


def _log_curve(rate_op):
    xdag = make_solution_from_profile(rate_op, SourceProfile(logarithmic(0.5)))
    return error_curve(rate_op, xdag, tikhonov(), log_grid(1e-12, 1e-1))


def test_logarithmic_rate(rate_op):
    fit = fit_log_rate(_log_curve(rate_op), 0.5, window=[1e-9, 1e-3])
    assert fit.model == MODEL_LOG
    assert log_rate_confirmed(fit, 5.0)
    assert fit.low <= fit.high


def test_mismatched_logarithmic_exponent(rate_op):
    curve = _log_curve(rate_op)
    matched = fit_log_rate(curve, 0.5, window=[1e-9, 1e-3]).spread
    mismatched = fit_log_rate(curve, 0.7, window=[1e-9, 1e-3]).spread
    assert mismatched > matched
    spreads = window_growth(curve, 0.7, decade_windows(1e-6, 1e-5, 1.0, 4))
    assert all(b >= a for a, b in zip(spreads, spreads[1:]))


def test_shrinking_windows_are_nested():
    windows = shrinking_windows([1e-9, 1e-3])
    assert len(windows) == 3
    assert windows[-1] == [1e-9, 1e-3]
    for inner, outer in zip(windows, windows[1:]):
        assert outer[0] < inner[0] < inner[1] < outer[1]
    assert shrinking_windows([1e-4, 1e-3]) == [[1e-4, 1e-3]]


def test_log_negative_control(rate_op):
    control = log_negative_control(_log_curve(rate_op), 0.5, 0.7, [1e-9, 1e-3])
    assert control["ok"]
    assert control["control_spread"] > control["matched_spread"]
    assert len(control["nested_spreads"]) == 3
    with pytest.raises(InvalidArgumentError):
        log_negative_control(_log_curve(rate_op), 0.5, 0.5, [1e-9, 1e-3])


def test_log_spread_of_exact_law():
    alpha = log_grid(1e-9, 1e-3)
    err = np.abs(np.log(alpha)) ** -0.5
    assert np.allclose(log_spread(alpha, err, 0.5), 1.0)
    fit = fit_log_rate(ErrorCurve(alpha[::-1], err[::-1]), 0.5)
    assert fit.spread == pytest.approx(1.0)


def test_log_window_must_stay_below_cap():
    alpha = log_grid(1e-9, 1e-1)
    curve = ErrorCurve(alpha[::-1], np.ones(alpha.size))
    with pytest.raises(WindowError):
        fit_log_rate(curve, 0.5, window=[1e-6, 0.5], cap=0.2)
    with pytest.raises(InvalidArgumentError):
        fit_log_rate(curve, 0.0, window=[1e-6, 1e-3])


def test_rate_fit_dict():
    alpha = log_grid(1e-6, 1.0)
    data = fit_power_law(alpha, alpha).to_dict()
    assert data["model"] == "power"
    assert data["slope_or_spread"] == pytest.approx(1.0)
    assert data["n_points"] == alpha.size


def test_exact_rate_constants(single_mode):
    op, xdag = single_mode
    out = exact_rate_constants(op, xdag, holder(1.0), rho=0.5, rho_tilde=0.25, A=1.0, mu=0.5,
                               C_error=1.0, C_spec=1.0)
    assert out["spectral_from_error"] == pytest.approx(4.0)
    assert out["saturation_c"] == pytest.approx(1.0)
    assert out["error_from_spectral"] == pytest.approx(1.0 + 1.0 + 0.5 / 0.5)
    assert exact_rate_constants(op, xdag, holder(1.0)) == {}
