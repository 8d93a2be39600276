import math

import numpy as np
import pytest

from hypothesis import given, settings, strategies as st

from analysis.rates_exact import error_exact, error_exact_many
from analysis.rates_noisy import (
    GeneratorConstants, PsiFunctions, build_adversarial, generator_constants, log_psi_residual,
    lower_constant, noisy_error_many, noisy_sweep, psi_lower_constant, psi_of_delta, solve_alpha_delta,
    solve_log_psi, trivial_bound, worst_case_bracket
)
from core.errors import DeltaRangeError, InvalidArgumentError, TrivialCaseError
from core.utils import log_grid
from entities.filters import cutoff, iterated_tikhonov, landweber, tikhonov
from entities.index_functions import holder, logarithmic
from entities.operators import (
    SourceProfile, SpectralOperator, SpectralVector, make_operator, make_solution_from_profile
)

TIKHONOV_CONSTANTS = GeneratorConstants(rho=0.5, rho_tilde=0.25)


def test_alpha_delta_single_mode(single_mode):
    op, xdag = single_mode
    # alpha * (alpha / (1 + alpha))**2 = 1/4 at alpha = 1
    assert solve_alpha_delta(op, xdag, tikhonov(), 0.5) == pytest.approx(1.0, rel=1e-10)
    with pytest.raises(InvalidArgumentError):
        solve_alpha_delta(op, xdag, tikhonov(), 0.0)


def test_adversarial_single_mode(single_mode):
    op, xdag = single_mode
    adv = build_adversarial(op, xdag, tikhonov(), 0.5, rho_tilde=0.25)
    assert adv.alpha_delta == pytest.approx(1.0)
    assert list(adv.band) == [0]
    assert adv.a_delta == 1.0
    assert not adv.fallback
    assert adv.noise.norm == pytest.approx(0.5)
    assert adv.noise.coeffs[0] < 0


def test_band_fallback_when_residual_vanishes():
    op = SpectralOperator([1.0, 0.5])
    xdag = SpectralVector([1.0, 0.0])
    alpha = 0.2
    delta = math.sqrt(alpha * (alpha / (1 + alpha)) ** 2)
    adv = build_adversarial(op, xdag, tikhonov(), delta, rho_tilde=0.25)
    assert adv.alpha_delta == pytest.approx(alpha, rel=1e-9)
    assert list(adv.band) == [1]
    assert adv.fallback
    assert np.allclose(adv.noise.coeffs, [0.0, delta])


def test_noise_norm_on_rate_spectrum(rate_op):
    xdag = make_solution_from_profile(rate_op, SourceProfile(holder(1.0)))
    adv = build_adversarial(rate_op, xdag, tikhonov(), 1e-5, rho_tilde=0.25)
    assert adv.noise.norm == pytest.approx(1e-5, rel=1e-12)
    assert np.all(rate_op.lam[adv.band] <= 2 * adv.alpha_delta)
    assert np.all(tikhonov().r_tilde(adv.alpha_delta, rate_op.lam[adv.band]) <= adv.rho_tilde_used)


def test_bracket_constants():
    assert TIKHONOV_CONSTANTS.C1 == 2.25
    assert lower_constant(0.25) == 0.125
    assert trivial_bound(0.5, 0.1, 0.5) == pytest.approx(0.005)
    with pytest.raises(InvalidArgumentError):
        trivial_bound(0.5, 0.1, 0.0)


def test_tikhonov_generator_constants():
    constants = generator_constants(tikhonov())
    assert constants.rho == pytest.approx(0.5)
    assert constants.rho_tilde == 0.25
    assert constants.to_dict()["C1"] == pytest.approx(2.25)


def test_noisy_error_without_noise_is_exact_error(small_op):
    xdag = make_solution_from_profile(small_op, SourceProfile(holder(0.5)))
    alphas = log_grid(1e-4, 1.0)
    noisy = noisy_error_many(small_op, xdag, tikhonov(), alphas, SpectralVector.zeros(len(small_op)))
    assert np.allclose(noisy, error_exact_many(small_op, xdag, tikhonov(), alphas), rtol=1e-10)


def test_bracket_single_mode(single_mode):
    op, xdag = single_mode
    report = worst_case_bracket(op, xdag, tikhonov(), 0.5, log_grid(1e-4, 1e2), TIKHONOV_CONSTANTS)
    assert report.upper == pytest.approx(2.25 * 0.25)
    assert report.lower == pytest.approx(0.125 * 0.25)
    assert report.contains()
    assert report.to_dict()["contained"] is True
    assert not report.trivial


def test_trivial_case_uses_epsilon_bound(single_mode):
    op, xdag = single_mode
    family = cutoff(2.0)
    with pytest.raises(TrivialCaseError) as info:
        solve_alpha_delta(op, xdag, family, 0.1)
    epsilon = info.value.epsilon
    # the error vanishes exactly for alpha <= 1/2
    assert 0.5 / 10 ** 0.1 < epsilon <= 0.5

    constants = GeneratorConstants(rho=1 / math.sqrt(2), rho_tilde=1.0)
    report = worst_case_bracket(op, xdag, family, 0.1, log_grid(1e-4, 1e2), constants)
    assert report.trivial
    assert report.alpha_delta is None
    assert report.lower is None
    assert report.upper == pytest.approx(0.5 * 0.01 / epsilon)
    assert math.isnan(report.row()[1])


def test_noisy_sweep_on_rate_spectrum(rate_op):
    xdag = make_solution_from_profile(rate_op, SourceProfile(holder(1.0)))
    sweep = noisy_sweep(rate_op, xdag, tikhonov(), log_grid(1e-7, 1e-3, count=20),
                        log_grid(1e-10, 1.0), TIKHONOV_CONSTANTS)
    assert len(sweep.reports) + len(sweep.skipped) == 20
    assert len(sweep.reports) >= 10
    assert sweep.all_contained
    assert sweep.fit.slope == pytest.approx(1.0, abs=0.05)
    deltas = [row[0] for row in sweep.rows()]
    assert deltas == sorted(deltas)


def test_hoelder_psi():
    assert psi_of_delta(holder(1.0), 0.01) == pytest.approx(0.01)
    assert psi_of_delta(holder(0.5), 0.01) == pytest.approx(0.01 ** (2 / 3), rel=1e-12)
    assert psi_of_delta(holder(0.5), 0.01) == pytest.approx(0.0464, abs=1e-4)
    with pytest.raises(DeltaRangeError):
        psi_of_delta(holder(1.0), 0.0)


def test_phi_tilde_inverse_for_log_rate():
    psi = PsiFunctions(logarithmic(0.5))
    alpha = psi.phi_tilde_inverse(1e-4)
    assert psi.phi_tilde(alpha) == pytest.approx(1e-4, rel=1e-10)
    assert psi.psi(1e-4) == pytest.approx(1e-8 / alpha)


def test_psi_lower_constant():
    a, delta0 = psi_lower_constant(holder(1.0), 0.01)
    assert a == pytest.approx(100.0)
    assert delta0 == pytest.approx(0.01)
    for delta in (1e-3, 5e-3):
        assert psi_of_delta(holder(1.0), delta) >= a * delta ** 2
    with pytest.raises(InvalidArgumentError):
        psi_lower_constant(holder(1.0), 0.0)


def test_log_psi_is_bracketed():
    psi = solve_log_psi(0.5, 1e-6)
    assert abs(2 * math.log(1e-6)) ** -0.5 <= psi <= abs(math.log(1e-6)) ** -0.5
    assert 0.1903 <= psi <= 0.2691
    assert abs(log_psi_residual(0.5, 1e-6, psi)) <= 1e-10


def test_log_psi_rejects_large_delta():
    with pytest.raises(DeltaRangeError):
        solve_log_psi(0.5, 0.7)
    with pytest.raises(InvalidArgumentError):
        solve_log_psi(0.0, 1e-3)


@pytest.mark.parametrize("family", [tikhonov(), iterated_tikhonov(2), landweber()], ids=lambda f: f.name)
def test_balance_function_is_strictly_increasing(small_op, family):
    xdag = make_solution_from_profile(small_op, SourceProfile(holder(0.5)))
    alphas = log_grid(1e-5, 1e2)
    balance = alphas * error_exact_many(small_op, xdag, family, alphas)
    assert np.all(np.diff(balance) > 0)


@given(alpha=st.floats(1e-6, 10.0), seed=st.integers(0, 2**16), delta=st.floats(1e-6, 1e-1))
@settings(max_examples=50, deadline=None)
def test_noisy_error_obeys_triangle_bound(alpha, seed, delta):
    op = make_operator("polynomial", 50, 1.0)
    xdag = make_solution_from_profile(op, SourceProfile(holder(0.5)))
    direction = np.random.default_rng(seed).standard_normal(len(op))
    noise = SpectralVector(delta * direction / np.linalg.norm(direction))
    noisy = noisy_error_many(op, xdag, tikhonov(), [alpha], noise)[0]
    bound = math.sqrt(error_exact(op, xdag, tikhonov(), alpha)) + 0.5 * delta / math.sqrt(alpha)
    assert math.sqrt(noisy) <= bound * (1 + 1e-12)


@pytest.mark.parametrize("exponent", range(4, 11))
def test_log_psi_bracket_across_noise_levels(exponent):
    delta = 10.0 ** -exponent
    psi = solve_log_psi(0.5, delta)
    assert abs(2 * math.log(delta)) ** -0.5 <= psi <= abs(math.log(delta)) ** -0.5
    assert abs(log_psi_residual(0.5, delta, psi)) <= 1e-10


def test_log_psi_increases_with_noise():
    psis = [solve_log_psi(0.5, delta) for delta in log_grid(1e-10, 1e-4, count=25)]
    assert all(b > a for a, b in zip(psis, psis[1:]))


def test_band_ends_at_last_eigenvalue_of_the_scan(small_op):
    xdag = make_solution_from_profile(small_op, SourceProfile(holder(0.5)))
    adv = build_adversarial(small_op, xdag, tikhonov(), 1e-2)
    lam = small_op.lam
    assert adv.a_delta == lam[adv.band[-1]] == lam[adv.band].min()
    assert np.all(lam[adv.band] <= 2 * adv.alpha_delta)
    below = lam[lam < adv.a_delta]
    if below.size:
        assert tikhonov().r_tilde(adv.alpha_delta, below[0]) > adv.rho_tilde_used
