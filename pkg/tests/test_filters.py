import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from core.errors import InvalidArgumentError, OutOfRangeError, UnknownNameError
from core.utils import log_grid
from entities.filters import (
    builtin_family, cutoff, iterated_tikhonov, landweber, parse_filter, regularize, tikhonov,
    validate_generator
)
from entities.operators import SpectralOperator, SpectralVector, apply_forward

GRID = log_grid(1e-8, 1e2)


def test_tikhonov_values():
    f = tikhonov()
    assert f.r(1.0, 1.0) == 0.5
    assert f.r_tilde(1.0, 1.0) == 0.25
    assert f.rho == 0.5


def test_tikhonov_diagonal_is_exactly_a_quarter():
    f = tikhonov()
    assert np.all(f.r_tilde(GRID, GRID) == 0.25)


def test_iterated_tikhonov_diagonal():
    assert iterated_tikhonov(2).r_tilde(0.3, 0.3) == pytest.approx(1.0 / 16.0)
    with pytest.raises(InvalidArgumentError):
        iterated_tikhonov(1)


def test_landweber_values():
    f = landweber()
    assert f.r_tilde(0.1, 0.1) == pytest.approx(0.9 ** 20)
    assert f.r(0.1, 1.0) == pytest.approx(1.0)
    with pytest.raises(OutOfRangeError):
        f.r(0.1, 2.0)
    with pytest.raises(OutOfRangeError):
        f.r_tilde(0.1, np.array([0.5, 1.5]))


@pytest.mark.parametrize("family", [tikhonov(), iterated_tikhonov(3), landweber(), cutoff(2.0)])
def test_error_function_identity(family):
    lams = GRID[GRID <= 1.0] if family.lambda_max else GRID
    A = GRID[:, None]
    L = lams[None, :]
    r_tilde = family.r_tilde(A, L)
    assert np.all((r_tilde >= 0) & (r_tilde <= 1))
    assert np.max(np.abs(r_tilde - (1 - L * family.r(A, L)) ** 2)) <= 1e-12


def test_parse_filter():
    assert parse_filter("tikhonov").name == "tikhonov"
    assert parse_filter("itik:3").name == "itik:3"
    assert parse_filter("cutoff:2").param == 2.0
    assert parse_filter("landweber").lambda_max == 1.0
    with pytest.raises(UnknownNameError):
        parse_filter("showalter")
    with pytest.raises(InvalidArgumentError):
        parse_filter("itik")
    with pytest.raises(InvalidArgumentError):
        parse_filter("cutoff:x")
    with pytest.raises(InvalidArgumentError):
        builtin_family("cutoff", -1.0)


def test_tikhonov_passes_all_conditions():
    report = validate_generator(tikhonov(), GRID, GRID)
    assert report.passed
    assert report.rho_hat <= 0.5 + 1e-9
    assert report.rho_tilde_hat == 0.25
    assert report.identity_error <= 1e-12
    assert report.checked_region["alpha"] == pytest.approx([1e-8, 1e2])


def test_cutoff_fails_continuity_and_diagonal():
    report = validate_generator(cutoff(2.0), GRID, GRID)
    assert not report.passed
    assert report.failed() == ["cond_iii", "cond_iv"]
    assert report.cond_iv.value == 1.0
    assert report.cond_iii.witness
    assert report.cond_iv.witness
    data = report.to_dict()
    assert data["passed"] is False
    assert data["cond_iii"]["passed"] is False


def test_landweber_is_monotone_in_lambda():
    report = validate_generator(landweber(), GRID, GRID)
    assert report.cond_ii.passed
    assert report.checked_region["lambda"][1] <= 1.0


def test_continuity_jump_is_relative():
    # k drops from 2 to 1 between the two alphas: r_tilde goes 1/16 -> 1/4 at lambda = 1/2
    report = validate_generator(landweber(), [0.9, 1.1], [0.5])
    assert not report.cond_iii.passed
    assert report.cond_iii.value == pytest.approx(0.75)
    assert validate_generator(tikhonov(), GRID, GRID).cond_iii.value < 0.1


def test_iterated_tikhonov_passes():
    report = validate_generator(iterated_tikhonov(2), GRID, GRID)
    assert report.passed
    assert report.rho_tilde_hat == pytest.approx(1.0 / 16.0)


def test_validate_rejects_bad_grids():
    with pytest.raises(InvalidArgumentError):
        validate_generator(tikhonov(), [], GRID)
    with pytest.raises(InvalidArgumentError):
        validate_generator(tikhonov(), [0.0, 1.0], GRID)


def test_regularize_examples():
    x = regularize(SpectralOperator([1.0]), tikhonov(), 1.0, SpectralVector([1.0]))
    assert np.allclose(x.coeffs, [0.5])

    op = SpectralOperator([1.0, 0.1])
    x = regularize(op, cutoff(1.0), 0.5, SpectralVector([1.0, 0.1]))
    assert np.allclose(x.coeffs, [1.0, 0.0])

    with pytest.raises(InvalidArgumentError):
        regularize(op, tikhonov(), 0.0, SpectralVector([1.0, 0.1]))


def test_regularize_small_alpha_recovers_solution():
    op = SpectralOperator([1.0])
    xdag = SpectralVector([0.7])
    x = regularize(op, tikhonov(), 1e-14, apply_forward(op, xdag))
    assert x.coeffs[0] == pytest.approx(0.7, rel=1e-12)


@given(alpha=st.floats(1e-6, 1e2), q=st.floats(0.05, 0.95))
@settings(max_examples=50, deadline=None)
def test_tikhonov_hoelder_qualification(alpha, q):
    f = tikhonov()
    lam = GRID
    ratio = lam ** q * f.r_tilde(alpha, lam) ** q / alpha ** q
    assert np.max(ratio) <= 1 + 1e-9


@pytest.mark.parametrize("family", [tikhonov(), iterated_tikhonov(2), landweber()], ids=lambda f: f.name)
@pytest.mark.parametrize("alpha", [1e-3, 1e-2, 0.1, 1.0])
def test_noise_amplification_is_bounded(small_op, family, alpha):
    rho_hat = validate_generator(family, GRID, GRID).rho_hat
    rng = np.random.default_rng(7)
    y = apply_forward(small_op, SpectralVector(rng.standard_normal(len(small_op))))
    noise = SpectralVector(rng.standard_normal(len(small_op)))
    gap = regularize(small_op, family, alpha, y + noise) - regularize(small_op, family, alpha, y)
    # grid estimate of rho, hence the small slack
    assert gap.norm_sq <= (1.01 * rho_hat) ** 2 * noise.norm_sq / alpha


@given(
    y=st.lists(st.floats(-10, 10), min_size=6, max_size=6),
    z=st.lists(st.floats(-10, 10), min_size=6, max_size=6),
    c=st.floats(-10, 10),
    alpha=st.floats(1e-4, 10.0),
)
@settings(max_examples=50, deadline=None)
def test_regularize_is_linear(y, z, c, alpha):
    op = SpectralOperator(np.linspace(1.0, 0.1, 6))
    a, b = SpectralVector(y), SpectralVector(z)
    for family in (tikhonov(), landweber()):
        total = regularize(op, family, alpha, a + b).coeffs
        parts = (regularize(op, family, alpha, a) + regularize(op, family, alpha, b)).coeffs
        assert np.allclose(total, parts, rtol=1e-12, atol=1e-9)
        scaled = regularize(op, family, alpha, a.scaled(c)).coeffs
        assert np.allclose(scaled, c * regularize(op, family, alpha, a).coeffs, rtol=1e-12, atol=1e-9)
