import math

import numpy as np
import pytest
from scipy import optimize

from analysis.source_conditions import (
    converse_vi_bound, distance_error_bound_check, distance_function, distance_profile, head_tail_xi,
    kkt_oracle_check, kkt_xi, spectral_tail_constant, ssc_witness, vi_constant
)
from core.errors import DivisionError, InvalidArgumentError, PreconditionError
from core.utils import log_grid
from entities.filters import tikhonov
from entities.index_functions import holder
from entities.operators import (
    SourceProfile, SpectralOperator, SpectralVector, make_operator, make_solution_from_profile,
    make_source_solution
)


class _Vanishing:
    def __call__(self, lam):
        return np.zeros_like(np.asarray(lam, dtype=float))

    def describe(self):
        return "zero"


def test_vi_single_mode(single_mode):
    op, xdag = single_mode
    report = vi_constant(op, xdag, holder(1.0), 0.5, samples=20)
    assert report.C_vi == pytest.approx(1.0)
    assert report.C_spec == pytest.approx(1.0)
    assert report.forward_ok
    assert report.converse_ok


def test_vi_of_zero_solution():
    op = SpectralOperator([1.0, 0.5])
    report = vi_constant(op, SpectralVector.zeros(2), holder(1.0), 0.5, samples=10)
    assert report.C_vi == 0.0
    assert report.C_spec == 0.0


@pytest.mark.parametrize("nu", [0.25, 0.5])
def test_vi_bounds_for_source_solution(small_op, rng, nu):
    omega = rng.standard_normal(len(small_op))
    xdag = make_source_solution(small_op, holder(1.0), nu, omega)
    report = vi_constant(small_op, xdag, holder(1.0), nu)
    assert report.C_spec <= float(np.dot(omega, omega)) * (1 + 1e-12)
    assert report.C_vi <= float(np.linalg.norm(omega)) * (1 + 1e-9)
    assert report.forward_ok
    assert report.converse_ok
    assert report.converse_bound == pytest.approx(converse_vi_bound(report.C_spec, nu))
    assert report.to_dict()["test_set"]["random"] == 200


def test_vi_is_reproducible(small_op):
    xdag = make_solution_from_profile(small_op, SourceProfile(holder(0.5)))
    first = vi_constant(small_op, xdag, holder(1.0), 0.5, seed=3)
    second = vi_constant(small_op, xdag, holder(1.0), 0.5, seed=3)
    assert first.C_vi == second.C_vi
    assert first.witness == second.witness


def test_vi_rejects_bad_exponent(single_mode):
    op, xdag = single_mode
    with pytest.raises(InvalidArgumentError):
        vi_constant(op, xdag, holder(1.0), 0.0)
    with pytest.raises(InvalidArgumentError):
        vi_constant(op, xdag, holder(1.0), 1.5)


def test_converse_bound_needs_nu_below_one():
    assert converse_vi_bound(1.0, 1.0) is None
    # c**2 = 1 + 1/(1 - 1/2) = 3
    assert converse_vi_bound(1.0, 0.5) == pytest.approx(2.0 * math.sqrt(math.sqrt(3.0)))


def test_spectral_tail_constant(two_modes):
    op, xdag = two_modes
    # e = [5, 4] over phi = [1, 0.25]
    value, k = spectral_tail_constant(op, xdag, holder(1.0), 0.5)
    assert value == pytest.approx(16.0)
    assert k == 1


def test_vanishing_phi_is_rejected(two_modes):
    op, xdag = two_modes
    with pytest.raises(DivisionError):
        spectral_tail_constant(op, xdag, _Vanishing(), 0.5)


def test_ssc_grows_without_source_condition():
    op = make_operator("polynomial", 10**4, 0.5)
    xdag = make_solution_from_profile(op, SourceProfile(holder(1.0)))
    witness = ssc_witness(op, xdag, holder(1.0), 0.5, [100, 1000, 10**4])
    assert witness.is_monotone
    assert witness.unbounded_growth
    assert witness.growth_floor == pytest.approx([0.5 * math.log(10)] * 2)


def test_ssc_bounded_for_source_solution(small_op, rng):
    omega = rng.standard_normal(len(small_op))
    xdag = make_source_solution(small_op, holder(1.0), 0.5, omega)
    witness = ssc_witness(small_op, xdag, holder(1.0), 0.5, [10, 25, 50], relaxed_mu=0.25)
    assert witness.bounded_by(float(np.dot(omega, omega)))
    assert witness.witness_norm_sq[-1] == pytest.approx(float(np.dot(omega, omega)))
    assert all(r <= w * (1 + 1e-12) for r, w in zip(witness.relaxed_norm_sq, witness.witness_norm_sq))


def test_ssc_rejects_bad_arguments(small_op):
    xdag = make_solution_from_profile(small_op, SourceProfile(holder(1.0)))
    with pytest.raises(InvalidArgumentError):
        ssc_witness(small_op, xdag, holder(1.0), 0.5, [10, 10])
    with pytest.raises(InvalidArgumentError):
        ssc_witness(small_op, xdag, holder(1.0), 0.5, [10, 100])
    with pytest.raises(InvalidArgumentError):
        ssc_witness(small_op, xdag, holder(1.0), 0.5, [10, 20], relaxed_mu=0.5)


def test_distance_examples(single_mode):
    op, xdag = single_mode
    assert distance_function(op, xdag, holder(1.0), 0.0) == (1.0, math.inf)
    d, mu = distance_function(op, xdag, holder(1.0), 0.5)
    assert d == pytest.approx(0.5)
    assert mu == pytest.approx(1.0)
    assert distance_function(op, xdag, holder(1.0), 2.0) == (0.0, 0.0)
    with pytest.raises(InvalidArgumentError):
        distance_function(op, xdag, holder(1.0), -1.0)


def test_distance_of_zero_solution():
    op = SpectralOperator([1.0, 0.5])
    assert distance_function(op, SpectralVector.zeros(2), holder(1.0), 1.0) == (0.0, 0.0)


@pytest.mark.parametrize("seed", range(5))
def test_distance_beats_sampled_ball(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 7))
    sigma = np.sort(rng.uniform(0.05, 1.0, n))[::-1]
    if np.any(np.diff(sigma) >= 0):
        sigma = np.linspace(1.0, 0.1, n)
    op = SpectralOperator(sigma)
    xdag = SpectralVector(rng.standard_normal(n))
    phi = holder(1.0)
    R = 0.5 * float(np.linalg.norm(xdag.coeffs / op.lam))
    d, mu = distance_function(op, xdag, phi, R)
    xi = kkt_xi(op, xdag, phi, mu)
    assert xi.norm == pytest.approx(R, rel=1e-9)
    assert d == pytest.approx(float(np.linalg.norm(xdag.coeffs - op.lam * xi.coeffs)), rel=1e-9)
    for _ in range(200):
        direction = rng.standard_normal(n)
        zeta = R * rng.uniform() ** (1 / n) * direction / np.linalg.norm(direction)
        assert d <= np.linalg.norm(xdag.coeffs - op.lam * zeta) * (1 + 1e-9)


@pytest.mark.parametrize("nu, target, radii", [(0.5, 1.0, (1e2, 1e5)), (0.25, 0.5, (1e3, 1e6))])
def test_distance_profile_slope(rate_op, nu, target, radii):
    xdag = make_solution_from_profile(rate_op, SourceProfile(holder(target)))
    profile = distance_profile(rate_op, xdag, holder(1.0), log_grid(*radii, per_decade=10), nu=nu)
    assert profile.is_monotone
    assert profile.is_convex
    assert profile.expected_slope == pytest.approx(-nu / (1 - nu))
    assert profile.fit.slope == pytest.approx(profile.expected_slope, abs=0.05)
    assert profile.to_dict()["points"] == 31


def test_head_tail_xi(two_modes):
    op, xdag = two_modes
    xi, residual, norm = head_tail_xi(op, xdag, holder(1.0), 0.5)
    assert np.allclose(xi.coeffs, [1.0, 0.0])
    assert residual == pytest.approx(2.0)
    assert norm == pytest.approx(1.0)


def test_distance_error_bound(small_op):
    xdag = make_solution_from_profile(small_op, SourceProfile(holder(0.5)))
    report = distance_error_bound_check(small_op, xdag, tikhonov(), holder(1.0), log_grid(1e-6, 1.0, per_decade=10),
                                        xi_samples=20, seed=1)
    assert report.passed
    assert report.max_ratio <= 1.0 + 1e-12
    assert report.A <= 1.0 + 1e-9
    assert report.to_dict()["seed"] == 1


def test_distance_error_bound_needs_qualification(small_op):
    xdag = make_solution_from_profile(small_op, SourceProfile(holder(0.5)))
    with pytest.raises(PreconditionError):
        distance_error_bound_check(small_op, xdag, tikhonov(), holder(1.0), log_grid(1e-6, 1.0, per_decade=10),
                                   A_declared=0.5)


def test_distance_error_bound_rejects_unbounded_qualification(small_op):
    xdag = make_solution_from_profile(small_op, SourceProfile(holder(0.5)))
    with pytest.raises(PreconditionError, match="unbounded"):
        distance_error_bound_check(small_op, xdag, tikhonov(), holder(2.0), log_grid(1e-6, 1.0, per_decade=10))


@pytest.mark.parametrize("seed", range(100))
def test_distance_matches_root_of_ball_constraint(seed):
    rng = np.random.default_rng(1000 + seed)
    n = int(rng.integers(1, 9))
    op = SpectralOperator(np.cumprod(rng.uniform(0.3, 0.95, n)))
    x = rng.standard_normal(n)
    exact = float(np.linalg.norm(x / op.lam))
    R = exact * float(rng.uniform(0.01, 1.5))
    d, mu = distance_function(op, SpectralVector(x), holder(1.0), R)
    if R >= exact:
        assert (d, mu) == (0.0, 0.0)
        return
    root = optimize.brentq(lambda m: np.linalg.norm(op.lam * x / (op.lam ** 2 + m)) - R,
                           0.0, float(op.lam[0]) * float(np.linalg.norm(x)) / R, xtol=1e-300, rtol=1e-14)
    assert mu == pytest.approx(root, rel=1e-9)
    assert d == pytest.approx(float(np.linalg.norm(x * root / (op.lam ** 2 + root))), rel=1e-9, abs=1e-12)


def test_kkt_oracle_check():
    report = kkt_oracle_check(holder(1.0), 20, seed=7, samples=500)
    assert report.passed
    assert report.instances == 20
    assert report.to_dict()["tolerance"] == pytest.approx(1e-6)
    with pytest.raises(InvalidArgumentError):
        kkt_oracle_check(holder(1.0), 0)
