"""
Variational inequalities, standard source condition witnesses and the distance function
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from analysis.rates_exact import error_exact_many, fit_power_law
from analysis.spectral_analysis import check_qualification, qualification_is_bounded
from core.errors import CannotFitLogError, DivisionError, InvalidArgumentError, PreconditionError
from core.settings import (
    DEFAULT_SEED, DEFAULT_VI_SAMPLES, DEFAULT_XI_SAMPLES, KKT_ORACLE_MAX_SIZE, KKT_ORACLE_SAMPLES,
    KKT_ORACLE_TOL, KKT_RTOL, MIN_FIT_POINTS, MONOTONE_TOL, SSC_TOL, VI_TOL
)
from core.utils import monotone_root
from entities.operators import SpectralOperator, SpectralVector, spectral_function

logger = logging.getLogger(__name__)

# relative slack for comparing both sides of the distance error bound
_BOUND_RTOL = 1e-12


def _phi_on_spectrum(op, phi):
    values = np.asarray(phi(op.lam), dtype=float)
    if np.any(values <= 0):
        k = int(np.argmin(values))
        raise DivisionError(f"{phi.describe()} vanishes at lambda={op.lam[k]:g}")
    return values


def spectral_tail_constant(op, xdag, phi, nu):
    """
    C_spec = max over eigenvalues of e(lam_i) / phi(lam_i)**(2 nu)

    Args:
        op (SpectralOperator): The operator
        xdag (SpectralVector): The solution
        phi (IndexFunction): Rate function, positive on the spectrum
        nu (float): Exponent

    Returns:
        tuple: (C_spec, index of the maximiser)
    """
    phi_values = _phi_on_spectrum(op, phi)
    ratio = spectral_function(op, xdag, op.lam) / phi_values ** (2.0 * nu)
    k = int(np.argmax(ratio))
    return float(ratio[k]), k


@dataclass
class VariationalReport:
    """
    Estimated constants of the variational inequality and the spectral tail bound

    C_vi is a maximum over a finite test set and therefore a lower bound of the
    supremum over all x.

    Attributes:
        nu (float): Exponent in (0, 1]
        C_vi (float): max of <x_dag, x> / (||phi(L*L) x||**nu ||x||**(1-nu))
        C_spec (float): max of e(lam_i) / phi**(2 nu)(lam_i)
        converse_bound (float, optional): 2 C_spec**((1-nu)/2) c**nu with c**2 = C_spec (1 + 1/(1-nu))
        test_set (dict): Sizes of each test family and the seed
        witness (dict): Test vector attaining C_vi
    """
    nu: float
    C_vi: float
    C_spec: float
    converse_bound: float
    test_set: dict
    witness: dict = field(default_factory=dict)

    @property
    def forward_ok(self):
        return self.C_spec <= self.C_vi ** 2 * (1.0 + VI_TOL) + VI_TOL

    @property
    def converse_ok(self):
        if self.converse_bound is None:
            return True
        return self.C_vi <= self.converse_bound * (1.0 + VI_TOL) + VI_TOL

    def to_dict(self):
        return {
            "nu": self.nu, "C_vi": self.C_vi, "C_spec": self.C_spec,
            "converse_bound": self.converse_bound,
            "forward_ok": self.forward_ok, "converse_ok": self.converse_ok,
            "test_set": self.test_set, "witness": self.witness,
            "note": "C_vi is the maximum over the listed test vectors, a lower bound of the supremum",
        }


def converse_vi_bound(C_spec, nu):
    if nu >= 1:
        return None
    c = math.sqrt(C_spec * (1.0 + 1.0 / (1.0 - nu)))
    return 2.0 * C_spec ** ((1.0 - nu) / 2.0) * c ** nu


def _vi_ratio(inner, phi_norm_sq, norm_sq, nu):
    with np.errstate(divide="ignore", invalid="ignore"):
        denom = np.power(phi_norm_sq, nu / 2.0) * np.power(norm_sq, (1.0 - nu) / 2.0)
        ratio = np.where(norm_sq > 0, inner / denom, -np.inf)
    return ratio


def vi_constant(op, xdag, phi, nu, samples=DEFAULT_VI_SAMPLES, seed=DEFAULT_SEED):
    """
    Estimate the variational-inequality constant over a structured test set

    The test set holds every basis vector, every head and tail projection of
    x_dag at a spectral split, x_dag itself and `samples` random unit vectors.

    Args:
        op (SpectralOperator): The operator
        xdag (SpectralVector): The solution
        phi (IndexFunction): Rate function, positive on the spectrum
        nu (float): Exponent in (0, 1]
        samples (int): Number of random test vectors
        seed (int): Seed of the random test vectors

    Returns:
        VariationalReport: C_vi, C_spec and the converse bound
    """
    if not 0 < nu <= 1:
        raise InvalidArgumentError(f"nu must lie in (0, 1], got {nu}")
    xdag.check_matches(op)
    phi_values = _phi_on_spectrum(op, phi)
    x = xdag.coeffs
    x2 = x * x
    phi2x2 = phi_values ** 2 * x2
    candidates = []

    # basis vectors: <x_dag, e_i> = x_i, ||phi e_i|| = phi_i
    basis = x / phi_values ** nu
    candidates.append(("basis", basis))

    # heads E_[0, lam_j] x_dag hold indices i >= j (j = 0 is x_dag itself), tails hold i < j
    head_mass = np.cumsum(x2[::-1])[::-1]
    head_phi = np.cumsum(phi2x2[::-1])[::-1]
    candidates.append(("head", _vi_ratio(head_mass, head_phi, head_mass, nu)))
    tail_mass = np.cumsum(x2)[:-1]
    tail_phi = np.cumsum(phi2x2)[:-1]
    candidates.append(("tail", _vi_ratio(tail_mass, tail_phi, tail_mass, nu)))

    rng = np.random.default_rng(seed)
    if samples > 0:
        vectors = rng.standard_normal((samples, len(op)))
        vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
        inner = vectors @ x
        phi_norm_sq = (vectors ** 2) @ (phi_values ** 2)
        candidates.append(("random", _vi_ratio(inner, phi_norm_sq, np.ones(samples), nu)))

    best, witness = -np.inf, {}
    for kind, ratio in candidates:
        if ratio.size == 0:
            continue
        k = int(np.argmax(ratio))
        if ratio[k] > best:
            best = float(ratio[k])
            witness = {"kind": kind, "index": k}
    C_vi = max(best, 0.0)
    C_spec, _ = spectral_tail_constant(op, xdag, phi, nu)
    report = VariationalReport(
        nu=float(nu), C_vi=C_vi, C_spec=C_spec, converse_bound=converse_vi_bound(C_spec, nu),
        test_set={"basis": len(op), "heads": len(op), "tails": max(len(op) - 1, 0),
                  "xdag": 1, "random": int(samples), "seed": int(seed)},
        witness=witness,
    )
    if not (report.forward_ok and report.converse_ok):
        logger.warning("variational constants out of their bounds: C_vi=%g C_spec=%g", C_vi, C_spec)
    return report


@dataclass
class SscWitness:
    """
    Partial sums of the standard-source-condition witness norm

    Attributes:
        dims (list): Truncation dimensions
        witness_norm_sq (list): sum_{i <= n} x_i**2 / phi**(2 nu)(lam_i) per dimension
        growth_floor (list): 0.5 * 2 nu * log(phi(lam_na)/phi(lam_nb)) per consecutive pair
        relaxed_mu (float, optional): Exponent mu < nu of the relaxed sums
        relaxed_norm_sq (list): Partial sums with phi**(2 mu)
    """
    dims: list
    witness_norm_sq: list
    growth_floor: list
    nu: float
    relaxed_mu: float = None
    relaxed_norm_sq: list = field(default_factory=list)

    @property
    def increments(self):
        w = self.witness_norm_sq
        return [w[k + 1] - w[k] for k in range(len(w) - 1)]

    @property
    def is_monotone(self):
        return all(d >= -SSC_TOL for d in self.increments)

    @property
    def unbounded_growth(self):
        """Whether every consecutive increment reaches its logarithmic floor"""
        return bool(self.increments) and all(
            d >= f for d, f in zip(self.increments, self.growth_floor)
        )

    def bounded_by(self, bound):
        return max(self.witness_norm_sq) <= bound + SSC_TOL

    def to_dict(self):
        return {
            "dims": self.dims, "nu": self.nu,
            "witness_norm_sq": self.witness_norm_sq,
            "increments": self.increments, "growth_floor": self.growth_floor,
            "unbounded_growth": self.unbounded_growth,
            "relaxed_mu": self.relaxed_mu, "relaxed_norm_sq": self.relaxed_norm_sq,
        }


def ssc_witness(op, xdag, phi, nu, dims, relaxed_mu=None):
    """
    Truncated norms of the would-be source element omega = phi**-nu x_dag

    Args:
        op (SpectralOperator): The operator
        xdag (SpectralVector): The solution
        phi (IndexFunction): Rate function, positive on the spectrum
        nu (float): Exponent
        dims (list): Increasing truncation dimensions, each at most the spectrum size
        relaxed_mu (float, optional): Exponent mu < nu for the relaxed sums

    Returns:
        SscWitness: Partial sums and growth floors
    """
    dims = [int(d) for d in dims]
    if not dims or any(b <= a for a, b in zip(dims, dims[1:])):
        raise InvalidArgumentError(f"truncation dimensions must be increasing, got {dims}")
    if dims[0] < 1 or dims[-1] > len(op):
        raise InvalidArgumentError(f"truncation dimensions must lie in [1, {len(op)}], got {dims}")
    xdag.check_matches(op)
    phi_values = _phi_on_spectrum(op, phi)
    x2 = xdag.coeffs ** 2
    partial = np.cumsum(x2 / phi_values ** (2.0 * nu))
    witness = [float(partial[d - 1]) for d in dims]
    floor = [
        0.5 * 2.0 * nu * math.log(phi_values[a - 1] / phi_values[b - 1])
        for a, b in zip(dims, dims[1:])
    ]
    relaxed = []
    if relaxed_mu is not None:
        if not 0 < relaxed_mu < nu:
            raise InvalidArgumentError(f"relaxed exponent must lie in (0, nu), got {relaxed_mu}")
        relaxed_partial = np.cumsum(x2 / phi_values ** (2.0 * relaxed_mu))
        relaxed = [float(relaxed_partial[d - 1]) for d in dims]
    return SscWitness(dims, witness, floor, float(nu), relaxed_mu, relaxed)


def kkt_xi(op, xdag, phi, mu):
    """xi_i = phi_i x_i / (phi_i**2 + mu), the minimiser for the multiplier mu"""
    phi_values = np.asarray(phi(op.lam), dtype=float)
    return SpectralVector(phi_values * xdag.coeffs / (phi_values ** 2 + mu))


def distance_function(op, xdag, phi, R):
    """
    d_phi(R) = min over ||xi|| <= R of ||x_dag - phi(L*L) xi||

    Args:
        op (SpectralOperator): The operator
        xdag (SpectralVector): The solution
        phi (IndexFunction): Rate function
        R (float): Radius >= 0

    Returns:
        tuple: (d, mu) with mu the multiplier of the ball constraint
    """
    if not R >= 0:
        raise InvalidArgumentError(f"radius must be non-negative, got {R}")
    xdag.check_matches(op)
    x = xdag.coeffs
    if R == 0:
        return xdag.norm, math.inf
    if not np.any(x):
        return 0.0, 0.0
    phi_values = np.asarray(phi(op.lam), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = np.where(x != 0, x / phi_values, 0.0)
    if float(np.sum(exact ** 2)) <= R * R:
        return 0.0, 0.0

    def excess(mu):
        return float(np.linalg.norm(phi_values * x / (phi_values ** 2 + mu))) - R

    upper = float(np.max(phi_values)) * xdag.norm / R
    mu = monotone_root(excess, 0.0, upper, rtol=KKT_RTOL, what="ball multiplier")
    d = float(np.linalg.norm(x * mu / (phi_values ** 2 + mu)))
    return d, float(mu)


@dataclass
class DistanceProfile:
    """
    Distance function on a radius grid

    Attributes:
        rows (list): (R, d, mu) per radius, ascending R
        fit (RateFit, optional): Slope of log d against log R over positive d
        expected_slope (float, optional): -nu/(1-nu) when nu is known
    """
    rows: list
    fit: object = None
    expected_slope: float = None

    @property
    def radii(self):
        return np.array([r[0] for r in self.rows])

    @property
    def distances(self):
        return np.array([r[1] for r in self.rows])

    @property
    def is_monotone(self):
        d = self.distances
        return bool(np.all(np.diff(d) <= MONOTONE_TOL * max(float(d.max(initial=0.0)), 1.0)))

    @property
    def is_convex(self):
        R, d = self.radii, self.distances
        if R.size < 3:
            return True
        slopes = np.diff(d) / np.diff(R)
        return bool(np.all(np.diff(slopes) >= -MONOTONE_TOL * max(float(np.max(np.abs(slopes))), 1e-300)))

    def to_dict(self):
        return {
            "fit": None if self.fit is None else self.fit.to_dict(),
            "expected_slope": self.expected_slope,
            "monotone": self.is_monotone,
            "convex": self.is_convex,
            "points": len(self.rows),
        }


def distance_profile(op, xdag, phi, R_grid, nu=None):
    """
    Tabulate d_phi over a radius grid and fit its decay

    Args:
        op (SpectralOperator): The operator
        xdag (SpectralVector): The solution
        phi (IndexFunction): Rate function
        R_grid (array-like): Radii
        nu (float, optional): Exponent of the spectral decay, sets the expected slope

    Returns:
        DistanceProfile: Rows, fit and expected slope
    """
    radii = np.sort(np.asarray(R_grid, dtype=float))
    rows = []
    for R in radii:
        d, mu = distance_function(op, xdag, phi, float(R))
        rows.append((float(R), d, mu))
    positive = [(R, d) for R, d, _ in rows if d > 0]
    fit = None
    if len(positive) >= MIN_FIT_POINTS:
        try:
            fit = fit_power_law([p[0] for p in positive], [p[1] for p in positive])
        except CannotFitLogError as e:
            logger.warning("no distance fit: %s", e)
    expected = None
    if nu is not None and nu < 1:
        expected = -nu / (1.0 - nu)
    return DistanceProfile(rows, fit, expected)


def head_tail_xi(op, xdag, phi, alpha):
    """
    xi_alpha = phi(L*L)**-1 applied to the part of x_dag above alpha

    Args:
        op (SpectralOperator): The operator
        xdag (SpectralVector): The solution
        phi (IndexFunction): Rate function, positive on the spectrum
        alpha (float): Split point

    Returns:
        tuple: (xi_alpha, ||x_dag - phi xi_alpha||, ||xi_alpha||)
    """
    phi_values = _phi_on_spectrum(op, phi)
    above = op.lam > alpha
    xi = np.where(above, xdag.coeffs / phi_values, 0.0)
    residual = float(np.linalg.norm(np.where(above, 0.0, xdag.coeffs)))
    return SpectralVector(xi), residual, float(np.linalg.norm(xi))


@dataclass
class DistanceBoundReport:
    """
    Check of ||x_alpha(y) - x_dag|| <= ||x_dag - phi xi|| + A phi(alpha) ||xi||

    Attributes:
        A (float): Qualification constant used
        pairs (int): Number of (xi, alpha) pairs checked
        violations (int): Pairs where the bound failed
        max_ratio (float): Largest lhs/rhs over all pairs
        witness (dict): Pair attaining max_ratio
        seed (int): Seed of the random xi samples
    """
    A: float
    pairs: int
    violations: int
    max_ratio: float
    witness: dict
    seed: int

    @property
    def passed(self):
        return self.violations == 0

    def to_dict(self):
        return {"A": self.A, "pairs": self.pairs, "violations": self.violations,
                "max_ratio": self.max_ratio, "witness": self.witness,
                "seed": self.seed, "passed": self.passed}


def _xi_samples(op, xdag, phi, alpha_grid, count, rng):
    samples = [("zero", SpectralVector.zeros(len(op)))]
    split_alphas = np.quantile(np.asarray(alpha_grid, dtype=float), [0.1, 0.3, 0.5, 0.7, 0.9])
    phi_values = _phi_on_spectrum(op, phi)
    for a in split_alphas:
        xi, _, _ = head_tail_xi(op, xdag, phi, float(a))
        samples.append((f"tail@{a:.3g}", xi))
        below = op.lam <= a
        samples.append((f"head@{a:.3g}", SpectralVector(np.where(below, xdag.coeffs / phi_values, 0.0))))
    exact_norm = float(np.linalg.norm(xdag.coeffs / phi_values))
    for R in exact_norm * np.logspace(-4, -1, 4):
        _, mu = distance_function(op, xdag, phi, float(R))
        samples.append((f"kkt@{R:.3g}", kkt_xi(op, xdag, phi, mu)))
    for k in range(count):
        direction = rng.standard_normal(len(op))
        scale = 10.0 ** rng.uniform(-3, 3)
        samples.append((f"random{k}", SpectralVector(scale * direction / np.linalg.norm(direction))))
    return samples


def distance_error_bound_check(op, xdag, family, phi, alpha_grid, xi_samples=DEFAULT_XI_SAMPLES,
                               seed=DEFAULT_SEED, A_declared=None):
    """
    Verify the distance-function error bound on sampled xi and grid alphas

    The constant A is the qualification estimate with exponent 1/2 on the same
    alpha grid and the spectrum of the operator, so the bound is exact there.
    Without A_declared the qualification itself must hold: its estimate may not
    grow when the grids are widened.

    Args:
        op (SpectralOperator): The operator
        xdag (SpectralVector): The solution
        family (FilterFamily): Generator
        phi (IndexFunction): Rate function
        alpha_grid (array-like): Alphas to check
        xi_samples (int): Number of random xi
        seed (int): Seed of the random xi
        A_declared (float, optional): Constant the qualification estimate must not exceed

    Returns:
        DistanceBoundReport: Violations and the tightest ratio
    """
    alphas = np.asarray(alpha_grid, dtype=float)
    if A_declared is None:
        bounded, _, wide = qualification_is_bounded(phi, family, 0.5, alphas, op.lam)
        if not bounded:
            raise PreconditionError(
                f"qualification with exponent 1/2 is unbounded: A_hat grows to {wide:g} on wider grids"
            )
    qualification = check_qualification(phi, family, 0.5, alphas, op.lam, A_declared=A_declared)
    if not qualification.passed:
        raise PreconditionError(
            f"qualification with exponent 1/2 fails: A_hat={qualification.A_hat:g} at {qualification.witness}"
        )
    A = qualification.A_hat
    lhs = np.sqrt(error_exact_many(op, xdag, family, alphas))
    phi_alpha = np.asarray(phi(alphas), dtype=float)
    phi_values = np.asarray(phi(op.lam), dtype=float)

    rng = np.random.default_rng(seed)
    pairs = violations = 0
    worst, witness = -np.inf, {}
    for name, xi in _xi_samples(op, xdag, phi, alphas, xi_samples, rng):
        distance = float(np.linalg.norm(xdag.coeffs - phi_values * xi.coeffs))
        rhs = distance + A * phi_alpha * xi.norm
        ok = lhs <= rhs * (1.0 + _BOUND_RTOL) + 1e-300
        pairs += alphas.size
        violations += int(np.count_nonzero(~ok))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(rhs > 0, lhs / rhs, np.where(lhs > 0, np.inf, 0.0))
        k = int(np.argmax(ratio))
        if ratio[k] > worst:
            worst = float(ratio[k])
            witness = {"xi": name, "alpha": float(alphas[k])}
    if violations:
        logger.warning("distance error bound violated at %d of %d pairs", violations, pairs)
    return DistanceBoundReport(A=float(A), pairs=pairs, violations=violations,
                               max_ratio=worst, witness=witness, seed=int(seed))


@dataclass
class KktOracleReport:
    """
    Distance function against an independent root of the ball constraint

    Attributes:
        instances (int): Random instances checked
        max_gap (float): Largest |d - d_oracle|
        worst (dict): Instance attaining max_gap
        sample_violations (int): Sampled points of the ball that beat d
        samples (int): Points sampled per instance
        seed (int): Seed of the instances
    """
    instances: int
    max_gap: float
    worst: dict
    sample_violations: int
    samples: int
    seed: int

    @property
    def passed(self):
        return self.max_gap <= KKT_ORACLE_TOL and self.sample_violations == 0

    def to_dict(self):
        return {"instances": self.instances, "max_gap": self.max_gap, "worst": self.worst,
                "sample_violations": self.sample_violations, "samples": self.samples,
                "seed": self.seed, "tolerance": KKT_ORACLE_TOL, "passed": self.passed}


def _oracle_distance(x, phi_values, R):
    if float(np.linalg.norm(x / phi_values)) <= R:
        return 0.0
    upper = float(np.max(phi_values)) * float(np.linalg.norm(x)) / R
    mu = optimize.brentq(
        lambda m: float(np.linalg.norm(phi_values * x / (phi_values ** 2 + m))) - R,
        0.0, upper, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500,
    )
    return float(np.linalg.norm(x * mu / (phi_values ** 2 + mu)))


def kkt_oracle_check(phi, instances, seed=DEFAULT_SEED, max_size=KKT_ORACLE_MAX_SIZE,
                     samples=KKT_ORACLE_SAMPLES):
    """
    Compare distance_function with a direct root of the ball constraint on random small instances

    Every instance draws a size up to max_size, a strictly decreasing spectrum,
    a solution and a radius on both sides of ||phi**-1 x_dag||. Points sampled
    uniformly from the ball must never beat the returned distance.

    Args:
        phi (IndexFunction): Rate function, positive on the spectrum
        instances (int): Number of random instances
        seed (int): Seed of the instances
        max_size (int): Largest spectrum size
        samples (int): Ball points sampled per instance

    Returns:
        KktOracleReport: Largest gap and sampled violations
    """
    if instances < 1 or max_size < 1:
        raise InvalidArgumentError(f"need at least one instance of size >= 1, got {instances}, {max_size}")
    rng = np.random.default_rng(seed)
    max_gap, worst, violations = 0.0, {}, 0
    for k in range(instances):
        n = int(rng.integers(1, max_size + 1))
        op = SpectralOperator(np.cumprod(rng.uniform(0.3, 0.95, n)))
        xdag = SpectralVector(rng.standard_normal(n))
        phi_values = _phi_on_spectrum(op, phi)
        R = float(np.linalg.norm(xdag.coeffs / phi_values)) * float(rng.uniform(0.05, 1.5))
        d, _ = distance_function(op, xdag, phi, R)
        gap = abs(d - _oracle_distance(xdag.coeffs, phi_values, R))
        if gap >= max_gap:
            max_gap, worst = gap, {"instance": k, "size": n, "R": R, "d": d}

        directions = rng.standard_normal((samples, n))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        xi = directions * (R * rng.uniform(size=samples) ** (1.0 / n))[:, None]
        sampled = np.linalg.norm(xdag.coeffs - phi_values * xi, axis=1)
        violations += int(np.count_nonzero(sampled < d * (1.0 - 1e-9) - 1e-12))
    if violations or max_gap > KKT_ORACLE_TOL:
        logger.warning("distance oracle mismatch: gap %g, %d sampled points below d", max_gap, violations)
    return KktOracleReport(instances=int(instances), max_gap=float(max_gap), worst=worst,
                           sample_violations=violations, samples=int(samples), seed=int(seed))
