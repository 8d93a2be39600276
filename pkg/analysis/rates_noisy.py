"""
Noisy data: the balancing parameter alpha_delta, adversarial perturbations,
worst-case brackets and the rate transfer functions phi_tilde and psi
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from analysis.rates_exact import error_exact, error_exact_many, fit_power_law
from core.errors import (
    AlphaNotInSpectrumError, BracketError, CannotFitLogError, DeltaRangeError,
    InvalidArgumentError, TrivialCaseError
)
from core.settings import (
    ALPHA_DELTA_RTOL, ALPHA_RANGE, BRACKET_FACTOR, BRACKET_LOG_ALPHA,
    BRACKET_LOG_PSI_INVERSE, KKT_RTOL, LAMBDA_RANGE, MIN_FIT_POINTS
)
from core.utils import log_grid, monotone_root
from entities.filters import validate_generator
from entities.index_functions import KIND_HOLDER
from entities.operators import SpectralVector, apply_forward

logger = logging.getLogger(__name__)

# points per decade of the coarse scan that brackets alpha_delta
_SCAN_PER_DECADE = 10
_CHUNK = 256


@dataclass
class GeneratorConstants:
    """
    Constants of a generator used by the noisy bounds

    Attributes:
        rho (float): max(estimated rho_hat, declared rho)
        rho_tilde (float): Estimated sup of r_tilde_alpha(alpha)
    """
    rho: float
    rho_tilde: float

    @property
    def C1(self):
        return (1.0 + self.rho) ** 2

    def to_dict(self):
        return {"rho": self.rho, "rho_tilde": self.rho_tilde, "C1": self.C1}


def generator_constants(family, report=None):
    """
    Constants for the noisy bounds, from a generator report or the default grids

    Args:
        family (FilterFamily): Generator
        report (GeneratorReport, optional): Report to take the estimates from

    Returns:
        GeneratorConstants: rho and rho_tilde
    """
    if report is None:
        report = validate_generator(family, log_grid(*ALPHA_RANGE), log_grid(*LAMBDA_RANGE))
    rho = max(report.rho_hat, family.rho or 0.0)
    return GeneratorConstants(rho=float(rho), rho_tilde=float(report.rho_tilde_hat))


def lower_constant(rho_tilde):
    """C0 = (1 - sqrt(rho_tilde))**2 / 2"""
    return 0.5 * (1.0 - math.sqrt(rho_tilde)) ** 2


def trivial_bound(rho, delta, epsilon):
    """rho**2 delta**2 / epsilon, the bound when the exact error vanishes on (0, epsilon]"""
    if not epsilon > 0:
        raise InvalidArgumentError(f"epsilon must be positive, got {epsilon}")
    return rho ** 2 * delta ** 2 / epsilon


def solve_alpha_delta(op, xdag, family, delta):
    """
    Solve alpha * ||x_alpha(y) - x_dag||**2 = delta**2

    Args:
        op (SpectralOperator): The operator
        xdag (SpectralVector): The solution
        family (FilterFamily): Generator
        delta (float): Noise level > 0

    Returns:
        float: alpha_delta
    """
    if not delta > 0:
        raise InvalidArgumentError(f"noise level must be positive, got {delta}")
    target = delta * delta
    scan = log_grid(math.exp(BRACKET_LOG_ALPHA[0]), math.exp(BRACKET_LOG_ALPHA[1]),
                    per_decade=_SCAN_PER_DECADE)
    err = error_exact_many(op, xdag, family, scan)
    if err[0] == 0:
        zero = np.flatnonzero(err == 0)
        # zeros form a prefix because the error is monotone in alpha
        epsilon = float(scan[zero[-1]])
        raise TrivialCaseError(f"exact error vanishes for alpha <= {epsilon:g}", epsilon)
    balance = scan * err
    above = np.flatnonzero(balance >= target)
    if above.size == 0:
        raise BracketError(f"delta={delta:g} too large: alpha*err stays below delta**2 up to alpha={scan[-1]:g}")
    k = int(above[0])
    if k == 0:
        raise BracketError(f"delta={delta:g} too small: alpha*err exceeds delta**2 at alpha={scan[0]:g}")
    alpha = monotone_root(
        lambda a: a * error_exact(op, xdag, family, a) - target,
        float(scan[k - 1]), float(scan[k]), rtol=ALPHA_DELTA_RTOL, what="alpha_delta",
    )
    logger.debug("delta=%g: alpha_delta=%g", delta, alpha)
    return float(alpha)


@dataclass(eq=False)
class AdversarialData:
    """
    Perturbed data built on the spectral band [a_delta, 2 alpha_delta]

    Attributes:
        alpha_delta (float): Balancing parameter
        a_delta (float): Lower edge of the band (an eigenvalue)
        band (numpy.ndarray): Indices of the band eigenvalues
        z_delta (SpectralVector): Direction supported on the band
        y (SpectralVector): Exact data
        y_tilde (SpectralVector): y + delta z_delta / ||z_delta||
        rho_tilde_used (float): Threshold on r_tilde that defined the band
        fallback (bool): Whether a unit band vector replaced a vanishing residual
    """
    alpha_delta: float
    a_delta: float
    band: np.ndarray
    z_delta: SpectralVector
    y: SpectralVector
    y_tilde: SpectralVector
    rho_tilde_used: float
    fallback: bool = False

    @property
    def noise(self):
        return self.y_tilde - self.y


def band_indices(op, family, alpha_delta, rho_tilde):
    """
    Eigenvalues in [a_delta, 2 alpha_delta] where r_tilde_{alpha_delta} <= rho_tilde

    The scan starts at the largest eigenvalue not above 2 alpha_delta and walks
    down the spectrum until r_tilde exceeds rho_tilde. a_delta is the last
    (smallest) eigenvalue reached, not the largest eigenvalue below alpha_delta,
    so the band may reach below alpha_delta.

    Args:
        op (SpectralOperator): The operator
        family (FilterFamily): Generator
        alpha_delta (float): Balancing parameter
        rho_tilde (float): Threshold on the error function

    Returns:
        numpy.ndarray: Indices (in spectrum order) of the band
    """
    candidates = np.flatnonzero(op.lam <= 2.0 * alpha_delta)
    if candidates.size == 0:
        return candidates
    values = np.asarray(family.r_tilde(alpha_delta, op.lam[candidates]))
    # scan downward from 2 alpha_delta while r_tilde stays below the threshold
    stop = np.flatnonzero(values > rho_tilde)
    end = stop[0] if stop.size else candidates.size
    return candidates[:end]


def build_adversarial(op, xdag, family, delta, alpha_delta=None, rho_tilde=None):
    """
    Perturb the exact data inside the spectral band around alpha_delta

    Args:
        op (SpectralOperator): The operator
        xdag (SpectralVector): The solution
        family (FilterFamily): Generator
        delta (float): Noise level
        alpha_delta (float, optional): Precomputed balancing parameter
        rho_tilde (float, optional): Estimated sup of r_tilde_alpha(alpha); defaults to the declared value

    Returns:
        AdversarialData: The perturbation and its band
    """
    if alpha_delta is None:
        alpha_delta = solve_alpha_delta(op, xdag, family, delta)
    at_alpha = float(family.r_tilde(alpha_delta, min(alpha_delta, family.lambda_max or alpha_delta)))
    rho_tilde_used = max(rho_tilde if rho_tilde is not None else (family.rho_tilde or 0.0), at_alpha)
    band = band_indices(op, family, alpha_delta, rho_tilde_used)
    if band.size == 0:
        raise AlphaNotInSpectrumError(
            f"no eigenvalue in [a_delta, {2 * alpha_delta:g}] for delta={delta:g}"
        )

    y = apply_forward(op, xdag)
    r = np.asarray(family.r(alpha_delta, op.lam[band]))
    z = np.zeros(len(op))
    z[band] = (r * op.lam[band] - 1.0) * op.sigma[band] * xdag.coeffs[band]
    norm = float(np.linalg.norm(z))
    fallback = norm == 0.0
    if fallback:
        z[band[0]] = 1.0
        norm = 1.0
        logger.info("residual vanishes on the band for delta=%g, using a unit band vector", delta)
    z_delta = SpectralVector(z)
    y_tilde = SpectralVector(y.coeffs + delta * z / norm)
    return AdversarialData(
        alpha_delta=float(alpha_delta), a_delta=float(op.lam[band[-1]]), band=band,
        z_delta=z_delta, y=y, y_tilde=y_tilde, rho_tilde_used=float(rho_tilde_used),
        fallback=fallback,
    )


def noisy_error_many(op, xdag, family, alphas, noise):
    """
    ||x_alpha(y + noise) - x_dag||**2 for an array of alphas

    Args:
        op (SpectralOperator): The operator
        xdag (SpectralVector): The solution
        family (FilterFamily): Generator
        alphas (array-like): Positive alphas
        noise (SpectralVector): Data perturbation

    Returns:
        numpy.ndarray: Squared errors
    """
    alphas = np.asarray(alphas, dtype=float)
    out = np.empty(alphas.size)
    for start in range(0, alphas.size, _CHUNK):
        block = alphas[start:start + _CHUNK][:, None]
        r = family.r(block, op.lam[None, :])
        per_mode = (r * op.lam - 1.0) * xdag.coeffs + r * op.sigma * noise.coeffs
        out[start:start + _CHUNK] = np.sum(per_mode ** 2, axis=1)
    return out


@dataclass
class NoisyRateReport:
    """
    Two-sided bracket of the worst-case error at one noise level

    Attributes:
        delta (float): Noise level
        alpha_delta (float, optional): Balancing parameter (None in the trivial case)
        upper (float): C1 delta**2 / alpha_delta, or rho**2 delta**2 / epsilon
        lower (float, optional): C0 delta**2 / alpha_delta
        adversarial (float): min over the alpha grid of the error for the adversarial data
        adversarial_alpha (float): Minimiser on the grid
        constants (dict): rho, rho_tilde, C0, C1 actually used
    """
    delta: float
    alpha_delta: float
    upper: float
    lower: float
    adversarial: float
    adversarial_alpha: float
    constants: dict = field(default_factory=dict)
    band_size: int = 0
    a_delta: float = None
    trivial: bool = False
    epsilon: float = None

    def contains(self, factor=BRACKET_FACTOR):
        """Whether lower/factor <= adversarial <= upper*factor"""
        if self.adversarial > self.upper * factor:
            return False
        return self.lower is None or self.adversarial >= self.lower / factor

    def row(self):
        nan = float("nan")
        return (
            self.delta,
            nan if self.alpha_delta is None else self.alpha_delta,
            nan if self.lower is None else self.lower,
            self.adversarial,
            self.upper,
        )

    def to_dict(self):
        return {
            "delta": self.delta, "alpha_delta": self.alpha_delta,
            "upper": self.upper, "lower": self.lower,
            "adversarial": self.adversarial, "adversarial_alpha": self.adversarial_alpha,
            "constants": self.constants, "band_size": self.band_size, "a_delta": self.a_delta,
            "trivial": self.trivial, "epsilon": self.epsilon, "contained": self.contains(),
        }


def worst_case_bracket(op, xdag, family, delta, alpha_grid, constants=None):
    """
    Bracket the worst-case noisy error at one noise level

    Args:
        op (SpectralOperator): The operator
        xdag (SpectralVector): The solution
        family (FilterFamily): Generator
        delta (float): Noise level
        alpha_grid (array-like): Alphas over which the infimum is taken
        constants (GeneratorConstants, optional): rho and rho_tilde to use

    Returns:
        NoisyRateReport: Upper bound, constructive lower bound and adversarial value
    """
    if constants is None:
        constants = generator_constants(family)
    alphas = np.asarray(alpha_grid, dtype=float)
    try:
        alpha_delta = solve_alpha_delta(op, xdag, family, delta)
    except TrivialCaseError as e:
        return _trivial_report(op, xdag, family, delta, alphas, constants, e.epsilon)

    adv = build_adversarial(op, xdag, family, delta, alpha_delta, rho_tilde=constants.rho_tilde)
    grid = np.unique(np.append(alphas, alpha_delta))
    values = noisy_error_many(op, xdag, family, grid, adv.noise)
    k = int(np.argmin(values))
    c0 = lower_constant(adv.rho_tilde_used)
    base = delta * delta / alpha_delta
    report = NoisyRateReport(
        delta=float(delta), alpha_delta=alpha_delta,
        upper=constants.C1 * base, lower=c0 * base,
        adversarial=float(values[k]), adversarial_alpha=float(grid[k]),
        constants={"rho": constants.rho, "rho_tilde": adv.rho_tilde_used, "C0": c0, "C1": constants.C1},
        band_size=int(adv.band.size), a_delta=adv.a_delta,
    )
    if not report.contains():
        logger.warning("delta=%g: adversarial value %g outside [%g, %g]",
                       delta, report.adversarial, report.lower, report.upper)
    return report


def _trivial_report(op, xdag, family, delta, alphas, constants, epsilon):
    logger.info("trivial case for delta=%g with epsilon=%g", delta, epsilon)
    noise = np.zeros(len(op))
    # the smallest eigenvalue amplifies noise the most
    noise[-1] = delta
    grid = np.unique(np.append(alphas, epsilon))
    values = noisy_error_many(op, xdag, family, grid, SpectralVector(noise))
    k = int(np.argmin(values))
    return NoisyRateReport(
        delta=float(delta), alpha_delta=None,
        upper=trivial_bound(constants.rho, delta, epsilon), lower=None,
        adversarial=float(values[k]), adversarial_alpha=float(grid[k]),
        constants={"rho": constants.rho, "rho_tilde": constants.rho_tilde},
        trivial=True, epsilon=float(epsilon),
    )


@dataclass
class NoisySweep:
    """
    Reports over a grid of noise levels

    Attributes:
        reports (list): NoisyRateReport per admissible delta, ascending
        skipped (list): (delta, reason) for deltas without a usable band
        fit (RateFit, optional): Slope of the adversarial value against delta
    """
    reports: list
    skipped: list
    fit: object = None

    @property
    def all_contained(self):
        return all(r.contains() for r in self.reports)

    def rows(self):
        return [r.row() for r in self.reports]


def noisy_sweep(op, xdag, family, delta_grid, alpha_grid, constants=None):
    """
    Run worst_case_bracket over a grid of noise levels

    Args:
        op (SpectralOperator): The operator
        xdag (SpectralVector): The solution
        family (FilterFamily): Generator
        delta_grid (array-like): Noise levels
        alpha_grid (array-like): Alphas for the infimum
        constants (GeneratorConstants, optional): Constants to use

    Returns:
        NoisySweep: Per-delta reports, skipped deltas and the delta-slope fit
    """
    if constants is None:
        constants = generator_constants(family)
    reports, skipped = [], []
    for delta in np.sort(np.asarray(delta_grid, dtype=float)):
        try:
            reports.append(worst_case_bracket(op, xdag, family, float(delta), alpha_grid, constants))
        except (AlphaNotInSpectrumError, BracketError) as e:
            logger.info("skipping delta=%g: %s", delta, e)
            skipped.append((float(delta), str(e)))
    fit = None
    if len(reports) >= MIN_FIT_POINTS:
        try:
            fit = fit_power_law([r.delta for r in reports], [r.adversarial for r in reports])
        except CannotFitLogError as e:
            logger.warning("no delta-slope fit: %s", e)
    return NoisySweep(reports, skipped, fit)


@dataclass(frozen=True)
class PsiFunctions:
    """
    Rate transfer functions phi_tilde(alpha) = sqrt(alpha phi(alpha)) and
    psi(delta) = delta**2 / phi_tilde^{-1}(delta)

    Attributes:
        phi (IndexFunction): The exact-data rate
    """
    phi: object

    def phi_tilde(self, alpha):
        alpha = np.asarray(alpha, dtype=float)
        out = np.sqrt(alpha * self.phi(alpha))
        return float(out) if out.ndim == 0 else out

    def phi_tilde_inverse(self, delta):
        """
        Solve phi_tilde(alpha) = delta

        Args:
            delta (float): Value in the range of phi_tilde

        Returns:
            float: alpha
        """
        if not delta > 0:
            raise DeltaRangeError(f"delta must be positive, got {delta}")
        if self.phi.kind == KIND_HOLDER:
            return delta ** (2.0 / (1.0 + self.phi.exponent))
        scan = np.arange(BRACKET_LOG_PSI_INVERSE[0], BRACKET_LOG_PSI_INVERSE[1] + 1.0)
        values = self.phi_tilde(np.exp(scan))
        above = np.flatnonzero(values >= delta)
        if above.size == 0 or above[0] == 0:
            raise DeltaRangeError(f"delta={delta:g} outside the range of phi_tilde")
        k = int(above[0])
        return monotone_root(
            lambda a: self.phi_tilde(a) / delta - 1.0,
            float(math.exp(scan[k - 1])), float(math.exp(scan[k])),
            rtol=KKT_RTOL, what="phi_tilde inverse",
        )

    def psi(self, delta):
        if self.phi.kind == KIND_HOLDER:
            if not delta > 0:
                raise DeltaRangeError(f"delta must be positive, got {delta}")
            q = self.phi.exponent
            return delta ** (2.0 * q / (1.0 + q))
        return delta * delta / self.phi_tilde_inverse(delta)


def psi_of_delta(phi, delta):
    """psi(delta) = delta**2 / phi_tilde^{-1}(delta), closed form for the Hoelder kind"""
    return PsiFunctions(phi).psi(delta)


def psi_lower_constant(phi, alpha0):
    """
    Constants (a, delta0) with psi(delta) >= a delta**2 on (0, delta0)

    Args:
        phi (IndexFunction): Rate function
        alpha0 (float): Any positive parameter; a = 1/alpha0, delta0 = phi_tilde(alpha0)

    Returns:
        tuple: (a, delta0)
    """
    if not alpha0 > 0:
        raise InvalidArgumentError(f"alpha0 must be positive, got {alpha0}")
    return 1.0 / alpha0, PsiFunctions(phi).phi_tilde(alpha0)


def solve_log_psi(nu, delta):
    """
    Solve psi = |log(delta**2 / psi)|**-nu for the logarithmic Tikhonov rate

    Args:
        nu (float): Logarithmic exponent > 0
        delta (float): Noise level in (0, e**-0.5)

    Returns:
        float: psi(delta), with |2 log delta|**-nu <= psi <= |log delta|**-nu
    """
    if not nu > 0:
        raise InvalidArgumentError(f"logarithmic exponent must be positive, got {nu}")
    if not 0 < delta < math.exp(-0.5):
        raise DeltaRangeError(f"delta={delta:g} too large: no root of the implicit equation in (0, 1)")
    two_log_delta = 2.0 * math.log(delta)

    def residual(s):
        # s = log psi in (2 log delta, 0); increasing in s
        return s + nu * math.log(s - two_log_delta)

    lower = two_log_delta + abs(two_log_delta) * 1e-12
    s = monotone_root(residual, lower, 0.0, rtol=KKT_RTOL, what="logarithmic psi")
    return math.exp(s)


def log_psi_residual(nu, delta, psi):
    """psi - |log(delta**2 / psi)|**-nu"""
    return psi - abs(math.log(delta * delta / psi)) ** (-nu)