"""
Filter generators r_alpha, their error functions and the generator validator
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from core.errors import InvalidArgumentError, OutOfRangeError, UnknownNameError
from core.settings import (
    CONTINUITY_JUMP_TOL, GENERATOR_MARGIN, IDENTITY_TOL, JUMP_SCALE_FLOOR, MONOTONE_TOL, RHO_TILDE_MARGIN
)
from entities.operators import SpectralVector

logger = logging.getLogger(__name__)

TIKHONOV = "tikhonov"
ITERATED_TIKHONOV = "iterated_tikhonov"
LANDWEBER = "landweber"
CUTOFF = "cutoff"

FAMILY_ALIASES = {
    "tikhonov": TIKHONOV,
    "itik": ITERATED_TIKHONOV,
    "iterated_tikhonov": ITERATED_TIKHONOV,
    "landweber": LANDWEBER,
    "cutoff": CUTOFF,
}


def _scalar_or_array(value, *inputs):
    if all(np.ndim(v) == 0 for v in inputs):
        return float(value)
    return value


def _tikhonov_r(alpha, lam):
    return 1.0 / (alpha + lam)


def _tikhonov_r_tilde(alpha, lam):
    # written as a ratio so that r_tilde(alpha, alpha) is exactly 1/4
    return (alpha / (alpha + lam)) ** 2


def _landweber_steps(alpha):
    return np.ceil(1.0 / alpha)


def _landweber_r(alpha, lam):
    k = _landweber_steps(alpha)
    safe = np.where(lam > 0, lam, 1.0)
    with np.errstate(divide="ignore"):
        value = -np.expm1(k * np.log1p(-np.minimum(safe, 1.0))) / safe
    # (1 - (1 - lam)**k) / lam tends to k at lam = 0; (1 - lam)**k is 0 at lam = 1
    value = np.where(safe >= 1.0, 1.0, value)
    return np.where(lam > 0, value, k)


def _landweber_r_tilde(alpha, lam):
    k = _landweber_steps(alpha)
    # (1 - lam)**(2k) through log1p, so that it agrees with r for large k
    with np.errstate(divide="ignore"):
        return np.exp(2.0 * k * np.log1p(-np.minimum(lam, 1.0)))


@dataclass(frozen=True)
class FilterFamily:
    """
    A regularisation generator r_alpha with its error function r_tilde = (1 - lam r)**2

    Attributes:
        name (str): Family name with its parameter, e.g. "itik:3"
        kind (str): One of the built-in kinds
        r_func (callable): (alpha, lam) -> r_alpha(lam), vectorised
        r_tilde_func (callable): (alpha, lam) -> r_tilde_alpha(lam), vectorised
        rho (float, optional): Declared constant of the first generator condition
        rho_tilde (float, optional): Declared bound on r_tilde_alpha(alpha)
        lambda_max (float, optional): Largest eigenvalue the family is defined for
    """
    name: str
    kind: str
    r_func: object = field(repr=False)
    r_tilde_func: object = field(repr=False)
    rho: float = None
    rho_tilde: float = None
    lambda_max: float = None
    param: float = None

    def _check_domain(self, lam):
        if self.lambda_max is not None and np.any(np.asarray(lam) > self.lambda_max):
            raise OutOfRangeError(
                f"{self.name} is only defined for lambda <= {self.lambda_max:g}, got {np.max(lam):g}"
            )

    def r(self, alpha, lam):
        """
        Evaluate r_alpha(lam)

        Args:
            alpha (float or numpy.ndarray): Regularisation parameters > 0
            lam (float or numpy.ndarray): Spectral points >= 0, broadcast against alpha

        Returns:
            float or numpy.ndarray: Generator values
        """
        self._check_domain(lam)
        a = np.asarray(alpha, dtype=float)
        x = np.asarray(lam, dtype=float)
        return _scalar_or_array(self.r_func(a, x), alpha, lam)

    def r_tilde(self, alpha, lam):
        """Evaluate the error function r_tilde_alpha(lam), broadcasting like r()"""
        self._check_domain(lam)
        a = np.asarray(alpha, dtype=float)
        x = np.asarray(lam, dtype=float)
        return _scalar_or_array(self.r_tilde_func(a, x), alpha, lam)

    @property
    def is_tikhonov(self):
        return self.kind == TIKHONOV


def tikhonov():
    """r = 1/(alpha + lam) with rho = 1/2 and rho_tilde = 1/4"""
    return FilterFamily(
        TIKHONOV, TIKHONOV, _tikhonov_r, _tikhonov_r_tilde,
        rho=0.5, rho_tilde=0.25 + RHO_TILDE_MARGIN,
    )


def iterated_tikhonov(m):
    """
    m-times iterated Tikhonov: r_tilde = (alpha/(alpha + lam))**(2m)

    Args:
        m (int): Number of iterations, at least 2

    Returns:
        FilterFamily: The family
    """
    if int(m) != m or m < 2:
        raise InvalidArgumentError(f"iterated Tikhonov needs an integer m >= 2, got {m}")
    m = int(m)

    def r_func(alpha, lam):
        ratio = alpha / (alpha + lam)
        safe = np.where(lam > 0, lam, 1.0)
        value = -np.expm1(m * np.log(ratio)) / safe
        return np.where(lam > 0, value, m / alpha)

    def r_tilde_func(alpha, lam):
        return (alpha / (alpha + lam)) ** (2 * m)

    return FilterFamily(
        f"itik:{m}", ITERATED_TIKHONOV, r_func, r_tilde_func,
        rho_tilde=0.25 ** m + RHO_TILDE_MARGIN, param=m,
    )


def landweber():
    """Landweber with unit step and k = ceil(1/alpha) iterations; needs ||L||^2 <= 1"""
    return FilterFamily(LANDWEBER, LANDWEBER, _landweber_r, _landweber_r_tilde, lambda_max=1.0)


def cutoff(c):
    """
    Spectral cutoff: r = 1/lam for lam >= c*alpha, 0 below

    Args:
        c (float): Positive threshold factor

    Returns:
        FilterFamily: The family (it violates the continuity conditions on purpose)
    """
    if not c > 0:
        raise InvalidArgumentError(f"cutoff factor must be positive, got {c}")
    c = float(c)

    def r_func(alpha, lam):
        keep = lam >= c * alpha
        return np.where(keep, 1.0 / np.where(keep, lam, 1.0), 0.0)

    def r_tilde_func(alpha, lam):
        return np.where(lam >= c * alpha, 0.0, 1.0)

    rho = 1.0 / math.sqrt(c) if c > 1 else None
    return FilterFamily(f"cutoff:{c:g}", CUTOFF, r_func, r_tilde_func, rho=rho, param=c)


def builtin_family(name, param=None):
    """
    Look up a built-in family by name

    Args:
        name (str): tikhonov, iterated_tikhonov (itik), landweber or cutoff
        param (float, optional): m for iterated Tikhonov, c for cutoff

    Returns:
        FilterFamily: The family
    """
    kind = FAMILY_ALIASES.get(name)
    if kind == TIKHONOV:
        return tikhonov()
    if kind == LANDWEBER:
        return landweber()
    if kind == ITERATED_TIKHONOV:
        if param is None:
            raise InvalidArgumentError("iterated Tikhonov needs its iteration count m")
        return iterated_tikhonov(param)
    if kind == CUTOFF:
        if param is None:
            raise InvalidArgumentError("cutoff needs its threshold factor c")
        return cutoff(param)
    raise UnknownNameError(f"unknown filter family '{name}' (expected tikhonov, itik:m, landweber, cutoff:c)")


def parse_filter(spec):
    """
    Parse 'tikhonov', 'itik:m', 'landweber' or 'cutoff:c'

    Args:
        spec (str): Config string

    Returns:
        FilterFamily: The family
    """
    name, _, rest = spec.strip().partition(":")
    param = None
    if rest:
        try:
            param = float(rest)
        except ValueError as e:
            raise InvalidArgumentError(f"cannot parse filter parameter in '{spec}'") from e
    return builtin_family(name, param)


@dataclass
class ConditionResult:
    """
    Outcome of one generator condition

    Attributes:
        passed (bool): Whether the condition held on the checked grid
        value (float): The measured quantity (excess, increase, jump or bound)
        witness (dict): Worst-offending grid point {"alpha": .., "lambda": ..}
        detail (str): Short explanation
    """
    passed: bool
    value: float
    witness: dict
    detail: str = ""

    def to_dict(self):
        return {"passed": bool(self.passed), "value": float(self.value),
                "witness": self.witness, "detail": self.detail}


@dataclass
class GeneratorReport:
    """
    Result of checking the four generator conditions on a grid

    Attributes:
        family (str): Family name
        rho_hat (float): max of sqrt(alpha lam) r_alpha(lam)
        rho_tilde_hat (float): max of r_tilde_alpha(alpha)
        cond_i, cond_ii, cond_iii, cond_iv (ConditionResult): Per-condition results
        identity_error (float): max |r_tilde - (1 - lam r)**2|
        checked_region (dict): Grid bounds actually checked
    """
    family: str
    rho_hat: float
    rho_tilde_hat: float
    cond_i: ConditionResult
    cond_ii: ConditionResult
    cond_iii: ConditionResult
    cond_iv: ConditionResult
    identity_error: float
    checked_region: dict

    @property
    def passed(self):
        return all(c.passed for c in self.conditions().values())

    def conditions(self):
        return {"cond_i": self.cond_i, "cond_ii": self.cond_ii,
                "cond_iii": self.cond_iii, "cond_iv": self.cond_iv}

    def failed(self):
        return [name for name, c in self.conditions().items() if not c.passed]

    def to_dict(self):
        data = {name: c.to_dict() for name, c in self.conditions().items()}
        data.update({
            "family": self.family,
            "rho_hat": float(self.rho_hat),
            "rho_tilde_hat": float(self.rho_tilde_hat),
            "identity_error": float(self.identity_error),
            "checked_region": self.checked_region,
            "passed": self.passed,
        })
        return data


def _witness(alpha, lam):
    return {"alpha": float(alpha), "lambda": float(lam)}


def validate_generator(family, alpha_grid, lambda_grid):
    """
    Check the four generator conditions on a product grid

    The checks can falsify a condition but never prove it; the report records
    the region that was checked.

    Args:
        family (FilterFamily): The family to check
        alpha_grid (array-like): Positive regularisation parameters
        lambda_grid (array-like): Positive spectral points

    Returns:
        GeneratorReport: Flags, estimates and witnesses
    """
    alphas = np.sort(np.asarray(alpha_grid, dtype=float))
    lams = np.sort(np.asarray(lambda_grid, dtype=float))
    if alphas.size == 0 or lams.size == 0 or alphas[0] <= 0 or lams[0] <= 0:
        raise InvalidArgumentError("validation grids must be non-empty and positive")
    if family.lambda_max is not None:
        lams = lams[lams <= family.lambda_max]
        if lams.size == 0:
            raise InvalidArgumentError(f"no lambda grid point within the domain of {family.name}")

    A = alphas[:, None]
    L = lams[None, :]
    r = family.r(A, L)
    r_tilde = family.r_tilde(A, L)
    identity_error = float(np.max(np.abs(r_tilde - (1.0 - L * r) ** 2)))

    # (i) lam r <= 1 and sqrt(alpha lam) r <= rho < 1
    excess = L * r - 1.0
    rho_map = np.sqrt(A * L) * r
    rho_idx = np.unravel_index(np.argmax(rho_map), rho_map.shape)
    rho_hat = float(rho_map[rho_idx])
    excess_idx = np.unravel_index(np.argmax(excess), excess.shape)
    if excess[excess_idx] > IDENTITY_TOL:
        cond_i = ConditionResult(False, float(excess[excess_idx]),
                                 _witness(alphas[excess_idx[0]], lams[excess_idx[1]]),
                                 "lam * r exceeds 1")
    else:
        cond_i = ConditionResult(rho_hat <= 1.0 - GENERATOR_MARGIN, rho_hat,
                                 _witness(alphas[rho_idx[0]], lams[rho_idx[1]]),
                                 "max of sqrt(alpha * lam) * r")

    # (ii) lam -> r_tilde non-increasing
    if lams.size > 1:
        rise = r_tilde[:, 1:] - r_tilde[:, :-1]
        idx = np.unravel_index(np.argmax(rise), rise.shape)
        cond_ii = ConditionResult(rise[idx] <= MONOTONE_TOL, float(rise[idx]),
                                  _witness(alphas[idx[0]], lams[idx[1] + 1]),
                                  "largest increase of r_tilde along lambda")
    else:
        cond_ii = ConditionResult(True, 0.0, _witness(alphas[0], lams[0]), "single lambda")

    # (iii) alpha -> r_tilde non-decreasing without jumps
    if alphas.size > 1:
        step = r_tilde[1:, :] - r_tilde[:-1, :]
        drop_idx = np.unravel_index(np.argmin(step), step.shape)
        # jumps are measured against the larger neighbour, floored where r_tilde is negligible
        scale = np.maximum(np.maximum(r_tilde[1:, :], r_tilde[:-1, :]), JUMP_SCALE_FLOOR)
        relative = np.abs(step) / scale
        jump_idx = np.unravel_index(np.argmax(relative), relative.shape)
        if step[drop_idx] < -MONOTONE_TOL:
            cond_iii = ConditionResult(False, float(-step[drop_idx]),
                                       _witness(alphas[drop_idx[0] + 1], lams[drop_idx[1]]),
                                       "r_tilde decreases along alpha")
        else:
            jump = float(relative[jump_idx])
            cond_iii = ConditionResult(jump <= CONTINUITY_JUMP_TOL, jump,
                                       _witness(alphas[jump_idx[0] + 1], lams[jump_idx[1]]),
                                       "largest relative jump of r_tilde between adjacent alphas")
    else:
        cond_iii = ConditionResult(True, 0.0, _witness(alphas[0], lams[0]), "single alpha")

    # (iv) r_tilde_alpha(alpha) < 1
    diag_alphas = alphas if family.lambda_max is None else alphas[alphas <= family.lambda_max]
    if diag_alphas.size:
        diag = np.asarray(family.r_tilde(diag_alphas, diag_alphas))
        k = int(np.argmax(diag))
        rho_tilde_hat = float(diag[k])
        cond_iv = ConditionResult(rho_tilde_hat <= 1.0 - GENERATOR_MARGIN, rho_tilde_hat,
                                  _witness(diag_alphas[k], diag_alphas[k]),
                                  "max of r_tilde_alpha(alpha)")
    else:
        rho_tilde_hat = float("nan")
        cond_iv = ConditionResult(False, rho_tilde_hat, {}, "no alpha inside the lambda domain")

    region = {
        "alpha": [float(alphas[0]), float(alphas[-1])],
        "lambda": [float(lams[0]), float(lams[-1])],
        "alpha_points": int(alphas.size),
        "lambda_points": int(lams.size),
    }
    report = GeneratorReport(family.name, rho_hat, rho_tilde_hat, cond_i, cond_ii, cond_iii,
                             cond_iv, identity_error, region)
    for name in report.failed():
        logger.info("%s fails %s at %s", family.name, name, report.conditions()[name].witness)
    return report


def regularize(op, family, alpha, y):
    """
    x_alpha(y) = r_alpha(L*L) L* y in coefficient form

    Args:
        op (SpectralOperator): The operator
        family (FilterFamily): Generator
        alpha (float): Regularisation parameter > 0
        y (SpectralVector): Data

    Returns:
        SpectralVector: The regularised solution
    """
    if not alpha > 0:
        raise InvalidArgumentError(f"alpha must be positive, got {alpha}")
    y.check_matches(op)
    return SpectralVector(family.r(alpha, op.lam) * op.sigma * y.coeffs)
