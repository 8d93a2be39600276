"""
Structural conditions on an index function and an error function: qualification,
sub-homogeneity and the two ratio conditions of the noisy-rate equivalence
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from core.errors import InvalidArgumentError
from core.settings import (
    GAMMA_RANGE, QUALIFICATION_EXTEND_DECADES, QUALIFICATION_GROWTH_TOL, RATIO_POINTS_PER_DECADE
)
from core.utils import log_grid

logger = logging.getLogger(__name__)

# Remark for Tikhonov: a quadratic bound on g yields the lower ratio condition with 1/4
TIKHONOV_LOWER_RATIO = 0.25


def _domain_lambdas(family, lambda_grid):
    lams = np.sort(np.asarray(lambda_grid, dtype=float))
    if family.lambda_max is not None:
        lams = lams[lams <= family.lambda_max]
    if lams.size == 0 or lams[0] <= 0:
        raise InvalidArgumentError("lambda grid must contain positive points inside the family's domain")
    return lams


@dataclass
class QualificationReport:
    """
    Estimate of the qualification constant A in phi(lam) r_tilde**mu <= A phi(alpha)

    Attributes:
        mu (float): Exponent in (0, 1)
        A_hat (float): Maximum over the whole grid
        witness (dict): (alpha, lambda) attaining A_hat
        A_active (float): Maximum over alpha <= lam < cap, the region where the
            logarithmic construction establishes the bound
        witness_active (dict): (alpha, lambda) attaining A_active
        A_declared (float, optional): Constant to compare against
    """
    mu: float
    phi: str
    family: str
    A_hat: float
    witness: dict
    A_active: float
    witness_active: dict
    active_region: dict
    A_declared: float = None

    @property
    def passed(self):
        if self.A_declared is None:
            return bool(np.isfinite(self.A_hat))
        return bool(self.A_hat <= self.A_declared)

    def to_dict(self):
        return {
            "mu": self.mu, "phi": self.phi, "family": self.family,
            "A_hat": float(self.A_hat), "witness": self.witness,
            "A_active": float(self.A_active), "witness_active": self.witness_active,
            "active_region": self.active_region, "A_declared": self.A_declared,
            "passed": self.passed,
        }


def qualification_ratio(phi, family, mu, alpha, lam):
    """phi(lam) r_tilde_alpha(lam)**mu / phi(alpha), broadcasting alpha against lam"""
    with np.errstate(divide="ignore", invalid="ignore"):
        return phi(lam) * np.power(family.r_tilde(alpha, lam), mu) / phi(alpha)


def check_qualification(phi, family, mu, alpha_grid, lambda_grid, A_declared=None):
    """
    Estimate the qualification constant on a grid

    Args:
        phi (IndexFunction): Rate function
        family (FilterFamily): Generator
        mu (float): Exponent in (0, 1)
        alpha_grid (array-like): Positive parameters
        lambda_grid (array-like): Positive spectral points
        A_declared (float, optional): Constant the estimate is compared to

    Returns:
        QualificationReport: Global and active-region estimates with witnesses
    """
    if not 0 < mu < 1:
        raise InvalidArgumentError(f"qualification exponent must lie in (0, 1), got {mu}")
    alphas = np.sort(np.asarray(alpha_grid, dtype=float))
    lams = _domain_lambdas(family, lambda_grid)

    ratio = qualification_ratio(phi, family, mu, alphas[:, None], lams[None, :])
    ratio = np.where(np.isnan(ratio), -np.inf, ratio)
    idx = np.unravel_index(np.argmax(ratio), ratio.shape)
    A_hat = float(ratio[idx])
    witness = {"alpha": float(alphas[idx[0]]), "lambda": float(lams[idx[1]])}

    cap = phi.cap if phi.cap is not None else math.inf
    active = (lams[None, :] >= alphas[:, None]) & (lams[None, :] < cap)
    if np.any(active):
        masked = np.where(active, ratio, -np.inf)
        a_idx = np.unravel_index(np.argmax(masked), masked.shape)
        A_active = float(masked[a_idx])
        witness_active = {"alpha": float(alphas[a_idx[0]]), "lambda": float(lams[a_idx[1]])}
    else:
        A_active = float("nan")
        witness_active = {}

    report = QualificationReport(
        mu=float(mu), phi=phi.describe(), family=family.name,
        A_hat=A_hat, witness=witness, A_active=A_active, witness_active=witness_active,
        active_region={"lambda_at_least": "alpha", "lambda_below": None if math.isinf(cap) else cap},
        A_declared=A_declared,
    )
    logger.debug("qualification of %s for %s with mu=%g: A_hat=%g, active %g",
                 report.phi, family.name, mu, A_hat, A_active)
    return report


def qualification_is_bounded(phi, family, mu, alpha_grid, lambda_grid, decades=QUALIFICATION_EXTEND_DECADES):
    """
    Whether the qualification estimate settles when both grids are widened

    A finite supremum barely moves when the grids gain a few decades on each
    side, while an unbounded ratio keeps growing with them.

    Args:
        phi (IndexFunction): Rate function
        family (FilterFamily): Generator
        mu (float): Exponent in (0, 1)
        alpha_grid (array-like): Positive parameters
        lambda_grid (array-like): Positive spectral points
        decades (float): Decades added at both ends of both grids

    Returns:
        tuple: (bounded, A_hat on the given grids, A_hat on the widened grids)
    """
    alphas = np.sort(np.asarray(alpha_grid, dtype=float))
    lams = _domain_lambdas(family, lambda_grid)
    base = check_qualification(phi, family, mu, alphas, lams).A_hat
    factor = 10.0 ** decades
    wide_alphas = np.union1d(alphas, log_grid(alphas[0] / factor, alphas[-1] * factor,
                                              per_decade=RATIO_POINTS_PER_DECADE))
    wide_lams = np.union1d(lams, log_grid(lams[0] / factor, lams[-1] * factor,
                                          per_decade=RATIO_POINTS_PER_DECADE))
    wide = check_qualification(phi, family, mu, wide_alphas, wide_lams).A_hat
    bounded = bool(np.isfinite(base) and np.isfinite(wide) and wide <= base * QUALIFICATION_GROWTH_TOL)
    if not bounded:
        logger.info("qualification of %s for %s grows from %g to %g on wider grids",
                    phi.describe(), family.name, base, wide)
    return bounded, base, wide


@dataclass
class RatioConditionReport:
    """
    Constants of the sub-homogeneity bound and the two ratio conditions

    Attributes:
        C_upper (float): sup of r_tilde_alpha/r_tilde_beta * phi(beta)/phi(alpha) on alpha <= beta <= lam
        C_lower (float): inf of the same quantity on lam <= alpha <= beta
        g_table (dict): {"gamma": [...], "g": [...]} with g(gamma) = max_alpha phi(gamma alpha)/phi(alpha)
        quad_bound_C (float): Smallest C with g(gamma) <= C/4 (1 + gamma**2) on the gamma grid
        implied (dict): Constants implied for Tikhonov by a finite quadratic bound
    """
    C_upper: float = None
    C_lower: float = None
    witness_upper: dict = field(default_factory=dict)
    witness_lower: dict = field(default_factory=dict)
    g_table: dict = field(default_factory=dict)
    quad_bound_C: float = None
    implied: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "C_upper": self.C_upper, "C_lower": self.C_lower,
            "witness_upper": self.witness_upper, "witness_lower": self.witness_lower,
            "g_table": self.g_table, "quad_bound_C": self.quad_bound_C,
            "implied": self.implied,
        }


def check_subhomogeneity(phi, gamma_grid, alpha_grid):
    """
    Tabulate g(gamma) = max over alpha of phi(gamma alpha)/phi(alpha)

    Args:
        phi (IndexFunction): Rate function
        gamma_grid (array-like): Positive scaling factors
        alpha_grid (array-like): Positive parameters

    Returns:
        RatioConditionReport: Report with g_table and quad_bound_C filled in
    """
    gammas = np.sort(np.asarray(gamma_grid, dtype=float))
    alphas = np.asarray(alpha_grid, dtype=float)
    if gammas.size == 0 or alphas.size == 0 or gammas[0] <= 0 or np.min(alphas) <= 0:
        raise InvalidArgumentError("sub-homogeneity grids must be non-empty and positive")
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = phi(gammas[:, None] * alphas[None, :]) / phi(alphas)[None, :]
    g = np.nanmax(ratio, axis=1)
    quad = float(np.max(4.0 * g / (1.0 + gammas ** 2)))
    return RatioConditionReport(
        g_table={"gamma": gammas.tolist(), "g": g.tolist()},
        quad_bound_C=quad,
    )


def invert_g(report, value):
    """
    Smallest gamma with g(gamma) >= value, by binary search on the tabulated g

    Args:
        report (RatioConditionReport): Report holding a g_table
        value (float): Target value of g

    Returns:
        float: Interpolated gamma (log-linear between table points)
    """
    gammas = np.asarray(report.g_table["gamma"], dtype=float)
    g = np.maximum.accumulate(np.asarray(report.g_table["g"], dtype=float))
    if value <= g[0]:
        return float(gammas[0])
    if value > g[-1]:
        raise InvalidArgumentError(f"g never reaches {value:g} on the tabulated gamma range")
    k = int(np.searchsorted(g, value, side="left"))
    if g[k] == g[k - 1]:
        return float(gammas[k])
    t = (value - g[k - 1]) / (g[k] - g[k - 1])
    return float(math.exp(math.log(gammas[k - 1]) + t * (math.log(gammas[k]) - math.log(gammas[k - 1]))))


def check_ratio_conditions(family, phi, alpha_grid=None, lambda_grid=None, gamma_grid=None):
    """
    Estimate the constants of the two ratio conditions on grid triples

    Args:
        family (FilterFamily): Generator
        phi (IndexFunction): Rate function
        alpha_grid (array-like, optional): Parameters used for alpha and beta
        lambda_grid (array-like, optional): Spectral points
        gamma_grid (array-like, optional): Scaling factors for the g table

    Returns:
        RatioConditionReport: C_upper, C_lower, g_table, quad_bound_C and witnesses
    """
    if alpha_grid is None:
        alpha_grid = log_grid(1e-8, 1e2, per_decade=RATIO_POINTS_PER_DECADE)
    if lambda_grid is None:
        lambda_grid = alpha_grid
    if gamma_grid is None:
        gamma_grid = log_grid(*GAMMA_RANGE, per_decade=RATIO_POINTS_PER_DECADE)
    grid = np.sort(np.asarray(alpha_grid, dtype=float))
    if family.lambda_max is not None:
        grid = grid[grid <= family.lambda_max]
    lams = _domain_lambdas(family, lambda_grid)
    phi_grid = phi(grid)

    c_upper, c_lower = -np.inf, np.inf
    w_upper, w_lower = {}, {}
    with np.errstate(divide="ignore", invalid="ignore"):
        for j, beta in enumerate(grid):
            alphas = grid[: j + 1]
            scale = phi_grid[j] / phi_grid[: j + 1]

            upper_l = lams[lams >= beta]
            if upper_l.size:
                q = family.r_tilde(alphas[:, None], upper_l[None, :]) / family.r_tilde(beta, upper_l)[None, :]
                q = q * scale[:, None]
                q = np.where(np.isnan(q), -np.inf, q)
                idx = np.unravel_index(np.argmax(q), q.shape)
                if q[idx] > c_upper:
                    c_upper = float(q[idx])
                    w_upper = {"alpha": float(alphas[idx[0]]), "beta": float(beta), "lambda": float(upper_l[idx[1]])}

            lower_l = lams[lams <= beta]
            if lower_l.size:
                q = family.r_tilde(alphas[:, None], lower_l[None, :]) / family.r_tilde(beta, lower_l)[None, :]
                q = q * scale[:, None]
                # only lam <= alpha <= beta belongs to the region
                q = np.where(lower_l[None, :] <= alphas[:, None], q, np.inf)
                q = np.where(np.isnan(q), np.inf, q)
                idx = np.unravel_index(np.argmin(q), q.shape)
                if q[idx] < c_lower:
                    c_lower = float(q[idx])
                    w_lower = {"alpha": float(alphas[idx[0]]), "beta": float(beta), "lambda": float(lower_l[idx[1]])}

    report = check_subhomogeneity(phi, gamma_grid, grid)
    report.C_upper = c_upper
    report.C_lower = c_lower
    report.witness_upper = w_upper
    report.witness_lower = w_lower
    if family.is_tikhonov and math.isfinite(report.quad_bound_C):
        report.implied = {"C": report.quad_bound_C, "C_tilde": TIKHONOV_LOWER_RATIO}
    logger.debug("ratio conditions for %s / %s: C_upper=%g C_lower=%g quad_bound_C=%g",
                 family.name, phi.describe(), c_upper, c_lower, report.quad_bound_C)
    return report
