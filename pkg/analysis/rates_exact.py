"""
Exact-data error curves and rate fits
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from core.errors import CannotFitLogError, InvalidArgumentError, WindowError
from core.settings import FIT_EXCLUDE_DECADES, MIN_FIT_POINTS, MONOTONE_TOL, DEFAULT_SPREAD_BOUND
from entities.filters import regularize
from entities.operators import apply_forward, spectral_function

logger = logging.getLogger(__name__)

MODEL_POWER = "power"
MODEL_LOG = "log"

# alphas evaluated together when sweeping a curve
_CHUNK = 256


def error_exact(op, xdag, family, alpha):
    """
    ||x_alpha(y) - x_dag||**2 for exact data, as the spectral sum of r_tilde x_dag**2

    Args:
        op (SpectralOperator): The operator
        xdag (SpectralVector): The solution
        family (FilterFamily): Generator
        alpha (float): Regularisation parameter > 0

    Returns:
        float: Squared error
    """
    if not alpha > 0:
        raise InvalidArgumentError(f"alpha must be positive, got {alpha}")
    xdag.check_matches(op)
    return float(np.dot(family.r_tilde(alpha, op.lam), xdag.coeffs ** 2))


def error_exact_many(op, xdag, family, alphas):
    """Vectorised error_exact over an array of alphas"""
    alphas = np.asarray(alphas, dtype=float)
    if alphas.size and np.min(alphas) <= 0:
        raise InvalidArgumentError("alpha values must be positive")
    xdag.check_matches(op)
    weights = xdag.coeffs ** 2
    out = np.empty(alphas.shape, dtype=float)
    flat = alphas.ravel()
    result = out.ravel()
    for start in range(0, flat.size, _CHUNK):
        block = flat[start:start + _CHUNK]
        result[start:start + _CHUNK] = family.r_tilde(block[:, None], op.lam[None, :]) @ weights
    return result.reshape(alphas.shape)


def error_by_regularization(op, xdag, family, alpha):
    """Squared error computed by regularising the exact data and subtracting x_dag"""
    x_alpha = regularize(op, family, alpha, apply_forward(op, xdag))
    return (x_alpha - xdag).norm_sq


@dataclass
class ErrorCurve:
    """
    Exact-data squared errors on a descending alpha grid

    Attributes:
        alpha (numpy.ndarray): Descending alphas
        err_sq (numpy.ndarray): Squared errors
        provenance (dict): Operator, filter and profile descriptions
    """
    alpha: np.ndarray
    err_sq: np.ndarray
    provenance: dict = field(default_factory=dict)

    def rows(self):
        return list(zip(self.alpha.tolist(), self.err_sq.tolist()))

    @property
    def is_monotone(self):
        # descending alpha, so the errors must not increase along the array
        rise = np.diff(self.err_sq)
        scale = max(float(np.max(self.err_sq)), 1.0) if self.err_sq.size else 1.0
        return bool(np.all(rise <= MONOTONE_TOL * scale))

    def window_mask(self, window):
        lo, hi = window
        return (self.alpha >= lo) & (self.alpha <= hi)


def error_curve(op, xdag, family, alpha_grid, provenance=None):
    """
    Sweep error_exact over an alpha grid

    Args:
        op (SpectralOperator): The operator
        xdag (SpectralVector): The solution
        family (FilterFamily): Generator
        alpha_grid (array-like): Positive alphas, any order
        provenance (dict, optional): Descriptions stored with the curve

    Returns:
        ErrorCurve: Rows with alpha descending
    """
    alphas = np.sort(np.asarray(alpha_grid, dtype=float))[::-1]
    err_sq = error_exact_many(op, xdag, family, alphas)
    curve = ErrorCurve(alphas, err_sq, dict(provenance or {}))
    if not curve.is_monotone:
        logger.warning("error curve of %s is not monotone in alpha", family.name)
    return curve


def lower_bound_violation(op, xdag, family, alphas):
    """
    Largest excess of r_tilde_alpha(alpha) e(alpha) over the squared error

    Args:
        op (SpectralOperator): The operator
        xdag (SpectralVector): The solution
        family (FilterFamily): Generator
        alphas (array-like): Positive alphas inside the family's domain

    Returns:
        float: max(r_tilde(alpha, alpha) e(alpha) - err(alpha)); <= 0 when the bound holds
    """
    alphas = np.asarray(alphas, dtype=float)
    lower = np.asarray(family.r_tilde(alphas, alphas)) * spectral_function(op, xdag, alphas)
    return float(np.max(lower - error_exact_many(op, xdag, family, alphas)))


@dataclass
class RateFit:
    """
    Fitted rate of a log-log table

    Attributes:
        model (str): "power" or "log"
        value (float): Slope (power) or spread max/min (log)
        window (list): [low, high] of the fitted abscissae
        n_points (int): Points inside the window
        r_squared (float, optional): Coefficient of determination of the power fit
        intercept (float, optional): Log intercept of the power fit
        nu (float, optional): Exponent of the logarithmic model
        low, high (float, optional): Extremes of err_sq |log alpha|**nu
    """
    model: str
    value: float
    window: list
    n_points: int
    r_squared: float = None
    intercept: float = None
    nu: float = None
    low: float = None
    high: float = None

    @property
    def slope(self):
        return self.value if self.model == MODEL_POWER else None

    @property
    def spread(self):
        return self.value if self.model == MODEL_LOG else None

    def to_dict(self):
        data = {
            "model": self.model,
            "slope_or_spread": float(self.value),
            "r2": self.r_squared,
            "window": [float(w) for w in self.window],
            "n_points": int(self.n_points),
        }
        if self.model == MODEL_LOG:
            data.update({"nu": self.nu, "min": self.low, "max": self.high})
        else:
            data["intercept"] = self.intercept
        return data


def default_window(alpha_grid, exclude_decades=FIT_EXCLUDE_DECADES):
    """Grid range with the top and bottom decades removed"""
    alphas = np.asarray(alpha_grid, dtype=float)
    lo = float(np.min(alphas)) * 10.0 ** exclude_decades
    hi = float(np.max(alphas)) / 10.0 ** exclude_decades
    if lo >= hi:
        raise WindowError(f"alpha grid [{np.min(alphas):g}, {np.max(alphas):g}] too short for the default window")
    return [lo, hi]


def _window_points(x, y, window):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if window is None:
        mask = np.ones(x.shape, dtype=bool)
    else:
        lo, hi = window
        if not lo < hi:
            raise WindowError(f"empty fit window [{lo:g}, {hi:g}]")
        # relative slack so that window ends given in decimal hit grid points
        mask = (x >= lo * (1 - 1e-9)) & (x <= hi * (1 + 1e-9))
    return x[mask], y[mask]


def fit_power_law(x, y, window=None):
    """
    Least-squares slope of log y against log x

    Args:
        x (array-like): Positive abscissae
        y (array-like): Ordinates, positive inside the window
        window (list, optional): [low, high] range of x to use

    Returns:
        RateFit: Power-model fit with r_squared
    """
    xs, ys = _window_points(x, y, window)
    if xs.size < MIN_FIT_POINTS:
        raise CannotFitLogError(f"need at least {MIN_FIT_POINTS} points in the window, got {xs.size}")
    if np.any(ys <= 0) or np.any(xs <= 0):
        raise CannotFitLogError("log fit needs positive values in the window")
    lx = np.log(xs)
    ly = np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    residual = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(residual ** 2)) / ss_tot
    used = [float(xs.min()), float(xs.max())] if window is None else list(window)
    return RateFit(MODEL_POWER, float(slope), used, int(xs.size),
                   r_squared=float(r_squared), intercept=float(intercept))


def fit_power_rate(curve, window=None):
    """
    Fit err_sq ~ alpha**slope on an error curve

    Args:
        curve (ErrorCurve): The curve
        window (list, optional): Alpha range; defaults to the grid minus two decades at each end

    Returns:
        RateFit: Power-model fit
    """
    if window is None:
        window = default_window(curve.alpha)
    fit = fit_power_law(curve.alpha, curve.err_sq, window)
    logger.info("power fit on [%g, %g]: slope %.4f (r2 %.6f)", window[0], window[1], fit.value, fit.r_squared)
    return fit


def log_spread(alpha, err_sq, nu):
    """Values err_sq |log alpha|**nu used by the logarithmic rate check"""
    return np.asarray(err_sq, dtype=float) * np.power(np.abs(np.log(alpha)), nu)


def fit_log_rate(curve, nu, window=None, cap=None):
    """
    Check err_sq ~ |log alpha|**-nu through the spread of err_sq |log alpha|**nu

    Args:
        curve (ErrorCurve): The curve
        nu (float): Logarithmic exponent > 0
        window (list, optional): Alpha range below the cap point
        cap (float, optional): Cap point of the logarithmic index function (defaults to 1)

    Returns:
        RateFit: Log-model fit; value is max/min over the window
    """
    if not nu > 0:
        raise InvalidArgumentError(f"logarithmic exponent must be positive, got {nu}")
    if window is None:
        window = default_window(curve.alpha)
    limit = 1.0 if cap is None else cap
    if window[1] >= limit:
        raise WindowError(f"fit window [{window[0]:g}, {window[1]:g}] reaches the capped region at {limit:g}")
    alphas, err = _window_points(curve.alpha, curve.err_sq, window)
    if alphas.size < 2:
        raise CannotFitLogError(f"need at least two points in the window, got {alphas.size}")
    if np.any(err <= 0):
        raise CannotFitLogError("logarithmic fit needs positive errors in the window")
    values = log_spread(alphas, err, nu)
    low, high = float(values.min()), float(values.max())
    fit = RateFit(MODEL_LOG, high / low, list(window), int(alphas.size), nu=float(nu), low=low, high=high)
    logger.info("log fit nu=%g on [%g, %g]: spread %.4f", nu, window[0], window[1], fit.value)
    return fit


def log_rate_confirmed(fit, bound=DEFAULT_SPREAD_BOUND):
    return fit.value <= bound


def exact_rate_constants(op, xdag, phi, rho=None, rho_tilde=None, A=None, mu=None,
                         C_error=None, C_spec=None):
    """
    Constants relating the two sides of the exact-data rate equivalence

    err_sq <= C phi(alpha) gives e <= C/(1 - rho)**2 phi; conversely e <= C_spec phi
    gives err_sq <= (c ||x_dag||**2 + C_spec + A C_spec rho_tilde**(1-mu)/(1-mu)) phi
    with c = A**(1/mu) / phi(||L||**2).

    Args:
        op (SpectralOperator): The operator
        xdag (SpectralVector): The solution
        phi (IndexFunction): Rate function
        rho, rho_tilde (float, optional): Generator constants
        A, mu (float, optional): Qualification constant and exponent
        C_error (float, optional): Measured sup of err_sq/phi(alpha)
        C_spec (float, optional): Measured sup of e/phi

    Returns:
        dict: The implied constants that could be computed from the inputs
    """
    out = {}
    if C_error is not None and rho is not None:
        out["spectral_from_error"] = C_error / (1.0 - rho) ** 2
    if None not in (C_spec, rho_tilde, A, mu):
        if not 0 < mu < 1:
            raise InvalidArgumentError(f"qualification exponent must lie in (0, 1), got {mu}")
        c = A ** (1.0 / mu) / phi(op.norm_sq)
        out["saturation_c"] = c
        out["error_from_spectral"] = (
            c * xdag.norm_sq + C_spec + A * C_spec * rho_tilde ** (1.0 - mu) / (1.0 - mu)
        )
    return out


def rate_constant(curve, phi, window=None):
    """sup of err_sq / phi(alpha) over the window"""
    alphas, err = _window_points(curve.alpha, curve.err_sq, window)
    if alphas.size == 0:
        raise WindowError("no curve point inside the window")
    with np.errstate(divide="ignore"):
        return float(np.max(err / phi(alphas)))


def window_growth(curve, nu, windows, cap=None):
    """Spreads of the logarithmic model on nested windows, widest last"""
    return [fit_log_rate(curve, nu, window=w, cap=cap).value for w in windows]


def decade_windows(center_lo, center_hi, widen, steps):
    """Nested windows grown by `widen` decades per step on each side"""
    out = []
    for k in range(steps):
        factor = 10.0 ** (widen * k)
        out.append([center_lo / factor, center_hi * factor])
    return out


def shrinking_windows(window):
    """Windows nested inside `window`, one decade trimmed per side per step, widest last"""
    lo, hi = window
    decades = math.log10(hi / lo)
    steps = max(1, int(math.floor((decades - 1.0) / 2.0 + 1e-9)) + 1)
    return [[lo * 10.0 ** k, hi / 10.0 ** k] for k in reversed(range(steps))]


def log_negative_control(curve, nu, control_nu, window, cap=None):
    """
    Fit the logarithmic model with a wrong exponent next to the right one

    The wrong exponent must spread wider than the right one, and its spread may
    not shrink as the window widens.

    Args:
        curve (ErrorCurve): The curve
        nu (float): Exponent the curve follows
        control_nu (float): Mismatched exponent
        window (list): Widest alpha window
        cap (float, optional): Cap point of the logarithmic index function

    Returns:
        dict: Both spreads, the nested control spreads and the verdict
    """
    if control_nu == nu:
        raise InvalidArgumentError(f"control exponent must differ from nu={nu:g}")
    windows = shrinking_windows(window)
    matched = fit_log_rate(curve, nu, window=window, cap=cap).value
    control = fit_log_rate(curve, control_nu, window=window, cap=cap).value
    nested = window_growth(curve, control_nu, windows, cap=cap)
    ok = control > matched and all(b >= a for a, b in zip(nested, nested[1:]))
    if not ok:
        logger.warning("negative control nu=%g does not separate from nu=%g", control_nu, nu)
    return {"nu": float(nu), "control_nu": float(control_nu), "matched_spread": matched,
            "control_spread": control, "windows": windows, "nested_spreads": nested, "ok": bool(ok)}
