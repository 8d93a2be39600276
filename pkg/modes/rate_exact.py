"""
rate-exact: error curve for exact data and its fitted rate
"""
import logging

import numpy as np

from analysis.rates_exact import (
    MODEL_LOG, error_curve, exact_rate_constants, fit_log_rate, fit_power_rate,
    log_negative_control, log_rate_confirmed, lower_bound_violation
)
from analysis.source_conditions import spectral_tail_constant
from analysis.spectral_analysis import check_qualification
from core.errors import SpecRegError
from core.settings import (
    CMD_RATE_EXACT, ERROR_CURVE_FILE, ERROR_CURVE_HEADER, EXIT_FAIL, EXIT_PASS, MONOTONE_TOL,
    POINTS_PER_DECADE, RATE_FIT_FILE, SPECTRUM_FILE, SPECTRUM_HEADER
)
from entities.index_functions import KIND_LOG, parse_index_function
from entities.operators import spectrum_rows
from modes import ExperimentResult

logger = logging.getLogger(__name__)

REPORT_FILE = RATE_FIT_FILE
DEFAULT_ALPHA_GRID = (1e-10, 1.0, POINTS_PER_DECADE)


def _rate_of_profile(config):
    """Index function the exact-data error is expected to follow"""
    if config.solution.kind == "profile":
        return parse_index_function(config.solution.target)
    return config.build_phi().power(2.0 * config.nu)


def run(config, writer):
    """
    Tabulate err(alpha) and fit the configured rate model

    Args:
        config (ExperimentConfig): Experiment config
        writer (ReportWriter): Output writer

    Returns:
        ExperimentResult: Exit 0 iff the lower bound holds and the fit meets its tolerance
    """
    op = config.build_operator()
    xdag = config.build_solution(op)
    family = config.build_family()
    lam_max = family.lambda_max if family.lambda_max is not None else np.inf
    alphas = config.grid("alpha_grid", DEFAULT_ALPHA_GRID)
    alphas = alphas[alphas <= lam_max]

    provenance = {"operator": op.label, "filter": family.name, "solution": config.solution.kind}
    curve = error_curve(op, xdag, family, alphas, provenance)
    writer.write_csv(ERROR_CURVE_FILE, ERROR_CURVE_HEADER, curve.rows())
    writer.write_csv(SPECTRUM_FILE, SPECTRUM_HEADER, spectrum_rows(op, xdag))

    violation = lower_bound_violation(op, xdag, family, alphas)
    scale = max(float(np.max(curve.err_sq)), 1.0) if curve.err_sq.size else 1.0
    lower_ok = violation <= MONOTONE_TOL * scale

    fit_spec = config.fit
    rate = _rate_of_profile(config)
    control = None
    if fit_spec.model == MODEL_LOG:
        cap = rate.cap if rate.kind == KIND_LOG else None
        fit = fit_log_rate(curve, fit_spec.nu, window=fit_spec.window, cap=cap)
        fit_ok = log_rate_confirmed(fit, config.tolerances.spread)
        if fit_spec.control_nu is not None:
            control = log_negative_control(curve, fit_spec.nu, fit_spec.control_nu, fit.window, cap=cap)
            fit_ok = fit_ok and control["ok"]
    else:
        fit = fit_power_rate(curve, window=fit_spec.window)
        fit_ok = fit_spec.expected is None or abs(fit.value - fit_spec.expected) <= config.tolerances.slope

    data = {
        "fit": fit.to_dict(),
        "negative_control": control,
        "expected": fit_spec.expected,
        "fit_ok": bool(fit_ok),
        "lower_bound_violation": violation,
        "lower_bound_ok": bool(lower_ok),
        "monotone": curve.is_monotone,
        "provenance": provenance,
    }
    try:
        C_spec, _ = spectral_tail_constant(op, xdag, rate, 0.5)
        qualification = check_qualification(rate, family, config.mu, alphas, op.lam)
        data["constants"] = exact_rate_constants(
            op, xdag, rate, rho=family.rho, rho_tilde=family.rho_tilde,
            A=qualification.A_hat, mu=config.mu,
            C_spec=C_spec, C_error=float(np.max(curve.err_sq / rate(curve.alpha))),
        )
        data["constants"].update({"C_spec": C_spec, "A": qualification.A_hat, "mu": config.mu})
    except SpecRegError as e:
        logger.info("no rate constants: %s", e)
    data["passed"] = bool(fit_ok and lower_ok)
    writer.write_json(REPORT_FILE, data)

    summary = {"model": fit.model, "value": fit.value, "expected": fit_spec.expected,
               "lower_bound_ok": lower_ok}
    return ExperimentResult(CMD_RATE_EXACT, EXIT_PASS if data["passed"] else EXIT_FAIL,
                            summary, list(writer.files))
