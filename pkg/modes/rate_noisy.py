"""
rate-noisy: worst-case brackets over a noise sweep and the transferred rate psi
"""
import logging
import math

from analysis.rates_noisy import (
    generator_constants, log_psi_residual, noisy_sweep, psi_of_delta, solve_log_psi
)
from core.errors import SpecRegError
from core.settings import (
    ALPHA_RANGE, CMD_RATE_NOISY, DELTA_RANGE, EXIT_FAIL, EXIT_PASS, LAMBDA_RANGE, LOG_PSI_RESIDUAL_TOL,
    NOISY_REPORT_FILE, NOISY_SWEEP_FILE, NOISY_SWEEP_HEADER, POINTS_PER_DECADE
)
from core.utils import log_grid
from entities.filters import validate_generator
from entities.index_functions import KIND_HOLDER, KIND_LOG
from modes import ExperimentResult

logger = logging.getLogger(__name__)

REPORT_FILE = NOISY_REPORT_FILE
DEFAULT_ALPHA_GRID = (1e-10, 1.0, POINTS_PER_DECADE)
DEFAULT_DELTA_GRID = (*DELTA_RANGE, 5)


def expected_delta_slope(phi):
    """Exponent of psi(delta) for a Hoelder rate, None otherwise"""
    if phi.kind != KIND_HOLDER:
        return None
    q = phi.exponent
    return 2.0 * q / (1.0 + q)


def _psi_rows(phi, deltas):
    """psi per noise level; the logarithmic kind also checks its implicit equation"""
    rows = []
    for delta in deltas:
        delta = float(delta)
        row = {"delta": delta}
        try:
            row["psi"] = psi_of_delta(phi, delta)
            if phi.kind == KIND_LOG:
                psi = solve_log_psi(phi.exponent, delta)
                lower = abs(2.0 * math.log(delta)) ** -phi.exponent
                upper = abs(math.log(delta)) ** -phi.exponent
                residual = log_psi_residual(phi.exponent, delta, psi)
                row.update({"psi_implicit": psi, "bracket": [lower, upper], "residual": residual,
                            "ok": lower <= psi <= upper and abs(residual) <= LOG_PSI_RESIDUAL_TOL})
        except SpecRegError as e:
            row.update({"error": e.kind, "ok": False})
        rows.append(row)
    return rows


def run(config, writer):
    """
    Bracket the adversarial error for every admissible noise level

    Args:
        config (ExperimentConfig): Experiment config
        writer (ReportWriter): Output writer

    Returns:
        ExperimentResult: Exit 0 iff every bracket holds, a Hoelder delta-slope matches psi
        and a logarithmic psi solves its implicit equation inside its bracket
    """
    op = config.build_operator()
    xdag = config.build_solution(op)
    family = config.build_family()
    phi = config.build_phi()
    alphas = config.grid("alpha_grid", DEFAULT_ALPHA_GRID)
    deltas = config.grid("delta_grid", DEFAULT_DELTA_GRID)

    generator = validate_generator(family, log_grid(*ALPHA_RANGE), log_grid(*LAMBDA_RANGE))
    constants = generator_constants(family, generator)
    sweep = noisy_sweep(op, xdag, family, deltas, alphas, constants)
    writer.write_csv(NOISY_SWEEP_FILE, NOISY_SWEEP_HEADER, sweep.rows())

    factor = config.tolerances.bracket_factor
    contained = all(r.contains(factor) for r in sweep.reports)
    expected = expected_delta_slope(phi)
    slope_ok = True
    if expected is not None:
        slope_ok = sweep.fit is not None and abs(sweep.fit.value - expected) <= config.tolerances.slope
    psi_rows = _psi_rows(phi, deltas)
    psi_ok = all(row.get("ok", True) for row in psi_rows)
    passed = bool(sweep.reports) and contained and slope_ok and psi_ok

    data = {
        "constants": constants.to_dict(),
        "reports": [r.to_dict() for r in sweep.reports],
        "skipped": [{"delta": d, "reason": reason} for d, reason in sweep.skipped],
        "fit": None if sweep.fit is None else sweep.fit.to_dict(),
        "expected_slope": expected,
        "contained": contained,
        "slope_ok": slope_ok,
        "psi": psi_rows,
        "psi_ok": psi_ok,
        "phi": phi.describe(),
        "passed": passed,
    }
    writer.write_json(REPORT_FILE, data)

    summary = {"deltas": len(sweep.reports), "skipped": len(sweep.skipped), "contained": contained,
               "slope": None if sweep.fit is None else sweep.fit.value, "expected": expected}
    return ExperimentResult(CMD_RATE_NOISY, EXIT_PASS if passed else EXIT_FAIL, summary, list(writer.files))
