"""
validate-filter: check the generator conditions of a filter family on a grid
"""
import logging

from analysis.spectral_analysis import check_qualification, check_ratio_conditions
from core.errors import SpecRegError
from core.settings import (
    ALPHA_RANGE, CMD_VALIDATE_FILTER, EXIT_FAIL, EXIT_PASS, GAMMA_RANGE, GENERATOR_REPORT_FILE,
    LAMBDA_RANGE, POINTS_PER_DECADE, RATIO_POINTS_PER_DECADE
)
from core.utils import log_grid
from entities.filters import validate_generator
from modes import ExperimentResult

logger = logging.getLogger(__name__)

REPORT_FILE = GENERATOR_REPORT_FILE


def run(config, writer):
    """
    Validate the configured family and attach the structural checks of phi

    Args:
        config (ExperimentConfig): Experiment config
        writer (ReportWriter): Output writer

    Returns:
        ExperimentResult: Exit 0 iff all four generator conditions pass
    """
    family = config.build_family()
    alphas = config.grid("alpha_grid", (*ALPHA_RANGE, POINTS_PER_DECADE))
    lams = config.grid("lambda_grid", (*LAMBDA_RANGE, POINTS_PER_DECADE))
    report = validate_generator(family, alphas, lams)
    data = report.to_dict()

    # qualification and ratio constants are informative, they do not decide the exit code
    phi = config.build_phi()
    try:
        data["qualification"] = check_qualification(
            phi, family, config.mu, alphas, lams, A_declared=config.A_declared
        ).to_dict()
    except SpecRegError as e:
        data["qualification"] = {"error": e.kind, "message": str(e)}
    try:
        # triples are swept on a coarser grid over the same range
        ratio_alphas = log_grid(float(alphas[0]), float(alphas[-1]), per_decade=RATIO_POINTS_PER_DECADE)
        gammas = config.grid("gamma_grid", (*GAMMA_RANGE, RATIO_POINTS_PER_DECADE))
        data["ratio_conditions"] = check_ratio_conditions(family, phi, ratio_alphas, gamma_grid=gammas).to_dict()
    except SpecRegError as e:
        data["ratio_conditions"] = {"error": e.kind, "message": str(e)}

    writer.write_json(REPORT_FILE, data)
    summary = {"family": family.name, "rho_hat": report.rho_hat, "rho_tilde_hat": report.rho_tilde_hat,
               "failed": report.failed()}
    return ExperimentResult(CMD_VALIDATE_FILTER, EXIT_PASS if report.passed else EXIT_FAIL,
                            summary, list(writer.files))
