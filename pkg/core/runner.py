"""
Experiment runner: dispatches subcommands to their modes and runs the built-in suite
"""
import copy
import logging
import os

from core.config import build_config
from core.errors import ConfigError, SpecRegError, UnknownNameError
from core.settings import (
    CMD_DISTANCE, CMD_RATE_EXACT, CMD_RATE_NOISY, CMD_RUN_ALL, CMD_VALIDATE_FILTER, CMD_VAR_INEQ,
    DEFAULT_SETTINGS, EXIT_FAIL, EXIT_PASS, RUN_ALL_SUITE
)
from modes import ExperimentResult, distance, rate_exact, rate_noisy, validate_filter, var_ineq
from ui.reports import ReportWriter

logger = logging.getLogger(__name__)

MODES = {
    CMD_VALIDATE_FILTER: validate_filter,
    CMD_RATE_EXACT: rate_exact,
    CMD_RATE_NOISY: rate_noisy,
    CMD_VAR_INEQ: var_ineq,
    CMD_DISTANCE: distance,
}

RUN_ALL_FILE = "run_all.json"


class ExperimentRunner:
    """
    Runs experiments for one validated config
    """
    def __init__(self, config):
        """
        Initialize the runner

        Args:
            config (ExperimentConfig): Validated config; its output_dir receives the files
        """
        self.config = config
        self.results = []

    def run(self, command):
        """
        Run one subcommand

        Args:
            command (str): Subcommand name, including run-all

        Returns:
            ExperimentResult: Exit code, summary and written files
        """
        if command == CMD_RUN_ALL:
            return self.run_all()
        mode = MODES.get(command)
        if mode is None:
            raise UnknownNameError(f"unknown subcommand '{command}'")
        return self._run_mode(command, mode, self.config)

    def _run_mode(self, command, mode, config):
        writer = ReportWriter(config.output_dir, config.digest)
        logger.info("running %s into %s", command, config.output_dir)
        try:
            result = mode.run(config, writer)
        except ConfigError:
            raise
        except SpecRegError as e:
            writer.write_error(mode.REPORT_FILE, e)
            result = ExperimentResult(command, EXIT_FAIL, {"error": e.kind, "message": str(e)},
                                      list(writer.files))
        self.results.append(result)
        return result

    def run_all(self):
        """
        Run the built-in suite, each experiment in its own subdirectory

        Every suite entry starts from the default settings with the runner's seed.
        The run passes when every experiment ends with its expected exit code.

        Returns:
            ExperimentResult: Exit 0 iff every exit code matched
        """
        entries = []
        for name, command, overrides, expected in RUN_ALL_SUITE:
            data = copy.deepcopy(DEFAULT_SETTINGS)
            data["seed"] = self.config.seed
            data["output_dir"] = os.path.join(self.config.output_dir, name)
            config = build_config(data, overrides)
            result = self._run_mode(command, MODES[command], config)
            matched = result.exit_code == expected
            if not matched:
                logger.warning("%s: exit %d, expected %d", name, result.exit_code, expected)
            entries.append({"name": name, "command": command, "exit_code": result.exit_code,
                            "expected": expected, "matched": matched, "summary": result.summary})

        passed = all(e["matched"] for e in entries)
        writer = ReportWriter(self.config.output_dir, self.config.digest)
        writer.write_json(RUN_ALL_FILE, {"experiments": entries, "passed": passed})
        summary = {"experiments": len(entries), "matched": sum(e["matched"] for e in entries)}
        return ExperimentResult(CMD_RUN_ALL, EXIT_PASS if passed else EXIT_FAIL, summary, list(writer.files))
