"""
Short human-readable summaries printed after an experiment
"""
import sys

from core.utils import format_number


def _format_value(value):
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_format_value(v) for v in value) + "]"
    if value is None:
        return "-"
    return format_number(value)


def format_summary(result):
    """
    One status line followed by the summary entries

    Args:
        result (ExperimentResult): Finished experiment

    Returns:
        str: The text block
    """
    status = "PASS" if result.passed else "FAIL"
    lines = [f"{result.command}: {status} (exit {result.exit_code})"]
    for key in sorted(result.summary):
        lines.append(f"  {key}: {_format_value(result.summary[key])}")
    if result.files:
        lines.append("  files: " + ", ".join(result.files))
    return "\n".join(lines)


def print_summary(result, stream=None):
    stream = stream or sys.stdout
    stream.write(format_summary(result) + "\n")
