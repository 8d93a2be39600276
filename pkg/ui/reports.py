"""
Report writers: JSON and CSV outputs stamped with the tool version and config hash
"""
import logging
import os

from core.utils import output_meta, replace_non_finite, save_csv, save_json, to_builtin

logger = logging.getLogger(__name__)


class ReportWriter:
    """
    Writes the files of one experiment into its output directory
    """
    def __init__(self, output_dir, config_digest):
        """
        Initialize the writer

        Args:
            output_dir (str): Directory receiving the files
            config_digest (str): Config hash embedded in every file
        """
        self.output_dir = output_dir
        self.config_digest = config_digest
        self.files = []

    def path(self, filename):
        return os.path.join(self.output_dir, filename)

    def write_json(self, filename, report):
        """
        Write a report dictionary with a meta block, keys sorted

        NaN and infinite values are written as null and listed under "non_finite".

        Args:
            filename (str): File name inside the output directory
            report (dict): Report content

        Returns:
            str: Path of the written file
        """
        data, non_finite = replace_non_finite(to_builtin(report))
        if non_finite:
            data["non_finite"] = non_finite
        data["meta"] = output_meta(self.config_digest)
        target = self.path(filename)
        save_json(data, target)
        self.files.append(filename)
        return target

    def write_csv(self, filename, header, rows):
        """
        Write a plot-ready table whose first line names the tool, version and config hash

        Args:
            filename (str): File name inside the output directory
            header (sequence): Column names
            rows (iterable): Row tuples

        Returns:
            str: Path of the written file
        """
        meta = output_meta(self.config_digest)
        comment = f"{meta['tool']} {meta['version']} config_sha256={meta['config_sha256']}"
        target = self.path(filename)
        save_csv(header, rows, target, comment=comment)
        self.files.append(filename)
        return target

    def write_error(self, filename, error):
        """Record a library error as the content of a report"""
        logger.warning("%s: %s", error.kind, error)
        return self.write_json(filename, {"error": error.kind, "message": str(error), "passed": False})
