"""
Experiment modes package for specreg: one module per subcommand
"""
from dataclasses import dataclass, field


@dataclass
class ExperimentResult:
    """
    Outcome of one experiment

    Attributes:
        command (str): Subcommand name
        exit_code (int): 0 pass, 1 failure
        summary (dict): Headline numbers printed to the console
        files (list): Files written into the output directory
    """
    command: str
    exit_code: int
    summary: dict = field(default_factory=dict)
    files: list = field(default_factory=list)

    @property
    def passed(self):
        return self.exit_code == 0
