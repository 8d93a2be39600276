"""
Exception hierarchy for specreg
"""


class SpecRegError(Exception):
    """Base class for every error raised by the library"""

    kind = "specreg-error"


class InvalidArgumentError(SpecRegError, ValueError):
    """An argument lies outside the documented range (non-positive alpha, length mismatch, ...)"""

    kind = "invalid-argument"


class ProfileNotIncreasingError(SpecRegError):
    """The target spectral profile decreases somewhere on the spectrum"""

    kind = "profile-not-increasing"


class OutOfRangeError(SpecRegError):
    """A filter family was evaluated outside the spectral range it is defined on"""

    kind = "out-of-range"


class UnknownNameError(SpecRegError, KeyError):
    """A filter family, index function or subcommand name is not recognised"""

    kind = "unknown-name"

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class CannotFitLogError(SpecRegError):
    """A logarithmic fit was requested on non-positive values or too few points"""

    kind = "cannot-fit-log"


class WindowError(SpecRegError):
    """A fit window is empty or overlaps the capped region of an index function"""

    kind = "window-error"


class BracketError(SpecRegError):
    """A monotone root finder could not bracket the root"""

    kind = "bracket-error"


class TrivialCaseError(SpecRegError):
    """
    The exact-data error vanishes for all small alpha

    Attributes:
        epsilon (float): Largest checked alpha at which the error is still zero
    """

    kind = "trivial-case"

    def __init__(self, message, epsilon):
        super().__init__(message)
        self.epsilon = epsilon


class AlphaNotInSpectrumError(SpecRegError):
    """No eigenvalue falls into the band used for the adversarial perturbation"""

    kind = "alpha-not-in-spectrum"


class DeltaRangeError(SpecRegError):
    """The noise level is outside the range where the requested function is defined"""

    kind = "delta-out-of-range"


class DivisionError(SpecRegError, ZeroDivisionError):
    """An index function vanishes on the spectrum where it is used as a divisor"""

    kind = "division-error"


class PreconditionError(SpecRegError):
    """A structural precondition (e.g. a qualification) failed to verify"""

    kind = "precondition-violated"


class ConfigError(SpecRegError):
    """The experiment configuration could not be read or validated"""

    kind = "config-error"
