"""
Index functions: increasing rate functions phi used for qualifications and source conditions
"""
import math
from dataclasses import dataclass, field

import numpy as np

from core.errors import InvalidArgumentError, UnknownNameError
from core.utils import load_csv_columns

KIND_HOLDER = "holder"
KIND_LOG = "log"
KIND_TABLE = "table"


def default_log_cap(nu):
    """Cap point e^{-(1+nu)} where the logarithmic branch is frozen"""
    return math.exp(-(1.0 + nu))


def mu_log_cap(nu, mu):
    """Cap point e^{-nu/mu}, the variant used for the qualification of the logarithmic rate"""
    return math.exp(-nu / mu)


@dataclass(frozen=True)
class IndexFunction:
    """
    An increasing function phi on [0, inf)

    holder: phi(lam) = lam**exponent
    log: phi(lam) = |log lam|**(-exponent) below the cap point, phi(cap) above it
    table: piecewise linear through knots, constant outside them

    Attributes:
        kind (str): "holder", "log" or "table"
        exponent (float): Hoelder exponent q, or the logarithmic nu (scaled by power())
        cap (float, optional): Cap point of the logarithmic kind, in (0, 1)
        knots (tuple): (lambda_knots, phi_values) for the tabulated kind
    """
    kind: str
    exponent: float = 1.0
    cap: float = None
    knots: tuple = field(default=None, repr=False, compare=False)
    label: str = ""

    def __post_init__(self):
        if self.kind == KIND_HOLDER:
            if not self.exponent > 0:
                raise InvalidArgumentError(f"holder exponent must be positive, got {self.exponent}")
        elif self.kind == KIND_LOG:
            if not self.exponent > 0:
                raise InvalidArgumentError(f"log exponent must be positive, got {self.exponent}")
            if self.cap is None or not 0 < self.cap < 1:
                raise InvalidArgumentError(f"log cap point must lie in (0, 1), got {self.cap}")
        elif self.kind == KIND_TABLE:
            lam, values = self.knots
            if len(lam) < 1 or len(lam) != len(values):
                raise InvalidArgumentError("table needs matching, non-empty lambda and phi columns")
            if np.any(np.diff(lam) <= 0):
                raise InvalidArgumentError("table lambda knots must be strictly increasing")
            if np.any(np.diff(values) < 0) or np.any(values < 0):
                raise InvalidArgumentError("table phi values must be non-negative and non-decreasing")
        else:
            raise UnknownNameError(f"unknown index function kind '{self.kind}'")

    def __call__(self, lam):
        """
        Evaluate phi

        Args:
            lam (float or numpy.ndarray): Points >= 0

        Returns:
            float or numpy.ndarray: phi(lam)
        """
        lam_arr = np.asarray(lam, dtype=float)
        if self.kind == KIND_HOLDER:
            out = np.power(lam_arr, self.exponent)
        elif self.kind == KIND_LOG:
            clipped = np.minimum(lam_arr, self.cap)
            with np.errstate(divide="ignore"):
                branch = np.power(np.abs(np.log(np.where(clipped > 0, clipped, 1.0))), -self.exponent)
            out = np.where(clipped > 0, branch, 0.0)
        else:
            lam_knots, values = self.knots
            out = np.interp(lam_arr, lam_knots, values)
        if np.ndim(lam) == 0:
            return float(out)
        return out

    @property
    def cap_value(self):
        """phi at the cap point for the logarithmic kind, None otherwise"""
        if self.kind != KIND_LOG:
            return None
        return abs(math.log(self.cap)) ** (-self.exponent)

    def power(self, k):
        """
        phi**k as an index function of the same kind

        Args:
            k (float): Positive power

        Returns:
            IndexFunction: The composed function
        """
        if not k > 0:
            raise InvalidArgumentError(f"power must be positive, got {k}")
        label = f"({self.describe()})^{k:g}"
        if self.kind == KIND_HOLDER:
            return IndexFunction(KIND_HOLDER, exponent=self.exponent * k, label=label)
        if self.kind == KIND_LOG:
            return IndexFunction(KIND_LOG, exponent=self.exponent * k, cap=self.cap, label=label)
        lam_knots, values = self.knots
        return IndexFunction(KIND_TABLE, knots=(lam_knots, np.power(values, k)), label=label)

    def describe(self):
        """Short text form used in reports"""
        if self.label:
            return self.label
        if self.kind == KIND_HOLDER:
            return f"holder:{self.exponent:g}"
        if self.kind == KIND_LOG:
            return f"log:{self.exponent:g}:{self.cap:.6g}"
        return f"table:{len(self.knots[0])}knots"


def holder(q):
    """phi(lam) = lam**q"""
    return IndexFunction(KIND_HOLDER, exponent=float(q))


def logarithmic(nu, cap=None, mu=None):
    """
    phi(lam) = |log lam|**(-nu), frozen above the cap point

    Args:
        nu (float): Logarithmic exponent
        cap (float, optional): Explicit cap point in (0, 1)
        mu (float, optional): Use the cap e^{-nu/mu} instead of e^{-(1+nu)}

    Returns:
        IndexFunction: The logarithmic index function
    """
    if cap is None:
        cap = mu_log_cap(nu, mu) if mu is not None else default_log_cap(nu)
    return IndexFunction(KIND_LOG, exponent=float(nu), cap=float(cap))


def tabulated(lam_knots, phi_values):
    """Piecewise linear index function through (lam_knots, phi_values)"""
    return IndexFunction(
        KIND_TABLE,
        knots=(np.asarray(lam_knots, dtype=float), np.asarray(phi_values, dtype=float)),
    )


def constant(value):
    """Constant tabulated function, useful as a degenerate qualification test"""
    return tabulated([1.0], [float(value)])


def parse_index_function(spec):
    """
    Parse an index function from its config string

    Accepted forms: 'holder:q', 'log:nu', 'log:nu:cap', 'log:nu:mu=<mu>', 'table:path.csv'

    Args:
        spec (str): The config string

    Returns:
        IndexFunction: The parsed function
    """
    name, _, rest = spec.partition(":")
    try:
        if name == KIND_HOLDER:
            return holder(float(rest))
        if name == KIND_LOG:
            parts = rest.split(":")
            nu = float(parts[0])
            if len(parts) == 1:
                return logarithmic(nu)
            if parts[1].startswith("mu="):
                return logarithmic(nu, mu=float(parts[1][3:]))
            return logarithmic(nu, cap=float(parts[1]))
        if name == KIND_TABLE:
            lam_knots, values = load_csv_columns(rest, ("lambda", "phi"))
            return tabulated(lam_knots, values)
    except ValueError as e:
        raise InvalidArgumentError(f"cannot parse index function '{spec}': {e}") from e
    raise UnknownNameError(f"unknown index function '{spec}' (expected holder:q, log:nu[:cap], table:path)")
