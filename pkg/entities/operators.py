"""
Diagonal spectral models of the forward operator and of the minimum-norm solution
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from core.errors import InvalidArgumentError, ProfileNotIncreasingError
from core.settings import MAX_SPECTRUM_SIZE, SPECTRUM_HEADER
from core.utils import load_json, save_csv, save_json

logger = logging.getLogger(__name__)

KIND_POLYNOMIAL = "polynomial"
KIND_EXPONENTIAL = "exponential"


def _frozen_array(values):
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SpectralOperator:
    """
    Operator stored by its singular values only

    Attributes:
        sigma (numpy.ndarray): Strictly decreasing positive singular values
        lam (numpy.ndarray): Eigenvalues sigma**2 of L*L
        label (str): Short description used in reports
    """
    sigma: np.ndarray
    label: str = ""
    lam: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        sigma = np.atleast_1d(np.asarray(self.sigma, dtype=float))
        if sigma.ndim != 1 or sigma.size == 0:
            raise InvalidArgumentError("an operator needs at least one singular value")
        if sigma.size > MAX_SPECTRUM_SIZE:
            raise InvalidArgumentError(f"spectrum size {sigma.size} exceeds {MAX_SPECTRUM_SIZE}")
        if not np.all(np.isfinite(sigma)) or np.any(sigma <= 0):
            raise InvalidArgumentError("singular values must be finite and positive")
        if np.any(np.diff(sigma) >= 0):
            raise InvalidArgumentError("singular values must be strictly decreasing")
        lam = sigma * sigma
        if np.any(lam <= 0) or np.any(np.diff(lam) >= 0):
            raise InvalidArgumentError(
                f"eigenvalues sigma**2 must be positive and strictly decreasing in floating point "
                f"(smallest sigma {sigma[-1]:g} gives lambda {lam[-1]:g})"
            )
        object.__setattr__(self, "sigma", _frozen_array(sigma))
        object.__setattr__(self, "lam", _frozen_array(lam))

    def __len__(self):
        return self.sigma.size

    @property
    def norm_sq(self):
        """||L||^2, the largest eigenvalue"""
        return float(self.lam[0])

    @property
    def lam_min(self):
        return float(self.lam[-1])

    def to_dict(self):
        return {"sigma": self.sigma.tolist()}

    @classmethod
    def from_dict(cls, data, label=""):
        try:
            return cls(data["sigma"], label=label)
        except KeyError as e:
            raise InvalidArgumentError("operator JSON needs a 'sigma' list") from e


@dataclass(frozen=True, eq=False)
class SpectralVector:
    """
    Coefficients of a vector in the singular basis

    Attributes:
        coeffs (numpy.ndarray): Finite real coefficients
    """
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        if coeffs.ndim != 1:
            raise InvalidArgumentError("coefficients must form a flat list")
        if not np.all(np.isfinite(coeffs)):
            raise InvalidArgumentError("coefficients must be finite")
        object.__setattr__(self, "coeffs", _frozen_array(coeffs))

    def __len__(self):
        return self.coeffs.size

    @property
    def norm(self):
        return float(np.linalg.norm(self.coeffs))

    @property
    def norm_sq(self):
        return float(np.dot(self.coeffs, self.coeffs))

    def check_matches(self, op):
        """Raise when the vector does not pair with the operator"""
        if len(self) != len(op):
            raise InvalidArgumentError(f"vector length {len(self)} does not match spectrum size {len(op)}")

    def _paired(self, other):
        if len(self) != len(other):
            raise InvalidArgumentError(f"vector lengths differ: {len(self)} and {len(other)}")
        return other.coeffs

    def __add__(self, other):
        return SpectralVector(self.coeffs + self._paired(other))

    def __sub__(self, other):
        return SpectralVector(self.coeffs - self._paired(other))

    def scaled(self, factor):
        return SpectralVector(float(factor) * self.coeffs)

    def to_dict(self):
        return {"coeffs": self.coeffs.tolist()}

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(data["coeffs"])
        except KeyError as e:
            raise InvalidArgumentError("vector JSON needs a 'coeffs' list") from e

    @classmethod
    def zeros(cls, n):
        return cls(np.zeros(n))


@dataclass(frozen=True)
class SourceProfile:
    """
    Desired spectral function of the solution

    Attributes:
        target (IndexFunction): e_target, increasing with e_target(0) = 0
        scale (float): Positive multiplier
    """
    target: object
    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0:
            raise InvalidArgumentError(f"profile scale must be positive, got {self.scale}")


def make_operator(kind, n, decay):
    """
    Build a synthetic spectral operator

    Args:
        kind (str): "polynomial" (sigma_i = i**-decay) or "exponential" (sigma_i = exp(-decay * i))
        n (int): Number of singular values
        decay (float): Positive decay parameter

    Returns:
        SpectralOperator: The operator
    """
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f"spectrum size must be a positive integer, got {n}")
    if not decay > 0:
        raise InvalidArgumentError(f"decay parameter must be positive, got {decay}")
    index = np.arange(1, int(n) + 1, dtype=float)
    if kind == KIND_POLYNOMIAL:
        sigma = index ** (-float(decay))
    elif kind == KIND_EXPONENTIAL:
        sigma = np.exp(-float(decay) * index)
    else:
        raise InvalidArgumentError(f"unknown operator kind '{kind}' (expected polynomial or exponential)")
    op = SpectralOperator(sigma, label=f"{kind}({decay:g}, n={int(n)})")
    logger.debug("built %s with lambda in [%g, %g]", op.label, op.lam_min, op.norm_sq)
    return op


def make_solution_from_profile(op, profile):
    """
    Construct x_dag whose spectral function equals scale * e_target at every eigenvalue

    Args:
        op (SpectralOperator): The operator
        profile (SourceProfile): Target profile

    Returns:
        SpectralVector: The solution coefficients
    """
    e_target = profile.scale * np.asarray(profile.target(op.lam), dtype=float)
    # the smallest eigenvalue absorbs e_target(lam_n), as if lam_{n+1} = 0
    increments = e_target - np.append(e_target[1:], 0.0)
    if np.any(increments < 0) or not np.all(np.isfinite(increments)):
        worst = int(np.argmin(increments))
        raise ProfileNotIncreasingError(
            f"target profile decreases at lambda={op.lam[worst]:g} (increment {increments[worst]:g})"
        )
    return SpectralVector(np.sqrt(increments))


def make_source_solution(op, phi, nu, omega):
    """
    Construct x_dag = phi(L*L)**nu omega, an exact member of the source set

    Args:
        op (SpectralOperator): The operator
        phi (IndexFunction): Index function
        nu (float): Exponent
        omega (array-like): Source element coefficients

    Returns:
        SpectralVector: The solution coefficients
    """
    omega = np.asarray(omega, dtype=float)
    if omega.shape != op.lam.shape:
        raise InvalidArgumentError(f"source element length {omega.size} does not match spectrum size {len(op)}")
    return SpectralVector(np.power(phi(op.lam), nu) * omega)


def spectral_function(op, xdag, lam):
    """
    e(lam) = sum of xdag_i**2 over eigenvalues lam_i <= lam

    Args:
        op (SpectralOperator): The operator
        xdag (SpectralVector): The solution
        lam (float or numpy.ndarray): Points >= 0

    Returns:
        float or numpy.ndarray: Right-continuous step function values
    """
    xdag.check_matches(op)
    ascending = op.lam[::-1]
    # cumulate from the smallest eigenvalue so tiny tails keep their relative accuracy
    mass = np.concatenate(([0.0], np.cumsum(xdag.coeffs[::-1] ** 2)))
    count = np.searchsorted(ascending, np.asarray(lam, dtype=float), side="right")
    out = mass[count]
    if np.ndim(lam) == 0:
        return float(out)
    return out


def apply_forward(op, x):
    """y = L x in coefficient form"""
    x.check_matches(op)
    return SpectralVector(op.sigma * x.coeffs)


def save_operator(op, filename):
    save_json(op.to_dict(), filename)


def load_operator(filename):
    return SpectralOperator.from_dict(load_json(filename), label=filename)


def save_vector(x, filename):
    save_json(x.to_dict(), filename)


def load_vector(filename):
    return SpectralVector.from_dict(load_json(filename))


def spectrum_rows(op, xdag):
    """(lambda_i, xdag_i, e(lambda_i)) triples in spectrum order"""
    e = spectral_function(op, xdag, op.lam)
    return list(zip(op.lam.tolist(), xdag.coeffs.tolist(), e.tolist()))


def export_spectrum_csv(op, xdag, filename, comment=None):
    """
    Write the lambda,coeff,e table of a solution

    Args:
        op (SpectralOperator): The operator
        xdag (SpectralVector): The solution
        filename (str): CSV filename
        comment (str, optional): Leading comment line
    """
    save_csv(SPECTRUM_HEADER, spectrum_rows(op, xdag), filename, comment=comment)
