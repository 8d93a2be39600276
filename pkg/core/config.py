"""
Experiment configuration: typed models for the JSON config files and the
builders that turn them into operators, solutions, filters and grids
"""
import copy
import logging
import os
from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from core.errors import ConfigError, SpecRegError
from core.settings import (
    DEFAULT_CONFIG_FILE, DEFAULT_OUTPUT_DIR, DEFAULT_SEED, DEFAULT_SETTINGS, DEFAULT_SLOPE_TOL,
    DEFAULT_SPREAD_BOUND, DEFAULT_VI_SAMPLES, DEFAULT_XI_SAMPLES, BRACKET_FACTOR
)
from core.utils import config_hash, load_json, log_grid
from entities.filters import parse_filter
from entities.index_functions import parse_index_function
from entities.operators import (
    SourceProfile, SpectralVector, load_operator, load_vector, make_operator,
    make_solution_from_profile, make_source_solution
)

logger = logging.getLogger(__name__)

ROOT_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class OperatorSpec(_Strict):
    """Synthetic spectrum (kind, n, decay) or a saved operator file"""
    kind: Literal["polynomial", "exponential", "file"] = "polynomial"
    n: int = Field(200, ge=1)
    decay: float = Field(1.0, gt=0)
    path: Optional[str] = None

    @model_validator(mode="after")
    def _path_for_file(self):
        if self.kind == "file" and not self.path:
            raise ValueError("operator kind 'file' needs a path")
        if self.kind != "file":
            _parsed(lambda spec: make_operator(*spec), (self.kind, self.n, self.decay))
        return self


class SolutionSpec(_Strict):
    """
    How the minimum-norm solution is built

    profile: spectral function scale * target on the spectrum
    source: phi(L*L)**nu omega, omega given or drawn from the seed
    zero: the zero vector
    coeffs: explicit coefficients or a saved vector file
    """
    kind: Literal["profile", "source", "zero", "coeffs"] = "profile"
    target: Optional[str] = None
    scale: float = Field(1.0, gt=0)
    omega: Optional[List[float]] = None
    omega_norm: float = Field(1.0, gt=0)
    coeffs: Optional[List[float]] = None
    path: Optional[str] = None

    @field_validator("target")
    @classmethod
    def _parse_target(cls, value):
        if value is not None:
            _parsed(parse_index_function, value)
        return value

    @model_validator(mode="after")
    def _fields_for_kind(self):
        if self.kind == "profile" and self.target is None:
            raise ValueError("a profile solution needs a target index function")
        if self.kind == "coeffs" and self.coeffs is None and not self.path:
            raise ValueError("a coeffs solution needs coeffs or a path")
        return self


class GridSpec(_Strict):
    """Log-spaced grid from start to stop"""
    start: float = Field(gt=0)
    stop: float = Field(gt=0)
    per_decade: Optional[int] = Field(None, ge=1)
    count: Optional[int] = Field(None, ge=2)

    @model_validator(mode="after")
    def _ordered(self):
        if not self.stop > self.start:
            raise ValueError(f"grid stop {self.stop} must exceed start {self.start}")
        if self.per_decade is not None and self.count is not None:
            raise ValueError("give either per_decade or count, not both")
        return self

    def values(self):
        if self.count is not None:
            return log_grid(self.start, self.stop, count=self.count)
        if self.per_decade is not None:
            return log_grid(self.start, self.stop, per_decade=self.per_decade)
        return log_grid(self.start, self.stop)


class FitSpec(_Strict):
    """Rate model to fit and the value it is compared with"""
    model: Literal["power", "log"] = "power"
    window: Optional[List[float]] = None
    expected: Optional[float] = None
    nu: Optional[float] = Field(None, gt=0)
    control_nu: Optional[float] = Field(None, gt=0)

    @field_validator("window")
    @classmethod
    def _window_pair(cls, value):
        if value is not None and (len(value) != 2 or not 0 < value[0] < value[1]):
            raise ValueError(f"fit window must be [low, high] with 0 < low < high, got {value}")
        return value

    @model_validator(mode="after")
    def _nu_for_log(self):
        if self.model == "log" and self.nu is None:
            raise ValueError("the log model needs its exponent nu")
        if self.control_nu is not None and (self.model != "log" or self.control_nu == self.nu):
            raise ValueError("control_nu needs the log model and must differ from nu")
        return self


class Tolerances(_Strict):
    slope: float = Field(DEFAULT_SLOPE_TOL, gt=0)
    spread: float = Field(DEFAULT_SPREAD_BOUND, gt=1)
    bracket_factor: float = Field(BRACKET_FACTOR, ge=1)


class ExperimentConfig(_Strict):
    """
    One experiment: operator, solution, filter, rate function and grids

    Unknown keys are rejected at every level.
    """
    operator: OperatorSpec = Field(default_factory=OperatorSpec)
    solution: SolutionSpec = Field(default_factory=lambda: SolutionSpec(target="holder:1.0"))
    filter: str = "tikhonov"
    phi: str = "holder:1.0"
    nu: float = Field(0.5, gt=0, le=1)
    mu: float = Field(0.5, gt=0, lt=1)
    relaxed_mu: Optional[float] = Field(None, gt=0, lt=1)
    A_declared: Optional[float] = Field(None, gt=0)
    alpha_grid: Optional[GridSpec] = None
    lambda_grid: Optional[GridSpec] = None
    delta_grid: Optional[GridSpec] = None
    r_grid: Optional[GridSpec] = None
    gamma_grid: Optional[GridSpec] = None
    fit: FitSpec = Field(default_factory=FitSpec)
    dims: Optional[List[int]] = None
    samples: int = Field(DEFAULT_VI_SAMPLES, ge=0)
    xi_samples: int = Field(DEFAULT_XI_SAMPLES, ge=0)
    oracle_instances: Optional[int] = Field(None, ge=1)
    seed: int = Field(DEFAULT_SEED, ge=0)
    output_dir: str = DEFAULT_OUTPUT_DIR
    tolerances: Tolerances = Field(default_factory=Tolerances)

    @field_validator("filter")
    @classmethod
    def _parse_filter(cls, value):
        _parsed(parse_filter, value)
        return value

    @field_validator("phi")
    @classmethod
    def _parse_phi(cls, value):
        _parsed(parse_index_function, value)
        return value

    @field_validator("dims")
    @classmethod
    def _increasing_dims(cls, value):
        if value is not None and (not value or value[0] < 1 or any(b <= a for a, b in zip(value, value[1:]))):
            raise ValueError(f"dims must be positive and increasing, got {value}")
        return value

    @model_validator(mode="after")
    def _relaxed_below_nu(self):
        if self.relaxed_mu is not None and not self.relaxed_mu < self.nu:
            raise ValueError(f"relaxed_mu must be below nu={self.nu}, got {self.relaxed_mu}")
        return self

    @property
    def digest(self):
        """Config hash embedded in outputs; the output directory does not enter it"""
        return config_hash(self.model_dump(mode="json", exclude={"output_dir"}))

    def build_operator(self):
        spec = self.operator
        if spec.kind == "file":
            return load_operator(spec.path)
        return make_operator(spec.kind, spec.n, spec.decay)

    def build_family(self):
        return parse_filter(self.filter)

    def build_phi(self):
        return parse_index_function(self.phi)

    def source_element(self, n):
        """
        Source element omega of a 'source' solution

        Args:
            n (int): Spectrum size

        Returns:
            numpy.ndarray: omega, from the config or drawn from the seed and scaled to omega_norm
        """
        if self.solution.omega is not None:
            return np.asarray(self.solution.omega, dtype=float)
        rng = np.random.default_rng(self.seed)
        omega = rng.standard_normal(n)
        return self.solution.omega_norm * omega / np.linalg.norm(omega)

    def build_solution(self, op, phi=None):
        """
        Build x_dag for the operator

        Args:
            op (SpectralOperator): The operator
            phi (IndexFunction, optional): Rate function for 'source' solutions; defaults to the config phi

        Returns:
            SpectralVector: The solution
        """
        spec = self.solution
        if spec.kind == "profile":
            profile = SourceProfile(parse_index_function(spec.target), spec.scale)
            return make_solution_from_profile(op, profile)
        if spec.kind == "source":
            phi = phi if phi is not None else self.build_phi()
            return make_source_solution(op, phi, self.nu, self.source_element(len(op)))
        if spec.kind == "zero":
            return SpectralVector.zeros(len(op))
        xdag = load_vector(spec.path) if spec.path else SpectralVector(spec.coeffs)
        xdag.check_matches(op)
        return xdag

    def grid(self, name, default):
        """
        Values of a configured grid, or log_grid(*default) when it is absent

        Args:
            name (str): alpha_grid, lambda_grid, delta_grid, r_grid or gamma_grid
            default (tuple): (start, stop) or (start, stop, per_decade)

        Returns:
            numpy.ndarray: Ascending grid
        """
        spec = getattr(self, name)
        if spec is None:
            return log_grid(*default)
        return spec.values()


def _parsed(parser, value):
    # pydantic reports ValueError only; library errors are not all ValueErrors
    try:
        return parser(value)
    except SpecRegError as e:
        raise ValueError(str(e)) from e


def default_config_path():
    return os.path.join(ROOT_DIR, DEFAULT_CONFIG_FILE)


def load_config_data(path=None):
    """
    Read the raw config dictionary

    Args:
        path (str, optional): Config file; the root settings.json when omitted

    Returns:
        dict: Raw config data
    """
    if path is None:
        path = default_config_path()
        if not os.path.exists(path):
            logger.info("no %s found, using built-in defaults", DEFAULT_CONFIG_FILE)
            return copy.deepcopy(DEFAULT_SETTINGS)
    data = load_json(path)
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return data


def build_config(data, overrides=None):
    """
    Validate raw config data with top-level overrides applied

    Args:
        data (dict): Raw config data
        overrides (dict, optional): Keys replacing those of data

    Returns:
        ExperimentConfig: The validated config
    """
    merged = copy.deepcopy(data)
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = copy.deepcopy(value)
    try:
        return ExperimentConfig.model_validate(merged)
    except ValidationError as e:
        raise ConfigError(f"invalid config: {e}") from e


def load_config(path=None, seed=None, output_dir=None):
    """
    Load and validate a config file with command-line overrides

    Args:
        path (str, optional): Config file
        seed (int, optional): Overrides the config seed
        output_dir (str, optional): Overrides the config output directory

    Returns:
        ExperimentConfig: The validated config
    """
    config = build_config(load_config_data(path), {"seed": seed, "output_dir": output_dir})
    logger.debug("config %s loaded with hash %s", path or default_config_path(), config.digest)
    return config
