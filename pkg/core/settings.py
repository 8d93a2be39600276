"""
Library settings and configuration constants
"""

# Identity
TITLE = "specreg"
VERSION = "0.3.0"

# Grid settings
POINTS_PER_DECADE = 50
DEFAULT_DECADES = 8
RATIO_POINTS_PER_DECADE = 10  # ratio conditions sweep triples, keep them coarse
MAX_SPECTRUM_SIZE = 10**6

# Default grids (start, stop) for the log-spaced sweeps
ALPHA_RANGE = (1e-8, 1e2)
LAMBDA_RANGE = (1e-8, 1e2)
GAMMA_RANGE = (1e-3, 1e3)
DELTA_RANGE = (1e-7, 1e-3)

# Rate experiment spectrum: exponential decay, log-uniform eigenvalues
RATE_OPERATOR_KIND = "exponential"
RATE_OPERATOR_DECAY = 0.004
RATE_OPERATOR_SIZE = 4000

# Tolerances
IDENTITY_TOL = 1e-12  # r_tilde against (1 - lam * r)**2
MONOTONE_TOL = 1e-12
CONTINUITY_JUMP_TOL = 0.5  # relative jump of r_tilde between adjacent alphas
JUMP_SCALE_FLOOR = 1e-2
GENERATOR_MARGIN = 1e-6  # rho_hat and rho_tilde_hat must stay this far below 1
RHO_TILDE_MARGIN = 1e-9
BISECTION_RTOL = 1e-10
KKT_RTOL = 1e-12
KKT_ORACLE_TOL = 1e-6
KKT_ORACLE_MAX_SIZE = 6
KKT_ORACLE_SAMPLES = 2000
ALPHA_DELTA_RTOL = 1e-12
BRACKET_LOG_ALPHA = (-60.0, 60.0)  # natural log of the alpha bracket
BRACKET_LOG_PSI_INVERSE = (-690.0, 690.0)
BRACKET_FACTOR = 1.01  # multiplicative slack on both ends of the noisy bracket
VI_TOL = 1e-9
SSC_TOL = 1e-9
LOG_PSI_RESIDUAL_TOL = 1e-10
QUALIFICATION_EXTEND_DECADES = 2
QUALIFICATION_GROWTH_TOL = 1.1  # A_hat on the widened grids against the given ones

# Fitting
MIN_FIT_POINTS = 10
FIT_EXCLUDE_DECADES = 2
DEFAULT_SLOPE_TOL = 0.05
DEFAULT_SPREAD_BOUND = 5.0

# Sampling
DEFAULT_SEED = 0
DEFAULT_VI_SAMPLES = 200
DEFAULT_XI_SAMPLES = 50

# Exit codes
EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

# Output file names
GENERATOR_REPORT_FILE = "generator_report.json"
ERROR_CURVE_FILE = "error_curve.csv"
RATE_FIT_FILE = "rate_fit.json"
NOISY_SWEEP_FILE = "noisy_sweep.csv"
NOISY_REPORT_FILE = "noisy_report.json"
VARIATIONAL_REPORT_FILE = "variational_report.json"
DISTANCE_PROFILE_FILE = "distance_profile.csv"
DISTANCE_REPORT_FILE = "distance_report.json"
SPECTRUM_FILE = "spectrum.csv"

# CSV headers
SPECTRUM_HEADER = ("lambda", "coeff", "e")
ERROR_CURVE_HEADER = ("alpha", "err_sq")
NOISY_SWEEP_HEADER = ("delta", "alpha_delta", "lower", "adversarial", "upper")
DISTANCE_PROFILE_HEADER = ("R", "d", "mu")

# Subcommands
CMD_VALIDATE_FILTER = "validate-filter"
CMD_RATE_EXACT = "rate-exact"
CMD_RATE_NOISY = "rate-noisy"
CMD_VAR_INEQ = "var-ineq"
CMD_DISTANCE = "distance"
CMD_RUN_ALL = "run-all"

DEFAULT_CONFIG_FILE = "settings.json"
DEFAULT_OUTPUT_DIR = "results"

_RATE_OPERATOR = {"kind": RATE_OPERATOR_KIND, "n": RATE_OPERATOR_SIZE, "decay": RATE_OPERATOR_DECAY}

# Built-in acceptance suite for run-all: (name, subcommand, config overrides, expected exit)
RUN_ALL_SUITE = [
    ("tikhonov_generator", CMD_VALIDATE_FILTER, {"filter": "tikhonov"}, EXIT_PASS),
    ("cutoff_generator", CMD_VALIDATE_FILTER, {"filter": "cutoff:2"}, EXIT_FAIL),
    ("holder_exact_nu025", CMD_RATE_EXACT, {
        "operator": _RATE_OPERATOR,
        "solution": {"kind": "profile", "target": "holder:0.5"},
        "fit": {"model": "power", "window": [1e-7, 1e-2], "expected": 0.5},
    }, EXIT_PASS),
    ("holder_exact_nu05", CMD_RATE_EXACT, {
        "operator": _RATE_OPERATOR,
        "solution": {"kind": "profile", "target": "holder:1.0"},
        "fit": {"model": "power", "window": [1e-7, 1e-2], "expected": 1.0},
    }, EXIT_PASS),
    ("holder_exact_nu075", CMD_RATE_EXACT, {
        "operator": _RATE_OPERATOR,
        "solution": {"kind": "profile", "target": "holder:1.5"},
        "fit": {"model": "power", "window": [1e-7, 1e-2], "expected": 1.5},
    }, EXIT_PASS),
    ("log_exact_nu05", CMD_RATE_EXACT, {
        "operator": _RATE_OPERATOR,
        "solution": {"kind": "profile", "target": "log:0.5"},
        "phi": "log:0.5",
        "alpha_grid": {"start": 1e-12, "stop": 1e-1, "per_decade": POINTS_PER_DECADE},
        "fit": {"model": "log", "window": [1e-9, 1e-3], "nu": 0.5},
    }, EXIT_PASS),
    ("log_negative_control", CMD_RATE_EXACT, {
        "operator": _RATE_OPERATOR,
        "solution": {"kind": "profile", "target": "log:0.5"},
        "phi": "log:0.5",
        "alpha_grid": {"start": 1e-12, "stop": 1e-1, "per_decade": POINTS_PER_DECADE},
        "fit": {"model": "log", "window": [1e-9, 1e-3], "nu": 0.5, "control_nu": 0.7},
    }, EXIT_PASS),
    ("holder_noisy_nu05", CMD_RATE_NOISY, {
        "operator": _RATE_OPERATOR,
        "solution": {"kind": "profile", "target": "holder:1.0"},
        "phi": "holder:1.0",
        "alpha_grid": {"start": 1e-10, "stop": 1.0, "per_decade": POINTS_PER_DECADE},
        "delta_grid": {"start": 1e-7, "stop": 1e-3, "count": 20},
    }, EXIT_PASS),
    ("log_psi", CMD_RATE_NOISY, {
        "operator": _RATE_OPERATOR,
        "solution": {"kind": "profile", "target": "log:0.5"},
        "phi": "log:0.5",
        "alpha_grid": {"start": 1e-10, "stop": 1.0, "per_decade": POINTS_PER_DECADE},
        "delta_grid": {"start": 1e-10, "stop": 1e-4, "count": 7},
    }, EXIT_PASS),
    ("variational_nu05", CMD_VAR_INEQ, {
        "operator": {"kind": "polynomial", "n": 10000, "decay": 0.5},
        "solution": {"kind": "profile", "target": "holder:1.0"},
        "phi": "holder:1.0",
        "nu": 0.5,
        "dims": [100, 1000, 10000],
    }, EXIT_PASS),
    ("variational_nu025", CMD_VAR_INEQ, {
        "operator": {"kind": "polynomial", "n": 10000, "decay": 0.5},
        "solution": {"kind": "profile", "target": "holder:0.5"},
        "phi": "holder:1.0",
        "nu": 0.25,
        "dims": [100, 1000, 10000],
    }, EXIT_PASS),
    ("ssc_membership", CMD_VAR_INEQ, {
        "operator": {"kind": "polynomial", "n": 10000, "decay": 0.5},
        "solution": {"kind": "source", "omega_norm": 1.0},
        "phi": "holder:1.0",
        "nu": 0.5,
        "dims": [100, 1000, 10000],
        "relaxed_mu": 0.25,
    }, EXIT_PASS),
    ("distance_nu05", CMD_DISTANCE, {
        "operator": _RATE_OPERATOR,
        "solution": {"kind": "profile", "target": "holder:1.0"},
        "phi": "holder:1.0",
        "nu": 0.5,
        "r_grid": {"start": 1e2, "stop": 1e5, "per_decade": 10},
        "alpha_grid": {"start": 1e-10, "stop": 1.0, "per_decade": 10},
    }, EXIT_PASS),
    ("distance_nu025", CMD_DISTANCE, {
        "operator": _RATE_OPERATOR,
        "solution": {"kind": "profile", "target": "holder:0.5"},
        "phi": "holder:1.0",
        "nu": 0.25,
        "r_grid": {"start": 1e3, "stop": 1e6, "per_decade": 10},
        "alpha_grid": {"start": 1e-10, "stop": 1.0, "per_decade": 10},
    }, EXIT_PASS),
    ("distance_kkt_oracle", CMD_DISTANCE, {
        "operator": _RATE_OPERATOR,
        "solution": {"kind": "profile", "target": "holder:1.0"},
        "phi": "holder:1.0",
        "nu": 0.5,
        "r_grid": {"start": 1e2, "stop": 1e5, "per_decade": 10},
        "alpha_grid": {"start": 1e-10, "stop": 1.0, "per_decade": 10},
        "oracle_instances": 100,
    }, EXIT_PASS),
]

# Default experiment settings (mirrors settings.json)
DEFAULT_SETTINGS = {
    "operator": {"kind": "polynomial", "n": 200, "decay": 1.0},
    "solution": {"kind": "profile", "target": "holder:1.0", "scale": 1.0},
    "filter": "tikhonov",
    "phi": "holder:1.0",
    "nu": 0.5,
    "mu": 0.5,
    "seed": DEFAULT_SEED,
    "output_dir": DEFAULT_OUTPUT_DIR,
}

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"

