"""
Utility functions shared by the library and the command line
"""
import csv
import hashlib
import json
import logging
import math
import os

import numpy as np
from scipy import optimize

from core.errors import BracketError, ConfigError, InvalidArgumentError
from core.settings import BISECTION_RTOL, LOG_FORMAT, POINTS_PER_DECADE, TITLE, VERSION

logger = logging.getLogger(__name__)


def setup_logging(verbosity=0):
    """
    Configure the root logger once for the command line

    Args:
        verbosity (int): 0 for warnings, 1 for info, 2 or more for debug
    """
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT)
    logging.getLogger().setLevel(level)


def log_grid(start, stop, per_decade=POINTS_PER_DECADE, count=None):
    """
    Build an ascending log-spaced grid

    Args:
        start (float): Smallest grid value, > 0
        stop (float): Largest grid value, > start
        per_decade (int): Points per decade (ignored when count is given)
        count (int, optional): Total number of points

    Returns:
        numpy.ndarray: Grid values including both end points
    """
    if not (start > 0 and stop > start and math.isfinite(stop)):
        raise InvalidArgumentError(f"log grid needs 0 < start < stop, got [{start}, {stop}]")
    if count is None:
        decades = math.log10(stop / start)
        count = max(2, int(round(decades * per_decade)) + 1)
    if count < 2:
        raise InvalidArgumentError(f"log grid needs at least two points, got {count}")
    return np.logspace(math.log10(start), math.log10(stop), count)


def monotone_root(func, lower, upper, rtol=BISECTION_RTOL, what="root"):
    """
    Find the root of a monotone function on a bracket

    Args:
        func (callable): Monotone scalar function
        lower (float): Left end of the bracket
        upper (float): Right end of the bracket
        rtol (float): Relative tolerance on the abscissa
        what (str): Name of the quantity, used in error messages

    Returns:
        float: The root
    """
    f_lower = func(lower)
    f_upper = func(upper)
    if f_lower == 0:
        return lower
    if f_upper == 0:
        return upper
    if np.sign(f_lower) == np.sign(f_upper) or not (np.isfinite(f_lower) and np.isfinite(f_upper)):
        raise BracketError(
            f"cannot bracket {what} on [{lower:g}, {upper:g}]: values {f_lower:g}, {f_upper:g}"
        )
    return optimize.brentq(func, lower, upper, xtol=1e-300, rtol=max(rtol, 4 * np.finfo(float).eps), maxiter=500)


def stable_json_dumps(data):
    """
    Serialise data as pretty-printed JSON with sorted keys

    Args:
        data (dict): JSON-compatible data

    Returns:
        str: Deterministic JSON text with a trailing newline
    """
    return json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n"


def replace_non_finite(value):
    """
    Replace NaN and infinite floats by None so the data stays strict JSON

    Args:
        value: Nested dicts and lists of builtins

    Returns:
        tuple: (clean value, {path: "nan" | "inf" | "-inf"} for every replaced float)
    """
    replaced = {}

    def walk(v, path):
        if isinstance(v, dict):
            return {k: walk(item, f"{path}.{k}") for k, item in v.items()}
        if isinstance(v, list):
            return [walk(item, f"{path}[{i}]") for i, item in enumerate(v)]
        if isinstance(v, float) and not math.isfinite(v):
            replaced[path] = "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
            return None
        return v

    return walk(value, "$"), replaced


def config_hash(data):
    """
    Hash a configuration independently of key order

    Args:
        data (dict): Configuration data

    Returns:
        str: Hex SHA-256 digest
    """
    text = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def output_meta(config_digest):
    """
    Metadata block embedded in every output file

    Args:
        config_digest (str): Config hash

    Returns:
        dict: Tool name, version and config hash
    """
    return {"tool": TITLE, "version": VERSION, "config_sha256": config_digest}


def load_json(filename):
    """
    Load JSON data from a file

    Args:
        filename (str): JSON filename

    Returns:
        dict: The loaded JSON data
    """
    try:
        with open(filename, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {filename}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"malformed JSON in {filename}: {e}") from e


def save_json(data, filename):
    """
    Save JSON data to a file, keys sorted

    Args:
        data (dict): Data to save
        filename (str): JSON filename
    """
    _ensure_parent(filename)
    with open(filename, "w", encoding="utf-8", newline="\n") as f:
        f.write(stable_json_dumps(data))
    logger.info("wrote %s", filename)


def save_csv(header, rows, filename, comment=None):
    """
    Save rows to a CSV file with an optional leading comment line

    Args:
        header (sequence): Column names
        rows (iterable): Row tuples; floats are written with repr precision
        filename (str): CSV filename
        comment (str, optional): Text written as '# comment' before the header
    """
    _ensure_parent(filename)
    with open(filename, "w", encoding="utf-8", newline="") as f:
        if comment:
            f.write(f"# {comment}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(v) for v in row])
    logger.info("wrote %s", filename)


def load_csv_columns(filename, columns):
    """
    Load named float columns from a CSV file ('#' lines are skipped)

    Args:
        filename (str): CSV filename
        columns (sequence): Column names to extract

    Returns:
        list of numpy.ndarray: One array per requested column
    """
    try:
        with open(filename, "r", encoding="utf-8") as f:
            lines = [line for line in f if line.strip() and not line.startswith("#")]
    except FileNotFoundError as e:
        raise ConfigError(f"table file not found: {filename}") from e
    reader = csv.DictReader(lines)
    missing = [c for c in columns if c not in (reader.fieldnames or [])]
    if missing:
        raise ConfigError(f"{filename} lacks columns {missing}")
    data = {c: [] for c in columns}
    for record in reader:
        for c in columns:
            data[c].append(float(record[c]))
    return [np.asarray(data[c], dtype=float) for c in columns]


def format_number(value):
    """
    Format a value for CSV output deterministically

    Args:
        value: Number or string

    Returns:
        str: Shortest round-trip representation for floats
    """
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def to_builtin(value):
    """
    Convert numpy scalars and arrays into JSON-compatible Python values

    Args:
        value: Any nested combination of dicts, lists, tuples and numpy values

    Returns:
        The same structure made of builtins
    """
    if isinstance(value, dict):
        return {str(k): to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_builtin(v) for v in value.tolist()]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def _ensure_parent(filename):
    parent = os.path.dirname(filename)
    if parent:
        os.makedirs(parent, exist_ok=True)
