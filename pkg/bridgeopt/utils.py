import csv
import json
import logging
import os

import numpy as np

from bridgeopt.exceptions import ConfigError, IoError
from bridgeopt.models import FORMAT_VERSION

logger = logging.getLogger("bridgeopt")

DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data")


def data_path(name):
    """Return the path of a file shipped in the package data directory."""
    return os.path.join(DATA_DIR, name)


def load_json(file_path):
    """
    Load a JSON document from disk.

    Args:
        file_path (str):
            Path of the JSON file.

    Returns:
        dict | list:
            The decoded document.

    Raises:
        IoError: if the file is missing or unreadable.
        ConfigError: if the file is not valid JSON.
    """
    try:
        with open(file_path, "r", encoding="utf-8") as file:
            return json.load(file)
    except FileNotFoundError:
        raise IoError(f"File not found: {file_path}")
    except OSError as e:
        raise IoError(f"Cannot read {file_path}: {e}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"Invalid JSON in {file_path}: {e}")


def _to_builtin(value):
    if isinstance(value, np.ndarray):
        return [_to_builtin(v) for v in value.tolist()]
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, dict):
        return {k: _to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_builtin(v) for v in value]
    return value


def dump_json(file_path, document):
    """
    Write a JSON artifact, stamping it with the current format version.

    Args:
        file_path (str):
            Destination path. Parent directories are created.
        document (dict):
            Content to write. numpy scalars and arrays are converted.

    Raises:
        IoError: if the file cannot be written.
    """
    payload = {"format_version": FORMAT_VERSION}
    payload.update(_to_builtin(document))
    text = json.dumps(payload, indent=2, sort_keys=True, allow_nan=True)
    write_text(file_path, text + "\n")


def write_text(file_path, text):
    parent = os.path.dirname(file_path)
    try:
        if parent:
            os.makedirs(parent, exist_ok=True)
        with open(file_path, "w", encoding="utf-8", newline="") as file:
            file.write(text)
    except OSError as e:
        raise IoError(f"Cannot write {file_path}: {e}")
    logger.debug(f"Wrote {file_path}")


def write_csv(file_path, header, rows):
    """
    Write a versioned CSV file.

    The first line is a ``# format_version=N`` comment, then the header,
    then one line per row. Floats are written with ``repr`` so the file
    round-trips exactly.

    Args:
        file_path (str):
            Destination path.
        header (list[str]):
            Column names.
        rows (iterable[tuple]):
            Row values.
    """
    parent = os.path.dirname(file_path)
    try:
        if parent:
            os.makedirs(parent, exist_ok=True)
        with open(file_path, "w", encoding="utf-8", newline="") as file:
            file.write(f"# format_version={FORMAT_VERSION}\n")
            writer = csv.writer(file, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_format_cell(v) for v in row])
    except OSError as e:
        raise IoError(f"Cannot write {file_path}: {e}")
    logger.debug(f"Wrote {file_path}")


def _format_cell(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return value


def read_csv(file_path):
    """
    Read a versioned CSV file written by ``write_csv``.

    Args:
        file_path (str):
            Path of the CSV file.

    Returns:
        tuple[list[str], list[list[str]]]:
            The header and the raw string rows.

    Raises:
        IoError: if the file is missing or unreadable.
    """
    try:
        with open(file_path, "r", encoding="utf-8", newline="") as file:
            lines = [line for line in file if not line.startswith("#")]
    except FileNotFoundError:
        raise IoError(f"File not found: {file_path}")
    except OSError as e:
        raise IoError(f"Cannot read {file_path}: {e}")
    reader = csv.reader(lines)
    rows = [row for row in reader if row]
    if not rows:
        return [], []
    return rows[0], rows[1:]


def validate_positive(name, value):
    """
    Check that a numeric field is a finite number greater than zero.

    Args:
        name (str):
            Field name used in the message.
        value:
            Value to check.

    Returns:
        str | None:
            An error message, or None when the value is valid.
    """
    try:
        number = float(value)
    except (TypeError, ValueError):
        return f"{name} must be a number, got {value!r}"
    if not np.isfinite(number) or number <= 0:
        return f"{name} must be > 0, got {value!r}"
    return None


def validate_int(name, value, minimum=0):
    """Return an error message unless ``value`` is an integer >= ``minimum``."""
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        return f"{name} must be an integer, got {value!r}"
    if value < minimum:
        return f"{name} must be >= {minimum}, got {value!r}"
    return None


def validate_rate(name, value):
    """Return an error message unless ``value`` lies in [0, 1]."""
    try:
        number = float(value)
    except (TypeError, ValueError):
        return f"{name} must be a number, got {value!r}"
    if not 0.0 <= number <= 1.0:
        return f"{name} must be within [0, 1], got {value!r}"
    return None


def raise_if_errors(errors, context):
    """
    Raise one ConfigError listing every collected validation message.

    Args:
        errors (list[str | None]):
            Validator results; None entries are ignored.
        context (str):
            Prefix naming what was being validated.
    """
    messages = [e for e in errors if e]
    if messages:
        for message in messages:
            logger.warning(f"{context}: {message}")
        raise ConfigError(f"{context}: " + "; ".join(messages))
