"""
Common utilities for the Bell-test laboratory

Shared constants, error types, configuration loading and output helpers used
across all commands.
"""

import csv
import io
import json
import logging
import math
import os
import sys
from configparser import ConfigParser, Error as ConfigParserError
from pathlib import Path

logger = logging.getLogger(__name__)

# Reference bounds carried by every emitted S
CLASSICAL_BOUND = 2.0
TSIRELSON_BOUND = 2.0 * math.sqrt(2.0)

# Numeric tolerances
EXACT_TOL = 1e-12
CHAINED_TOL = 1e-10
EXACT_S_SLACK = 1e-9
MC_SIGMA_MARGIN = 4.0

# Exit statuses
EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONTRACT = 3

# Default configuration paths
CONFIG_DIR = Path(os.environ.get('BELLGA_CONFIG_DIR', Path.home() / ".config" / "bellga")).expanduser()
CONFIG_FILE = CONFIG_DIR / "config"

MODELS = ('sign', 'vector', 'bivector')
CONVENTIONS = ('standard', 'oriented')
FORMATS = ('json', 'csv')

DEFAULTS = {
    'model': 'vector',
    'convention': 'oriented',
    'samples': 100000,
    'seed': 0,
    'workers': 1,
    'format': 'json',
}

# option name -> (parser, allowed values or None)
CONFIG_OPTIONS = {
    'model': (str, MODELS),
    'convention': (str, CONVENTIONS),
    'samples': (int, None),
    'seed': (int, None),
    'workers': (int, None),
    'format': (str, FORMATS),
}

CONFIG_SECTION = 'run'


# ============================================================================
# ERRORS
# ============================================================================

class BellLabError(Exception):
    """Base class for all laboratory errors"""


class InvalidInputError(BellLabError, ValueError):
    """Input value is not a valid element (non-finite, non-unit, not ±1)"""


class InvalidArgumentError(BellLabError, ValueError):
    """Argument outside its declared range"""


class ContractViolationError(BellLabError):
    """A numeric or structural contract between operations was broken"""


class ResourceLimitError(BellLabError):
    """Requested work exceeds a configured cap"""


class ConfigError(InvalidArgumentError):
    """Invalid configuration file, environment value or flag"""


# ============================================================================
# CONFIGURATION
# ============================================================================

def coerce_option(option, raw):
    """
    Validate and convert a single configuration value.

    Args:
        option: Option name (must be one of CONFIG_OPTIONS)
        raw: Raw string (or already typed) value

    Returns:
        The converted value

    Raises:
        ConfigError: unknown option, unparsable or out-of-range value
    """
    if option not in CONFIG_OPTIONS:
        raise ConfigError(f"Unknown option '{option}' (expected one of: {', '.join(CONFIG_OPTIONS)})")

    kind, allowed = CONFIG_OPTIONS[option]
    try:
        value = kind(str(raw).strip())
    except ValueError as e:
        raise ConfigError(f"Invalid value for '{option}': {raw!r}") from e

    if allowed is not None and value not in allowed:
        raise ConfigError(f"Invalid value for '{option}': {value!r} (expected one of: {', '.join(allowed)})")
    if option in ('samples', 'workers') and value < 1:
        raise ConfigError(f"'{option}' must be at least 1, got {value}")
    if option == 'seed' and not 0 <= value < 2**64:
        raise ConfigError(f"'seed' must be a 64-bit unsigned integer, got {value}")

    return value


def load_config(config_file=None, environ=None):
    """
    Load run defaults from environment variables and the config file.

    Priority: Environment variables > Config file > Defaults
    (command-line flags are applied on top by the caller)

    Environment variables:
    - BELLGA_MODEL, BELLGA_CONVENTION, BELLGA_SAMPLES,
      BELLGA_SEED, BELLGA_WORKERS, BELLGA_FORMAT

    Config file ($BELLGA_CONFIG_DIR/config, default ~/.config/bellga/config):
    [run]
    model = vector
    convention = oriented
    samples = 100000
    seed = 0
    workers = 4
    format = json

    Returns:
        dict with keys: model, convention, samples, seed, workers, format
    """
    config_file = Path(config_file) if config_file else CONFIG_FILE
    environ = os.environ if environ is None else environ
    config = dict(DEFAULTS)

    if config_file.exists():
        parser = ConfigParser()
        try:
            parser.read(config_file)
        except ConfigParserError as e:
            raise ConfigError(f"Cannot parse {config_file}: {e}") from e

        for section in parser.sections():
            if section != CONFIG_SECTION:
                raise ConfigError(f"Unknown section [{section}] in {config_file}")
            for option in parser.options(section):
                config[option] = coerce_option(option, parser.get(section, option))
        logger.debug("Loaded config file %s", config_file)

    for option in CONFIG_OPTIONS:
        env_name = f"BELLGA_{option.upper()}"
        if environ.get(env_name):
            config[option] = coerce_option(option, environ[env_name])
            logger.debug("Option %s overridden by %s", option, env_name)

    return config


# ============================================================================
# OUTPUT
# ============================================================================

def to_json(record):
    """Serialize a record deterministically (stable key order and float repr)"""
    return json.dumps(record, indent=2, sort_keys=False) + "\n"


def to_csv(rows, columns):
    """
    Serialize rows of dicts to CSV text with a fixed column order.

    Args:
        rows: Iterable of dicts
        columns: Column names, in output order

    Returns:
        CSV text with '\\n' line endings
    """
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(columns), lineterminator="\n", extrasaction='ignore')
    writer.writeheader()
    for row in rows:
        writer.writerow({key: _csv_cell(row.get(key)) for key in columns})
    return buffer.getvalue()


def _csv_cell(value):
    if isinstance(value, float):
        return repr(value)
    return value


def write_output(text, out_path=None):
    """Write structured output to a file, or to stdout when no path is given"""
    if out_path:
        path = Path(out_path).expanduser()
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        logger.info("Wrote %d bytes to %s", len(text), path)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def summary_stream(out_path=None):
    """Human summaries go to stdout unless stdout carries the structured record"""
    return sys.stdout if out_path else sys.stderr
