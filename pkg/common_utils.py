"""
Common utilities and configuration shared by the ghzmetro modules and CLI
"""
import os
import sys
import logging
from datetime import datetime
from fractions import Fraction

import pytz
import simplejson

VERSION = '1.0.0'

# Setup logging
logger = logging.getLogger(__name__)

UTC = pytz.UTC

# Defaults, overridable via environment (read at call time)
DEFAULT_DENSE_LIMIT = 12
DEFAULT_SUBSET_LIMIT = 12
DEFAULT_SUBSET_SAMPLES = 256
DEFAULT_BELL_LIMIT = 16
DEFAULT_BRUTE_LIMIT = 6
DEFAULT_RNG = 'philox'
SUPPORTED_RNGS = ('philox', 'pcg64')


# Error hierarchy; exit_code is what the CLI returns for each class
class GhzMetroError(Exception):
    exit_code = 1

    def __init__(self, message, rows=None):
        super().__init__(message)
        # result rows the CLI still prints before exiting
        self.rows = rows or []


class DomainError(GhzMetroError, ValueError):
    exit_code = 2


class NormalizationError(DomainError):
    pass


class ConfigError(GhzMetroError, ValueError):
    exit_code = 2


class SizeLimitError(GhzMetroError):
    exit_code = 3


class CrossCheckError(GhzMetroError):
    exit_code = 4


class SingularPointError(GhzMetroError):
    exit_code = 4


# Environment helpers
def get_str_env(var_name, default):
    value = os.environ.get(var_name)
    if value is None or value.strip() == '':
        return default
    return value.strip()


def get_int_env(var_name, default, minimum=1):
    raw = os.environ.get(var_name)
    if raw is None or raw.strip() == '':
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"FATAL: Environment variable '{var_name}' must be an integer, got {raw!r}")
    if value < minimum:
        raise ConfigError(f"FATAL: Environment variable '{var_name}' must be >= {minimum}, got {value}")
    return value


def dense_limit():
    return get_int_env('GHZMETRO_DENSE_LIMIT', DEFAULT_DENSE_LIMIT, minimum=2)


def subset_limit():
    return get_int_env('GHZMETRO_SUBSET_LIMIT', DEFAULT_SUBSET_LIMIT, minimum=2)


def subset_samples():
    return get_int_env('GHZMETRO_SUBSET_SAMPLES', DEFAULT_SUBSET_SAMPLES)


def bell_limit():
    return get_int_env('GHZMETRO_BELL_LIMIT', DEFAULT_BELL_LIMIT, minimum=2)


def brute_limit():
    return get_int_env('GHZMETRO_BRUTE_LIMIT', DEFAULT_BRUTE_LIMIT, minimum=2)


def rng_algorithm():
    name = get_str_env('GHZMETRO_RNG', DEFAULT_RNG).lower()
    if name not in SUPPORTED_RNGS:
        raise ConfigError(f"FATAL: GHZMETRO_RNG must be one of {', '.join(SUPPORTED_RNGS)}, got {name!r}")
    return name


def check_size(n, limit, what):
    """Raise SizeLimitError when n exceeds the configured cap for `what`."""
    if n > limit:
        raise SizeLimitError(f"{what} limited to n <= {limit}, got n = {n}")


def setup_logging(level=None):
    if level is None:
        level = get_str_env('GHZMETRO_LOG_LEVEL', 'WARNING').upper()
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
    )
    logging.getLogger().setLevel(level)


# Number formatting
def parse_fraction(text):
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError):
        raise DomainError(f"Not a rational number: {text!r}")


def fraction_str(value):
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def format_number(value, exact=False):
    """p/q in exact mode for rationals, otherwise 17 significant digits."""
    if isinstance(value, bool) or value is None:
        return str(value)
    if isinstance(value, str):
        return value
    if exact and isinstance(value, (int, Fraction)):
        return fraction_str(value)
    return format(float(value), '.17g')


def to_jsonable(value, exact=False):
    if isinstance(value, dict):
        return {str(key): to_jsonable(val, exact) for key, val in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(val, exact) for val in value]
    if isinstance(value, Fraction):
        return fraction_str(value) if exact else float(value)
    if hasattr(value, 'item') and not isinstance(value, (str, bytes)):
        # numpy scalars
        return value.item()
    return value


def dumps_json(payload, exact=False):
    return simplejson.dumps(to_jsonable(payload, exact), sort_keys=True, indent=2)


# UTC timestamp helpers for provenance
def get_utc_now():
    return datetime.now(UTC)


def get_utc_isoformat():
    return get_utc_now().replace(microsecond=0).isoformat()


def provenance(command, seed=None, timestamp=True):
    header = {
        'command': command,
        'version': VERSION,
        'seed': seed,
    }
    if timestamp:
        header['timestamp'] = get_utc_isoformat()
    return header
