"""
Runtime settings for the multilinear representation toolkit.

Values here are defaults; the accessors below apply environment overrides
at call time so a single process (or a test) can change them.
"""

import logging
import os

from src.core.errors import ConfigurationError

# Box searches: maximum number of points in [-R, R]^n.
DEFAULT_EVALUATION_BUDGET = 10 ** 8

# Modular obstruction checks: maximum number of residue vectors M^n.
DEFAULT_MODULAR_BUDGET = 10 ** 8

DEFAULT_SEARCH_WORKERS = 1

# Probe defaults used by the CLI when flags are omitted.
DEFAULT_PROBE_RADIUS = 10
DEFAULT_PROBE_MODULUS = 8

# The prop2 fallback searches z with |z| <= PROP2_MAX_Z_FACTOR * p^2.
PROP2_MAX_Z_FACTOR = 1

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'

BUDGET_ENV = 'MULREP_BUDGET'
LOG_LEVEL_ENV = 'MULREP_LOG_LEVEL'
WORKERS_ENV = 'MULREP_WORKERS'


def _read_int_env(name: str, default: int, minimum: int = 0) -> int:
    """Read a non-negative integer from the environment."""
    raw = os.environ.get(name)
    if raw is None or raw.strip() == '':
        return default
    try:
        value = int(raw.strip())
    except ValueError:
        raise ConfigurationError(f'{name} must be an integer, got {raw!r}', {'variable': name})
    if value < minimum:
        raise ConfigurationError(f'{name} must be >= {minimum}, got {value}', {'variable': name})
    return value


def get_evaluation_budget() -> int:
    """Point budget for box searches (MULREP_BUDGET overrides)."""
    return _read_int_env(BUDGET_ENV, DEFAULT_EVALUATION_BUDGET)


def get_modular_budget() -> int:
    """Residue-vector budget for modular enumeration (MULREP_BUDGET overrides)."""
    return _read_int_env(BUDGET_ENV, DEFAULT_MODULAR_BUDGET)


def get_search_workers() -> int:
    return _read_int_env(WORKERS_ENV, DEFAULT_SEARCH_WORKERS, minimum=1)


def get_log_level() -> int:
    name = os.environ.get(LOG_LEVEL_ENV, 'WARNING').strip().upper()
    level = logging.getLevelName(name)
    if not isinstance(level, int):
        raise ConfigurationError(f'{LOG_LEVEL_ENV} is not a logging level: {name!r}',
                                 {'variable': LOG_LEVEL_ENV})
    return level
