"""Numerical constants, tolerances and run-time switches for susy_dfs.

All Hamiltonians in the package are written with hbar = 2 so that every
(hbar/2) prefactor is one.
"""
import os
import logging

logger = logging.getLogger(__name__)

HBAR = 2.0

# tolerances
NORM_TOLERANCE = 1e-12
HERMITIAN_TOLERANCE = 1e-12
UNITARY_TOLERANCE = 1e-10
DENSITY_TOLERANCE = 1e-10
LEAKAGE_TOLERANCE = 1e-8
AMPLITUDE_FLOOR = 1e-12

DENSE_GUARD = 4096
DENSE_GUARD_ENV = 'SUSY_DFS_DENSE_GUARD'

SCHEMA_VERSION = 1

CSV_HEADER = ('scenario', 'engine', 'time', 'observable', 'value', 'leakage', 'seed', 'version')

# name of the PRNG algorithm every random draw goes through
PRNG_ALGORITHM = 'PCG64'

# overridden guard values already logged
_reported_guards = set()


def dense_guard():
    """Return the largest total dimension the dense engine will materialize.

    The default can be overridden with the ``SUSY_DFS_DENSE_GUARD`` environment variable, at your own risk.
    """
    value = os.environ.get(DENSE_GUARD_ENV)
    if not value:
        return DENSE_GUARD
    try:
        guard = int(value)
    except ValueError:
        raise ValueError("%s must be an integer, got %r" % (DENSE_GUARD_ENV, value))
    if guard < 1:
        raise ValueError("%s must be positive, got %s" % (DENSE_GUARD_ENV, guard))
    if guard != DENSE_GUARD and guard not in _reported_guards:
        _reported_guards.add(guard)
        logger.warning('Dense guard overridden to %s by %s', guard, DENSE_GUARD_ENV)
    return guard
