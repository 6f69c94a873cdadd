#                               XL-RA
#
#   Random access and payload pilot scheduling for extra-large MIMO
#   cells with visibility regions.
#
#  This software is distributed in the hope that it will be useful to the
#  community, but WITHOUT ANY WARRANTY; without even the implied warranty of
#  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.

import logging
import numpy as np


class XlraError(Exception):
    """Base class for every error raised by the xlra package."""


class DomainError(XlraError, ValueError):
    """An argument lies outside the domain of a formula or operation."""


class ConfigError(XlraError, ValueError):
    """A configuration key or value is unknown or out of range."""


class PoolCorruptionError(XlraError, RuntimeError):
    """The PDP pool bookkeeping no longer satisfies its invariants."""


def db2lin(value_db):
    return 10.0 ** (np.asarray(value_db, dtype=float) / 10.0)


def lin2db(value):
    with np.errstate(divide='ignore'):
        return 10.0 * np.log10(np.asarray(value, dtype=float))


def dbm2watt(value_dbm):
    return db2lin(value_dbm) * 1e-3


def make_rng(seed=None):
    """
    Returns a numpy Generator for the given seed. A Generator passed in is
    returned untouched so that callers can share one stream.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def fail(logger, error_type, message):
    """Logs message at error level, then raises it as error_type."""
    logger.error(message)
    raise error_type(message)
