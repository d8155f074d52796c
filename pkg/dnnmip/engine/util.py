"""A number of utility functions."""

import json

import numpy as np

__all__ = ('ir', 'fmt_float', 'as_vector', 'rng', 'JSONEncoder', 'INF')

#: Positive infinity, for unbounded variable and row bounds.
INF = float('inf')


def ir (x):
    """Returns the argument rounded to the nearest integer.

Halves round up (away from zero for negative numbers), unlike the builtin
``round``.

"""
    y = int(x)
    return (y + (x - y >= .5)) if x > 0 else (y - (y - x >= .5))


def fmt_float (x):
    """Format a float so that reading it back gives the same double."""
    return '{0:.17g}'.format(x)


def as_vector (v, n=None, name='vector'):
    """Convert to a 1D float array, optionally checking its length.

as_vector(v, n=None, name='vector') -> array

:arg v: any sequence of numbers.
:arg n: required length, or ``None`` to accept any.
:arg name: used in the error message.

"""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError('{0} must be one-dimensional'.format(name))
    if n is not None and len(v) != n:
        raise ValueError('{0} has length {1}, expected {2}'
                         .format(name, len(v), n))
    return v


def rng (seed=None):
    """Return a ``numpy.random.Generator`` for the given seed.

If ``seed`` is ``None``, :data:`conf.SEED` is used, so that every randomized
operation is reproducible by default.

"""
    if seed is None:
        from .conf import conf
        seed = conf.SEED
    return np.random.default_rng(seed)


class JSONEncoder (json.JSONEncoder):
    """Extended json.JSONEncoder with support for sets and numpy types."""

    def default (self, o):
        if isinstance(o, set):
            return sorted(o)
        elif isinstance(o, np.ndarray):
            return o.tolist()
        elif isinstance(o, np.integer):
            return int(o)
        elif isinstance(o, (np.floating, np.bool_)):
            return o.item()
        else:
            return json.JSONEncoder.default(self, o)
