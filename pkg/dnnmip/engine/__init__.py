"""Solver engine: configuration, linear programming and 0-1 branch-and-bound.

Nothing in here knows about neural networks; the application package builds
models and passes in its own primal heuristic.

"""

import sys
import logging

from . import util, settings, lp, milp, bnb
from .conf import conf

__all__ = ('conf', 'init', 'quit')


class _Formatter (logging.Formatter):
    # 'warning: message', like the messages the engine always printed
    def format (self, record):
        msg = logging.Formatter.format(self, record)
        return '{0}: {1}'.format(record.levelname.lower(), msg)


_handler = None


def init (debug=None):
    """Initialise the engine: set up logging to stderr.

:arg debug: whether to log debug messages; defaults to :data:`conf.DEBUG`.

Calling this more than once just changes the log level.

"""
    global _handler
    if debug is None:
        debug = conf.DEBUG
    conf.DEBUG = debug
    root = logging.getLogger('dnnmip')
    if _handler is None:
        _handler = logging.StreamHandler(sys.stderr)
        _handler.setFormatter(_Formatter('%(message)s'))
        root.addHandler(_handler)
    root.setLevel(logging.DEBUG if debug else logging.INFO)


def quit ():
    """Uninitialise the engine."""
    global _handler
    if _handler is not None:
        logging.getLogger('dnnmip').removeHandler(_handler)
        _handler = None
