"""Bounds table files.

A bounds file is a JSON object:

.. code-block:: none

    {
        "format": "dnnmip-bounds", "version": 1,
        "fingerprint": <network shape digest>,
        "weights_digest": <network weights digest>,
        "shape": [n0, n1, ...], "relu": [true, ..., false],
        "input": {"lower": [...], "upper": [...]},
        "layers": [{"ub_x": [...], "ub_s": [...], "provenance": [...]}, ...]
    }

Floats are written in their shortest round-tripping form, so loading gives back
exactly the saved values.

"""

import json

from ..engine import conf
from ..engine.util import JSONEncoder
from ..bounds import BoundsTable
from . import FormatError

__all__ = ('to_dict', 'from_dict', 'save_bounds', 'load_bounds')


def to_dict (table):
    """Convert a table to a JSON-compatible dict."""
    return {
        'format': conf.BOUNDS_FORMAT,
        'version': conf.BOUNDS_FORMAT_VERSION,
        'fingerprint': table.fingerprint,
        'weights_digest': table.weights_digest,
        'shape': table.shape,
        'relu': table.relu,
        'input': {'lower': table.input_lower, 'upper': table.input_upper},
        'layers': [{'ub_x': ux, 'ub_s': us, 'provenance': p}
                   for ux, us, p in zip(table.ub_x, table.ub_s,
                                        table.provenance)]
    }


def from_dict (d):
    """Inverse of :func:`to_dict`; raises :class:`FormatError`."""
    try:
        if d.get('format') != conf.BOUNDS_FORMAT:
            raise FormatError('not a bounds file')
        if d.get('version') != conf.BOUNDS_FORMAT_VERSION:
            raise FormatError('unsupported bounds format version {0!r} '
                              '(expected {1})'.format(
                                d.get('version'), conf.BOUNDS_FORMAT_VERSION))
        layers = d['layers']
        table = BoundsTable(
            d['input']['lower'], d['input']['upper'],
            [l['ub_x'] for l in layers], [l['ub_s'] for l in layers],
            [l['provenance'] for l in layers], d['relu'], d['fingerprint'],
            d.get('weights_digest')
        )
    except (KeyError, TypeError, AttributeError) as e:
        raise FormatError('malformed bounds file: {0!r}'.format(e))
    if table.shape != d.get('shape') or len(table.relu) != table.n_layers:
        raise FormatError('bounds file is inconsistent with its shape {0}'
                          .format(d.get('shape')))
    try:
        table.check()
    except ValueError as e:
        raise FormatError('invalid bounds: {0}'.format(e))
    return table


def save_bounds (table, path):
    """Save a table to a file."""
    with open(path, 'w') as f:
        json.dump(to_dict(table), f, indent=1, cls=JSONEncoder)
        f.write('\n')


def load_bounds (path, net=None):
    """Load a table from a file.

load_bounds(path[, net]) -> table

:arg net: if given, the network the table will be used with; a table computed
          for a network of another shape, or for other weights or another
          input box, is refused with :class:`FormatError`.

"""
    with open(path) as f:
        try:
            d = json.load(f)
        except ValueError as e:
            raise FormatError('invalid JSON in \'{0}\': {1}'.format(path, e))
    if not isinstance(d, dict):
        raise FormatError('not a bounds file: \'{0}\''.format(path))
    table = from_dict(d)
    if net is not None:
        fp = net.fingerprint()
        if table.fingerprint != fp:
            raise FormatError('bounds file \'{0}\' was computed for a '
                              'different network (fingerprint {1}, expected '
                              '{2})'.format(path, table.fingerprint, fp))
        if table.weights_digest != net.weights_digest():
            raise FormatError('bounds file \'{0}\' was computed for '
                              'different weights or a different input box'
                              .format(path))
    return table
