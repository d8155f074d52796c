"""Network interchange files.

A network file is line-based text.  Commenting is shell syntax: ``#`` starts a
comment unless quoted, and blank lines are ignored.  The first line declares
the format and version, and the rest is a sequence of declarations:

.. code-block:: none

    dnnmip-net 1
    input 2                 # input dimension
    lower 1 1               # input box, one value per input
    upper 3 3               # (or 'box <lower> <upper>' for every input)
    dense 2 2 relu          # dense <n_in> <n_out> relu|linear
    weights 1 -1            # row-major; may be split over any number of lines
    weights -1 1
    bias 0 0
    dense 2 1 linear
    weights 1 1
    bias 0

Pooling layers are declared as ``maxpool <n_in> <n_out>`` or
``avgpool <n_in> <n_out>``, followed by one ``group <index>...`` line per
output.

"""

import shlex
from io import StringIO

import numpy as np

from ..engine import conf
from ..engine.util import fmt_float
from ..network import act, kind, Layer, Network, validate_network
from . import FormatError

__all__ = ('parse', 'parse_s', 'load_network', 'write', 'save_network')

_layer_kinds = (kind.DENSE, kind.AVGPOOL, kind.MAXPOOL)


def _floats (lnum, words):
    try:
        return [float(w) for w in words]
    except ValueError:
        raise FormatError('line {0}: expected numbers'.format(lnum))


def _ints (lnum, words, n=None):
    try:
        values = [int(w) for w in words]
    except ValueError:
        raise FormatError('line {0}: expected integers'.format(lnum))
    if n is not None and len(values) != n:
        raise FormatError('line {0}: expected {1} values, got {2}'
                          .format(lnum, n, len(values)))
    return values


class _LayerDecl (object):
    # a layer being read
    def __init__ (self, lnum, number, words):
        self.lnum = lnum
        self.number = number
        self.kind = words[0]
        if self.kind == kind.DENSE:
            if len(words) != 4:
                raise FormatError('line {0}: expected \'dense <n_in> <n_out> '
                                  'relu|linear\''.format(lnum))
            self.n_in, self.n_out = _ints(lnum, words[1:3])
            self.activation = words[3]
            if self.activation not in (act.RELU, act.LINEAR):
                raise FormatError('line {0}: unknown activation \'{1}\''
                                  .format(lnum, self.activation))
        else:
            if len(words) != 3:
                raise FormatError('line {0}: expected \'{1} <n_in> <n_out>\''
                                  .format(lnum, self.kind))
            self.n_in, self.n_out = _ints(lnum, words[1:3])
        if self.n_in < 1 or self.n_out < 1:
            raise FormatError('line {0}: layer dimensions must be positive'
                              .format(lnum))
        self.weights = []
        self.bias = []
        self.groups = []

    def add (self, lnum, words):
        what = words[0]
        if self.kind == kind.DENSE and what == 'weights':
            self.weights.extend(_floats(lnum, words[1:]))
        elif self.kind == kind.DENSE and what == 'bias':
            self.bias.extend(_floats(lnum, words[1:]))
        elif self.kind != kind.DENSE and what == 'group':
            self.groups.append(_ints(lnum, words[1:]))
        else:
            raise FormatError('line {0}: unexpected \'{1}\' in {2} layer {3}'
                              .format(lnum, what, self.kind, self.number))

    def build (self):
        name = 'layer {0} (line {1})'.format(self.number, self.lnum)
        if self.kind == kind.DENSE:
            expected = self.n_in * self.n_out
            if len(self.weights) != expected:
                raise FormatError('{0}: weight matrix has {1} entries, '
                                  'expected {2}'.format(name,
                                                        len(self.weights),
                                                        expected))
            if len(self.bias) != self.n_out:
                raise FormatError('{0}: bias has {1} entries, expected {2}'
                                  .format(name, len(self.bias), self.n_out))
            W = np.array(self.weights).reshape(self.n_out, self.n_in)
            return Layer.dense(W, self.bias, self.activation)
        else:
            if len(self.groups) != self.n_out:
                raise FormatError('{0}: has {1} groups, expected {2}'
                                  .format(name, len(self.groups), self.n_out))
            return Layer.pool(self.kind, self.groups, self.n_in)


def parse (f):
    """Parse a network file.

parse(f) -> net

:arg f: an open file-like object (with a ``readline`` method).

:return: a validated :class:`Network <dnnmip.network.Network>`.

Raises :class:`FormatError` with the line number for syntax errors, and with
every finding of :func:`validate_network <dnnmip.network.validate_network>` for
an invalid network.

"""
    version = None
    n = None
    lower = upper = None
    decls = []
    lnum = 1
    while True:
        line = f.readline()
        if not line:
            # end of file
            break
        try:
            words = shlex.split(line, True)
        except ValueError as e:
            raise FormatError('line {0}: {1}'.format(lnum, e))
        if words:
            head = words[0]
            if version is None:
                if head != conf.NET_FORMAT or len(words) != 2:
                    raise FormatError('line {0}: expected \'{1} <version>\''
                                      .format(lnum, conf.NET_FORMAT))
                version = words[1]
                if version != str(conf.NET_FORMAT_VERSION):
                    raise FormatError('line {0}: unsupported format version '
                                      '\'{1}\' (expected {2})'.format(
                                        lnum, version,
                                        conf.NET_FORMAT_VERSION))
            elif head == 'input':
                if n is not None:
                    raise FormatError('line {0}: duplicate \'input\''
                                      .format(lnum))
                n, = _ints(lnum, words[1:], 1)
                if n < 1:
                    raise FormatError('line {0}: input dimension must be '
                                      'positive'.format(lnum))
            elif head in ('lower', 'upper', 'box'):
                if n is None:
                    raise FormatError('line {0}: \'{1}\' before \'input\''
                                      .format(lnum, head))
                values = _floats(lnum, words[1:])
                if head == 'box':
                    if len(values) != 2:
                        raise FormatError('line {0}: expected \'box <lower> '
                                          '<upper>\''.format(lnum))
                    lower = [values[0]] * n
                    upper = [values[1]] * n
                else:
                    if len(values) != n:
                        raise FormatError('line {0}: expected {1} values, got '
                                          '{2}'.format(lnum, n, len(values)))
                    if head == 'lower':
                        lower = values
                    else:
                        upper = values
            elif head in _layer_kinds:
                if n is None:
                    raise FormatError('line {0}: layer before \'input\''
                                      .format(lnum))
                decls.append(_LayerDecl(lnum, len(decls) + 1, words))
            elif decls:
                decls[-1].add(lnum, words)
            else:
                raise FormatError('line {0}: unknown declaration \'{1}\''
                                  .format(lnum, head))
        # else blank line
        lnum += 1
    if version is None:
        raise FormatError('empty network file')
    if n is None:
        raise FormatError('missing \'input\' declaration')
    if lower is None or upper is None:
        raise FormatError('missing input box')
    net = Network([d.build() for d in decls], lower, upper)
    report = validate_network(net)
    if not report.ok:
        raise FormatError('invalid network: {0}'.format(report))
    return net


def parse_s (s):
    """Parse a network from a string."""
    return parse(StringIO(s))


def load_network (path):
    """Load a network file (see :func:`parse`)."""
    with open(path) as f:
        return parse(f)


def write (net, f):
    """Write a network to an open file, as read by :func:`parse`."""
    def nums (values):
        return ' '.join(fmt_float(v) for v in values)

    f.write('{0} {1}\n'.format(conf.NET_FORMAT, conf.NET_FORMAT_VERSION))
    f.write('input {0}\n'.format(net.input_dim))
    f.write('lower {0}\n'.format(nums(net.input_lower)))
    f.write('upper {0}\n'.format(nums(net.input_upper)))
    for k, l in enumerate(net.layers, 1):
        f.write('\n# layer {0}\n{1}\n'.format(k, l.describe()))
        if l.kind == kind.DENSE:
            for row in l.W:
                f.write('weights {0}\n'.format(nums(row)))
            f.write('bias {0}\n'.format(nums(l.b)))
        else:
            for g in l.groups:
                f.write('group {0}\n'.format(' '.join(str(i) for i in g)))


def save_network (net, path):
    """Save a network to a file, losslessly."""
    with open(path, 'w') as f:
        write(net, f)
