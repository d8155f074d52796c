"""Feed-forward networks and their exact forward semantics.

Layers are numbered from 1; layer ``k`` maps the outputs ``x[k - 1]`` of the
previous layer (``x[0]`` being the input) to ``x[k]``.  A unit is referred to by
``(k, j)``: output ``j`` of layer ``k``.

"""

import hashlib
import math

import numpy as np

from .engine.util import as_vector, rng

__all__ = ('act', 'kind', 'Layer', 'Network', 'ValidationReport',
           'LayerActivations', 'validate_network', 'forward_eval',
           'forward_batch', 'classify', 'random_network')


class act:
    """Contains activation functions of dense layers."""
    RELU = 'relu'
    LINEAR = 'linear'


class kind:
    """Contains layer kinds."""
    DENSE = 'dense'
    AVGPOOL = 'avgpool'
    MAXPOOL = 'maxpool'

    pools = (AVGPOOL, MAXPOOL)


class Layer (object):
    """A network layer.  Use :meth:`dense` or :meth:`pool` to construct one.

Attributes are ``kind``; for dense layers ``W`` (``n_out`` by ``n_in``), ``b``
and ``activation``; for pooling layers ``groups``, a tuple of input index tuples,
one per output.

"""

    def __init__ (self, kind, W=None, b=None, activation=None, groups=None,
                  n_in=None):
        self.kind = kind
        self.W = W
        self.b = b
        self.activation = activation
        self.groups = groups
        self._n_in = n_in

    @classmethod
    def dense (cls, W, b, activation=act.RELU):
        """Construct a dense layer ``act(W y + b)``."""
        W = np.array(W, dtype=float)
        if W.ndim != 2:
            raise ValueError('weight matrix must be two-dimensional')
        b = np.array(b, dtype=float).reshape(-1)
        return cls(kind.DENSE, W, b, activation)

    @classmethod
    def pool (cls, pool_kind, groups, n_in):
        """Construct a pooling layer.

pool(pool_kind, groups, n_in) -> layer

:arg pool_kind: :data:`kind.AVGPOOL` or :data:`kind.MAXPOOL`.
:arg groups: one sequence of input indices per output.
:arg n_in: number of inputs.

"""
        if pool_kind not in kind.pools:
            raise ValueError('not a pooling kind: {0!r}'.format(pool_kind))
        groups = tuple(tuple(int(i) for i in g) for g in groups)
        return cls(pool_kind, groups=groups, n_in=int(n_in))

    @property
    def n_in (self):
        return self.W.shape[1] if self.kind == kind.DENSE else self._n_in

    @property
    def n_out (self):
        return (self.W.shape[0] if self.kind == kind.DENSE
                else len(self.groups))

    @property
    def is_relu (self):
        return self.kind == kind.DENSE and self.activation == act.RELU

    def describe (self):
        """Short shape description, such as ``'dense 2 3 relu'``."""
        s = '{0} {1} {2}'.format(self.kind, self.n_in, self.n_out)
        return s + ' ' + self.activation if self.kind == kind.DENSE else s

    def apply (self, y):
        """Apply to an input vector, or to a batch with one input per row.

apply(y) -> (pre, out)

``pre`` is the affine value of a dense layer (``None`` for pooling).

"""
        if self.kind == kind.DENSE:
            pre = y @ self.W.T + self.b
            out = np.maximum(pre, 0.) if self.activation == act.RELU else pre
            return (pre, out)
        f = np.max if self.kind == kind.MAXPOOL else np.mean
        out = np.stack([f(y[..., list(g)], axis=-1) for g in self.groups],
                       axis=-1)
        return (None, out)


class Network (object):
    """A feed-forward network over an input box.

Network(layers, input_lower, input_upper)

:arg layers: sequence of :class:`Layer`.
:arg input_lower,input_upper: input box bounds.

Construction doesn't check anything; use :func:`validate_network`.  Treat
instances as immutable.

"""

    def __init__ (self, layers, input_lower, input_upper):
        self.layers = list(layers)
        self.input_lower = np.array(input_lower, dtype=float).reshape(-1)
        self.input_upper = np.array(input_upper, dtype=float).reshape(-1)

    @property
    def input_dim (self):
        return len(self.input_lower)

    @property
    def n_layers (self):
        """The number of layers, not counting the input."""
        return len(self.layers)

    @property
    def shape (self):
        """List of layer widths, input first."""
        return [self.input_dim] + [l.n_out for l in self.layers]

    def layer (self, k):
        """Layer ``k`` (numbered from 1)."""
        if not 1 <= k <= len(self.layers):
            raise ValueError('layer {0} does not exist'.format(k))
        return self.layers[k - 1]

    def has_unit (self, k, j):
        if not 0 <= k <= len(self.layers):
            return False
        return 0 <= j < self.shape[k]

    def relu_units (self):
        """List of ``(k, j)`` for every ReLU unit."""
        return [(k, j) for k, l in enumerate(self.layers, 1) if l.is_relu
                       for j in range(l.n_out)]

    def fingerprint (self):
        """Hex digest identifying the network's shape (layer kinds, widths,
activations and pooling groups), but not its weights."""
        parts = ['input {0}'.format(self.input_dim)]
        for l in self.layers:
            parts.append(l.describe())
            if l.kind in kind.pools:
                parts.append(repr(l.groups))
        return hashlib.sha1('\n'.join(parts).encode('utf8')).hexdigest()

    def weights_digest (self):
        """Hex digest of the weights, biases and input box."""
        h = hashlib.sha1(self.fingerprint().encode('utf8'))
        h.update(self.input_lower.tobytes())
        h.update(self.input_upper.tobytes())
        for l in self.layers:
            if l.kind == kind.DENSE:
                h.update(np.ascontiguousarray(l.W).tobytes())
                h.update(np.ascontiguousarray(l.b).tobytes())
        return h.hexdigest()

    def with_box (self, lower, upper):
        """Return a network sharing these layers over a different box."""
        return Network(self.layers, lower, upper)

    def __repr__ (self):
        return '<Network {0}>'.format('-'.join(str(n) for n in self.shape))


class ValidationReport (object):
    """The findings of :func:`validate_network`: a list of messages, empty when
the network is well-formed."""

    def __init__ (self, findings=()):
        self.findings = list(findings)

    @property
    def ok (self):
        return not self.findings

    def __len__ (self):
        return len(self.findings)

    def __iter__ (self):
        return iter(self.findings)

    def __str__ (self):
        return '; '.join(self.findings)


def validate_network (net):
    """Check a network's structure.

validate_network(net) -> report

:return: a :class:`ValidationReport` listing every problem found.

"""
    found = []
    lo = net.input_lower
    hi = net.input_upper
    if len(lo) != len(hi):
        found.append('input box: {0} lower bounds but {1} upper bounds'
                     .format(len(lo), len(hi)))
    elif not len(lo):
        found.append('input dimension must be positive')
    else:
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            found.append('input box: bounds must be finite')
        for j in np.flatnonzero(lo > hi):
            found.append('input box: lower bound {0} > upper bound {1} for '
                         'input {2}'.format(lo[j], hi[j], j))
    if not net.layers:
        found.append('network has no layers')
    n = len(lo)
    for k, l in enumerate(net.layers, 1):
        if l.kind == kind.DENSE:
            W, b = l.W, l.b
            if W.shape[0] != len(b):
                found.append('layer {0}: weight matrix has {1} rows but bias '
                             'has length {2}'.format(k, W.shape[0], len(b)))
            if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
                found.append('layer {0}: weights and biases must be finite'
                             .format(k))
            if l.activation not in (act.RELU, act.LINEAR):
                found.append('layer {0}: unknown activation {1!r}'
                             .format(k, l.activation))
        elif l.kind in kind.pools:
            seen = set()
            for i, g in enumerate(l.groups):
                if not g:
                    found.append('layer {0}: group {1} is empty'.format(k, i))
                bad = [m for m in g if not 0 <= m < l.n_in]
                if bad:
                    found.append('layer {0}: group {1} has indices out of '
                                 'range: {2}'.format(k, i, bad))
                if seen.intersection(g) or len(set(g)) != len(g):
                    found.append('layer {0}: group {1} overlaps another group'
                                 .format(k, i))
                seen.update(g)
        else:
            found.append('layer {0}: unknown kind {1!r}'.format(k, l.kind))
            continue
        if l.n_in != n:
            found.append('layer {0}: expects {1} inputs but layer {2} has {3} '
                         'outputs'.format(k, l.n_in, k - 1, n))
        n = l.n_out
    if net.layers:
        last = net.layers[-1]
        if last.kind != kind.DENSE or last.activation != act.LINEAR:
            found.append('layer {0}: the output layer must be dense and '
                         'linear'.format(len(net.layers)))
    return ValidationReport(found)


class LayerActivations (object):
    """The result of :func:`forward_eval`.

:attr:`outputs` is ``[x0, x1, ..., xK]``; :attr:`pre` is ``{k: w.y + b}`` for
every dense layer ``k``.

"""

    def __init__ (self, outputs, pre):
        self.outputs = outputs
        self.pre = pre

    def __getitem__ (self, k):
        return self.outputs[k]

    @property
    def output (self):
        return self.outputs[-1]

    def s_values (self, k):
        """The negative parts ``max(0, -(w.y + b))`` of dense layer ``k``."""
        return np.maximum(-self.pre[k], 0.)


def forward_eval (net, x0):
    """Evaluate the network on one input.

forward_eval(net, x0) -> activations

:arg x0: input vector; it may lie outside the input box.

:return: :class:`LayerActivations`.

Raises ``ValueError`` for the wrong input length or non-finite entries.

"""
    y = as_vector(x0, net.input_dim, 'input')
    if not np.all(np.isfinite(y)):
        raise ValueError('input must be finite')
    outputs = [y]
    pre = {}
    for k, l in enumerate(net.layers, 1):
        p, y = l.apply(y)
        if p is not None:
            pre[k] = p
        outputs.append(y)
    return LayerActivations(outputs, pre)


def forward_batch (net, X):
    """Evaluate the network on a batch of inputs, one per row.

forward_batch(net, X) -> (outputs, pre)

As :func:`forward_eval`, but each array has one row per input.

"""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != net.input_dim:
        raise ValueError('expected a batch of shape (n, {0})'
                         .format(net.input_dim))
    outputs = [X]
    pre = {}
    y = X
    for k, l in enumerate(net.layers, 1):
        p, y = l.apply(y)
        if p is not None:
            pre[k] = p
        outputs.append(y)
    return (outputs, pre)


def classify (net, x0):
    """Return ``(label, scores)``: the index of the largest output (the lowest
such index on ties) and the outputs."""
    if net.layers[-1].n_out < 2:
        raise ValueError('classification needs at least 2 outputs')
    scores = forward_eval(net, x0).output
    return (int(np.argmax(scores)), scores)


def random_network (shape, seed=None, box=(0., 1.)):
    """Generate a dense network with random weights.

random_network(shape[, seed], box=(0, 1)) -> net

:arg shape: layer widths, input first; hidden layers are ReLU and the last is
            linear.
:arg seed: defaults to :data:`conf.SEED`.
:arg box: ``(lower, upper)`` applied to every input.

Weights are drawn from a normal distribution with variance ``1 / n_in`` and
biases with standard deviation ``0.1``.

"""
    shape = [int(n) for n in shape]
    if len(shape) < 2 or min(shape) < 1:
        raise ValueError('shape needs at least two positive widths')
    r = rng(seed)
    layers = []
    for k in range(1, len(shape)):
        n_in, n_out = shape[k - 1], shape[k]
        W = r.normal(0., 1 / math.sqrt(n_in), (n_out, n_in))
        b = r.normal(0., .1, n_out)
        a = act.LINEAR if k == len(shape) - 1 else act.RELU
        layers.append(Layer.dense(W, b, a))
    n = shape[0]
    return Network(layers, [box[0]] * n, [box[1]] * n)
