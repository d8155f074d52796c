"""Per-unit activation bounds.

For every unit ``(k, j)`` with ``k >= 1`` a :class:`BoundsTable` stores ``ub_x``,
an upper bound on the positive part of the unit's value, and ``ub_s``, an upper
bound on its negative part.  These become the big-M constants of the encoded
model, so the tighter they are, the stronger the model.

"""

import numpy as np

from .network import kind

__all__ = ('prov', 'BoundsTable', 'DominanceReport', 'layer_bounds',
           'derive_interval_bounds', 'compare_tables')


class prov:
    """Contains provenance tags of bounds table entries."""
    INTERVAL = 'interval'
    LP_TIGHTENED = 'lp-tightened'
    # dual bound of a solve stopped by its time limit; still valid
    TIME_LIMIT_ESTIMATE = 'time-limit-estimate'

    all = (INTERVAL, LP_TIGHTENED, TIME_LIMIT_ESTIMATE)


class BoundsTable (object):
    """Bounds for every unit of a network.

BoundsTable(input_lower, input_upper, ub_x, ub_s, provenance, relu,
            fingerprint=None, weights_digest=None)

:arg input_lower,input_upper: the input box (layer 0).
:arg ub_x,ub_s: one array per layer ``1..K``.
:arg provenance: one sequence of :class:`prov` tags per layer, one tag per unit
                 (covering both of the unit's bounds).
:arg relu: one bool per layer: whether its units are ReLUs, so that ``x >= 0``.
:arg fingerprint,weights_digest: of the network the table was computed for.

"""

    def __init__ (self, input_lower, input_upper, ub_x, ub_s, provenance,
                  relu, fingerprint=None, weights_digest=None):
        self.input_lower = np.array(input_lower, dtype=float)
        self.input_upper = np.array(input_upper, dtype=float)
        self.ub_x = [np.array(u, dtype=float) for u in ub_x]
        self.ub_s = [np.array(u, dtype=float) for u in ub_s]
        self.provenance = [list(p) for p in provenance]
        self.relu = [bool(r) for r in relu]
        self.fingerprint = fingerprint
        self.weights_digest = weights_digest

    @classmethod
    def for_network (cls, net, ub_x, ub_s, provenance):
        """Construct a table for ``net``, taking the box and metadata from it."""
        return cls(net.input_lower, net.input_upper, ub_x, ub_s, provenance,
                   [l.is_relu for l in net.layers], net.fingerprint(),
                   net.weights_digest())

    @property
    def n_layers (self):
        return len(self.ub_x)

    @property
    def shape (self):
        return [len(self.input_lower)] + [len(u) for u in self.ub_x]

    def check_layer (self, k):
        if not 1 <= k <= self.n_layers:
            raise ValueError('bounds table has no layer {0}'.format(k))

    def get (self, k, j):
        """Return ``(ub_x, ub_s)`` for unit ``(k, j)``."""
        self.check_layer(k)
        if not 0 <= j < len(self.ub_x[k - 1]):
            raise ValueError('bounds table has no unit ({0}, {1})'
                             .format(k, j))
        return (float(self.ub_x[k - 1][j]), float(self.ub_s[k - 1][j]))

    def set (self, k, j, ub_x, ub_s, tag):
        """Set the bounds of unit ``(k, j)`` and their provenance."""
        self.get(k, j)
        self.ub_x[k - 1][j] = ub_x
        self.ub_s[k - 1][j] = ub_s
        self.provenance[k - 1][j] = tag

    def x_range (self, k):
        """Return ``(lower, upper)`` arrays bounding the values of layer ``k``
(``k = 0`` for the input box)."""
        if k == 0:
            return (self.input_lower.copy(), self.input_upper.copy())
        self.check_layer(k)
        hi = self.ub_x[k - 1].copy()
        if self.relu[k - 1]:
            return (np.zeros_like(hi), hi)
        return (-self.ub_s[k - 1], hi)

    def provenance_counts (self):
        """Return ``{tag: count}`` over all units."""
        counts = dict((t, 0) for t in prov.all)
        for p in self.provenance:
            for t in p:
                counts[t] = counts.get(t, 0) + 1
        return counts

    def check (self):
        """Raise ``ValueError`` unless every bound is finite and nonnegative."""
        for k, (ux, us) in enumerate(zip(self.ub_x, self.ub_s), 1):
            for name, u in (('ub_x', ux), ('ub_s', us)):
                if not np.all(np.isfinite(u)) or np.any(u < 0):
                    raise ValueError('layer {0}: {1} must be finite and '
                                     'nonnegative'.format(k, name))
            if len(self.provenance[k - 1]) != len(ux) or len(us) != len(ux):
                raise ValueError('layer {0}: inconsistent lengths'.format(k))
            bad = set(self.provenance[k - 1]).difference(prov.all)
            if bad:
                raise ValueError('layer {0}: unknown provenance tags: {1}'
                                 .format(k, sorted(bad)))

    def copy (self):
        return BoundsTable(self.input_lower, self.input_upper, self.ub_x,
                           self.ub_s, self.provenance, self.relu,
                           self.fingerprint, self.weights_digest)

    def __eq__ (self, other):
        if not isinstance(other, BoundsTable):
            return NotImplemented
        return (self.shape == other.shape and
                self.fingerprint == other.fingerprint and
                self.relu == other.relu and
                self.provenance == other.provenance and
                np.array_equal(self.input_lower, other.input_lower) and
                np.array_equal(self.input_upper, other.input_upper) and
                all(np.array_equal(a, b) for a, b in zip(self.ub_x,
                                                         other.ub_x)) and
                all(np.array_equal(a, b) for a, b in zip(self.ub_s,
                                                         other.ub_s)))

    def __ne__ (self, other):
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    def __repr__ (self):
        return '<BoundsTable {0} {1}>'.format(
            '-'.join(str(n) for n in self.shape), self.provenance_counts())


def layer_bounds (layer, lo, hi):
    """Interval propagation through one layer.

layer_bounds(layer, lo, hi) -> (ub_x, ub_s)

:arg layer: :class:`Layer <dnnmip.network.Layer>`.
:arg lo,hi: arrays bounding the layer's inputs.

"""
    if layer.kind == kind.DENSE:
        W = layer.W
        Wp = np.maximum(W, 0.)
        Wn = np.minimum(W, 0.)
        upper = layer.b + Wp @ hi + Wn @ lo
        lower = layer.b + Wp @ lo + Wn @ hi
    elif layer.kind == kind.MAXPOOL:
        upper = np.array([hi[list(g)].max() for g in layer.groups])
        lower = np.array([lo[list(g)].max() for g in layer.groups])
    else:
        upper = np.array([hi[list(g)].mean() for g in layer.groups])
        lower = np.array([lo[list(g)].mean() for g in layer.groups])
    return (np.maximum(upper, 0.), np.maximum(-lower, 0.))


def derive_interval_bounds (net):
    """Propagate the input box through the network with interval arithmetic.

derive_interval_bounds(net) -> table

:return: a :class:`BoundsTable` with every entry tagged
         :data:`prov.INTERVAL`.

Raises ``ValueError`` if the input box isn't finite.

"""
    if not (np.all(np.isfinite(net.input_lower)) and
            np.all(np.isfinite(net.input_upper))):
        raise ValueError('the input box must be finite')
    ub_x = []
    ub_s = []
    lo, hi = net.input_lower, net.input_upper
    for l in net.layers:
        ux, us = layer_bounds(l, lo, hi)
        ub_x.append(ux)
        ub_s.append(us)
        lo = np.zeros_like(ux) if l.is_relu else -us
        hi = ux
    provenance = [[prov.INTERVAL] * len(u) for u in ub_x]
    return BoundsTable.for_network(net, ub_x, ub_s, provenance)


class DominanceReport (object):
    """The result of :func:`compare_tables`.

:attr:`deltas` has one ``(dx, ds)`` pair of arrays per layer, ``a - b``;
:attr:`looser` lists ``(k, j, role, delta)`` for every entry where ``b`` is
larger than ``a``.

"""

    def __init__ (self, deltas, looser):
        self.deltas = deltas
        self.looser = looser

    @property
    def dominates (self):
        """Whether ``b`` is nowhere looser than ``a``."""
        return not self.looser

    @property
    def n_tighter (self):
        """The number of entries where ``b`` is strictly tighter."""
        return int(sum(np.sum(dx > 0) + np.sum(ds > 0)
                       for dx, ds in self.deltas))

    @property
    def max_delta (self):
        return float(max([0.] + [max(dx.max(initial=0.), ds.max(initial=0.))
                                 for dx, ds in self.deltas]))


def compare_tables (a, b):
    """Compare two tables for the same network shape.

compare_tables(a, b) -> report

:return: :class:`DominanceReport`.

Raises ``ValueError`` if the shapes differ.

"""
    if a.shape != b.shape:
        raise ValueError('bounds tables have different shapes: {0} and {1}'
                         .format(a.shape, b.shape))
    deltas = []
    looser = []
    for k in range(1, a.n_layers + 1):
        dx = a.ub_x[k - 1] - b.ub_x[k - 1]
        ds = a.ub_s[k - 1] - b.ub_s[k - 1]
        deltas.append((dx, ds))
        for role, d in (('x', dx), ('s', ds)):
            for j in np.flatnonzero(d < 0):
                looser.append((k, int(j), role, float(d[j])))
    return DominanceReport(deltas, looser)
