"""Bound tightening by optimization.

Layers are processed in order.  For a unit ``(k, j)``, the network is truncated
to layers ``1 .. k - 1`` followed by a layer holding only the unit's affine (or
pooling) expression; that model is encoded with the bounds already tightened
for earlier layers, and its output is maximized and minimized to give ``ub_x``
and ``ub_s``.  Units of a layer are independent of each other, so they may be
handled by a pool of worker processes.

"""

import logging
import multiprocessing
from time import perf_counter

import numpy as np

from .engine import conf
from .engine import lp
from .engine.bnb import SolverConfig, SolveError, status as bnb_status
from .engine.milp import linearize_indicators
from .bounds import prov, BoundsTable, derive_interval_bounds, layer_bounds
from .encode import encode_network, solve
from .network import act, kind, Layer, Network

__all__ = ('TightenConfig', 'TighteningError', 'truncate', 'tighten_unit',
           'tighten_bounds')

log = logging.getLogger(__name__)


class TighteningError (RuntimeError):
    """Raised when a solve fails during :func:`tighten_bounds`.

:attr:`partial` holds the table as far as it got.

"""

    def __init__ (self, msg, partial):
        RuntimeError.__init__(self, msg)
        self.partial = partial


class TightenConfig (object):
    """Bound tightening parameters.

TightenConfig(time_limit=conf.TIGHTEN_TIME_LIMIT,
              use_milp=conf.TIGHTEN_USE_MILP, workers=conf.TIGHTEN_WORKERS)

:arg time_limit: seconds per bound; when a solve is cut short, its dual bound is
                 used.
:arg use_milp: if ``False``, only solve LP relaxations (weaker but faster).
:arg workers: number of processes tightening the units of a layer.

"""

    def __init__ (self, time_limit=None, use_milp=None, workers=None):
        self.time_limit = (conf.TIGHTEN_TIME_LIMIT if time_limit is None
                           else time_limit)
        self.use_milp = conf.TIGHTEN_USE_MILP if use_milp is None else use_milp
        self.workers = conf.TIGHTEN_WORKERS if workers is None else workers
        if not self.time_limit > 0:
            raise ValueError('time limit must be positive')
        if self.workers < 1:
            raise ValueError('need at least one worker')


def truncate (net, table, k, j):
    """Build the truncated network and bounds for unit ``(k, j)``.

truncate(net, table, k, j) -> (net, table)

The result has layers ``1 .. k - 1`` of ``net`` and then a one-unit layer: the
unit's affine expression (as a linear unit) or its pooling group.

"""
    l = net.layer(k)
    if l.kind == kind.DENSE:
        last = Layer.dense(l.W[j:j + 1], l.b[j:j + 1], act.LINEAR)
    else:
        last = Layer.pool(l.kind, l.groups[j:j + 1], l.n_in)
    sub = Network(net.layers[:k - 1] + [last], net.input_lower,
                  net.input_upper)
    ux, us = table.get(k, j)
    sub_table = BoundsTable.for_network(
        sub, table.ub_x[:k - 1] + [[ux]], table.ub_s[:k - 1] + [[us]],
        table.provenance[:k - 1] + [[table.provenance[k - 1][j]]])
    return (sub, sub_table)


def _optimize (model, x, sense, config):
    # (bound on the optimum of variable x, whether the solve finished)
    m = model.copy()
    m.lp.set_objective({x: 1.}, sense)
    if not config.use_milp:
        m = linearize_indicators(m)
        sol = lp.solve_lp(m.lp)
        if sol.status != lp.status.OPTIMAL:
            raise SolveError('relaxation: {0}'.format(sol.status), 0, 1)
        return (sol.objective, True)
    result = solve(m, SolverConfig(time_limit=config.time_limit))
    return (result.dual_bound, result.status == bnb_status.OPTIMAL)


def tighten_unit (net, table, k, j, config):
    """Tighten the bounds of one unit.

tighten_unit(net, table, k, j, config) -> (ub_x, ub_s, tag)

:arg table: bounds for layers before ``k`` must be final.
:arg config: :class:`TightenConfig`.

The results never exceed the bounds in ``table``.

"""
    ux, us = table.get(k, j)
    if k == 1:
        # the unit is an affine function of the box: interval bounds are exact
        return (ux, us, prov.LP_TIGHTENED)
    sub, sub_table = truncate(net, table, k, j)
    model = linearize_indicators(encode_network(sub, sub_table))
    x = model.var_index[(k, 0, 'x')]
    hi, exact_hi = _optimize(model, x, lp.sense.MAXIMIZE, config)
    if hi is not None:
        ux = min(ux, max(0., hi))
    lo, exact_lo = _optimize(model, x, lp.sense.MINIMIZE, config)
    if lo is not None:
        us = min(us, max(0., -lo))
    tag = prov.LP_TIGHTENED if exact_hi and exact_lo \
          else prov.TIME_LIMIT_ESTIMATE
    return (ux, us, tag)


def _unit_job (args):
    net, table, k, j, config = args
    return tighten_unit(net, table, k, j, config)


def tighten_bounds (net, config=None, seed=None):
    """Compute tightened bounds for every unit of a network.

tighten_bounds(net[, config][, seed]) -> table

:arg net: validated network with a finite input box.
:arg config: :class:`TightenConfig`.
:arg seed: an earlier table for ``net`` to start from; the result is never
           looser than it.

:return: :class:`BoundsTable <dnnmip.bounds.BoundsTable>`, entrywise no looser
         than interval bounds.

Raises :class:`TighteningError` if a solve fails.

"""
    if config is None:
        config = TightenConfig()
    table = derive_interval_bounds(net)
    if seed is not None:
        if seed.shape != table.shape:
            raise ValueError('seed table has shape {0}, expected {1}'
                             .format(seed.shape, table.shape))
        for k in range(1, table.n_layers + 1):
            for ub, sub in ((table.ub_x, seed.ub_x), (table.ub_s, seed.ub_s)):
                better = sub[k - 1] < ub[k - 1]
                ub[k - 1][better] = sub[k - 1][better]
            table.provenance[k - 1] = list(seed.provenance[k - 1])
    start = perf_counter()
    pool = None
    if config.workers > 1:
        pool = multiprocessing.Pool(config.workers)
    try:
        for k, l in enumerate(net.layers, 1):
            # propagate the tightened bounds of the layer below
            lo, hi = table.x_range(k - 1)
            ux, us = layer_bounds(l, lo, hi)
            table.ub_x[k - 1] = np.minimum(table.ub_x[k - 1], ux)
            table.ub_s[k - 1] = np.minimum(table.ub_s[k - 1], us)
            jobs = [(net, table, k, j, config) for j in range(l.n_out)]
            try:
                if pool is None:
                    results = [_unit_job(job) for job in jobs]
                else:
                    results = pool.map(_unit_job, jobs)
            except (SolveError, lp.LpError) as e:
                raise TighteningError('layer {0}: {1}'.format(k, e),
                                      table.copy())
            n_tighter = 0
            for j, (ux, us, tag) in enumerate(results):
                old_x, old_s = table.get(k, j)
                if ux < old_x or us < old_s:
                    n_tighter += 1
                table.set(k, j, min(ux, old_x), min(us, old_s), tag)
            log.info('layer %d: tightened %d of %d units (%.2fs)', k,
                     n_tighter, l.n_out, perf_counter() - start)
    finally:
        if pool is not None:
            pool.close()
            pool.join()
    return table
