"""Ground truth for small networks, independent of branch-and-bound.

:func:`brute_force_optimum` fixes every binary in turn to each of its possible
values and solves the LP that remains; :func:`sample_check_bounds` looks for
sampled activations that a bounds table fails to cover.

"""

import itertools
import logging
from collections import namedtuple

import numpy as np

from .engine import conf, lp
from .engine.milp import linearize_indicators
from .engine.util import rng
from .network import forward_batch

__all__ = ('OracleResult', 'Violation', 'brute_force_optimum',
           'sample_check_bounds')

log = logging.getLogger(__name__)


class OracleResult (object):
    """The outcome of :func:`brute_force_optimum`."""

    def __init__ (self, status, objective, x, pattern, n_patterns, n_feasible):
        #: ``'optimal'`` or ``'infeasible'``.
        self.status = status
        self.objective = objective
        #: Optimal point, or ``None``.
        self.x = x
        #: ``{binary: value}`` of the optimal pattern.
        self.pattern = pattern
        #: Patterns tried.
        self.n_patterns = n_patterns
        #: Patterns whose LP was feasible.
        self.n_feasible = n_feasible

    def __repr__ (self):
        return '<OracleResult {0} obj={1} ({2}/{3} feasible)>'.format(
            self.status, self.objective, self.n_feasible, self.n_patterns)


def _choices (model, lower, upper):
    # [(binaries, [values])]: independent blocks of binaries and the value
    # tuples each may take, in enumeration order
    free = set(j for j in model.binaries if lower[j] < upper[j])
    grouped = set()
    blocks = []
    for key in sorted(model.selectors):
        sel = model.selectors[key]
        grouped.update(sel)
        options = []
        for i in range(len(sel)):
            v = tuple(1. if m == i else 0. for m in range(len(sel)))
            if all(lower[z] <= x <= upper[z] for z, x in zip(sel, v)):
                options.append(v)
        blocks.append((sel, options))
    for j in model.binaries:
        if j in grouped:
            continue
        if j in free:
            blocks.append(([j], [(0.,), (1.,)]))
    return (free, blocks)


def brute_force_optimum (model, net=None, max_binaries=None):
    """Solve a small model by enumerating its binary assignments.

brute_force_optimum(model[, net][, max_binaries]) -> result

:arg model: :class:`MilpModel <dnnmip.engine.milp.MilpModel>`; indicators are
            linearized first if needed.
:arg net: the model's network; only checked against ``model.net``.
:arg max_binaries: the most free binaries allowed; defaults to
                   :data:`conf.ORACLE_MAX_BINARIES`.

Max-pool selectors only take their one-hot patterns.  Patterns with an
infeasible LP are skipped; among equal optima the first pattern tried wins.

:return: :class:`OracleResult`.

Raises ``ValueError`` if there are too many free binaries.

"""
    if max_binaries is None:
        max_binaries = conf.ORACLE_MAX_BINARIES
    if net is not None and model.net is not None and net is not model.net:
        raise ValueError('model was not built from this network')
    if model.indicators:
        model = linearize_indicators(model)
    prog = model.lp
    lower, upper = prog.bounds()
    free, blocks = _choices(model, lower, upper)
    if len(free) > max_binaries:
        raise ValueError('{0} free binaries exceeds the limit of {1}'
                         .format(len(free), max_binaries))
    sgn = prog.sense
    best = None
    best_val = np.inf
    n_patterns = n_feasible = 0
    warm = None
    for combo in itertools.product(*[options for sel, options in blocks]):
        lo = lower.copy()
        hi = upper.copy()
        pattern = {}
        for (sel, options), values in zip(blocks, combo):
            for z, v in zip(sel, values):
                lo[z] = hi[z] = v
                pattern[z] = v
        n_patterns += 1
        sol = lp.solve_lp(prog, lower=lo, upper=hi, warm=warm)
        if sol.status == lp.status.INFEASIBLE:
            continue
        if sol.status != lp.status.OPTIMAL:
            raise RuntimeError('pattern {0}: LP {1}'.format(n_patterns,
                                                            sol.status))
        warm = sol.basis
        n_feasible += 1
        val = sgn * sol.objective
        if best is None or val < best_val - 1e-12 * max(1., abs(best_val)):
            best_val = val
            best = (sol.x, pattern)
    log.debug('oracle: %d patterns, %d feasible', n_patterns, n_feasible)
    if best is None:
        return OracleResult('infeasible', None, None, None, n_patterns,
                            n_feasible)
    return OracleResult('optimal', sgn * best_val, best[0], best[1],
                        n_patterns, n_feasible)


#: A bound found not to cover a sampled value: unit ``(layer, unit)``,
#: ``role`` ``'x'`` (positive part) or ``'s'`` (negative part).
Violation = namedtuple('Violation', ('layer', 'unit', 'role', 'value',
                                     'bound'))


def sample_check_bounds (net, bounds, n_samples, seed=None, tol=None,
                         batch=1000):
    """Look for activations exceeding a bounds table.

sample_check_bounds(net, bounds, n_samples[, seed][, tol]) -> violations

:arg n_samples: number of inputs drawn uniformly from the box.
:arg seed: defaults to :data:`conf.SEED`.
:arg tol: slack allowed on each bound; defaults to
          :data:`conf.BOUND_CHECK_TOL`.

:return: a list of :data:`Violation`, the worst one per unit and role, in unit
         order.

"""
    if n_samples < 1:
        raise ValueError('need at least one sample')
    if tol is None:
        tol = conf.BOUND_CHECK_TOL
    r = rng(seed)
    worst = {}
    done = 0
    while done < n_samples:
        m = min(batch, n_samples - done)
        X = r.uniform(net.input_lower, net.input_upper, (m, net.input_dim))
        outputs, pre = forward_batch(net, X)
        for k in range(1, net.n_layers + 1):
            value = pre[k] if k in pre else outputs[k]
            for role, parts, ub in (
                ('x', np.maximum(value, 0.), bounds.ub_x[k - 1]),
                ('s', np.maximum(-value, 0.), bounds.ub_s[k - 1])
            ):
                top = parts.max(axis=0)
                for j in np.flatnonzero(top > ub + tol):
                    key = (k, int(j), role)
                    if key not in worst or top[j] > worst[key].value:
                        worst[key] = Violation(k, int(j), role, float(top[j]),
                                               float(ub[j]))
        done += m
    return [worst[key] for key in sorted(worst)]
