"""Encoding networks as 0-1 MILPs.

Every unit ``(k, j)`` gets a variable ``x[k,j]``.  A ReLU unit also gets its
negative part ``s[k,j]`` and an activation binary ``z[k,j]``, with

    w . x[k-1] + b = x[k,j] - s[k,j],   x, s >= 0,
    z = 1  ->  x <= 0,    z = 0  ->  s <= 0

so ``z = 1`` means the unit is inactive.  Linear units only get the equality
row, average pools a mean row and max pools one selector binary per member (see
:func:`encode_maxpool`).  Variable bounds come from a
:class:`BoundsTable <dnnmip.bounds.BoundsTable>`; units whose bounds decide the
activation have their ``z`` fixed.

"""

import logging

import numpy as np

from .engine import conf, lp
from .engine.milp import MilpModel, check_solution, linearize_indicators
from .engine.bnb import solve_milp
from .network import kind, forward_eval

__all__ = ('encode_network', 'encode_maxpool', 'set_objective',
           'complete_assignment', 'primal_heuristic_forward', 'solve')

log = logging.getLogger(__name__)


def encode_maxpool (model, group, out, name=''):
    """Add the constraints making ``out`` the maximum of ``group``.

encode_maxpool(model, group, out, name='') -> (rows, binaries, indicators)

:arg model: :class:`MilpModel <dnnmip.engine.milp.MilpModel>` to add to.
:arg group: variable indices of the pooled values ``y``.
:arg out: variable index of the output ``x``.
:arg name: suffix for the new variable and row names.

Adds a selector binary ``z_i`` per member, the rows ``sum z = 1`` and
``x >= y_i``, and the indicators ``z_i = 1 -> x <= y_i``.  Returns the new row
indices, binary indices and indicators.

"""
    group = list(group)
    if not group:
        raise ValueError('cannot max-pool an empty group')
    prog = model.lp
    binaries = [model.add_binary('p[{0},{1}]'.format(name, i))
                for i in range(len(group))]
    rows = [prog.add_row(dict((z, 1.) for z in binaries), 1., 1.,
                         'poolsel[{0}]'.format(name))]
    indicators = []
    for i, (y, z) in enumerate(zip(group, binaries)):
        rows.append(prog.add_row({out: 1., y: -1.}, lower=0.,
                                 name='poolge[{0},{1}]'.format(name, i)))
        indicators.append(model.add_indicator(z, 1, {out: 1., y: -1.}))
    return (rows, binaries, indicators)


def encode_network (net, bounds):
    """Encode a network as a 0-1 MILP with a zero objective.

encode_network(net, bounds) -> model

:arg net: a validated :class:`Network <dnnmip.network.Network>`.
:arg bounds: :class:`BoundsTable <dnnmip.bounds.BoundsTable>` for ``net``.

:return: a :class:`MilpModel <dnnmip.engine.milp.MilpModel>` with indicators
         (see :func:`linearize_indicators
         <dnnmip.engine.milp.linearize_indicators>`).  Its ``var_index`` maps
         ``(k, j, role)`` to variables and its ``net`` is ``net``.

Raises ``ValueError`` if ``bounds`` was computed for a different network or
weights, or over a different input box.

"""
    if bounds.shape != net.shape:
        raise ValueError('bounds table of shape {0} does not cover network of '
                         'shape {1}'.format(bounds.shape, net.shape))
    if bounds.fingerprint is not None and \
       bounds.fingerprint != net.fingerprint():
        raise ValueError('bounds table was computed for a different network')
    if bounds.weights_digest is not None and \
       bounds.weights_digest != net.weights_digest():
        raise ValueError('bounds table was computed for different weights')
    if not (np.array_equal(bounds.input_lower, net.input_lower) and
            np.array_equal(bounds.input_upper, net.input_upper)):
        raise ValueError('bounds table is for a different input box')
    model = MilpModel()
    model.net = net
    model.extras['bounds'] = bounds
    prog = model.lp
    idx = model.var_index
    lo, hi = bounds.x_range(0)
    prev = []
    for j in range(net.input_dim):
        v = prog.add_var('x[0,{0}]'.format(j), lo[j], hi[j])
        idx[(0, j, 'x')] = v
        prev.append(v)
    for k, l in enumerate(net.layers, 1):
        lo, hi = bounds.x_range(k)
        cur = []
        for j in range(l.n_out):
            unit = '{0},{1}'.format(k, j)
            if l.is_relu:
                ub_x, ub_s = bounds.get(k, j)
                x = prog.add_var('x[{0}]'.format(unit), 0., ub_x)
                s = prog.add_var('s[{0}]'.format(unit), 0., ub_s)
                if ub_s == 0:
                    # provably active
                    z = model.add_binary('z[{0}]'.format(unit), 0., 0.)
                elif ub_x == 0:
                    z = model.add_binary('z[{0}]'.format(unit), 1., 1.)
                else:
                    z = model.add_binary('z[{0}]'.format(unit))
                idx[(k, j, 's')] = s
                idx[(k, j, 'z')] = z
                coefs = dict(zip(prev, l.W[j]))
                coefs[x] = -1.
                coefs[s] = 1.
                prog.add_row(coefs, -l.b[j], -l.b[j], 'relu[{0}]'.format(unit))
                model.add_indicator(z, 1, {x: 1.})
                model.add_indicator(z, 0, {s: 1.})
            else:
                x = prog.add_var('x[{0}]'.format(unit), lo[j], hi[j])
                if l.kind == kind.DENSE:
                    coefs = dict(zip(prev, l.W[j]))
                    coefs[x] = -1.
                    prog.add_row(coefs, -l.b[j], -l.b[j],
                                 'affine[{0}]'.format(unit))
                elif l.kind == kind.AVGPOOL:
                    g = l.groups[j]
                    coefs = dict((prev[i], 1. / len(g)) for i in g)
                    coefs[x] = -1.
                    prog.add_row(coefs, 0., 0., 'avgpool[{0}]'.format(unit))
                else:
                    rows, sel, inds = encode_maxpool(
                        model, [prev[i] for i in l.groups[j]], x, unit)
                    model.selectors[(k, j)] = sel
            idx[(k, j, 'x')] = x
            cur.append(x)
        prev = cur
    log.debug('encoded %r: %d variables, %d binaries, %d rows', net,
              prog.n_vars, len(model.binaries), prog.n_rows)
    return model


def set_objective (model, x_costs=None, z_costs=None, sense=lp.sense.MINIMIZE):
    """Return a copy of a model with a new objective.

set_objective(model[, x_costs][, z_costs], sense=MINIMIZE) -> model

:arg x_costs: ``{(k, j): c}`` on unit values.
:arg z_costs: ``{(k, j): gamma}`` on the activation binaries of ReLU units.
:arg sense: :data:`lp.sense.MINIMIZE` or :data:`lp.sense.MAXIMIZE`.

Every other coefficient is zero.  Raises ``ValueError`` for an unknown unit.

"""
    terms = {}
    for costs, role in ((x_costs, 'x'), (z_costs, 'z')):
        for (k, j), c in (costs or {}).items():
            try:
                v = model.var_index[(k, j, role)]
            except KeyError:
                what = 'ReLU unit' if role == 'z' else 'unit'
                raise ValueError('{0} ({1}, {2}) does not exist'
                                 .format(what, k, j))
            terms[v] = terms.get(v, 0.) + c
    new = model.copy()
    new.lp.set_objective(terms, sense)
    return new


def complete_assignment (model, x0, lower=None, upper=None):
    """Extend an input to a full solution by forward evaluation.

complete_assignment(model, x0[, lower][, upper]) -> point

:arg model: a model built by :func:`encode_network` (possibly extended).
:arg x0: input values.
:arg lower,upper: current variable bounds; activation binaries fixed by them are
                  respected.

:return: values for every variable, or ``None`` if they contradict a fixed
         binary or violate some other constraint of the model.

"""
    net = model.net
    prog = model.lp
    idx = model.var_index
    if lower is None or upper is None:
        lower, upper = prog.bounds()
    acts = forward_eval(net, x0)
    point = np.zeros(prog.n_vars)
    for j, v in enumerate(acts[0]):
        point[idx[(0, j, 'x')]] = v
    for k, l in enumerate(net.layers, 1):
        out = acts[k]
        for j, v in enumerate(out):
            point[idx[(k, j, 'x')]] = v
        if l.is_relu:
            pre = acts.pre[k]
            for j, p in enumerate(pre):
                z = idx[(k, j, 'z')]
                point[idx[(k, j, 's')]] = max(0., -p)
                if p > 1e-9:
                    want = 0.
                elif p < -1e-9:
                    want = 1.
                else:
                    # either value works at zero
                    want = lower[z]
                if not lower[z] <= want <= upper[z]:
                    return None
                point[z] = want
        elif l.kind == kind.MAXPOOL:
            y = acts[k - 1]
            for j, g in enumerate(l.groups):
                sel = model.selectors[(k, j)]
                best = out[j]
                chosen = None
                for i, z in zip(g, sel):
                    if lower[z] == 1.:
                        if y[i] < best - 1e-9:
                            return None
                        chosen = z
                if chosen is None:
                    for i, z in zip(g, sel):
                        if y[i] >= best - 1e-12 and upper[z] == 1.:
                            chosen = z
                            break
                if chosen is None:
                    return None
                point[chosen] = 1.
    for d, x, ref in model.extras.get('distance', ()):
        point[d] = abs(point[x] - ref)
    for c, d in model.extras.get('changed', ()):
        point[c] = 1. if point[d] > 0 else 0.
    if not check_solution(model, point, conf.COMPLETION_TOL).feasible:
        return None
    return point


def primal_heuristic_forward (model, net, lp_point, lower=None, upper=None):
    """Forward-completion heuristic.

primal_heuristic_forward(model, net, lp_point[, lower][, upper]) -> point

Takes the input values of a relaxation solution ``lp_point``, clamps them into
the input bounds (``lower`` and ``upper``, defaulting to the model's), and
completes them with :func:`complete_assignment`.  Returns ``None`` when the
completion is inconsistent with the bounds.

"""
    if lower is None or upper is None:
        lower, upper = model.lp.bounds()
    if net is not model.net:
        raise ValueError('model was not built from this network')
    cols = [model.var_index[(0, j, 'x')] for j in range(net.input_dim)]
    x0 = np.minimum(np.maximum(np.asarray(lp_point)[cols], lower[cols]),
                    upper[cols])
    return complete_assignment(model, x0, lower, upper)


def solve (model, config=None):
    """Solve a network model with branch-and-bound, using
:func:`primal_heuristic_forward` at every node.

solve(model[, config]) -> result

:arg config: :class:`SolverConfig <dnnmip.engine.bnb.SolverConfig>`.

:return: :class:`MilpResult <dnnmip.engine.bnb.MilpResult>`.

"""
    if model.indicators:
        model = linearize_indicators(model)

    def heuristic (lower, upper, lp_x):
        return primal_heuristic_forward(model, model.net, lp_x, lower, upper)

    return solve_milp(model, config, heuristic)
