"""Branch-and-bound over the binary variables of a :class:`MilpModel`.

Nodes are solved as LP relaxations with :func:`solve_lp`, warm-started from
their parent's basis.  Node selection is best-bound, diving depth-first after
every incumbent improvement.  Branching on a binary also applies the bounds that
its indicators imply, so child relaxations are stronger than big-M alone.

"""

import heapq
import logging
from time import perf_counter

import numpy as np

from .conf import conf
from .lp import solve_lp, check_feasible, status as lp_status
from .milp import linearize_indicators
from .util import INF, rng

__all__ = ('status', 'SolverConfig', 'MilpResult', 'BranchNode', 'SolveError',
           'branch', 'compute_gap', 'solve_milp')

log = logging.getLogger(__name__)


class status:
    """Contains :class:`MilpResult` statuses."""
    OPTIMAL = 'optimal'
    FEASIBLE_TIME_LIMIT = 'feasible (time limit)'
    FEASIBLE_NODE_LIMIT = 'feasible (node limit)'
    INFEASIBLE = 'infeasible'
    UNKNOWN_TIME_LIMIT = 'unknown (time limit)'
    UNKNOWN_NODE_LIMIT = 'unknown (node limit)'

    #: Statuses with an incumbent.
    with_solution = (OPTIMAL, FEASIBLE_TIME_LIMIT, FEASIBLE_NODE_LIMIT)


#: Branching rules taken by :class:`SolverConfig`.
BRANCHING_RULES = ('most fractional', 'first fractional', 'random')


class SolveError (RuntimeError):
    """Raised when a node relaxation can't be solved.

SolveError(msg, depth, nodes)

"""

    def __init__ (self, msg, depth, nodes):
        RuntimeError.__init__(self, 'node {0} (depth {1}): {2}'
                                    .format(nodes, depth, msg))
        self.depth = depth
        self.nodes = nodes


class SolverConfig (object):
    """Branch-and-bound parameters.

SolverConfig(time_limit=conf.TIME_LIMIT, rel_gap=conf.REL_GAP,
             int_tol=conf.INT_TOL, node_limit=conf.NODE_LIMIT,
             branching=conf.BRANCHING, seed=conf.SEED)

:arg time_limit: wall-clock seconds.
:arg rel_gap: relative gap at which a solve counts as optimal.
:arg int_tol: how far from 0 or 1 a binary may be and still be integral.
:arg node_limit: maximum number of nodes, or ``None``.
:arg branching: one of :data:`BRANCHING_RULES`.
:arg seed: used by the ``'random'`` branching rule.

"""

    def __init__ (self, time_limit=None, rel_gap=None, int_tol=None,
                  node_limit=None, branching=None, seed=None):
        self.time_limit = conf.TIME_LIMIT if time_limit is None else time_limit
        self.rel_gap = conf.REL_GAP if rel_gap is None else rel_gap
        self.int_tol = conf.INT_TOL if int_tol is None else int_tol
        self.node_limit = conf.NODE_LIMIT if node_limit is None else node_limit
        self.branching = conf.BRANCHING if branching is None else branching
        self.seed = conf.SEED if seed is None else seed
        if not self.time_limit > 0:
            raise ValueError('time limit must be positive')
        if not self.rel_gap > 0 or not self.int_tol > 0:
            raise ValueError('tolerances must be positive')
        if self.node_limit is not None and self.node_limit < 1:
            raise ValueError('node limit must be at least 1')
        if self.branching not in BRANCHING_RULES:
            raise ValueError('unknown branching rule: {0!r}'
                             .format(self.branching))

    def as_dict (self):
        return {'time_limit': self.time_limit, 'rel_gap': self.rel_gap,
                'int_tol': self.int_tol, 'node_limit': self.node_limit,
                'branching': self.branching, 'seed': self.seed}


class MilpResult (object):
    """The outcome of :func:`solve_milp`."""

    def __init__ (self, status, x, objective, dual_bound, nodes, time,
                  pct_gap, log):
        #: From :class:`status`.
        self.status = status
        #: Incumbent values (one per variable), or ``None``.
        self.x = x
        #: Incumbent objective, or ``None``.
        self.objective = objective
        #: Best proven bound on the optimum (``None`` if infeasible).
        self.dual_bound = dual_bound
        #: Nodes solved.
        self.nodes = nodes
        #: Wall-clock seconds.
        self.time = time
        #: :func:`compute_gap` of :attr:`objective` and :attr:`dual_bound`, or
        #: ``None`` without an incumbent.
        self.pct_gap = pct_gap
        #: One ``{'time', 'nodes', 'objective', 'bound'}`` dict per incumbent
        #: improvement.
        self.log = log

    @property
    def has_solution (self):
        return self.status in status.with_solution

    def __repr__ (self):
        return '<MilpResult {0} obj={1} bound={2} nodes={3}>'.format(
            self.status, self.objective, self.dual_bound, self.nodes)


class BranchNode (object):
    """A node of the search tree.

BranchNode(lower, upper, bound=-INF, depth=0, basis=None)

:arg lower,upper: variable bound arrays for this node's relaxation.
:arg bound: parent's relaxation value, in minimisation form.
:arg depth: distance from the root.
:arg basis: a :class:`Basis <dnnmip.engine.lp.Basis>` to warm-start from.

"""

    def __init__ (self, lower, upper, bound=-INF, depth=0, basis=None):
        self.lower = lower
        self.upper = upper
        self.bound = bound
        self.depth = depth
        self.basis = basis


def compute_gap (incumbent, bound, sense=None, eps=None):
    """Percentage gap ``100 |incumbent - bound| / max(|incumbent|, eps)``.

compute_gap(incumbent, bound[, sense][, eps]) -> pct_gap

``sense`` is accepted for symmetry with the solver; the gap is symmetric.
``eps`` defaults to :data:`conf.GAP_EPS`.

"""
    if eps is None:
        eps = conf.GAP_EPS
    if incumbent == bound:
        return 0.
    return 100. * abs(incumbent - bound) / max(abs(incumbent), eps)


def _implied_bounds (model):
    # {binary: [(value, var, ub)]}
    imp = {}
    for ind in model.implications:
        b = ind.implied_bound()
        if b is not None:
            imp.setdefault(ind.binary, []).append((ind.active_when,) + b)
    return imp


def _fix (lower, upper, z, value, implied):
    lower[z] = upper[z] = value
    for when, j, ub in implied.get(z, ()):
        if when == value and ub < upper[j]:
            upper[j] = ub


def branch (node, model, z, value=None, int_tol=None, _implied=None):
    """Split a node on binary ``z``.

branch(node, model, z[, value][, int_tol]) -> (down, up)

:arg node: :class:`BranchNode`.
:arg model: the (linearized) :class:`MilpModel`.
:arg z: index of a binary variable.
:arg value: ``z``'s value in the node's relaxation; if given, it must not be
            integral.
:arg int_tol: defaults to :data:`conf.INT_TOL`.

:return: two children: ``down`` with ``z = 0``, ``up`` with ``z = 1``, each with
         the variable bounds implied by ``z``'s indicators applied (so a ReLU
         unit gets ``s <= 0`` when active and ``x <= 0`` when inactive).

Raises ``ValueError`` if ``z`` is not a free binary.

"""
    if int_tol is None:
        int_tol = conf.INT_TOL
    if z not in model.binaries:
        raise ValueError('variable {0} is not binary'.format(z))
    if node.lower[z] == node.upper[z]:
        raise ValueError('binary \'{0}\' is already fixed to {1}'
                         .format(model.lp.names[z], node.lower[z]))
    if value is not None and abs(value - round(value)) <= int_tol:
        raise ValueError('binary \'{0}\' is already integral ({1})'
                         .format(model.lp.names[z], value))
    implied = _implied_bounds(model) if _implied is None else _implied
    children = []
    for v in (0., 1.):
        lower = node.lower.copy()
        upper = node.upper.copy()
        _fix(lower, upper, z, v, implied)
        children.append(BranchNode(lower, upper, node.bound, node.depth + 1,
                                   node.basis))
    return tuple(children)


class _Search (object):
    # state of one branch-and-bound run

    def __init__ (self, model, config, heuristic):
        self.model = model
        self.lp = model.lp
        self.config = config
        self.heuristic = heuristic
        self.sgn = self.lp.sense
        self.binaries = np.array(model.binaries, dtype=int)
        self.implied = _implied_bounds(model)
        self.global_lower, self.global_upper = self.lp.bounds()
        self.x = None
        # incumbent value, in minimisation form
        self.best = INF
        # least bound of the nodes closed without being fully explored
        self.closed_bound = INF
        self.nodes = 0
        self.log = []
        self.heap = []
        self.seq = 0
        self.start = perf_counter()
        self.rand = rng(config.seed)

    def elapsed (self):
        return perf_counter() - self.start

    def cutoff (self):
        if self.best == INF:
            return INF
        return self.best - max(1e-9, self.config.rel_gap * abs(self.best))

    def open_bound (self, *extra):
        b = min([self.closed_bound, self.best] + [n.bound for n in extra if n])
        if self.heap:
            b = min(b, self.heap[0][0])
        return b

    def push (self, node):
        heapq.heappush(self.heap, (node.bound, self.seq, node))
        self.seq += 1

    def close (self, bound):
        if bound < self.closed_bound:
            self.closed_bound = bound

    def offer (self, x, node):
        # try a candidate solution; return whether it became the incumbent
        if x is None:
            return False
        x = np.asarray(x, dtype=float)
        if x.shape != (self.lp.n_vars,):
            return False
        if len(self.binaries):
            zb = x[self.binaries]
            if np.any(np.abs(zb - np.round(zb)) > self.config.int_tol):
                return False
        if not check_feasible(self.lp, x, self.global_lower,
                              self.global_upper).feasible:
            return False
        val = self.sgn * self.lp.value(x)
        if val >= self.best - 1e-12 * max(1., abs(self.best)):
            return False
        self.best = val
        self.x = x.copy()
        record = {'time': self.elapsed(), 'nodes': self.nodes,
                  'objective': self.sgn * val,
                  'bound': self.sgn * self.open_bound(node)}
        self.log.append(record)
        log.info('new incumbent %.9g at node %d (bound %.9g, %.2fs)',
                 record['objective'], self.nodes, record['bound'],
                 record['time'])
        return True

    def choose (self, zb, frac):
        cand = np.flatnonzero(frac > self.config.int_tol)
        rule = self.config.branching
        if rule == 'first fractional':
            i = cand[0]
        elif rule == 'random':
            i = cand[self.rand.integers(len(cand))]
        else:
            # argmax picks the lowest position among ties
            dist = np.minimum(zb - np.floor(zb), np.ceil(zb) - zb)
            i = np.argmax(np.where(frac > self.config.int_tol, dist, -1.))
        return self.binaries[i], zb[i]

    def process (self, node):
        """Solve a node; return its children to explore, if any."""
        lp = self.lp
        self.nodes += 1
        sol = solve_lp(lp, lower=node.lower, upper=node.upper,
                       warm=node.basis)
        if sol.status == lp_status.INFEASIBLE:
            log.debug('node %d: infeasible', self.nodes)
            return ()
        if sol.status != lp_status.OPTIMAL:
            raise SolveError('relaxation: {0}'.format(sol.status), node.depth,
                             self.nodes)
        bound = max(node.bound, self.sgn * sol.objective)
        node.bound = bound
        if self.heuristic is not None:
            self.offer(self.heuristic(node.lower, node.upper, sol.x), node)
        if bound >= self.cutoff():
            self.close(bound)
            return ()
        if not len(self.binaries):
            self.offer(sol.x, node)
            self.close(bound)
            return ()
        zb = sol.x[self.binaries]
        frac = np.abs(zb - np.round(zb))
        if np.all(frac <= self.config.int_tol):
            # fix the binaries exactly and re-solve for a clean incumbent
            lower = node.lower.copy()
            upper = node.upper.copy()
            for z, v in zip(self.binaries, np.round(zb)):
                _fix(lower, upper, z, v, self.implied)
            fixed = solve_lp(lp, lower=lower, upper=upper, warm=sol.basis)
            if fixed.status == lp_status.OPTIMAL:
                self.offer(fixed.x, node)
            else:
                x = sol.x.copy()
                x[self.binaries] = np.round(zb)
                self.offer(x, node)
            self.close(bound)
            return ()
        z, value = self.choose(zb, frac)
        log.debug('node %d: depth %d, bound %.9g, branching on %s = %.6g',
                  self.nodes, node.depth, bound, lp.names[z], value)
        node.basis = sol.basis
        down, up = branch(node, self.model, z, value, self.config.int_tol,
                          self.implied)
        # dive towards the rounded value first
        return (up, down) if value >= .5 else (down, up)

    def run (self):
        config = self.config
        root = BranchNode(self.global_lower.copy(), self.global_upper.copy())
        self.push(root)
        dive = None
        plunging = False
        limit = None
        while self.heap or dive is not None:
            if self.elapsed() >= config.time_limit:
                limit = 'time'
            elif (config.node_limit is not None and
                  self.nodes >= config.node_limit):
                limit = 'node'
            if limit is not None:
                if dive is not None:
                    self.push(dive)
                break
            if dive is not None:
                node = dive
                dive = None
            else:
                node = heapq.heappop(self.heap)[2]
            if node.bound >= self.cutoff():
                self.close(node.bound)
                continue
            best = self.best
            children = self.process(node)
            if self.best < best:
                plunging = True
            if not children:
                plunging = False
            elif plunging:
                dive = children[0]
                self.push(children[1])
            else:
                for c in children:
                    self.push(c)
        return self.result(limit)

    def result (self, limit):
        sgn = self.sgn
        has_x = self.x is not None
        bound = self.open_bound()
        if limit is None:
            st = status.OPTIMAL if has_x else status.INFEASIBLE
        elif limit == 'time':
            st = status.FEASIBLE_TIME_LIMIT if has_x \
                 else status.UNKNOWN_TIME_LIMIT
        else:
            st = status.FEASIBLE_NODE_LIMIT if has_x \
                 else status.UNKNOWN_NODE_LIMIT
        if st == status.INFEASIBLE:
            dual = None
        else:
            dual = None if bound == INF else sgn * bound
        obj = sgn * self.best if has_x else None
        gap = None
        if has_x and dual is not None:
            gap = compute_gap(obj, dual)
        t = self.elapsed()
        log.debug('branch-and-bound: %s after %d nodes, %.3fs', st,
                  self.nodes, t)
        return MilpResult(st, self.x, obj, dual, self.nodes, t, gap, self.log)


def solve_milp (model, config=None, heuristic=None):
    """Solve a 0-1 MILP by branch-and-bound.

solve_milp(model[, config][, heuristic]) -> result

:arg model: :class:`MilpModel`; indicators are linearized first if needed.
:arg config: :class:`SolverConfig`; defaults to one built from :data:`conf`.
:arg heuristic: a function ``heuristic(lower, upper, lp_x)`` called at every
                node with the node's bounds and relaxation solution, returning a
                candidate solution (values for every variable) or ``None``.
                Candidates are checked before being accepted.

:return: :class:`MilpResult`.

Raises :class:`SolveError` if a relaxation hits the iteration limit or is
unbounded.  The search is deterministic for a given model and configuration,
except where the time limit cuts it short.

"""
    if config is None:
        config = SolverConfig()
    if model.indicators:
        model = linearize_indicators(model)
    return _Search(model, config, heuristic).run()
