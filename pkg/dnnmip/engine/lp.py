"""Linear programming: problem container and a bounded-variable simplex solver.

A :class:`LinearProgram` has variables with (possibly infinite) bounds, ranged
rows ``row_lower <= a.x <= row_upper`` (an equality when both are equal) and a
linear objective.  :func:`solve_lp` solves it with a dense primal simplex, good
for the few thousand variables that our models reach.

"""

import logging

import numpy as np

from .conf import conf
from .util import INF, fmt_float

__all__ = ('sense', 'status', 'LpError', 'LinearProgram', 'Basis',
           'LpSolution', 'Residuals', 'solve_lp', 'check_feasible', 'write_lp')

log = logging.getLogger(__name__)


class sense:
    """Contains objective senses; the value multiplies the objective to get a
minimisation."""
    MINIMIZE = 1
    MAXIMIZE = -1


class status:
    """Contains :class:`LpSolution` statuses."""
    OPTIMAL = 'optimal'
    INFEASIBLE = 'infeasible'
    UNBOUNDED = 'unbounded'
    ITERATION_LIMIT = 'iteration limit'


class LpError (ValueError):
    """Raised for a malformed :class:`LinearProgram`."""
    pass


class LinearProgram (object):
    """A linear program.

LinearProgram()

Build it up with :meth:`add_var`, :meth:`add_row` and :meth:`set_objective`.
Variables and rows are referred to by the integer index these return.

"""

    def __init__ (self):
        #: Variable names, by index.
        self.names = []
        #: Variable lower bounds (``-INF`` allowed).
        self.lower = []
        #: Variable upper bounds (``INF`` allowed).
        self.upper = []
        #: Rows, each ``(coefs, lower, upper)`` with ``coefs`` a
        #: ``{var: coefficient}`` dict.  Never modify these in place.
        self.rows = []
        #: Row names, by index.
        self.row_names = []
        #: Objective ``{var: coefficient}``.
        self.objective = {}
        #: Objective sense, from :class:`sense`.
        self.sense = sense.MINIMIZE
        self._matrix = None

    @property
    def n_vars (self):
        """The number of variables."""
        return len(self.names)

    @property
    def n_rows (self):
        """The number of rows."""
        return len(self.rows)

    def add_var (self, name, lower=0., upper=INF):
        """Add a variable and return its index."""
        self.names.append(name)
        self.lower.append(float(lower))
        self.upper.append(float(upper))
        self._matrix = None
        return len(self.names) - 1

    def add_row (self, coefs, lower=-INF, upper=INF, name=None):
        """Add a row and return its index.

add_row(coefs, lower=-INF, upper=INF[, name]) -> index

:arg coefs: ``{var: coefficient}``; zero coefficients are dropped.
:arg lower,upper: row bounds; equal for an equality row.
:arg name: defaults to ``'r<index>'``.

"""
        coefs = dict((int(j), float(v)) for j, v in coefs.items() if v != 0)
        i = len(self.rows)
        self.rows.append((coefs, float(lower), float(upper)))
        self.row_names.append('r{0}'.format(i) if name is None else name)
        self._matrix = None
        return i

    def set_objective (self, coefs, sense=sense.MINIMIZE):
        """Replace the objective with ``{var: coefficient}`` and a sense."""
        self.objective = dict((int(j), float(v)) for j, v in coefs.items()
                              if v != 0)
        self.sense = sense

    def set_bounds (self, j, lower=None, upper=None):
        """Change the bounds of variable ``j``; ``None`` leaves one alone."""
        if lower is not None:
            self.lower[j] = float(lower)
        if upper is not None:
            self.upper[j] = float(upper)

    def copy (self):
        """Return a copy that can be extended without affecting this one."""
        lp = LinearProgram()
        lp.names = list(self.names)
        lp.lower = list(self.lower)
        lp.upper = list(self.upper)
        lp.rows = list(self.rows)
        lp.row_names = list(self.row_names)
        lp.objective = dict(self.objective)
        lp.sense = self.sense
        # rows are never modified in place, so the matrix can be shared
        lp._matrix = self._matrix
        return lp

    def bounds (self):
        """Return ``(lower, upper)`` variable bound arrays."""
        return (np.array(self.lower, dtype=float),
                np.array(self.upper, dtype=float))

    def row_bounds (self):
        """Return ``(lower, upper)`` row bound arrays."""
        return (np.array([r[1] for r in self.rows], dtype=float),
                np.array([r[2] for r in self.rows], dtype=float))

    def cost (self):
        """Return the objective as a dense array (in its own sense)."""
        c = np.zeros(self.n_vars)
        for j, v in self.objective.items():
            c[j] = v
        return c

    def value (self, x):
        """Objective value at point ``x``."""
        return float(sum(v * x[j] for j, v in self.objective.items()))

    def matrix (self):
        """Return the dense ``(n_rows, n_vars)`` constraint matrix.

The result is cached and shared; don't modify it.

"""
        if self._matrix is None:
            A = np.zeros((self.n_rows, self.n_vars))
            for i, (coefs, lower, upper) in enumerate(self.rows):
                for j, v in coefs.items():
                    A[i, j] = v
            self._matrix = A
        return self._matrix

    def check (self):
        """Raise :class:`LpError` if the program is malformed."""
        n = self.n_vars
        for j, (l, u) in enumerate(zip(self.lower, self.upper)):
            if np.isnan(l) or np.isnan(u) or l == INF or u == -INF:
                raise LpError('variable \'{0}\': invalid bounds [{1}, {2}]'
                              .format(self.names[j], l, u))
            if l > u:
                raise LpError('variable \'{0}\': lower bound {1} > upper '
                              'bound {2}'.format(self.names[j], l, u))
        for i, (coefs, l, u) in enumerate(self.rows):
            name = self.row_names[i]
            if np.isnan(l) or np.isnan(u) or l == INF or u == -INF or l > u:
                raise LpError('row \'{0}\': invalid bounds [{1}, {2}]'
                              .format(name, l, u))
            for j, v in coefs.items():
                if not 0 <= j < n:
                    raise LpError('row \'{0}\': unknown variable {1}'
                                  .format(name, j))
                if not np.isfinite(v):
                    raise LpError('row \'{0}\': coefficient {1} is not '
                                  'finite'.format(name, v))
        for j, v in self.objective.items():
            if not 0 <= j < n:
                raise LpError('objective: unknown variable {0}'.format(j))
            if not np.isfinite(v):
                raise LpError('objective: coefficient {0} is not finite'
                              .format(v))
        if self.sense not in (sense.MINIMIZE, sense.MAXIMIZE):
            raise LpError('invalid objective sense: {0!r}'.format(self.sense))


# nonbasic variable states
_BASIC = 0
_LOWER = 1
_UPPER = 2
_FREE = 3


class Basis (object):
    """A simplex basis, usable to warm-start another solve of a program with the
same rows.

Basis(basic, states)

:arg basic: indices of the basic variables, one per (nonempty) row; indices
            from ``n_vars`` up refer to row activities.
:arg states: state of every variable and row activity.

"""

    def __init__ (self, basic, states):
        self.basic = np.asarray(basic, dtype=int)
        self.states = np.asarray(states, dtype=np.int8)


class LpSolution (object):
    """The outcome of :func:`solve_lp`.

:attr:`x` is ``None`` unless the status is :data:`status.OPTIMAL`, or
:data:`status.ITERATION_LIMIT` with a feasible point reached.

"""

    def __init__ (self, status, x=None, objective=None, iterations=0,
                  basis=None):
        #: From :class:`status`.
        self.status = status
        #: Primal values, an array with one entry per variable.
        self.x = x
        #: Objective value at :attr:`x`, in the program's own sense.
        self.objective = objective
        #: Simplex iterations performed.
        self.iterations = iterations
        #: Final :class:`Basis`, for warm starts.
        self.basis = basis

    def __repr__ (self):
        return '<LpSolution {0} obj={1} it={2}>'.format(
            self.status, self.objective, self.iterations)


class Residuals (object):
    """Feasibility residuals of a point, as returned by
:func:`check_feasible`."""

    def __init__ (self, bound, row, tol):
        #: Largest variable bound violation.
        self.bound = bound
        #: Largest row violation.
        self.row = row
        #: Whether both are within the tolerance.
        self.feasible = bound <= tol and row <= tol

    def __repr__ (self):
        return '<Residuals bound={0} row={1} feasible={2}>'.format(
            self.bound, self.row, self.feasible)


def check_feasible (lp, point, lower=None, upper=None, tol=None):
    """Measure how far a point is from satisfying a program's constraints.

check_feasible(lp, point[, lower][, upper][, tol]) -> residuals

:arg lp: :class:`LinearProgram`.
:arg point: one value per variable.
:arg lower,upper: variable bound arrays to use instead of the program's own.
:arg tol: feasibility tolerance; defaults to :data:`conf.FEAS_TOL`.

:return: :class:`Residuals`.

"""
    if tol is None:
        tol = conf.FEAS_TOL
    point = np.asarray(point, dtype=float)
    if point.shape != (lp.n_vars,):
        raise ValueError('point has length {0}, expected {1}'
                         .format(len(point), lp.n_vars))
    lo, hi = lp.bounds()
    if lower is not None:
        lo = lower
    if upper is not None:
        hi = upper
    bound = max(0., float(np.max(lo - point, initial=0.)),
                float(np.max(point - hi, initial=0.)))
    row = 0.
    if lp.n_rows:
        act = lp.matrix() @ point
        rlo, rhi = lp.row_bounds()
        row = max(0., float(np.max(rlo - act)), float(np.max(act - rhi)))
    return Residuals(bound, row, tol)


class _Simplex (object):
    """Bounded-variable primal simplex on ``A x - r = 0`` with bounds on both
the structural variables ``x`` and the row activities ``r``.

A solver instance is used for one solve only.

"""

    def __init__ (self, A, c, lower, upper, row_lower, row_upper,
                  iteration_limit):
        m, n = A.shape
        self.m = m
        self.n = n
        self.A = A
        self.c = np.concatenate((c, np.zeros(m)))
        self.lo = np.concatenate((lower, row_lower))
        self.hi = np.concatenate((upper, row_upper))
        self.iteration_limit = iteration_limit
        self.x = np.zeros(n + m)
        self.state = np.empty(n + m, dtype=np.int8)
        self.basis = None
        self.Binv = None
        self.iterations = 0

    # basis handling

    def _nonbasic_value (self, j, state):
        # fix up a state that doesn't suit the bounds; return (state, value)
        lo = self.lo[j]
        hi = self.hi[j]
        if state == _UPPER and hi < INF:
            return (_UPPER, hi)
        elif lo > -INF:
            return (_LOWER, lo)
        elif hi < INF:
            return (_UPPER, hi)
        else:
            return (_FREE, 0.)

    def cold_start (self):
        m, n = self.m, self.n
        self.basis = np.arange(n, n + m)
        self.Binv = -np.eye(m)
        self.state[n:] = _BASIC
        for j in range(n):
            self.state[j], self.x[j] = self._nonbasic_value(j, _LOWER)
        self._compute_basic()

    def warm_start (self, basis):
        m, n = self.m, self.n
        basic = basis.basic
        if (len(basic) != m or len(basis.states) != n + m or
            len(set(basic.tolist())) != m):
            return False
        self.basis = basic.copy()
        try:
            self.Binv = np.linalg.inv(self._basis_matrix())
        except np.linalg.LinAlgError:
            return False
        self.state[:] = basis.states
        self.state[self.basis] = _BASIC
        for j in np.flatnonzero(self.state != _BASIC):
            self.state[j], self.x[j] = self._nonbasic_value(j, self.state[j])
        self._compute_basic()
        return True

    def _column (self, j):
        if j < self.n:
            return self.A[:, j]
        col = np.zeros(self.m)
        col[j - self.n] = -1.
        return col

    def _basis_matrix (self):
        B = np.empty((self.m, self.m))
        for r, j in enumerate(self.basis):
            B[:, r] = self._column(j)
        return B

    def _compute_basic (self):
        # B x_B = -(N x_N)
        n = self.n
        xn = np.where(self.state == _BASIC, 0., self.x)
        rhs = self.A @ xn[:n] - xn[n:]
        self.x[self.basis] = -(self.Binv @ rhs)

    def _refactor (self):
        try:
            self.Binv = np.linalg.inv(self._basis_matrix())
        except np.linalg.LinAlgError:
            # keep the updated inverse; the next pivot may fix things
            log.debug('singular basis at reinversion; keeping update')
            return
        self._compute_basic()

    # iterations

    def _alpha (self, j):
        if j < self.n:
            return self.Binv @ self.A[:, j]
        return -self.Binv[:, j - self.n]

    def _infeasible (self):
        # (below, above) masks over basis positions
        b = self.basis
        xb = self.x[b]
        lo = self.lo[b]
        hi = self.hi[b]
        tol = 1e-9
        below = xb < lo - tol * np.maximum(1., np.abs(lo))
        above = xb > hi + tol * np.maximum(1., np.abs(hi))
        return below, above

    def _max_violation (self):
        b = self.basis
        xb = self.x[b]
        return max(0., float(np.max(self.lo[b] - xb, initial=0.)),
                   float(np.max(xb - self.hi[b], initial=0.)))

    def _ratio (self, dx, phase, below, above, bland):
        # returns (step, position, leaving state); step is INF if unblocked
        b = self.basis
        xb = self.x[b]
        lo = self.lo[b]
        hi = self.hi[b]
        ptol = conf.PIVOT_TOL
        dec = dx < -ptol
        inc = dx > ptol
        t = np.full(self.m, INF)
        to_upper = np.zeros(self.m, dtype=bool)
        with np.errstate(divide='ignore', invalid='ignore'):
            if phase == 1:
                feas = ~(below | above)
                mask = dec & feas & (lo > -INF)
                t[mask] = (xb[mask] - lo[mask]) / -dx[mask]
                mask = inc & feas & (hi < INF)
                t[mask] = (hi[mask] - xb[mask]) / dx[mask]
                to_upper[mask] = True
                # infeasible variables stop as soon as they become feasible
                mask = inc & below
                t[mask] = (lo[mask] - xb[mask]) / dx[mask]
                mask = dec & above
                t[mask] = (xb[mask] - hi[mask]) / -dx[mask]
                to_upper[mask] = True
            else:
                mask = dec & (lo > -INF)
                t[mask] = (xb[mask] - lo[mask]) / -dx[mask]
                mask = inc & (hi < INF)
                t[mask] = (hi[mask] - xb[mask]) / dx[mask]
                to_upper[mask] = True
        t = np.maximum(t, 0.)
        step = float(t.min()) if self.m else INF
        if step == INF:
            return (INF, None, None)
        ties = np.flatnonzero(t <= step + 1e-12 * (1. + step))
        if bland:
            r = ties[np.argmin(b[ties])]
        else:
            r = ties[np.argmax(np.abs(dx[ties]))]
        return (step, r, _UPPER if to_upper[r] else _LOWER)

    def _pivot (self, r, j, alpha):
        row = self.Binv[r] / alpha[r]
        self.Binv -= np.outer(alpha, row)
        self.Binv[r] = row
        self.basis[r] = j

    def run (self):
        """Run phases 1 and 2; return the final status."""
        n, m = self.n, self.m
        lo, hi, x, state = self.lo, self.hi, self.x, self.state
        otol = conf.OPT_TOL
        phase = 1
        degenerate = 0
        since_refactor = 0
        while True:
            if since_refactor >= conf.REFACTOR_FREQ:
                self._refactor()
                since_refactor = 0
            below, above = self._infeasible()
            if phase == 1 and not (below.any() or above.any()):
                phase = 2
                log.debug('simplex: feasible after %d iterations',
                          self.iterations)
            if self.iterations >= self.iteration_limit:
                return status.ITERATION_LIMIT if phase == 2 else None

            # pricing
            if phase == 1:
                cb = np.where(below, -1., np.where(above, 1., 0.))
                y = self.Binv.T @ cb
                d = np.concatenate((-(self.A.T @ y), y))
            else:
                cb = self.c[self.basis]
                y = self.Binv.T @ cb
                d = np.concatenate((self.c[:n] - self.A.T @ y, y))
            d[self.basis] = 0.
            movable = hi > lo
            inc = (((state == _LOWER) & movable) | (state == _FREE)) & \
                  (d < -otol)
            dec = (((state == _UPPER) & movable) | (state == _FREE)) & \
                  (d > otol)
            cand = np.flatnonzero(inc | dec)
            if not cand.size:
                if phase == 2:
                    return status.OPTIMAL
                if self._max_violation() <= conf.FEAS_TOL:
                    # within tolerance: accept and optimise
                    phase = 2
                    continue
                return status.INFEASIBLE
            bland = degenerate >= conf.DEGENERATE_PIVOTS
            if bland:
                j = cand[0]
            else:
                j = cand[np.argmax(np.abs(d[cand]))]
            sigma = 1. if inc[j] else -1.

            # ratio test
            alpha = self._alpha(j)
            dx = -sigma * alpha
            step, r, leave_state = self._ratio(dx, phase, below, above, bland)
            flip = hi[j] - lo[j]
            if flip <= step and flip < INF:
                # entering variable hits its other bound first
                step = flip
                x[self.basis] += step * dx
                if sigma > 0:
                    x[j] = hi[j]
                    state[j] = _UPPER
                else:
                    x[j] = lo[j]
                    state[j] = _LOWER
            elif step == INF:
                if phase == 2:
                    return status.UNBOUNDED
                # can't happen in exact arithmetic
                log.debug('simplex: unblocked phase 1 direction')
                return status.INFEASIBLE
            else:
                x[self.basis] += step * dx
                x[j] += sigma * step
                leaving = self.basis[r]
                x[leaving] = hi[leaving] if leave_state == _UPPER \
                                         else lo[leaving]
                state[leaving] = leave_state
                state[j] = _BASIC
                self._pivot(r, j, alpha)
                since_refactor += 1
            degenerate = degenerate + 1 if step <= 1e-12 else 0
            self.iterations += 1


def solve_lp (lp, iteration_limit=None, lower=None, upper=None, warm=None):
    """Solve a linear program.

solve_lp(lp[, iteration_limit][, lower][, upper][, warm]) -> solution

:arg lp: :class:`LinearProgram`; checked first (raises :class:`LpError`).
:arg iteration_limit: maximum number of simplex iterations; defaults to
                      :data:`conf.LP_ITERATION_LIMIT`, or a multiple of the
                      problem size if that is ``None``.
:arg lower,upper: variable bound arrays replacing the program's own.
:arg warm: :class:`Basis` from an earlier solve of a program with the same rows;
           ignored if unusable.

:return: :class:`LpSolution`.  An optimal solution is a vertex.

"""
    lp.check()
    n = lp.n_vars
    lo, hi = lp.bounds()
    if lower is not None:
        lo = np.array(lower, dtype=float)
    if upper is not None:
        hi = np.array(upper, dtype=float)
    if lo.shape != (n,) or hi.shape != (n,):
        raise LpError('bound overrides must have length {0}'.format(n))
    crossed = lo > hi
    if crossed.any():
        if np.any(lo[crossed] - hi[crossed] > conf.FEAS_TOL):
            return LpSolution(status.INFEASIBLE)
        hi = np.maximum(hi, lo)

    A = lp.matrix()
    rlo, rhi = lp.row_bounds()
    # empty rows just need 0 within their bounds
    if A.shape[0]:
        empty = ~A.any(axis=1)
    else:
        empty = np.zeros(0, dtype=bool)
    if empty.any():
        if (np.any(rlo[empty] > conf.FEAS_TOL) or
            np.any(rhi[empty] < -conf.FEAS_TOL)):
            return LpSolution(status.INFEASIBLE)
        keep = ~empty
        A = A[keep]
        rlo = rlo[keep]
        rhi = rhi[keep]

    sgn = lp.sense
    if iteration_limit is None:
        iteration_limit = conf.LP_ITERATION_LIMIT
    if iteration_limit is None:
        iteration_limit = 20 * (A.shape[0] + n) + 1000
    s = _Simplex(A, sgn * lp.cost(), lo, hi, rlo, rhi, iteration_limit)
    if warm is None or not s.warm_start(warm):
        s.cold_start()
    st = s.run()
    basis = Basis(s.basis.copy(), s.state.copy())
    if st is None:
        return LpSolution(status.ITERATION_LIMIT, iterations=s.iterations,
                          basis=basis)
    if st in (status.INFEASIBLE, status.UNBOUNDED):
        log.debug('lp: %s after %d iterations', st, s.iterations)
        return LpSolution(st, iterations=s.iterations, basis=basis)
    s._compute_basic()
    x = s.x[:n].copy()
    # snap to bounds violated only by rounding
    x = np.minimum(np.maximum(x, lo), hi)
    return LpSolution(st, x, lp.value(x), s.iterations, basis)


def _fmt_terms (coefs, names):
    terms = []
    for j in sorted(coefs):
        v = coefs[j]
        sign = '-' if v < 0 else '+'
        v = abs(v)
        coef = '' if v == 1 else fmt_float(v) + ' '
        terms.append('{0} {1}{2}'.format(sign, coef, names[j]))
    if not terms:
        return '0'
    s = ' '.join(terms)
    return s[2:] if s.startswith('+ ') else s


def write_lp (lp, f, binaries=()):
    """Write a program in a human-readable text format, for inspection.

write_lp(lp, f, binaries=())

:arg lp: :class:`LinearProgram`.
:arg f: file-like object with a ``write`` method.
:arg binaries: indices of variables to list as binary.

The format is close to the CPLEX LP format: an objective section, one named row
per line under ``subject to``, then ``bounds``, ``binaries`` and ``end``.

"""
    names = lp.names
    f.write('\\ dnnmip: {0} variables, {1} rows\n'
            .format(lp.n_vars, lp.n_rows))
    f.write('minimize\n' if lp.sense == sense.MINIMIZE else 'maximize\n')
    f.write(' obj: {0}\n'.format(_fmt_terms(lp.objective, names)))
    f.write('subject to\n')
    for name, (coefs, lower, upper) in zip(lp.row_names, lp.rows):
        expr = _fmt_terms(coefs, names)
        if lower == upper:
            f.write(' {0}: {1} = {2}\n'.format(name, expr, fmt_float(upper)))
        elif lower == -INF and upper == INF:
            f.write(' {0}: {1} free\n'.format(name, expr))
        elif lower == -INF:
            f.write(' {0}: {1} <= {2}\n'.format(name, expr, fmt_float(upper)))
        elif upper == INF:
            f.write(' {0}: {1} >= {2}\n'.format(name, expr, fmt_float(lower)))
        else:
            f.write(' {0}: {1} <= {2} <= {3}\n'.format(
                name, fmt_float(lower), expr, fmt_float(upper)))
    f.write('bounds\n')
    for name, lower, upper in zip(names, lp.lower, lp.upper):
        if lower == -INF and upper == INF:
            f.write(' {0} free\n'.format(name))
        elif lower == upper:
            f.write(' {0} = {1}\n'.format(name, fmt_float(lower)))
        else:
            f.write(' {0} <= {1} <= {2}\n'.format(
                '-inf' if lower == -INF else fmt_float(lower), name,
                'inf' if upper == INF else fmt_float(upper)))
    binaries = list(binaries)
    if binaries:
        f.write('binaries\n')
        for j in binaries:
            f.write(' {0}\n'.format(names[j]))
    f.write('end\n')
