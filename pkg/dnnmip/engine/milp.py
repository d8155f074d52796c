"""0-1 mixed-integer linear programs with indicator constraints.

A :class:`MilpModel` is a :class:`LinearProgram` with some variables flagged
binary and a list of :class:`IndicatorConstraint` implications.  The solver only
handles linear rows, so :func:`linearize_indicators` turns the implications
into big-M rows using the variable bounds; the implications themselves are kept
(as :attr:`MilpModel.implications`) for bound fixing while branching.

"""

import logging

import numpy as np

from .conf import conf
from .lp import LinearProgram, check_feasible
from .util import INF

__all__ = ('IndicatorConstraint', 'MilpModel', 'SolutionCheck',
           'linearize_indicators', 'check_solution')

log = logging.getLogger(__name__)


class IndicatorConstraint (object):
    """The implication ``binary == active_when  ->  coefs . v <= rhs``.

IndicatorConstraint(binary, active_when, coefs, rhs=0)

:arg binary: index of a binary variable.
:arg active_when: ``0`` or ``1``.
:arg coefs: ``{var: coefficient}`` over continuous variables.
:arg rhs: finite right-hand side.

"""

    def __init__ (self, binary, active_when, coefs, rhs=0.):
        if active_when not in (0, 1):
            raise ValueError('active_when must be 0 or 1, not {0!r}'
                             .format(active_when))
        rhs = float(rhs)
        if not np.isfinite(rhs):
            raise ValueError('indicator right-hand side must be finite')
        self.binary = int(binary)
        self.active_when = active_when
        self.coefs = dict((int(j), float(v)) for j, v in coefs.items())
        self.rhs = rhs

    def implied_bound (self):
        """If the implied row is a simple upper bound ``v <= u``, return
``(v, u)``; otherwise return ``None``."""
        if len(self.coefs) != 1:
            return None
        (j, c), = self.coefs.items()
        if c <= 0:
            return None
        return (j, self.rhs / c)

    def __repr__ (self):
        return '<IndicatorConstraint z{0}={1} -> {2} <= {3}>'.format(
            self.binary, self.active_when, self.coefs, self.rhs)


class MilpModel (object):
    """A 0-1 MILP.

MilpModel([lp])

:arg lp: the :class:`LinearProgram` holding every variable and row; a new empty
         one by default.

"""

    def __init__ (self, lp=None):
        #: The underlying :class:`LinearProgram`.
        self.lp = LinearProgram() if lp is None else lp
        #: Indices of the binary variables, in branching priority order.
        self.binaries = []
        #: :class:`IndicatorConstraint` instances not yet turned into rows.
        self.indicators = []
        #: Indicators that have been linearized; used for bound fixing.
        self.implications = []
        #: ``{(layer, unit, role): var}`` for models built from a network;
        #: ``role`` is one of ``'x'``, ``'s'``, ``'z'``, ``'d'``, ``'c'``.
        self.var_index = {}
        #: ``{(layer, unit): [var]}``: max-pool selector binaries per output.
        self.selectors = {}
        #: The network this model was built from, if any.
        self.net = None
        #: Builder-specific data, e.g. the adversarial distance terms.
        self.extras = {}

    @property
    def linearized (self):
        """Whether all indicators have been turned into rows."""
        return not self.indicators

    def add_binary (self, name, lower=0., upper=1.):
        """Add a binary variable and return its index."""
        j = self.lp.add_var(name, lower, upper)
        self.binaries.append(j)
        return j

    def add_indicator (self, binary, active_when, coefs, rhs=0.):
        """Add an :class:`IndicatorConstraint` and return it."""
        lp = self.lp
        for j in [binary] + list(coefs):
            if not 0 <= j < lp.n_vars:
                raise ValueError('indicator references unknown variable {0}'
                                 .format(j))
        ind = IndicatorConstraint(binary, active_when, coefs, rhs)
        self.indicators.append(ind)
        return ind

    def copy (self):
        """Return a copy whose program can be changed independently."""
        m = MilpModel(self.lp.copy())
        m.binaries = list(self.binaries)
        m.indicators = list(self.indicators)
        m.implications = list(self.implications)
        m.var_index = dict(self.var_index)
        m.selectors = dict(self.selectors)
        m.net = self.net
        m.extras = dict(self.extras)
        return m

    def counts (self):
        """Return a dict of variable, binary, row and indicator counts, by
role where known."""
        roles = {}
        for (k, j, role) in self.var_index:
            roles[role] = roles.get(role, 0) + 1
        return {
            'vars': self.lp.n_vars, 'binaries': len(self.binaries),
            'rows': self.lp.n_rows,
            'indicators': len(self.indicators) + len(self.implications),
            'roles': roles
        }


def _big_m (lp, ind):
    # largest possible value of coefs . v - rhs over the variable bounds
    total = -ind.rhs
    for j, c in ind.coefs.items():
        lo = lp.lower[j]
        hi = lp.upper[j]
        worst = max(c * lo if lo > -INF else (INF if c < 0 else -INF),
                    c * hi if hi < INF else (INF if c > 0 else -INF))
        if worst == INF:
            raise ValueError('indicator on \'{0}\': variable \'{1}\' has an '
                             'infinite bound'.format(lp.names[ind.binary],
                                                     lp.names[j]))
        total += worst
    return total


def linearize_indicators (model):
    """Replace every indicator with a big-M row.

linearize_indicators(model) -> new_model

For ``z == 1 -> a.v <= r``, the row is ``a.v <= r + M (1 - z)``; for
``z == 0 -> a.v <= r``, it is ``a.v <= r + M z``; ``M`` is the largest value
``a.v - r`` can take within the variable bounds.  When ``M <= 0`` the row is
just ``a.v <= r``.

Raises ``ValueError`` if an involved variable has an infinite bound.  The given
model is not changed.

"""
    new = model.copy()
    lp = new.lp
    for n, ind in enumerate(model.indicators):
        M = _big_m(lp, ind)
        z = ind.binary
        coefs = dict(ind.coefs)
        name = 'bigm_{0}_{1}'.format(lp.names[z], n)
        if M <= 0:
            lp.add_row(coefs, upper=ind.rhs, name=name)
        elif ind.active_when == 1:
            coefs[z] = coefs.get(z, 0.) + M
            lp.add_row(coefs, upper=ind.rhs + M, name=name)
        else:
            coefs[z] = coefs.get(z, 0.) - M
            lp.add_row(coefs, upper=ind.rhs, name=name)
    new.implications = list(model.implications) + list(model.indicators)
    new.indicators = []
    log.debug('linearized %d indicators', len(model.indicators))
    return new


class SolutionCheck (object):
    """Residuals of a point against a whole :class:`MilpModel`, as returned by
:func:`check_solution`."""

    def __init__ (self, bound, row, indicator, integrality, tol, int_tol):
        self.bound = bound
        self.row = row
        #: Largest violation of an indicator whose binary is at its active
        #: value.
        self.indicator = indicator
        #: Largest distance of a binary from 0 or 1.
        self.integrality = integrality
        self.feasible = (max(bound, row, indicator) <= tol and
                         integrality <= int_tol)

    def __repr__ (self):
        return ('<SolutionCheck bound={0} row={1} indicator={2} '
                'integrality={3} feasible={4}>').format(
            self.bound, self.row, self.indicator, self.integrality,
            self.feasible)


def check_solution (model, point, tol=None, int_tol=None):
    """Check a point against every constraint of a model.

check_solution(model, point[, tol][, int_tol]) -> check

Covers variable bounds, rows, integrality of the binaries and all indicators
(linearized or not).  Tolerances default to :data:`conf.FEAS_TOL` and
:data:`conf.INT_TOL`.

:return: :class:`SolutionCheck`.

"""
    if tol is None:
        tol = conf.FEAS_TOL
    if int_tol is None:
        int_tol = conf.INT_TOL
    point = np.asarray(point, dtype=float)
    res = check_feasible(model.lp, point, tol=tol)
    integrality = 0.
    if model.binaries:
        zb = point[model.binaries]
        integrality = float(np.max(np.abs(zb - np.round(zb))))
    indicator = 0.
    for ind in list(model.indicators) + list(model.implications):
        if round(point[ind.binary]) == ind.active_when:
            v = sum(c * point[j] for j, c in ind.coefs.items()) - ind.rhs
            indicator = max(indicator, v)
    return SolutionCheck(res.bound, res.row, indicator, integrality, tol,
                         int_tol)
