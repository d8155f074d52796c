from io import StringIO

import numpy as np
import pytest

from dnnmip.engine.lp import (sense, status, LpError, LinearProgram,
                              check_feasible, solve_lp, write_lp)
from dnnmip.engine.util import INF


def program (n, names='xyzw'):
    lp = LinearProgram()
    for j in range(n):
        lp.add_var(names[j])
    return lp


def test_bound_optimum ():
    lp = LinearProgram()
    x = lp.add_var('x', 0., 3.)
    lp.set_objective({x: 1.}, sense.MAXIMIZE)
    sol = solve_lp(lp)
    assert sol.status == status.OPTIMAL
    assert sol.x[x] == pytest.approx(3.)
    assert sol.objective == pytest.approx(3.)


def test_single_row ():
    lp = program(2)
    lp.add_row({0: 1., 1: 1.}, upper=1.)
    lp.set_objective({0: 1., 1: 1.}, sense.MAXIMIZE)
    sol = solve_lp(lp)
    assert sol.status == status.OPTIMAL
    assert sol.objective == pytest.approx(1.)


def test_vertex ():
    lp = program(2)
    lp.add_row({0: 1., 1: 1.}, upper=4.)
    lp.add_row({0: 1., 1: 3.}, upper=6.)
    lp.set_objective({0: 3., 1: 2.}, sense.MAXIMIZE)
    sol = solve_lp(lp)
    assert sol.status == status.OPTIMAL
    assert sol.objective == pytest.approx(12.)
    assert np.allclose(sol.x, [4., 0.])


def test_equality_and_minimize ():
    # min x + 2y  s.t.  x + y = 3, x <= 2
    lp = LinearProgram()
    x = lp.add_var('x', 0., 2.)
    y = lp.add_var('y')
    lp.add_row({x: 1., y: 1.}, 3., 3.)
    lp.set_objective({x: 1., y: 2.})
    sol = solve_lp(lp)
    assert sol.status == status.OPTIMAL
    assert np.allclose(sol.x, [2., 1.])
    assert sol.objective == pytest.approx(4.)


def test_free_variable ():
    # min x  s.t.  x >= y - 2, y >= 1, x free
    lp = LinearProgram()
    x = lp.add_var('x', -INF, INF)
    y = lp.add_var('y', 1., 5.)
    lp.add_row({x: 1., y: -1.}, lower=-2.)
    lp.set_objective({x: 1.})
    sol = solve_lp(lp)
    assert sol.status == status.OPTIMAL
    assert sol.objective == pytest.approx(-1.)


def test_infeasible ():
    lp = program(2)
    lp.add_row({0: 1., 1: 1.}, upper=1.)
    lp.add_row({0: 1., 1: 1.}, lower=2.)
    assert solve_lp(lp).status == status.INFEASIBLE


def test_unbounded ():
    lp = program(2)
    lp.add_row({0: 1., 1: -1.}, upper=1.)
    lp.set_objective({0: 1., 1: 1.}, sense.MAXIMIZE)
    assert solve_lp(lp).status == status.UNBOUNDED


def test_unbounded_variable ():
    # nothing blocks the entering variable: no rows, no upper bound
    lp = program(1)
    lp.set_objective({0: 1.}, sense.MAXIMIZE)
    sol = solve_lp(lp)
    assert sol.status == status.UNBOUNDED
    assert sol.x is None
    lp = LinearProgram()
    lp.add_var('x', -INF, INF)
    lp.set_objective({0: 1.})
    assert solve_lp(lp).status == status.UNBOUNDED


def test_crossed_override ():
    lp = program(1)
    assert solve_lp(lp, lower=[2.], upper=[1.]).status == status.INFEASIBLE


def test_empty_row ():
    lp = program(1)
    lp.add_row({}, lower=1.)
    assert solve_lp(lp).status == status.INFEASIBLE
    lp = program(1)
    lp.add_row({0: 0.}, upper=1.)
    assert solve_lp(lp).status == status.OPTIMAL


def test_malformed ():
    lp = program(1)
    lp.lower[0] = 2.
    lp.upper[0] = 1.
    with pytest.raises(LpError):
        solve_lp(lp)
    lp = program(1)
    lp.add_row({3: 1.}, upper=1.)
    with pytest.raises(LpError):
        solve_lp(lp)
    lp = program(1)
    lp.set_objective({0: np.inf})
    with pytest.raises(LpError):
        solve_lp(lp)


def test_overrides_and_warm_start ():
    lp = program(3)
    lp.add_row({0: 1., 1: 2., 2: 1.}, upper=4.)
    lp.add_row({0: 3., 1: 1., 2: 2.}, upper=6.)
    lp.set_objective({0: 2., 1: 3., 2: 1.}, sense.MAXIMIZE)
    first = solve_lp(lp)
    assert first.status == status.OPTIMAL
    lo, hi = lp.bounds()
    hi[1] = .5
    cold = solve_lp(lp, lower=lo, upper=hi)
    warm = solve_lp(lp, lower=lo, upper=hi, warm=first.basis)
    assert warm.status == cold.status == status.OPTIMAL
    assert warm.objective == pytest.approx(cold.objective)
    # the program itself is unchanged
    assert lp.upper[1] == INF


def test_random_programs_against_vertices ():
    # maximize over a bounded 2D polytope; compare with every vertex
    r = np.random.default_rng(7)
    for trial in range(20):
        A = r.uniform(-1., 1., (4, 2))
        b = r.uniform(.5, 2., 4)
        c = r.uniform(-1., 1., 2)
        lp = LinearProgram()
        for j in range(2):
            lp.add_var('v{0}'.format(j), -3., 3.)
        for a, u in zip(A, b):
            lp.add_row({0: a[0], 1: a[1]}, upper=u)
        lp.set_objective({0: c[0], 1: c[1]}, sense.MAXIMIZE)
        sol = solve_lp(lp)
        assert sol.status == status.OPTIMAL
        # candidate vertices: intersections of every pair of constraint lines
        lines = [(a, u) for a, u in zip(A, b)]
        for j in range(2):
            e = np.eye(2)[j]
            lines.extend([(e, 3.), (-e, 3.)])
        best = -np.inf
        for i in range(len(lines)):
            for m in range(i + 1, len(lines)):
                M = np.array([lines[i][0], lines[m][0]])
                if abs(np.linalg.det(M)) < 1e-9:
                    continue
                v = np.linalg.solve(M, [lines[i][1], lines[m][1]])
                if np.all(A @ v <= b + 1e-9) and np.all(np.abs(v) <= 3 + 1e-9):
                    best = max(best, c @ v)
        assert sol.objective == pytest.approx(best, abs=1e-7)
        assert check_feasible(lp, sol.x).feasible


def test_check_feasible ():
    lp = LinearProgram()
    lp.add_var('x', 0., 3.)
    res = check_feasible(lp, [2.])
    assert res.feasible and res.bound == 0 and res.row == 0
    res = check_feasible(lp, [4.])
    assert not res.feasible
    assert res.bound == pytest.approx(1.)
    lp = program(2)
    lp.add_row({0: 1., 1: 1.}, upper=1.)
    res = check_feasible(lp, [.6, .6])
    assert not res.feasible
    assert res.row == pytest.approx(.2)
    with pytest.raises(ValueError):
        check_feasible(lp, [1.])


def test_write_lp ():
    lp = LinearProgram()
    x = lp.add_var('x', 0., 2.)
    z = lp.add_var('z', 0., 1.)
    lp.add_row({x: 1., z: 2.}, upper=2., name='bigm')
    lp.set_objective({x: 1.}, sense.MAXIMIZE)
    f = StringIO()
    write_lp(lp, f, [z])
    text = f.getvalue()
    assert 'maximize\n obj: x\n' in text
    assert ' bigm: x + 2 z <= 2\n' in text
    assert 'binaries\n z\n' in text
    assert text.endswith('end\n')


def random_program (r, n=3, m=4):
    # bounded and feasible at 0
    lp = LinearProgram()
    for j in range(n):
        lp.add_var('v{0}'.format(j), -2., 2.)
    for i in range(m):
        lp.add_row(dict(enumerate(r.uniform(-1., 1., n))),
                   upper=r.uniform(.5, 2.))
    lp.set_objective(dict(enumerate(r.uniform(-1., 1., n))), sense.MAXIMIZE)
    return lp


def test_negated_objective ():
    r = np.random.default_rng(9)
    for trial in range(20):
        lp = random_program(r)
        sol = solve_lp(lp)
        assert sol.status == status.OPTIMAL
        lp.set_objective(dict((j, -c) for j, c in lp.objective.items()),
                         sense.MINIMIZE)
        flipped = solve_lp(lp)
        assert flipped.status == status.OPTIMAL
        assert flipped.objective == pytest.approx(-sol.objective, abs=1e-6)


def test_scaled_objective ():
    r = np.random.default_rng(10)
    for trial in range(20):
        lp = random_program(r)
        c = dict(lp.objective)
        sol = solve_lp(lp)
        for factor in (.01, 7., 1000.):
            lp.set_objective(dict((j, factor * v) for j, v in c.items()),
                             sense.MAXIMIZE)
            scaled = solve_lp(lp)
            assert scaled.status == sol.status == status.OPTIMAL
            assert scaled.objective == pytest.approx(factor * sol.objective,
                                                     rel=1e-9, abs=1e-12)
