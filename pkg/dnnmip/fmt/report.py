"""Solve reports and their aggregation.

A report file holds a JSON list of records, one per solve, each a dict with the
solve statistics (``status``, ``objective``, ``dual_bound``, ``pct_gap``,
``nodes``, ``time``), the solver configuration, the incumbent log and any
application data (such as an adversarial verification report).

"""

import json
import math

from ..engine import conf
from ..engine.bnb import status
from ..engine.util import JSONEncoder
from . import FormatError

__all__ = ('result_record', 'write_report', 'load_report', 'aggregate',
           'format_table')


def result_record (result, config=None, **extra):
    """Build a report record.

result_record(result[, config], **extra) -> record

:arg result: :class:`MilpResult <dnnmip.engine.bnb.MilpResult>`.
:arg config: the :class:`SolverConfig <dnnmip.engine.bnb.SolverConfig>` used.
:arg extra: added to the record as they are.

"""
    record = {
        'version': conf.REPORT_FORMAT_VERSION,
        'status': result.status,
        'objective': result.objective,
        'dual_bound': result.dual_bound,
        'pct_gap': result.pct_gap,
        'nodes': result.nodes,
        'time': result.time,
        'log': result.log
    }
    if config is not None:
        record['config'] = config.as_dict()
    record.update(extra)
    return record


def _clean (o):
    # JSON has no infinities
    if isinstance(o, float) and not math.isfinite(o):
        return None
    elif isinstance(o, dict):
        return dict((k, _clean(v)) for k, v in o.items())
    elif isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    return o


def write_report (records, path):
    """Write one record or a list of them to a file."""
    if isinstance(records, dict):
        records = [records]
    with open(path, 'w') as f:
        json.dump(_clean(list(records)), f, indent=4, sort_keys=True,
                  cls=JSONEncoder)
        f.write('\n')


def load_report (path):
    """Load the list of records in a report file."""
    with open(path) as f:
        try:
            records = json.load(f)
        except ValueError as e:
            raise FormatError('invalid JSON in \'{0}\': {1}'.format(path, e))
    if not isinstance(records, list):
        raise FormatError('\'{0}\': expected a list of records'.format(path))
    return records


def aggregate (records, time_limit=None):
    """Summarize a batch of solves.

aggregate(records[, time_limit]) -> summary

:arg time_limit: time counted for solves that hit their time limit; defaults to
                 :data:`conf.TIME_LIMIT`.

:return: ``{'n', 'pct_solved', 'pct_gap', 'nodes', 'time'}``: the number of
         records, the percentage solved to optimality (or proven infeasible),
         and the mean gap, node count and time.  A solve with no incumbent
         counts as a 100% gap.

"""
    if time_limit is None:
        time_limit = conf.TIME_LIMIT
    n = len(records)
    if not n:
        return {'n': 0, 'pct_solved': 0., 'pct_gap': 0., 'nodes': 0.,
                'time': 0.}
    solved = gap = nodes = t = 0.
    for r in records:
        st = r['status']
        if st in (status.OPTIMAL, status.INFEASIBLE):
            solved += 1
        if st == status.INFEASIBLE:
            g = 0.
        elif r.get('pct_gap') is None:
            g = 100.
        else:
            g = r['pct_gap']
        gap += g
        nodes += r['nodes']
        if st in (status.FEASIBLE_TIME_LIMIT, status.UNKNOWN_TIME_LIMIT):
            t += time_limit
        else:
            t += r['time']
    return {'n': n, 'pct_solved': 100 * solved / n, 'pct_gap': gap / n,
            'nodes': nodes / n, 'time': t / n}


def format_table (rows):
    """Format summaries as a table.

format_table(rows) -> text

:arg rows: a sequence of ``(name, summary)``, where ``summary`` is as returned
           by :func:`aggregate`.

"""
    width = max([5] + [len(name) for name, s in rows])
    head = '{0:<{w}} {1:>8} {2:>8} {3:>10} {4:>9}'.format(
        'model', '%solved', '%gap', 'nodes', 'time(s)', w=width)
    lines = [head, '-' * len(head)]
    for name, s in rows:
        lines.append('{0:<{w}} {1:>8.1f} {2:>8.2f} {3:>10.1f} {4:>9.2f}'
                     .format(name, s['pct_solved'], s['pct_gap'], s['nodes'],
                             s['time'], w=width))
    return '\n'.join(lines)
