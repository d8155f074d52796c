"""Command-line interface.

Usage: ``dnnmip <command> [options] [args]``, where ``command`` is one of
``forward``, ``tighten``, ``featviz``, ``adversarial``, ``bench``, ``oracle`` and
``random-net``; run ``dnnmip <command> --help`` for details.

The exit code is 0 on success, 1 if a solve found no feasible solution (or
failed) and 2 for usage errors and unreadable files.

"""

import logging
import os
import sys
from optparse import OptionParser
from time import perf_counter

import numpy as np

from . import engine, fmt
from .engine import conf
from .engine.bnb import SolverConfig, SolveError
from .engine.lp import sense, write_lp
from .engine.util import rng
from .bounds import derive_interval_bounds, compare_tables
from .network import forward_eval, classify, random_network
from .encode import encode_network, set_objective, solve
from .tighten import TightenConfig, TighteningError, tighten_bounds
from .apps import (AdversarialSpec, build_featviz_model,
                   build_adversarial_model, verify_adversarial,
                   render_perturbation, input_values)
from .oracle import brute_force_optimum

__all__ = ('commands', 'run', 'main')

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NO_SOLUTION = 1
EXIT_USAGE = 2


class _CommandError (Exception):
    # reported as 'error: ...'; carries the exit code
    def __init__ (self, msg, code=EXIT_USAGE):
        Exception.__init__(self, msg)
        self.code = code


def _parser (name, usage, description):
    op = OptionParser(prog='dnnmip ' + name, usage='%prog ' + usage,
                      description=description)
    op.add_option('-c', '--conf', action='store', type='string',
                  help='JSON file of settings overrides')
    op.add_option('-b', '--debug', action='store_true',
                  help='log debugging messages')
    op.set_defaults(debug=False)
    return op


def _solver_options (op):
    op.add_option('-t', '--time-limit', action='store', type='float',
                  help='seconds per solve; defaults to {0}'
                       .format(conf.TIME_LIMIT))
    op.add_option('--node-limit', action='store', type='int',
                  help='maximum branch-and-bound nodes per solve')
    op.add_option('--bounds', action='store', type='string',
                  help='bounds file to use instead of interval bounds')


def _image_options (op):
    op.add_option('--width', action='store', type='int')
    op.add_option('--height', action='store', type='int')


def _solver_config (options):
    return SolverConfig(time_limit=options.time_limit,
                        node_limit=options.node_limit)


def _bounds (net, options):
    if options.bounds:
        return fmt.load_bounds(options.bounds, net)
    return derive_interval_bounds(net)


def _geometry (op, options, n):
    w, h = options.width, options.height
    if w is None and h is None:
        return fmt.default_geometry(n)
    if w is None:
        w = n // h
    elif h is None:
        h = n // w
    if w * h != n:
        op.error('image size {0}x{1} does not match {2} inputs'
                 .format(w, h, n))
    return (w, h)


def _to_image (net, x0):
    # map the input box onto [0, 1]
    span = net.input_upper - net.input_lower
    safe = np.where(span > 0, span, 1.)
    return np.where(span > 0, (x0 - net.input_lower) / safe, 0.)


def _unit (op, s):
    try:
        k, j = (int(v) for v in s.split(','))
    except ValueError:
        op.error('expected a unit as \'layer,index\', got \'{0}\''.format(s))
    return (k, j)


def _fmt_values (values):
    return ' '.join('{0:.9g}'.format(v) for v in values)


def _print_result (result):
    print('status: {0}'.format(result.status))
    if result.objective is not None:
        print('objective: {0:.9g}'.format(result.objective))
    if result.dual_bound is not None:
        print('bound: {0:.9g}'.format(result.dual_bound))
    if result.pct_gap is not None:
        print('gap: {0:.4g}%'.format(result.pct_gap))
    print('nodes: {0}'.format(result.nodes))
    print('time: {0:.3f}s'.format(result.time))


def _write_lp (model, path):
    with open(path, 'w') as f:
        write_lp(model.lp, f, model.binaries)


# commands


def cmd_forward (argv):
    op = _parser('forward', '[options] NET INPUT',
                 'Evaluate a network on an input (a text file of numbers or '
                 'an image) and print every layer.')
    options, args = op.parse_args(argv)
    if len(args) != 2:
        op.error('expected a network file and an input file')
    yield options
    net = fmt.load_network(args[0])
    x0 = fmt.read_input(args[1])
    acts = forward_eval(net, x0)
    for k, values in enumerate(acts.outputs):
        print('layer {0}: {1}'.format(k, _fmt_values(values)))
    print('output: {0}'.format(_fmt_values(acts.output)))
    if len(acts.output) >= 2:
        print('label: {0}'.format(classify(net, x0)[0]))
    yield EXIT_OK


def cmd_tighten (argv):
    op = _parser('tighten', '[options] NET -o BOUNDS',
                 'Compute tightened activation bounds and save them.')
    op.add_option('-o', '--output', action='store', type='string')
    op.add_option('-t', '--time-limit', action='store', type='float',
                  help='seconds per bound; defaults to {0}'
                       .format(conf.TIGHTEN_TIME_LIMIT))
    op.add_option('--lp-only', action='store_true',
                  help='solve LP relaxations only')
    op.add_option('-w', '--workers', action='store', type='int')
    op.add_option('--start', action='store', type='string',
                  help='bounds file to start from')
    op.set_defaults(lp_only=False)
    options, args = op.parse_args(argv)
    if len(args) != 1 or not options.output:
        op.error('expected a network file and -o BOUNDS')
    yield options
    net = fmt.load_network(args[0])
    start = fmt.load_bounds(options.start, net) if options.start else None
    config = TightenConfig(options.time_limit,
                           False if options.lp_only else None, options.workers)
    t = perf_counter()
    try:
        table = tighten_bounds(net, config, start)
    except TighteningError as e:
        fmt.save_bounds(e.partial, options.output)
        raise _CommandError('{0} (partial bounds saved)'.format(e),
                            EXIT_NO_SOLUTION)
    fmt.save_bounds(table, options.output)
    report = compare_tables(derive_interval_bounds(net), table)
    print('tightened {0} bounds in {1:.2f}s (largest reduction {2:.6g})'
          .format(report.n_tighter, perf_counter() - t, report.max_delta))
    for tag, n in sorted(table.provenance_counts().items()):
        print('{0}: {1}'.format(tag, n))
    yield EXIT_OK


def cmd_featviz (argv):
    op = _parser('featviz', '[options] NET --unit K,J -o IMAGE',
                 'Find the input maximizing the value of a unit, and save it '
                 'as an image.')
    op.add_option('-u', '--unit', action='store', type='string')
    op.add_option('-o', '--output', action='store', type='string')
    op.add_option('-r', '--report', action='store', type='string',
                  help='defaults to the image path with a .json extension')
    op.add_option('--write-lp', action='store', type='string')
    op.add_option('--tighten', action='store_true',
                  help='tighten the activation bounds before solving')
    op.set_defaults(tighten=False)
    _solver_options(op)
    _image_options(op)
    options, args = op.parse_args(argv)
    if len(args) != 1 or not options.output or not options.unit:
        op.error('expected a network file, --unit and -o IMAGE')
    unit = _unit(op, options.unit)
    yield options
    net = fmt.load_network(args[0])
    w, h = _geometry(op, options, net.input_dim)
    bounds = _bounds(net, options)
    if options.tighten:
        try:
            bounds = tighten_bounds(net, seed=bounds)
        except TighteningError as e:
            raise _CommandError(str(e), EXIT_NO_SOLUTION)
        log.info('tightened bounds: %s', bounds.provenance_counts())
    model = build_featviz_model(net, bounds, unit)
    if options.write_lp:
        _write_lp(model, options.write_lp)
    config = _solver_config(options)
    result = solve(model, config)
    _print_result(result)
    report = options.report or os.path.splitext(options.output)[0] + '.json'
    extra = {'application': 'featviz', 'unit': list(unit)}
    if result.x is not None:
        x0 = input_values(model, result.x)
        fmt.write_image(_to_image(net, x0), w, h, options.output)
        extra['input'] = x0
    fmt.write_report(fmt.result_record(result, config, **extra), report)
    yield EXIT_OK if result.has_solution else EXIT_NO_SOLUTION


def cmd_adversarial (argv):
    op = _parser('adversarial', '[options] NET --input IMAGE -o DIR',
                 'Find the smallest (L1) change to an input that makes the '
                 'network output the target label by a margin.')
    op.add_option('-i', '--input', action='store', type='string')
    op.add_option('-l', '--true-label', action='store', type='int',
                  help='defaults to the label the network gives the input')
    op.add_option('--target', action='store', type='int',
                  help='defaults to the true label plus half the number of '
                       'classes')
    op.add_option('-m', '--margin', action='store', type='float',
                  help='defaults to {0}'.format(conf.MARGIN))
    op.add_option('--cap', action='store', type='float',
                  help='largest change of any one input')
    op.add_option('--max-changed', action='store', type='int',
                  help='largest number of inputs that may change')
    op.add_option('-o', '--output', action='store', type='string')
    op.add_option('--write-lp', action='store', type='string')
    _solver_options(op)
    _image_options(op)
    options, args = op.parse_args(argv)
    if len(args) != 1 or not options.output or not options.input:
        op.error('expected a network file, --input and -o DIR')
    yield options
    net = fmt.load_network(args[0])
    w, h = _geometry(op, options, net.input_dim)
    ref = fmt.read_input(options.input)
    label = options.true_label
    if label is None:
        label = classify(net, ref)[0]
    spec = AdversarialSpec(ref, label, options.target, options.margin,
                           options.cap, options.max_changed)
    model = build_adversarial_model(net, _bounds(net, options), spec)
    if options.write_lp:
        _write_lp(model, options.write_lp)
    config = _solver_config(options)
    result = solve(model, config)
    _print_result(result)
    if not os.path.isdir(options.output):
        os.makedirs(options.output)
    extra = {'application': 'adversarial', 'spec': spec.as_dict(net)}
    if result.x is not None:
        x0 = np.clip(input_values(model, result.x), net.input_lower,
                     net.input_upper)
        v = verify_adversarial(net, x0, spec)
        print('label: {0} (target {1}), L1 {2:.6g}, Linf {3:.6g}, '
              'verified: {4}'.format(v.label, v.target, v.l1, v.linf,
                                     'yes' if v.passed else 'NO'))
        delta, rendered = render_perturbation(x0, ref)
        fmt.write_image(_to_image(net, x0), w, h,
                        os.path.join(options.output, 'adversarial.pgm'))
        fmt.write_image(rendered, w, h,
                        os.path.join(options.output, 'perturbation.pgm'))
        extra.update(input=x0, verification=v.as_dict())
    fmt.write_report(fmt.result_record(result, config, **extra),
                     os.path.join(options.output, 'report.json'))
    yield EXIT_OK if result.has_solution else EXIT_NO_SOLUTION


def cmd_bench (argv):
    op = _parser('bench', '[options] NET',
                 'Solve random adversarial instances with the basic model '
                 '(interval bounds) and the improved model (tightened '
                 'bounds), and compare.')
    op.add_option('-n', '--instances', action='store', type='int')
    op.add_option('-s', '--seed', action='store', type='int')
    op.add_option('--tighten-time-limit', action='store', type='float')
    op.add_option('--lp-only', action='store_true',
                  help='tighten with LP relaxations only')
    op.add_option('-m', '--margin', action='store', type='float')
    op.add_option('--cap', action='store', type='float')
    op.add_option('-r', '--report', action='store', type='string',
                  help='file to write per-instance records to')
    _solver_options(op)
    op.set_defaults(instances=10, lp_only=False)
    options, args = op.parse_args(argv)
    if len(args) != 1:
        op.error('expected a network file')
    if options.instances < 1:
        op.error('need at least one instance')
    yield options
    net = fmt.load_network(args[0])
    basic = derive_interval_bounds(net)
    t = perf_counter()
    if options.bounds:
        improved = fmt.load_bounds(options.bounds, net)
    else:
        improved = tighten_bounds(net, TightenConfig(
            options.tighten_time_limit, False if options.lp_only else None))
    prep = perf_counter() - t
    r = rng(options.seed)
    config = _solver_config(options)
    records = {'basic': [], 'improved': []}
    for i in range(options.instances):
        ref = r.uniform(net.input_lower, net.input_upper)
        label = classify(net, ref)[0]
        spec = AdversarialSpec(ref, label, margin=options.margin,
                               pixel_cap=options.cap)
        for name, table in (('basic', basic), ('improved', improved)):
            model = build_adversarial_model(net, table, spec)
            result = solve(model, config)
            extra = {'model': name, 'instance': i,
                     'spec': spec.as_dict(net)}
            if result.x is not None:
                x0 = input_values(model, result.x)
                extra['verification'] = \
                    verify_adversarial(net, x0, spec).as_dict()
            records[name].append(fmt.result_record(result, config, **extra))
            log.debug('instance %d, %s: %s', i, name, result.status)
    print('preprocessing: {0:.2f}s'.format(prep))
    rows = [(name, fmt.aggregate(records[name], config.time_limit))
            for name in ('basic', 'improved')]
    print(fmt.format_table(rows))
    if options.report:
        fmt.write_report(records['basic'] + records['improved'],
                         options.report)
    yield EXIT_OK


def cmd_oracle (argv):
    op = _parser('oracle', '[options] NET --objective max:K,J|min:K,J',
                 'Find the optimum of a unit\'s value by enumerating '
                 'activation patterns (small networks only).')
    op.add_option('--objective', action='store', type='string')
    op.add_option('--bounds', action='store', type='string')
    op.add_option('--max-binaries', action='store', type='int')
    op.add_option('--write-lp', action='store', type='string')
    options, args = op.parse_args(argv)
    if len(args) != 1 or not options.objective:
        op.error('expected a network file and --objective')
    try:
        direction, unit = options.objective.split(':')
        obj_sense = {'max': sense.MAXIMIZE, 'min': sense.MINIMIZE}[direction]
    except (ValueError, KeyError):
        op.error('expected --objective max:K,J or min:K,J')
    unit = _unit(op, unit)
    yield options
    net = fmt.load_network(args[0])
    model = set_objective(encode_network(net, _bounds(net, options)),
                          {unit: 1.}, sense=obj_sense)
    if options.write_lp:
        _write_lp(model, options.write_lp)
    result = brute_force_optimum(model, net, options.max_binaries)
    print('status: {0}'.format(result.status))
    print('patterns: {0} ({1} feasible)'.format(result.n_patterns,
                                                 result.n_feasible))
    if result.x is None:
        yield EXIT_NO_SOLUTION
        return
    print('objective: {0:.9g}'.format(result.objective))
    print('input: {0}'.format(_fmt_values(input_values(model, result.x))))
    yield EXIT_OK


def cmd_random_net (argv):
    op = _parser('random-net', '[options] --shape N0,N1,... -o NET',
                 'Generate a dense network with random weights.')
    op.add_option('--shape', action='store', type='string')
    op.add_option('-s', '--seed', action='store', type='int')
    op.add_option('--box', action='store', type='string',
                  help='input box as LOWER,UPPER; defaults to 0,1')
    op.add_option('-o', '--output', action='store', type='string')
    op.set_defaults(box='0,1')
    options, args = op.parse_args(argv)
    if args or not options.shape or not options.output:
        op.error('expected --shape and -o NET')
    try:
        shape = [int(n) for n in options.shape.split(',')]
        box = tuple(float(v) for v in options.box.split(','))
    except ValueError:
        op.error('invalid --shape or --box')
    if len(box) != 2:
        op.error('expected --box LOWER,UPPER')
    yield options
    net = random_network(shape, options.seed, box)
    fmt.save_network(net, options.output)
    yield EXIT_OK


#: ``{name: function}`` for every command.  A command is a generator: it parses
#: its arguments, yields the options, then does its work and yields the exit
#: code.
commands = {
    'forward': cmd_forward,
    'tighten': cmd_tighten,
    'featviz': cmd_featviz,
    'adversarial': cmd_adversarial,
    'bench': cmd_bench,
    'oracle': cmd_oracle,
    'random-net': cmd_random_net
}


def _usage ():
    return 'usage: dnnmip <command> [options] [args]\ncommands: {0}\n' \
           .format(', '.join(sorted(commands)))


def run (argv):
    """Run a command.

run(argv) -> exit_code

:arg argv: arguments, starting with the command name.

"""
    if not argv or argv[0] not in commands:
        if argv and argv[0] in ('-h', '--help'):
            sys.stdout.write(_usage())
            return EXIT_OK
        sys.stderr.write(_usage())
        if argv:
            sys.stderr.write('error: unknown command \'{0}\'\n'
                             .format(argv[0]))
        return EXIT_USAGE
    steps = commands[argv[0]](argv[1:])
    try:
        options = next(steps)
    except SystemExit as e:
        # optparse: --help or a usage error
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    engine.init(options.debug)
    try:
        if options.conf:
            changed = conf.load(options.conf)
            log.debug('loaded settings: %s', ', '.join(changed))
        if getattr(options, 'seed', None) is not None:
            conf.SEED = options.seed
        return next(steps)
    except _CommandError as e:
        sys.stderr.write('error: {0}\n'.format(e))
        return e.code
    except (SolveError, TighteningError) as e:
        sys.stderr.write('error: {0}\n'.format(e))
        return EXIT_NO_SOLUTION
    except (ValueError, IOError) as e:
        # includes fmt.FormatError
        sys.stderr.write('error: {0}\n'.format(e))
        return EXIT_USAGE
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE


def main (argv=None):
    """Console entry point."""
    if argv is None:
        argv = sys.argv[1:]
    code = run(argv)
    engine.quit()
    sys.exit(code)
