import numpy as np
import pytest

from dnnmip import fmt
from dnnmip.fmt import FormatError
from dnnmip.fmt.netfile import parse_s
from dnnmip.fmt.img import read_vector
from dnnmip.engine.bnb import status
from dnnmip.bounds import prov, derive_interval_bounds
from dnnmip.network import act, kind, forward_eval, random_network

TINY = '''dnnmip-net 1
input 2
box 1 3
dense 2 2 relu
weights 1 -1 -1 1
bias 0 0
dense 2 1 linear
weights 1 1
bias 0
'''


def test_load_tiny (tiny):
    assert tiny.shape == [2, 2, 1]
    assert list(tiny.input_lower) == [1., 1.]
    assert list(tiny.input_upper) == [3., 3.]
    assert tiny.layers[0].activation == act.RELU
    assert tiny.layers[1].activation == act.LINEAR
    assert forward_eval(tiny, [3., 1.]).output[0] == 2.


def test_parse_matches_file (tiny):
    net = parse_s(TINY)
    assert net.weights_digest() == tiny.weights_digest()


def test_pool_file (pooled):
    assert pooled.layers[1].kind == kind.MAXPOOL
    assert pooled.layers[1].groups == ((0, 1), (2, 3))


@pytest.mark.parametrize('text,message', [
    ('', 'empty'),
    ('dnnmip-net 2\n', 'line 1: unsupported format version'),
    ('dnnmip-net 1\nlower 0 0\n', 'line 2:'),
    ('dnnmip-net 1\ninput 2\nbox 0 1\nconv 2 2\n', 'line 4: unknown'),
    ('dnnmip-net 1\ninput 2\nbox 0 1\ndense 2 2 tanh\n',
     'line 4: unknown activation'),
    ('dnnmip-net 1\ninput 2\nbox 0 1\ndense 2 1 linear\nweights 1 x\n',
     'line 5: expected numbers'),
    ('dnnmip-net 1\ninput 2\nbox 0 1\ndense 2 1 linear\ngroup 0 1\n',
     'line 5: unexpected \'group\''),
    ('dnnmip-net 1\ninput 2\ndense 2 1 linear\nweights 1 1\nbias 0\n',
     'missing input box')
])
def test_parse_errors (text, message):
    with pytest.raises(FormatError) as e:
        parse_s(text)
    assert message in str(e.value)


def test_weight_count ():
    text = TINY.replace('weights 1 -1 -1 1', 'weights 1 -1 -1')
    with pytest.raises(FormatError) as e:
        parse_s(text)
    assert 'layer 1 (line 4)' in str(e.value)
    assert 'expected 4' in str(e.value)


def test_invalid_network ():
    text = TINY.replace('dense 2 1 linear', 'dense 3 1 linear').replace(
        'weights 1 1', 'weights 1 1 1')
    with pytest.raises(FormatError) as e:
        parse_s(text)
    assert 'invalid network' in str(e.value)


def test_save_network (tmp_path, pooled):
    for net in (pooled, random_network([5, 4, 3], seed=2)):
        path = str(tmp_path / 'net.net')
        fmt.save_network(net, path)
        loaded = fmt.load_network(path)
        assert loaded.fingerprint() == net.fingerprint()
        assert loaded.weights_digest() == net.weights_digest()


def test_bounds_file (tmp_path, tiny):
    table = derive_interval_bounds(tiny)
    table.set(1, 1, 1.5, 2., prov.TIME_LIMIT_ESTIMATE)
    path = str(tmp_path / 'tiny.bounds')
    fmt.save_bounds(table, path)
    loaded = fmt.load_bounds(path, tiny)
    assert loaded == table
    assert loaded.provenance[0] == [prov.INTERVAL, prov.TIME_LIMIT_ESTIMATE]
    assert loaded.get(1, 1) == (1.5, 2.)


def test_bounds_wrong_network (tmp_path, tiny, identity):
    path = str(tmp_path / 'tiny.bounds')
    fmt.save_bounds(derive_interval_bounds(tiny), path)
    with pytest.raises(FormatError) as e:
        fmt.load_bounds(path, identity)
    assert 'different network' in str(e.value)


def test_bounds_other_weights (tmp_path, tiny, cancel):
    path = str(tmp_path / 'tiny.bounds')
    fmt.save_bounds(derive_interval_bounds(tiny), path)
    # same shape, different box
    with pytest.raises(FormatError) as e:
        fmt.load_bounds(path, cancel)
    assert 'different weights' in str(e.value)
    assert fmt.load_bounds(path, tiny).get(1, 0) == (2., 2.)


def test_bounds_bad_file (tmp_path):
    path = tmp_path / 'bad.bounds'
    path.write_text('{"format": "dnnmip-bounds"')
    with pytest.raises(FormatError):
        fmt.load_bounds(str(path))
    path.write_text('{"format": "something else"}')
    with pytest.raises(FormatError):
        fmt.load_bounds(str(path))
    path.write_text('{"format": "dnnmip-bounds", "version": 1}')
    with pytest.raises(FormatError):
        fmt.load_bounds(str(path))


def test_write_image (tmp_path):
    path = tmp_path / 'ones.pgm'
    fmt.write_image([1.] * 4, 2, 2, str(path))
    assert path.read_text() == 'P2\n# dnnmip\n2 2\n255\n255 255\n255 255\n'
    fmt.write_image([.5, 0., 1.5], 3, 1, str(path))
    assert path.read_text().splitlines()[-1] == '128 0 255'
    with pytest.raises(ValueError):
        fmt.write_image([1.] * 4, 3, 1, str(path))


def test_image_round_trip (tmp_path):
    values = np.random.default_rng(7).uniform(0., 1., 12)
    path = str(tmp_path / 'x.pgm')
    fmt.write_image(values, 4, 3, path)
    loaded, w, h = fmt.read_image(path)
    assert (w, h) == (4, 3)
    assert np.all(np.abs(loaded - values) <= 1 / 255)


def test_png_round_trip (tmp_path):
    pytest.importorskip('pygame')
    values = np.random.default_rng(8).uniform(0., 1., 6)
    path = str(tmp_path / 'x.png')
    fmt.write_image(values, 3, 2, path)
    loaded, w, h = fmt.read_image(path)
    assert (w, h) == (3, 2)
    assert np.all(np.abs(loaded - values) <= 1 / 255)


def test_geometry ():
    assert fmt.default_geometry(784) == (28, 28)
    assert fmt.default_geometry(10) == (10, 1)


def test_read_input (tmp_path):
    path = tmp_path / 'x.txt'
    path.write_text('3 1 # comment\n')
    assert list(fmt.read_input(str(path))) == [3., 1.]
    path.write_text('.5, .25\n1\n')
    assert list(read_vector(str(path))) == [.5, .25, 1.]
    path.write_text('1 two\n')
    with pytest.raises(FormatError):
        fmt.read_input(str(path))
    path = str(tmp_path / 'x.pgm')
    fmt.write_image([0., 1.], 2, 1, path)
    assert list(fmt.read_input(path)) == [0., 1.]


class _Result (object):
    def __init__ (self, st, objective, pct_gap, nodes, time):
        self.status = st
        self.objective = objective
        self.dual_bound = objective
        self.pct_gap = pct_gap
        self.nodes = nodes
        self.time = time
        self.log = []


def test_report (tmp_path):
    record = fmt.result_record(_Result(status.OPTIMAL, 1.5, 0., 3, .2),
                               unit=[2, 0])
    path = str(tmp_path / 'report.json')
    fmt.write_report(record, path)
    loaded = fmt.load_report(path)
    assert len(loaded) == 1
    assert loaded[0]['pct_gap'] == 0
    assert loaded[0]['unit'] == [2, 0]
    assert loaded[0]['status'] == status.OPTIMAL


def test_report_infinite (tmp_path):
    record = fmt.result_record(_Result(status.OPTIMAL, 1., 0., 1, .1))
    record['dual_bound'] = np.inf
    path = str(tmp_path / 'report.json')
    fmt.write_report([record], path)
    assert fmt.load_report(path)[0]['dual_bound'] is None


def test_report_not_a_list (tmp_path):
    path = tmp_path / 'report.json'
    path.write_text('{}')
    with pytest.raises(FormatError):
        fmt.load_report(str(path))


def test_aggregate ():
    records = [
        fmt.result_record(_Result(status.OPTIMAL, 1., 0., 10, 2.)),
        fmt.result_record(_Result(status.FEASIBLE_TIME_LIMIT, 1., 10., 30,
                                  60.3)),
        fmt.result_record(_Result(status.UNKNOWN_TIME_LIMIT, None, None, 20,
                                  60.1)),
        fmt.result_record(_Result(status.INFEASIBLE, None, None, 4, 1.))
    ]
    summary = fmt.aggregate(records, time_limit=60)
    assert summary['n'] == 4
    assert summary['pct_solved'] == 50.
    assert summary['pct_gap'] == pytest.approx(110 / 4)
    assert summary['nodes'] == 16.
    assert summary['time'] == pytest.approx(123 / 4)
    assert fmt.aggregate([])['n'] == 0


def test_format_table ():
    s = {'pct_solved': 50., 'pct_gap': 1.25, 'nodes': 16., 'time': 2.5}
    lines = fmt.format_table([('basic', s), ('improved', s)]).splitlines()
    assert len(lines) == 4
    assert lines[0].split() == ['model', '%solved', '%gap', 'nodes',
                                'time(s)']
    assert lines[2].split() == ['basic', '50.0', '1.25', '16.0', '2.50']
