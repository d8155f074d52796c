import json

import pytest

from dnnmip import cli, engine, fmt

from conftest import net_path

TINY = net_path('tiny_2_2_1')
IDENTITY = net_path('identity_2_2_2')


@pytest.fixture(autouse=True)
def logging_off ():
    yield
    engine.quit()


def write (path, text):
    path.write_text(text)
    return str(path)


def test_forward (tmp_path, capsys):
    x = write(tmp_path / 'x.txt', '3 1\n')
    assert cli.run(['forward', TINY, x]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == 'layer 0: 3 1'
    assert out[1] == 'layer 1: 2 0'
    assert out[-1] == 'output: 2'


def test_forward_label (tmp_path, capsys):
    x = write(tmp_path / 'x.txt', '.3 .6\n')
    assert cli.run(['forward', IDENTITY, x]) == 0
    assert capsys.readouterr().out.splitlines()[-1] == 'label: 1'


def test_usage (capsys):
    assert cli.run([]) == 2
    assert cli.run(['solve']) == 2
    assert 'unknown command' in capsys.readouterr().err
    assert cli.run(['--help']) == 0
    assert 'commands:' in capsys.readouterr().out
    assert cli.run(['forward', TINY]) == 2
    assert cli.run(['featviz', TINY, '--unit', 'x', '-o', 'a.pgm']) == 2
    assert cli.run(['oracle', TINY, '--objective', 'top:2,0']) == 2
    assert cli.run(['forward', '--help']) == 0


def test_bad_files (tmp_path, capsys):
    x = write(tmp_path / 'x.txt', '3 1\n')
    assert cli.run(['forward', str(tmp_path / 'missing.net'), x]) == 2
    bad = write(tmp_path / 'bad.net', 'dnnmip-net 1\ninput two\n')
    assert cli.run(['forward', bad, x]) == 2
    assert 'line 2' in capsys.readouterr().err
    # wrong input length
    x = write(tmp_path / 'x3.txt', '3 1 2\n')
    assert cli.run(['forward', TINY, x]) == 2


def test_oracle (capsys):
    assert cli.run(['oracle', TINY, '--objective', 'max:2,0']) == 0
    out = capsys.readouterr().out
    assert 'objective: 2\n' in out
    assert 'patterns: 4 (' in out
    assert cli.run(['oracle', TINY, '--objective', 'min:2,0']) == 0
    assert cli.run(['oracle', TINY, '--objective', 'max:3,0']) == 2


def test_random_net (tmp_path):
    path = str(tmp_path / 'r.net')
    assert cli.run(['random-net', '--shape', '3,4,2', '--seed', '5',
                    '-o', path]) == 0
    net = fmt.load_network(path)
    assert net.shape == [3, 4, 2]
    other = str(tmp_path / 'r2.net')
    cli.run(['random-net', '--shape', '3,4,2', '--seed', '5', '-o', other])
    assert fmt.load_network(other).weights_digest() == net.weights_digest()
    assert cli.run(['random-net', '--shape', '3,x', '-o', path]) == 2
    assert cli.run(['random-net', '--shape', '3,4', '--box', '1', '-o',
                    path]) == 2


def cancel_file (tmp_path, tiny):
    path = str(tmp_path / 'cancel.net')
    fmt.save_network(tiny.with_box([0., 0.], [1., 1.]), path)
    return path


def test_tighten (tmp_path, capsys, tiny):
    net = cancel_file(tmp_path, tiny)
    bounds = str(tmp_path / 'cancel.bounds')
    assert cli.run(['tighten', net, '-o', bounds]) == 0
    out = capsys.readouterr().out
    assert out.startswith('tightened 1 bounds in ')
    assert 'lp-tightened: 3' in out
    table = fmt.load_bounds(bounds, fmt.load_network(net))
    assert table.get(2, 0)[0] == pytest.approx(1., abs=1e-5)
    assert cli.run(['tighten', net]) == 2


def test_featviz (tmp_path, capsys, tiny):
    net = cancel_file(tmp_path, tiny)
    image = str(tmp_path / 'out.pgm')
    assert cli.run(['featviz', net, '--unit', '2,0', '-o', image]) == 0
    out = capsys.readouterr().out
    assert 'status: optimal' in out
    assert 'objective: 1\n' in out
    values, w, h = fmt.read_image(image)
    assert (w, h) == (2, 1)
    assert abs(values[0] - values[1]) == pytest.approx(1.)
    record = fmt.load_report(str(tmp_path / 'out.json'))[0]
    assert record['unit'] == [2, 0]
    assert record['objective'] == pytest.approx(1.)


def test_featviz_with_bounds (tmp_path, capsys, tiny):
    net = cancel_file(tmp_path, tiny)
    bounds = str(tmp_path / 'cancel.bounds')
    cli.run(['tighten', net, '-o', bounds])
    lp_file = str(tmp_path / 'model.lp')
    assert cli.run(['featviz', net, '--unit', '2,0', '-o',
                    str(tmp_path / 'out.pgm'), '--bounds', bounds,
                    '--write-lp', lp_file]) == 0
    assert 'objective: 1\n' in capsys.readouterr().out
    with open(lp_file) as f:
        assert 'z[1,0]' in f.read()
    assert cli.run(['featviz', IDENTITY, '--unit', '2,0', '-o',
                    str(tmp_path / 'x.pgm'), '--bounds', bounds]) == 2


def test_featviz_tighten (tmp_path, capsys, tiny):
    net = cancel_file(tmp_path, tiny)
    files = []
    for extra in ([], ['--tighten']):
        files.append(str(tmp_path / 'model{0}.lp'.format(len(extra))))
        assert cli.run(['featviz', net, '--unit', '2,0', '-o',
                        str(tmp_path / 'out.pgm'), '--write-lp', files[-1]] +
                       extra) == 0
        assert 'objective: 1\n' in capsys.readouterr().out
    # the output bound drops from 2 to 1
    texts = []
    for path in files:
        with open(path) as f:
            texts.append(f.read())
    assert texts[0] != texts[1]


def test_adversarial (tmp_path, capsys):
    x = write(tmp_path / 'ref.txt', '.8 .2\n')
    out_dir = tmp_path / 'adv'
    assert cli.run(['adversarial', IDENTITY, '--input', x, '-o',
                    str(out_dir)]) == 0
    out = capsys.readouterr().out
    assert 'label: 1 (target 1)' in out
    assert 'verified: yes' in out
    for name in ('adversarial.pgm', 'perturbation.pgm', 'report.json'):
        assert (out_dir / name).exists()
    record = fmt.load_report(str(out_dir / 'report.json'))[0]
    assert record['objective'] == pytest.approx(19 / 30, abs=1e-6)
    assert record['spec']['target'] == 1
    assert record['verification']['passed']


def test_adversarial_infeasible (tmp_path, capsys):
    x = write(tmp_path / 'ref.txt', '.8 .2\n')
    out_dir = tmp_path / 'adv'
    assert cli.run(['adversarial', IDENTITY, '--input', x, '--cap', '0.2',
                    '-o', str(out_dir)]) == 1
    assert 'status: infeasible' in capsys.readouterr().out
    assert (out_dir / 'report.json').exists()
    assert not (out_dir / 'adversarial.pgm').exists()


def test_adversarial_bad_spec (tmp_path):
    x = write(tmp_path / 'ref.txt', '.8 .2\n')
    assert cli.run(['adversarial', IDENTITY, '--input', x, '--margin', '.5',
                    '-o', str(tmp_path / 'adv')]) == 2
    assert cli.run(['adversarial', TINY, '--input', x, '-o',
                    str(tmp_path / 'adv')]) == 2


def test_conf_file (tmp_path, capsys):
    settings = write(tmp_path / 'settings.json', json.dumps({'MARGIN': 1.}))
    x = write(tmp_path / 'ref.txt', '.8 .2\n')
    assert cli.run(['adversarial', IDENTITY, '--input', x, '-c', settings,
                    '-o', str(tmp_path / 'adv')]) == 0
    assert 'objective: 0.6\n' in capsys.readouterr().out
    bad = write(tmp_path / 'bad.json', '[1')
    assert cli.run(['adversarial', IDENTITY, '--input', x, '-c', bad,
                    '-o', str(tmp_path / 'adv')]) == 2


def test_bench (tmp_path, capsys):
    report = str(tmp_path / 'bench.json')
    assert cli.run(['bench', IDENTITY, '-n', '3', '--seed', '2', '-r',
                    report]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith('preprocessing: ')
    assert out[1].split()[0] == 'model'
    assert [l.split()[0] for l in out[3:]] == ['basic', 'improved']
    records = fmt.load_report(report)
    assert len(records) == 6
    assert all(r['status'] == 'optimal' for r in records)
    assert cli.run(['bench', IDENTITY, '-n', '0']) == 2
