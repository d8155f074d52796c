import numpy as np
import pytest

from dnnmip.engine.bnb import status, SolverConfig
from dnnmip.apps import (target_label, AdversarialSpec, build_featviz_model,
                         build_adversarial_model, verify_adversarial,
                         render_perturbation, solve_featviz,
                         solve_adversarial)
from dnnmip.bounds import derive_interval_bounds
from dnnmip.fmt import aggregate, result_record
from dnnmip.network import forward_batch, classify, random_network
from dnnmip.oracle import brute_force_optimum
from dnnmip.tighten import tighten_bounds

from conftest import single_relu


def test_target_label ():
    assert target_label(0, 10) == 5
    assert target_label(6, 10) == 1
    assert target_label(9, 10) == 4
    assert target_label(1, 2) == 0
    with pytest.raises(ValueError):
        target_label(10, 10)
    with pytest.raises(ValueError):
        target_label(0, 1)


def test_spec_checks (identity):
    for kwargs in ({'margin': .9}, {'pixel_cap': 0.}, {'target': 0},
                   {'target': 2}):
        with pytest.raises(ValueError):
            AdversarialSpec([.8, .2], 0, **kwargs).check(identity)
    with pytest.raises(ValueError):
        AdversarialSpec([1.5, .2], 0).check(identity)
    with pytest.raises(ValueError):
        AdversarialSpec([.5, .5, .5], 0).check(identity)
    spec = AdversarialSpec([.8, .2], 0)
    spec.check(identity)
    assert spec.margin == 1.2
    assert spec.as_dict(identity)['target'] == 1


def test_spec_defaults_from_settings (settings, identity):
    settings.MARGIN = 1.5
    settings.PIXEL_CAP = .3
    spec = AdversarialSpec([.8, .2], 0)
    assert (spec.margin, spec.pixel_cap) == (1.5, .3)


def test_featviz_single ():
    net = single_relu(box=(0., 1.))
    result, x0 = solve_featviz(net, derive_interval_bounds(net), (1, 0))
    assert result.status == status.OPTIMAL
    assert result.objective == pytest.approx(1.)
    assert x0 == pytest.approx([1.])


def test_featviz_stable_inactive ():
    net = single_relu(box=(-1., -.5))
    bounds = derive_interval_bounds(net)
    assert bounds.get(1, 0)[0] == 0
    result, x0 = solve_featviz(net, bounds, (1, 0))
    assert result.objective == pytest.approx(0.)
    assert result.nodes == 1


def test_featviz_tiny (tiny):
    bounds = derive_interval_bounds(tiny)
    model = build_featviz_model(tiny, bounds, (2, 0))
    assert model.extras['unit'] == (2, 0)
    expected = brute_force_optimum(model).objective
    result, x0 = solve_featviz(tiny, bounds, (2, 0))
    assert result.objective == pytest.approx(expected, abs=1e-6)
    assert abs(x0[0] - x0[1]) == pytest.approx(2.)


def test_featviz_bad_unit (tiny):
    bounds = derive_interval_bounds(tiny)
    for unit in ((0, 0), (3, 0), (1, 2)):
        with pytest.raises(ValueError):
            build_featviz_model(tiny, bounds, unit)


def test_featviz_beats_sampling (tiny, cancel, pooled):
    r = np.random.default_rng(30)
    config = SolverConfig(rel_gap=1e-9)
    strict = 0
    for net in (tiny, cancel, pooled):
        bounds = derive_interval_bounds(net)
        X = r.uniform(net.input_lower, net.input_upper, (1000, net.input_dim))
        outputs = forward_batch(net, X)[0]
        for k in range(1, net.n_layers + 1):
            for j in range(net.shape[k]):
                result, x0 = solve_featviz(net, bounds, (k, j), config)
                best = outputs[k][:, j].max()
                assert result.objective >= best - 1e-9
                if net is cancel and result.objective > best + 1e-6:
                    strict += 1
    assert strict >= 1


def test_adversarial_counts ():
    net = random_network([784, 8, 10], seed=3)
    ref = np.random.default_rng(3).uniform(0., 1., 784)
    label = classify(net, ref)[0]
    model = build_adversarial_model(net, derive_interval_bounds(net),
                                    AdversarialSpec(ref, label))
    names = model.lp.row_names
    assert sum(1 for n in names if n.startswith('margin[')) == 9
    assert sum(1 for n in names if n.startswith('dist')) == 1568
    assert model.counts()['roles']['d'] == 784
    assert model.extras['target'] == (label + 5) % 10


@pytest.mark.parametrize('kwargs,expected', [
    ({}, 19 / 30),
    ({'margin': 1.}, .6),
    ({'pixel_cap': .5}, .66),
    ({'max_changed': 1}, 19 / 30),
    ({'margin': 1., 'max_changed': 1}, .6)
])
def test_adversarial_identity (identity, kwargs, expected):
    spec = AdversarialSpec([.8, .2], 0, **kwargs)
    bounds = derive_interval_bounds(identity)
    result, x0 = solve_adversarial(identity, bounds, spec)
    assert result.status == status.OPTIMAL
    assert result.objective == pytest.approx(expected, abs=1e-6)
    model = build_adversarial_model(identity, bounds, spec)
    assert brute_force_optimum(model).objective == pytest.approx(expected,
                                                                 abs=1e-6)
    report = verify_adversarial(identity, x0, spec)
    assert report.passed
    assert report.target == 1
    if spec.margin > 1:
        assert report.label == 1
    assert report.l1 == pytest.approx(expected, abs=1e-6)
    if 'pixel_cap' in kwargs:
        assert report.cap_ok and report.linf <= .5 + 1e-9
    if 'max_changed' in kwargs:
        assert report.changed_ok and report.n_changed == 1


@pytest.mark.parametrize('kwargs', [{'pixel_cap': .2}, {'max_changed': 0}])
def test_adversarial_infeasible (identity, kwargs):
    spec = AdversarialSpec([.8, .2], 0, **kwargs)
    result, x0 = solve_adversarial(identity, derive_interval_bounds(identity),
                                   spec)
    assert result.status == status.INFEASIBLE
    assert x0 is None


def test_verify_reference_fails (identity):
    spec = AdversarialSpec([.8, .2], 0)
    report = verify_adversarial(identity, [.8, .2], spec)
    assert report.label == 0
    assert not report.margin_ok
    assert not report.passed
    assert report.l1 == 0 and report.n_changed == 0
    assert report.cap_ok is None and report.changed_ok is None


def test_verify_cap_violation (identity):
    spec = AdversarialSpec([.8, .2], 0, pixel_cap=.2)
    report = verify_adversarial(identity, [.55, .2], spec)
    assert report.cap_ok is False
    assert report.linf == pytest.approx(.25)
    assert report.l1 == pytest.approx(.25)
    assert not report.passed
    assert report.as_dict()['cap_ok'] is False


def test_render ():
    delta, image = render_perturbation([.3, .7], [.3, .7])
    assert list(delta) == [0., 0.]
    assert list(image) == [1., 1.]
    delta, image = render_perturbation([.5, .7, .1], [.3, .7, .1])
    assert delta == pytest.approx([.2, 0., 0.])
    assert image == pytest.approx([.8, 1., 1.])


def test_adversarial_ten_classes ():
    net = random_network([16, 8, 10], seed=14)
    bounds = derive_interval_bounds(net)
    r = np.random.default_rng(14)
    for i in range(3):
        ref = r.uniform(0., 1., 16)
        label = classify(net, ref)[0]
        for cap in (None, .2):
            spec = AdversarialSpec(ref, label, pixel_cap=cap)
            result, x0 = solve_adversarial(net, bounds, spec)
            assert result.status in (status.OPTIMAL, status.INFEASIBLE)
            if result.has_solution:
                report = verify_adversarial(net, x0, spec, tol=1e-6)
                assert report.passed
                assert report.target == (label + 5) % 10
                if cap is not None:
                    assert np.all(np.abs(x0 - ref) <= .2 + 1e-7)


@pytest.mark.slow
def test_improved_model_trend ():
    net = random_network([64, 8, 8, 8, 10], seed=0)
    basic = derive_interval_bounds(net)
    improved = tighten_bounds(net)
    config = SolverConfig(time_limit=300)
    r = np.random.default_rng(0)
    records = {'basic': [], 'improved': []}
    for i in range(20):
        ref = r.uniform(0., 1., 64)
        spec = AdversarialSpec(ref, classify(net, ref)[0])
        for name, table in (('basic', basic), ('improved', improved)):
            result, x0 = solve_adversarial(net, table, spec, config)
            records[name].append(result_record(result, config))
    b = aggregate(records['basic'], 300)
    i = aggregate(records['improved'], 300)
    assert i['nodes'] < b['nodes']
    assert i['time'] <= b['time']
    assert i['pct_solved'] >= b['pct_solved']
