import os

import pytest

from dnnmip import fmt
from dnnmip.engine import conf
from dnnmip.network import act, Layer, Network


def pytest_addoption (parser):
    parser.addoption('--runslow', action='store_true', default=False,
                     help='run slow tests')


def pytest_configure (config):
    config.addinivalue_line('markers', 'slow: takes more than a few seconds')


def pytest_collection_modifyitems (config, items):
    if config.getoption('--runslow'):
        return
    skip = pytest.mark.skip(reason='needs --runslow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip)


@pytest.fixture(autouse=True)
def settings ():
    yield conf
    conf.reset()


def net_path (name):
    return os.path.join(conf.NET_DIR, name + '.net')


@pytest.fixture
def tiny ():
    """2-2-1 net over [1, 3]^2 with output |x0 - x1|."""
    return fmt.load_network(net_path('tiny_2_2_1'))


@pytest.fixture
def cancel (tiny):
    """The tiny net over [0, 1]^2: interval bounds give 2 for the output, the
true maximum is 1."""
    return tiny.with_box([0., 0.], [1., 1.])


@pytest.fixture
def identity ():
    return fmt.load_network(net_path('identity_2_2_2'))


@pytest.fixture
def pooled ():
    return fmt.load_network(net_path('pool_4_4_2_2'))


def single_relu (w=1., b=0., box=(-1., 1.)):
    """One ReLU unit on one input, without an output layer."""
    return Network([Layer.dense([[w]], [b], act.RELU)], [box[0]], [box[1]])


def chain (w2, b2):
    """Layer 1 is a ReLU of x0 - x1 over [0, 1]^2; layer 2 a linear unit."""
    return Network([Layer.dense([[1., -1.]], [0.], act.RELU),
                    Layer.dense([[w2]], [b2], act.LINEAR)], [0., 0.], [1., 1.])
