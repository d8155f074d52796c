import json
import logging

import numpy as np
import pytest

from dnnmip.engine import conf
from dnnmip.engine.settings import SettingsManager


class Defaults (object):
    SPEED = 3
    NAME = 'thing'
    lower = 'skipped'


def manager ():
    return SettingsManager(Defaults, filter_caps=True)


def test_attributes ():
    s = manager()
    assert s.SPEED == 3
    assert 'NAME' in s and 'lower' not in s
    s.SPEED = 5
    assert s.SPEED == 5
    del s.SPEED
    assert s.SPEED == 3
    with pytest.raises(AttributeError):
        s.MISSING


def test_reset ():
    s = manager()
    s.SPEED = 5
    s.NAME = 'other'
    s.reset()
    assert (s.SPEED, s.NAME) == (3, 'thing')


def test_add ():
    s = manager()
    s.add({'EXTRA': 1})
    assert s.EXTRA == 1
    with pytest.raises(ValueError):
        s.add({'_hidden': 1})


def test_load (tmp_path, caplog):
    s = manager()
    path = tmp_path / 'settings.json'
    path.write_text(json.dumps({'SPEED': 7, 'UNKNOWN': 1}))
    with caplog.at_level(logging.WARNING):
        changed = s.load(str(path))
    assert changed == ['SPEED']
    assert s.SPEED == 7
    assert 'UNKNOWN' in caplog.text
    assert 'UNKNOWN' not in s


def test_load_errors (tmp_path):
    s = manager()
    path = tmp_path / 'settings.json'
    path.write_text('{"SPEED": ')
    with pytest.raises(ValueError):
        s.load(str(path))
    path.write_text('[1, 2]')
    with pytest.raises(ValueError):
        s.load(str(path))
    with pytest.raises(IOError):
        s.load(str(tmp_path / 'missing.json'))


def test_dump (tmp_path):
    s = manager()
    with pytest.raises(ValueError):
        s.dump()
    path = str(tmp_path / 'sub' / 'settings.json')
    s.SPEED = 9
    s.dump(path, ['SPEED'])
    with open(path) as f:
        assert json.load(f) == {'SPEED': 9}
    other = manager()
    assert other.load(path) == ['SPEED']
    assert other.SPEED == 9


def test_package_settings ():
    # application settings are merged into the engine's
    assert conf.MARGIN == 1.2
    assert conf.REL_GAP == 1e-6
    assert conf.ORACLE_MAX_BINARIES == 20
    conf.MARGIN = 2.
    del conf.MARGIN
    assert conf.MARGIN == 1.2


def test_dump_numpy_values (tmp_path):
    s = manager()
    s.SPEED = np.int64(4)
    s.NAME = np.array([.5, 1.])
    path = str(tmp_path / 'settings.json')
    s.dump(path, ['SPEED', 'NAME'])
    with open(path) as f:
        assert json.load(f) == {'SPEED': 4, 'NAME': [.5, 1.]}
