from .engine import conf as engine_conf
from .conf import Conf

engine_conf.add(Conf)
