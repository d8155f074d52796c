import os


class Conf (object):
    # paths
    DATA_DIR = os.path.join(os.path.dirname(os.path.dirname(
        os.path.abspath(__file__))), 'data')
    NET_DIR = os.path.join(DATA_DIR, 'nets')

    # file formats
    NET_FORMAT = 'dnnmip-net'
    NET_FORMAT_VERSION = 1
    BOUNDS_FORMAT = 'dnnmip-bounds'
    BOUNDS_FORMAT_VERSION = 1
    REPORT_FORMAT_VERSION = 1

    # adversarial examples
    # target activation must be this factor larger than any other
    MARGIN = 1.2
    # largest change of any one input; None for no limit
    PIXEL_CAP = None
    VERIFY_TOL = 1e-6

    # bound tightening
    TIGHTEN_TIME_LIMIT = 300 # seconds, per bound
    TIGHTEN_USE_MILP = True
    TIGHTEN_WORKERS = 1

    # oracle
    ORACLE_MAX_BINARIES = 20
    BOUND_CHECK_TOL = 1e-7
    # forward-completed points are checked against the model with this
    COMPLETION_TOL = 1e-7
