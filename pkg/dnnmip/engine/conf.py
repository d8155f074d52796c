from . import settings


class Conf (object):

    IDENT = 'dnnmip'
    DEBUG = False
    # reproducibility for every randomized operation
    SEED = 0

    # lp
    # residuals on bounds and rows
    FEAS_TOL = 1e-7
    # reduced costs
    OPT_TOL = 1e-9
    PIVOT_TOL = 1e-9
    # consecutive degenerate pivots before switching to Bland's rule
    DEGENERATE_PIVOTS = 50
    # iterations between basis reinversions
    REFACTOR_FREQ = 64
    # None: derived from the problem size
    LP_ITERATION_LIMIT = None

    # milp
    TIME_LIMIT = 300 # seconds
    REL_GAP = 1e-6
    INT_TOL = 1e-6
    NODE_LIMIT = None
    BRANCHING = 'most fractional'
    # guards the relative gap against a zero incumbent
    GAP_EPS = 1e-10


conf = settings.SettingsManager(Conf, filter_caps=True)
