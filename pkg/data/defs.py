import math
import os

# ---------------------------------------------
# CONSTANTS & GLOBALS
# ---------------------------------------------

# Gas constants (natural gas = 1, hydrogen = 2)
DEFAULT_SIGMA1 = 377.0              # m/s
DEFAULT_SIGMA2_RATIO = 2.8          # sigma2 / sigma1
DEFAULT_R1 = 44.2                   # MJ/kg
DEFAULT_R2 = 141.8                  # MJ/kg

PA_PER_MPA = 1.0e6
M_PER_KM = 1000.0
S_PER_HR = 3600.0
GJ_PER_MJ = 1.0e-3

# Network refinement and diagnostics
DEFAULT_REFINEMENT_KM = 1.0
DEFAULT_EPSILON_THRESHOLD = 0.05    # relative density jump across a refined edge
AUXILIARY_NODE_SEPARATOR = "#"
SUB_EDGE_SEPARATOR = ":"

# Time integration
DEFAULT_SAMPLES = 10000
DEFAULT_METHOD = "BDF"
DEFAULT_RTOL = 1.0e-6
DEFAULT_ATOL = 1.0e-8
IMPLICIT_METHODS = ("BDF", "Radau", "LSODA")
EXPLICIT_METHODS = ("RK4",)
HORIZON_SLACK_HR = 1.0e-9

# Steady state
STEADY_TOLERANCE = 1.0e-9           # kg/m^3/s on the partial density RHS
STEADY_RELAXATION_HR = 200.0

# Spectral solver
DEFAULT_SPECTRAL_ORDER = 60

# Analysis
DEFAULT_TOL_CROSS_FACTOR = 1.0e-6
DEFAULT_PERIODICITY_THRESHOLD = 0.3
DEFAULT_TAIL_START = 0.6
DEFAULT_CHAOS_INITIAL_INTERVAL = (0.08, 0.15)
DEFAULT_CHAOS_FINAL_INTERVAL = (0.5, 0.8)
DEFAULT_MI_FLUXES = (120.0, 140.0, 160.0)          # kg/m^2 s
DEFAULT_PI_FLUX = 75.0
DEFAULT_CI_FLUXES = (75.0, 75.1)
DEFAULT_MI_GRID = {"omega": (0.0, 2.0, 21), "kappa": (0.0, 1.0, 41)}
DEFAULT_PI_GRID = {"omega": (0.0, 2.0, 21), "kappa": (0.5, 1.0, 25)}

QUANTITIES = ("p_mpa", "rho", "rho1", "rho2", "eta2", "nu2", "energy_gj_s")
MI_QUANTITIES = ("rho2", "rho1", "rho", "energy_gj_s", "p_mpa")

# Sweep cache
CACHE_DIR_ENV = "GASMIX_CACHE_DIR"
DEFAULT_CACHE_DIR = "data"
CACHE_FILE_NAME = "sweep_cache.db"
DEFAULT_CACHE_PATH = os.path.join(DEFAULT_CACHE_DIR, CACHE_FILE_NAME)  # Will be created if doesn't exist

SCENARIO_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "scenarios")
SLOW_TESTS_ENV = "GASMIX_RUN_SLOW"


def resolve_cache_path() -> str:
    """Cache file location, honouring the cache directory environment override."""
    directory = os.environ.get(CACHE_DIR_ENV)
    if directory:
        return os.path.join(directory, CACHE_FILE_NAME)
    return DEFAULT_CACHE_PATH


def pipe_area(diameter_m: float) -> float:
    """Cross-sectional area pi D^2 / 4 in m^2."""
    return 0.25 * math.pi * diameter_m ** 2
