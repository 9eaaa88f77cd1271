"""Configuration and constants for the tempered predictive toolkit."""

from typing import List

VERSION = "1.0.0"

# Temperature grid: log-spaced points on [TAU_MIN, TAU_MAX]
TAU_MIN = 0.01
TAU_MAX = 100.0
GRID_POINTS = 61

# Quadrature engine
QUAD_ABS_TOLERANCE = 1e-10
QUAD_ORDER = 15
QUAD_INITIAL_PANELS = 16
QUAD_MAX_DEPTH = 64
# Panels also converge once coarse and fine agree to this relative precision
QUAD_REL_FLOOR = 1e-14
# Integration range: each kernel's centre +/- this many effective sds
QUAD_RANGE_SD = 12.0
# Initial panel edges added at each kernel's centre +/- these many sds
QUAD_BREAK_SDS = (-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0)
# Outer Monte Carlo averages: per-draw tolerance is this share of 1/sqrt(S)
MC_QUAD_SHARE = 1e-3
# Pairs integrated together in one adaptive sweep
QUAD_BATCH_SIZE = 2048

# Mixture weights must sum to one within this tolerance
SIMPLEX_TOLERANCE = 1e-12
SYMMETRY_TOLERANCE = 1e-12

# Linear algebra: systems whose condition number exceeds 1/sqrt(machine eps)
# are rejected as ill-conditioned
CONDITION_LIMIT = 2.220446049250313e-16 ** -0.5

# Experiment defaults
DEFAULT_REPLICATES = 200
DEFAULT_MC_SAMPLES = 10000
DEFAULT_ROOT_SEED = 0
QUANTILE_LOW = 0.05
QUANTILE_HIGH = 0.95

# Regression experiment (misspecified, outlier-contaminated)
REGRESSION_BETA = [0.1, 0.1, 0.1, 0.1, 0.0]
REGRESSION_OUTLIER_RATE = 0.5
REGRESSION_OUTLIER_SD = 0.1

# Metrics understood by the harness
METRICS: List[str] = ["tvd", "kl", "hellinger", "elpd"]

# Output files
SWEEP_FILE = "sweep.csv"
REPLICATES_FILE = "replicates.csv"
LIMITS_FILE = "limits.csv"
SELECTION_FILE = "selection.csv"
RISK_FILE = "risk.csv"
MANIFEST_FILE = "manifest.json"
OUTPUT_DIR = "output"

# CSV headers (stable across versions)
SWEEP_HEADER: List[str] = [
    "n", "tau", "mean", "q05", "q95", "scaled", "degenerate_fraction",
]
REPLICATES_HEADER: List[str] = ["n", "replicate", "tau", "value"]
LIMITS_HEADER: List[str] = ["n", "replicate", "limit", "value"]
SELECTION_HEADER: List[str] = [
    "n", "replicate", "tau_star", "elpd_at_star", "lower_flag", "upper_flag",
]
RISK_HEADER: List[str] = ["n", "tau", "risk"]

# Exit codes
EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_CONFIG = 2
EXIT_INCOMPATIBLE = 3
