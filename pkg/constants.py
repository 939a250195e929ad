"""
Constants for the Euclidean distance degree toolkit
Centralized configuration for all tolerances, seeds and default values
"""

# Numeric solver tolerances
SOLVER_TOLERANCES = {
    'RESIDUAL': 1e-10,        # max residual of a converged endpoint
    'DEDUP_RADIUS': 1e-8,     # relative clustering radius
    'TORUS': 1e-8,            # |coordinate| above this counts as nonzero
    'RANK': 1e-8,             # relative singular value threshold
    'MIN_STEP': 1e-14,        # path declared failed below this step
    'MAX_STEP': 0.05,
    'DIVERGENCE_NORM': 1e8,   # path declared diverged above this norm
    'AMBIGUITY_FACTOR': 1e3,  # rank ratios in [tol, tol*factor] are flagged
}

# Path tracker iteration limits
TRACKER_LIMITS = {
    'CORRECTOR_ITERATIONS': 3,
    'REFINE_ITERATIONS': 12,
    'MAX_STEPS': 20000,
    'MAX_FAILED_FRACTION': 0.0,
    'INITIAL_STEP': 0.01,
    'CORRECTOR_TOLERANCE': 1e-9,   # relative Newton update at fixed t
    'EXPANSION_STREAK': 3,         # accepted steps before the step doubles
    'END_GAP': 1e-9,               # 1 - t below this counts as reaching t = 1
    'ENDGAME_CHECKPOINT': 1e-3,    # 1 - t where the homogenizing coordinate is sampled
    'INFINITY_RATIO': 0.5,         # shrink of that coordinate meaning "heading to infinity"
    'AT_INFINITY': 1e-12,
}

# Facial probe limits
PROBE_LIMITS = {
    'STARTS': 12,
    'NEWTON_ITERATIONS': 60,
    'WITNESS_RESIDUAL': 1e-10,
}

# Random lifting for mixed cells
LIFTING = {
    'INITIAL_RANGE': 1 << 12,
    'RANGE_GROWTH': 1 << 6,   # range multiplier per retry
    'RETRY_BUDGET': 5,
}

# Data point sampling (real rationals, zero coordinates rejected)
U_SAMPLING = {
    'BOUND': 10,
    'MAX_DENOMINATOR': 64,
}

# Generic coefficient sampling for '?' coefficients
COEFFICIENT_SAMPLING = {
    'NUMERATOR_BOUND': 20,
    'MAX_DENOMINATOR': 16,
}

DEFAULT_SEED = 1
FACE_PROFILE_SAMPLES = 200
FACE_PROBE_LIMIT = 64  # facial probes per verification report

# Mixed volume normalization note, printed in every report
MV_NORMALIZATION = "MV(P,...,P) = d! * vol(P) (Bernstein normalization)"

# Algorithm tags
ALGORITHM_IE = 'ie'
ALGORITHM_CELLS = 'cells'
ALGORITHMS = (ALGORITHM_IE, ALGORITHM_CELLS)

# Face function case tags, one per sign pattern of (w_i, e_i)
CASE_TAGS = {
    'C3': '-u_i',
    'C4': 'x_i',
    'C5': 'sum_{k in S_i} lambda_k [d_i f_k]_w',
    'C6': 'x_i - u_i',
    'C7': '-u_i + sum_{k in S_i} lambda_k [d_i f_k]_w',
    'C8': 'x_i + sum_{k in S_i} lambda_k [d_i f_k]_w',
    'C9': 'x_i - u_i + sum_{k in S_i} lambda_k [d_i f_k]_w',
}

# Verification verdicts
VERDICT_EQUAL = 'EQUAL'
VERDICT_BELOW = 'COUNT_BELOW_BOUND'
VERDICT_UNRELIABLE = 'UNRELIABLE'

# CLI exit codes
EXIT_CODES = {
    VERDICT_EQUAL: 0,
    'ERROR': 1,
    VERDICT_BELOW: 2,
    VERDICT_UNRELIABLE: 3,
}

# File constants
DEFAULT_CONFIG_FILE = "eddeg.json"
DEFAULT_LOG_DIR = "logs"
DEFAULT_FIXTURE_DIR = "fixtures"
PROBLEM_FILE_SUFFIX = ".ed"

# Environment variables
ENV_THREADS = "EDDEG_THREADS"
ENV_LOG_DIR = "EDDEG_LOG_DIR"
ENV_LOG_LEVEL = "EDDEG_LOG_LEVEL"

# Memo cache
CACHE_MAX_ENTRIES = 4096

# Default settings structure (eddeg.json overrides any subset)
DEFAULT_SETTINGS = {
    "threads": 0,
    "seed": DEFAULT_SEED,
    "algorithm": ALGORITHM_IE,
    "tolerances": {
        "residual": SOLVER_TOLERANCES['RESIDUAL'],
        "dedup_radius": SOLVER_TOLERANCES['DEDUP_RADIUS'],
        "torus": SOLVER_TOLERANCES['TORUS'],
        "rank": SOLVER_TOLERANCES['RANK'],
        "min_step": SOLVER_TOLERANCES['MIN_STEP'],
        "max_step": SOLVER_TOLERANCES['MAX_STEP'],
        "divergence_norm": SOLVER_TOLERANCES['DIVERGENCE_NORM'],
    },
    "max_failed_fraction": TRACKER_LIMITS['MAX_FAILED_FRACTION'],
    "face_diagnostics": True,
}
