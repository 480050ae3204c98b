"""Configuration and constants."""
import math
from pathlib import Path

PRESET_DIR = Path(__file__).resolve().parent / "presets"

# UNITS ----------------------------------------------------------------------
# Every frequency is a ratio to the mechanical frequency, times are in 1/omega_m.
MECH_FREQ = 1.0
SWAP_AREA = math.pi / 2

# CORE MODEL ----------------------------------------------------------------
DETUNING_TOLERANCE = 1e-6
DETUNING_LOCK_ITERATIONS = 200

# EVOLUTION -----------------------------------------------------------------
NOISE_QUAD_RTOL = 1e-10
NOISE_QUAD_LIMIT = 400
DEGENERATE_RABI = 1e-3  # below this |Omega| the closed-form noise integral cancels badly

# OPTIMIZER -----------------------------------------------------------------
FD_BASE_STEP = 1e-3
OPTIMIZER_TOLERANCE = 1e-8
OPTIMIZER_MAX_EVALUATIONS = 2000
OPTIMIZER_STARTS = 8
OPTIMIZER_SEED = 2024

# MONTE CARLO ---------------------------------------------------------------
MAX_RESAMPLES = 100
TABLE_LEVELS = (1.0, 2.0, 5.0)
TABLE_INSTANCES = 3000

# LINDBLAD ------------------------------------------------------------------
DEFAULT_CUTOFF = 8
MAX_CUTOFF = 12
CUTOFF_STEP = 2
LEAKAGE_THRESHOLD = 1e-6
LINDBLAD_RTOL = 1e-9
LINDBLAD_ATOL = 1e-11
LINDBLAD_SAMPLES = 301
NOISE_KNOTS = 50
NOISE_RANGE = (0.95, 1.05)
NOISE_PARAMETERS = ("coupling", "mech_freq", "detuning", "cavity_decay", "mech_decay")

# SEMICLASSICAL -------------------------------------------------------------
SMOOTH_WIDTH_FRACTION = 0.15
RISE_FRACTION = 0.2
FALL_FRACTION = 0.8
OVERLAP_LIMIT = 1e-3
CALIBRATION_BRACKET = (1e-6, 4.0)
CALIBRATION_XTOL = 1e-9
CLASSICAL_RTOL = 1e-10
CLASSICAL_ATOL = 1e-12
CLASSICAL_SAMPLES_PER_SEGMENT = 2000
FIXED_POINT_MIXING = 0.5
FIXED_POINT_ITERATIONS = 500

# OUTPUT --------------------------------------------------------------------
OUTPUT_DIR_ENV = "OPTOMECH_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "results"
CSV_FLOAT_FORMAT = "%.12g"


# DRIVING MODES -------------------------------------------------------------

class DrivingMode:
    CONSTANT = "constant"
    COMPOSITE = "composite"

    ALL = (CONSTANT, COMPOSITE)
#----------------------------------------------------------------------------
