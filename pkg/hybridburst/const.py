"""Constants for hybridburst."""

from logging import Logger, getLogger

LOGGER: Logger = getLogger(__package__)

# Package constants
NAME = "hybridburst"
VERSION = "0.1.1"

# Exit codes
EXIT_OK = 0
EXIT_INVALID_CONFIG = 2
EXIT_UNSUPPORTED_CASE = 3
EXIT_RUNTIME_FAILURE = 4

# Random stream identifiers (first element of every SeedSequence spawn key)
STREAM_SESSIONS = 0
STREAM_ONOFF = 1
STREAM_REPLICATE = 2
STREAM_FGN = 3
STREAM_ENSEMBLE = 4

# Session layer
DEFAULT_MAX_LIVE_SESSIONS = 5_000_000
DEFAULT_WARMUP_FACTOR = 50  # discard = factor * mean lifetime when unspecified

# On-off layer
DEFAULT_GRID_DIVISOR = 8  # dt = min(x_m) / divisor
MIN_GRID_DIVISOR = 4  # dt > min(x_m) / 4 is rejected
CYCLES_PER_ROUND = 8  # on/off cycles drawn per vectorized round
DEFAULT_TAIL_HORIZON = 1e5

# Workload synthesis
SESSION_BLOCK_SIZE = 65_536

# Theory
BOUNDARY_TOLERANCE = 1e-9
MAX_TAIL_FRACTION = 0.10
DEFAULT_C_HORIZON = 1e5

# Wavelet estimation
DEFAULT_WAVELET_ORDER = 3
MIN_WAVELET_ORDER = 1
MAX_WAVELET_ORDER = 10
MIN_OCTAVE_COEFFS = 4
MIN_REGRESSION_OCTAVES = 3
CI_Z = 1.96
EIGENVALUE_TOLERANCE = 1e-12
DEGENERATE_ENERGY_RATIO = 1e-24

# Trace binary format
TRACE_MAGIC = 0x48594252
TRACE_VERSION = 1

# Reproduction presets (common on/off parameters and per-series session parameters)
PRESET_ON_OFF_ALPHA = 1.4
PRESET_ON_OFF_MEAN = 100.0
PRESET_SERIES: dict[int, dict[str, float]] = {
    1: {"alpha_sess": 1.2, "mu_sess": 12000.0, "rate": 1.0},
    2: {"alpha_sess": 1.2, "mu_sess": 120.0, "rate": 5.0},
    3: {"alpha_sess": 1.2, "mu_sess": 1200.0, "rate": 1.0},
    4: {"alpha_sess": 1.8, "mu_sess": 1200.0, "rate": 1.0},
}
# Regression octaves for 2**22 ticks
PRESET_OCTAVES: dict[int, tuple[int, int]] = {
    1: (12, 18),
    2: (11, 18),
    3: (11, 18),
    4: (13, 18),
}

# Experiment defaults
DEFAULT_TICKS = 2**22
DEFAULT_REPLICATES = 5
SERIES4_REPLICATES = 10
DEFAULT_SEED = 2009

# Configuration keys
CONF_SESSIONS = "sessions"
CONF_ONOFF = "onoff"
CONF_EXPERIMENT = "experiment"
CONF_WAVELET = "wavelet"
CONF_OUTPUT = "output"
CONF_RATE = "rate"
CONF_ALPHA = "alpha"
CONF_MEAN = "mean"
CONF_ALPHA_ON = "alpha_on"
CONF_MEAN_ON = "mean_on"
CONF_ALPHA_OFF = "alpha_off"
CONF_MEAN_OFF = "mean_off"
CONF_TICKS = "ticks"
CONF_REPLICATES = "replicates"
CONF_SEED = "seed"
CONF_MODE = "mode"
CONF_DISCARD = "discard"
CONF_TRUNCATE = "truncate"
CONF_ORDER = "order"
CONF_OCTAVES = "octaves"
CONF_DIR = "dir"
CONF_DUMP_TRACES = "dump_traces"
CONF_TIMEOUT = "replicate_timeout"
CONF_SERIES = "series"
CONF_WORKERS = "workers"

# Generation modes
MODE_EXACT = "exact"
MODE_WARMUP = "warmup"

# Output file names
REPORT_FILE = "report.json"
LOGSCALE_FILE = "logscale_r{index:02d}.csv"
TRACE_FILE = "trace_r{index:02d}.bin"

# Replicate outcomes
STATUS_OK = "ok"
STATUS_FAILED = "failed"
STATUS_TIMEOUT = "timeout"
