"""Constants for the hybridburst helper modules."""

# Seed derivation
SEED_WORDS = 2  # 32-bit words drawn from a SeedSequence for an integer seed

# File formats
CSV_DELIMITER = ","
CSV_FLOAT_FORMAT = "%.17g"
TEMP_SUFFIX = ".tmp"

# Interval accumulation
TICK_FLUSH_SIZE = 4_000_000  # pending interval endpoints before folding into the difference array

# Parallelism
ENV_THREADS = "HYBRIDBURST_THREADS"  # caps every worker pool
