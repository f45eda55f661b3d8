from pathlib import Path
import os
from dotenv import load_dotenv

load_dotenv(Path(__file__).parent / ".env")

# Single source of truth for numerical limits and runtime configuration

# Global comparison tolerance for set-function values
TOLERANCE = 1e-9

# Exhaustive routines refuse (never sample) above these ground-set sizes
BRUTE_FORCE_MAX_N = 20
MATROID_VERIFY_MAX_N = 14
EXTENDIBLE_VERIFY_MAX_N = 12
EXHAUSTIVE_SUBMODULAR_MAX_N = 10
EXHAUSTIVE_NONNEG_MAX_N = 14

# Trial workers (env SDTGA_THREADS); default = available parallelism
THREADS = int(os.getenv("SDTGA_THREADS", "0")) or (os.cpu_count() or 1)

LOG_LEVEL = os.getenv("SDTGA_LOG_LEVEL", "INFO").upper()

MASTER_SEED = int(os.getenv("SDTGA_MASTER_SEED", "0"))

# SQLite cache of brute-force optima (relative to project)
DB_PATH = os.getenv("SDTGA_DB_PATH", str(Path(__file__).parent / "opt_cache.sqlite"))

CSV_HEADER = [
    "instance",
    "algorithm",
    "p",
    "epsilon",
    "seed",
    "value",
    "opt",
    "ratio",
    "oracle_calls",
    "rounds",
    "sample_size",
    "elapsed_ms",
]

ALGORITHMS = ("sdtga", "greedy", "sample_greedy", "brute_force")
