import os
from fractions import Fraction

from dotenv import load_dotenv

load_dotenv()


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        return default
    return value if value > 0 else default


# Instance document schema
SCHEMA_VERSION = "1"

# Resource caps (override via environment or the --max-cells / --max-pivots flags)
DEFAULT_MAX_TABLE_CELLS = 10**7
DEFAULT_MAX_PIVOTS = 10**6
DEFAULT_RI_N_MAX = 64

MAX_TABLE_CELLS = _env_int("OMEGA_MAX_TABLE_CELLS", DEFAULT_MAX_TABLE_CELLS)
MAX_PIVOTS = _env_int("OMEGA_MAX_PIVOTS", DEFAULT_MAX_PIVOTS)
RI_N_MAX = _env_int("OMEGA_RI_N_MAX", DEFAULT_RI_N_MAX)

# Finite backend of support_extend: cap on candidate tables explored
MAX_SEARCH_NODES = _env_int("OMEGA_MAX_SEARCH_NODES", 10**6)

# Scalar multipliers s, t used to generate sampled sublinearity constraints
DEFAULT_MULTIPLIERS = (Fraction(1, 2), Fraction(1), Fraction(2))

# Logging
LOG_FORMAT = "%(asctime)s [%(levelname)s] [%(name)s] %(message)s"
LOG_LEVEL = os.environ.get("OMEGA_LOG_LEVEL", "WARNING").upper()

# Exit codes (omega_tool.py, test_tool.py)
EXIT_OK = 0
EXIT_PREDICATE_FALSE = 1
EXIT_INVALID_INPUT = 2
EXIT_RESOURCE_LIMIT = 3
EXIT_INTERNAL_ERROR = 4
EXIT_INTERRUPTED = 130

# Norm tags accepted on the wire
NORM_TAGS = ("l1", "linf", "l2")

# Hypothesis names reported by support.validate_instance, in reporting order
SUPPORT_HYPOTHESES = (
    "D_nonempty",
    "D_convex",
    "f_convex",
    "f_affine_on_D",
    "extreme_hull_covers",
    "lower_chain_complete",
    "omega_distributive",
    "range_distributive",
    "order_automorphism",
)
