"""
Application settings loaded from environment variables.
"""
import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Solver Caps
M2_BRUTE_FORCE_CAP = int(os.getenv("M2_BRUTE_FORCE_CAP", "16"))
REGULARITY_EXACT_CAP = int(os.getenv("REGULARITY_EXACT_CAP", "14"))
HAXELL_MAX_A = int(os.getenv("HAXELL_MAX_A", "12"))
HAXELL_MAX_B = int(os.getenv("HAXELL_MAX_B", "18"))
TEMPLATE_VERIFY_CAP = int(os.getenv("TEMPLATE_VERIFY_CAP", "3"))

# Time Budgets (milliseconds)
DEFAULT_BUDGET_MS = int(os.getenv("DEFAULT_BUDGET_MS", "120000"))

# Sampling
DEFAULT_SEED = int(os.getenv("DEFAULT_SEED", "0"))
SAMPLED_REGULARITY_TRIALS = int(os.getenv("SAMPLED_REGULARITY_TRIALS", "200"))
MAX_AUX_EDGES_PER_VERTEX = int(os.getenv("MAX_AUX_EDGES_PER_VERTEX", "2000"))

# Template (unset means 40^t)
TEMPLATE_MAX_DEGREE = os.getenv("TEMPLATE_MAX_DEGREE")

# Logging
LOG_LEVEL = os.getenv("LOG_LEVEL", "WARNING")
LOG_FORMAT = os.getenv("LOG_FORMAT", "%(asctime)s %(levelname)s %(name)s: %(message)s")


def template_degree_cap(t: int) -> int:
    """Degree cap for template hypergraphs on t parts."""
    if TEMPLATE_MAX_DEGREE:
        return int(TEMPLATE_MAX_DEGREE)
    return 40 ** t
