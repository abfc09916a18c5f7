# NOTE: Package-wide numerical settings; change these to tune the solver for
# your own data. The command line flags override the tolerances per run.

import logging
import logging.config
from ua_matrix_solvents import log_config


# Default Tolerance: rank decisions, root clustering, residual checks.
RANK_TOL = 1e-10
CLUSTER_RADIUS = 1e-7
RESIDUAL_TOL = 1e-8

# Determinant coefficients below this fraction of the largest are zero.
DET_FLUSH = 1e-10

# Entrywise relative tolerance for equal bisolvents.
DEDUP_TOL = 1e-7

# Relative tolerance for the constant-ratio left equivalence test.
EQUIVALENCE_TOL = 1e-7

# Admissible candidates above this condition estimate are warned about.
CONDITION_WARNING = 1e10

# Largest relative inclusion radius used to merge root approximations.
INCLUSION_CAP = 1e-4

# Largest relative reach of a cluster of approximations of one multiple root.
CLUSTER_CAP = 1e-2

# Iteration cap for the scalar root finder.
MAX_ITERATIONS = 1000

# Selections examined before an enumeration is truncated.
MAX_ENUM = 10 ** 6

# Attempts at finding sample points away from the spectrum of a factor.
SAMPLE_RETRIES = 20

DEFAULT_SEED = 0

SCHEMA_VERSION = "1"

# Significant digits of matrices in text reports.
TEXT_DIGITS = 6


def setup_log(verbose=False):
    """Sets up the log for the entire package.

    Keyword Arguments:
        verbose (boolean): Also send INFO records to standard error."""
    logging.config.dictConfig(log_config.build_config(verbose))
