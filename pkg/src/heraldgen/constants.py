"""Numerical conventions pinned for the whole package.

hbar = 1, quadratures ``q = (a + a^dag)/sqrt(2)``, ``p = -i (a - a^dag)/sqrt(2)``,
vacuum variance 1/2, ordering ``(q_1, p_1, ..., q_N, p_N)``.
"""

import math

HBAR = 1.0
VACUUM_VARIANCE = 0.5

#: Squeezing in dB is ``20 log10(e) * r``; the optimizer caps it at 12 dB.
DB_PER_NEPER = 20.0 * math.log10(math.e)
MAX_SQUEEZING_DB = 12.0
R_MAX = MAX_SQUEEZING_DB / DB_PER_NEPER

NORM_TOL = 1e-12
NORM_SLACK = 1e-9
ZERO_PROBABILITY = 1e-14
PARITY_TOL = 1e-12
EIGEN_SLACK = 1e-10
SYMPLECTIC_TOL = 1e-10

DEFAULT_CUTOFF = 20
DEFAULT_PAD = 10


def squeezing_db(r):
    """Quadrature-variance squeezing in dB for amplitude ``r``."""
    return DB_PER_NEPER * abs(r)
