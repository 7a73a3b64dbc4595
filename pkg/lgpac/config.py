"""
Global Configuration for Application
"""

import os
import logging

# Get configuration from environment
LOGGING_LEVEL = getattr(logging, os.getenv("LOGGING_LEVEL", "INFO").upper(), logging.INFO)

# Number of pseudonorm terms kept in the metric series (tail below 2^-60)
METRIC_TERMS = int(os.getenv("LGPAC_METRIC_TERMS", "60"))

# Default solver tolerances; LGPAC_SOLVER_TOL overrides both at call time
SOLVER_ABS_TOL = 1e-9
SOLVER_REL_TOL = 1e-9

# Tolerance used when a modulus is generated by simulating a network
NETWORK_MODULUS_TOL = float(os.getenv("LGPAC_NETWORK_MODULUS_TOL", "1e-9"))

# Catalog defaults
GAMMA_MODULUS_C = 3.0
ZETA_MODULUS_C = 1.0
GAMMA_GRID = (1.0, 6.0, 0.25)
ZETA_GRID = (2.0, 6.0, 0.25)


def solver_tolerance():
    """Returns (abs_tol, rel_tol), honoring LGPAC_SOLVER_TOL"""
    override = os.getenv("LGPAC_SOLVER_TOL")
    if override:
        try:
            value = float(override)
        except ValueError:
            logging.getLogger("flask.app").warning("Ignoring invalid LGPAC_SOLVER_TOL=%r", override)
        else:
            if value > 0:
                return value, value
    return SOLVER_ABS_TOL, SOLVER_REL_TOL
