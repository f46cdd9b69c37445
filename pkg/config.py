"""
Configuration settings for the Hardy inequality laboratory
"""

import os


class Settings:
    """Application settings."""

    # Application
    APP_NAME: str = "hardylab"
    APP_DESCRIPTION: str = "Numerical laboratory for weighted Hardy and Caffarelli-Kohn-Nirenberg inequalities"
    APP_VERSION: str = "1.0.0"

    # Quadrature tolerances (absolute and relative, the looser one wins)
    DEFAULT_ABS_TOL: float = float(os.getenv("HARDYLAB_TOL", "1e-10"))
    DEFAULT_REL_TOL: float = float(os.getenv("HARDYLAB_TOL", "1e-10"))
    MAX_SUBDIVISIONS: int = 10_000
    TANHSINH_MAX_LEVEL: int = 12
    QUAD_PANEL_LIMIT: int = 500
    PANEL_EVALUATION_BUDGET: int = 200_000
    FRAGILE_MARGIN: float = 1e-6
    EXPONENT_SNAP: float = 1e-12  # float exponents this close to an integer are that integer
    SLIVER_ULPS: int = 8

    # Verdict budget
    ROUNDOFF_FLOOR: float = 64 * 2.220446049250313e-16

    # Profiles
    CUTOFF_TRANSITION: float = 0.1
    TAYLOR_WINDOW: float = 1e-3
    TAYLOR_ORDER: int = 4
    POSITIVITY_SAMPLES: int = 257

    # Sharpness
    FRS_GRID_POINTS: int = 10_000
    PROBE_MIN_INDICES: int = 3
    STABILITY_GRID_POINTS: int = 16
    GRID_EDGE_SNAP: float = 1e-9  # relative distance at which a grid radius lands on a break

    # Equality reports
    EQUALITY_FLOOR: float = 1e-30

    # Reports
    JSON_SIGNIFICANT_DIGITS: int = 17

    # Thread Pool Settings
    MAX_WORKERS: int = int(os.getenv("HARDYLAB_WORKERS", "0"))  # 0 means one per core

    # Logging Settings
    LOG_LEVEL: str = os.getenv("HARDYLAB_LOG_LEVEL", "INFO")

    # Exit codes
    EXIT_OK: int = 0
    EXIT_USAGE: int = 1
    EXIT_INCONCLUSIVE: int = 2
    EXIT_VIOLATED: int = 3


# Create global settings instance
settings = Settings()
