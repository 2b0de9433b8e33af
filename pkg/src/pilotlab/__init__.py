"""Continuous sparsification through the m*w reparameterization.

Gradient-flow simulation of lifted (m, w) training with time-dependent weight
decay, its baselines, and the time-dependent Bregman potential machinery used
to verify the dynamics on underdetermined sparse regression.
"""

from pilotlab.errors import (
    ConfigError,
    DimensionError,
    SaturationError,
    StepSizeError,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DimensionError",
    "SaturationError",
    "StepSizeError",
    "__version__",
]
