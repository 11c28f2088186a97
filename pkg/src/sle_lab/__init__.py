"""Numerical laboratory for Schramm-Loewner evolution.

Loewner slit-map chains and their exact solutions, SLE sampling, closed
forms for SLE probabilities and exponents, and Monte-Carlo and lattice
experiments that check them against each other.
"""

__version__ = "0.1.0"

from . import coulomb, exact, formulas, loewner, sampler, special  # noqa: E402
from .errors import ConfigError, ConvergenceError, DomainError  # noqa: E402

__all__ = [
    "__version__",
    "coulomb",
    "exact",
    "formulas",
    "loewner",
    "sampler",
    "special",
    "DomainError",
    "ConvergenceError",
    "ConfigError",
]
