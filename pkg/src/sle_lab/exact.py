"""Closed-form Loewner evolutions used as oracles for the slit-map engine.

* constant driving: the vertical slit ``g_t(z) = c + sqrt((z-c)^2 + 4t)``;
* the circular arc of radius ``r`` grown from ``z = r`` by the driving
  ``3 sqrt(r^2 - 2t) - 2r``; at ``t = r^2/2`` the half disc is swallowed;
* a driving ``2 sqrt(6 (1 - t))`` that closes a loop at ``t = 1``.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError
from .loewner import elementary_slit_map

__all__ = [
    "ArcSpec",
    "vertical_slit",
    "arc_map",
    "arc_driving",
    "swallowing_example_driving",
]


def vertical_slit(z, c, t):
    """Exact map for constant driving ``c`` after capacity time ``t``."""
    if t < 0:
        raise DomainError("t must be non-negative")
    return elementary_slit_map(z, c, t)


@dataclass(frozen=True)
class ArcSpec:
    """Circular arc of radius ``r``; the evolution exists for ``0 <= t < r^2/2``."""

    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise DomainError("arc radius must be positive")

    @property
    def end_time(self):
        return 0.5 * self.r * self.r

    def u(self, t):
        """``sqrt(r^2 - 2t)``, the square root shared by the map and its driving."""
        if t < 0 or t > self.end_time:
            raise DomainError(f"t={t!r} outside [0, r^2/2]")
        return math.sqrt(max(self.r * self.r - 2.0 * t, 0.0))


def arc_driving(t, spec):
    return 3.0 * spec.u(t) - 2.0 * spec.r


def arc_map(z, spec, t):
    """``g_t(z)`` for the arc, ``[(z-r)^2 + 2zu + (z+r) S] / (2z)``.

    ``u = sqrt(r^2 - 2t)`` and ``S^2 = (z+r)^2 - 4zu``.  At ``t = 0``
    ``S = z - r`` (which makes ``g_0`` the identity); as ``t`` grows,
    ``S^2`` moves along a straight segment, so the continued root is fixed
    by the angle that segment subtends at the origin.
    """
    z = complex(z)
    if z == 0:
        raise DomainError("arc_map is singular at z = 0")
    r = spec.r
    u = spec.u(t)
    s2_start = (z - r) ** 2
    s2_end = (z + r) ** 2 - 4.0 * z * u
    if s2_start == 0:
        # z = r sits at the base of the arc; start the path from the end value
        S = cmath.sqrt(s2_end)
    else:
        ratio = s2_end / s2_start
        if ratio.imag == 0.0 and ratio.real <= 0.0:
            raise ConvergenceError(f"arc_map: branch path for z={z!r} passes through a branch point")
        S = (z - r) * cmath.sqrt(ratio)
    return ((z - r) ** 2 + 2.0 * z * u + (z + r) * S) / (2.0 * z)


def swallowing_example_driving(t):
    """``2 sqrt(6 (1 - t))`` on ``[0, 1)``, zero from ``t = 1`` on."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("t must be non-negative")
    out = np.where(t < 1.0, 2.0 * np.sqrt(6.0 * np.clip(1.0 - t, 0.0, None)), 0.0)
    return float(out) if out.ndim == 0 else out
