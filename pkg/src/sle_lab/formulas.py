"""Closed-form SLE probabilities and exponents.

Each function evaluates an exact result; the Monte-Carlo module compares
simulations against them.
"""

import math
import warnings
from dataclasses import dataclass

from scipy import integrate

from . import special
from .coulomb import delta_h
from .errors import ConvergenceError, DomainError
from .loewner import elementary_slit_map

__all__ = [
    "RectangleGeometry",
    "SlitHull",
    "EscapeProbabilities",
    "left_passage_prob",
    "left_passage_special_case",
    "cardy_crossing",
    "rectangle_to_r",
    "rectangle_vertex_images",
    "fractal_dimension",
    "delta_h",
    "derivative_expectation",
    "restriction_prob_slit",
    "escape_probability",
    "bessel_hit_probability",
]


def _check_open(name, value, lo, hi):
    if not lo < value < hi:
        raise DomainError(f"{name}={value!r} must lie in ({lo}, {hi})")


# --------------------------------------------------------------------------
# left passage
# --------------------------------------------------------------------------

def left_passage_prob(kappa, x, y):
    """Probability that the trace passes to the left of ``z = x + iy``.

    ``1/2 + C (x/y) 2F1(1/2, 4/kappa; 3/2; -x^2/y^2)`` with
    ``C = Gamma(4/kappa) / (sqrt(pi) Gamma(4/kappa - 1/2))``, i.e.
    ``1/2 + C int_0^{x/y} (1 + s^2)^(-4/kappa) ds``.  For ``|x/y| > 2`` the
    integral is taken as the full integral minus its tail, whose series in
    ``-y^2/x^2`` converges fast.
    """
    _check_open("kappa", kappa, 0.0, 8.0)
    if not y > 0:
        raise DomainError("y must be positive")
    b = 4.0 / kappa
    C = special.gamma(b) / (math.sqrt(math.pi) * special.gamma(b - 0.5))
    q = x / y
    if abs(q) <= 2.0:
        # rounding can overshoot [0, 1] by a few ulps when C is large
        return min(1.0, max(0.0, 0.5 + C * q * special.hyp2f1(0.5, b, 1.5, -q * q)))
    # int_|q|^inf (1+s^2)^-b ds = |q|^(1-2b)/(2b-1) 2F1(b, b-1/2; b+1/2; -1/q^2)
    tail = abs(q) ** (1.0 - 2.0 * b) / (2.0 * b - 1.0) * special.hyp2f1(b, b - 0.5, b + 0.5, -1.0 / (q * q))
    p = 1.0 - C * tail
    return p if q > 0 else 1.0 - p


def left_passage_special_case(kappa, x, y):
    """Elementary forms of the left-passage probability at kappa = 2, 8/3, 4 (and 8)."""
    z = complex(x, y)
    arg = math.atan2(y, x)
    if kappa == 2:
        return 1.0 + x * y / (math.pi * abs(z) ** 2) - arg / math.pi
    if abs(kappa - 8.0 / 3.0) < 1e-15:
        return 0.5 + x / (2.0 * abs(z))
    if kappa == 4:
        return 1.0 - arg / math.pi
    if kappa == 8:
        return 0.5
    raise DomainError("elementary forms exist for kappa in {2, 8/3, 4, 8}")


# --------------------------------------------------------------------------
# crossing
# --------------------------------------------------------------------------

def cardy_crossing(kappa, r):
    """Crossing probability ``P[tau_c < tau_a]`` for the cross ratio ``r = -a/(c-a)``.

    ``Gamma(2-8/k) / (Gamma(2-4/k) Gamma(1-4/k)) r^(1-4/k) 2F1(4/k, 1-4/k; 2-4/k; r)``.
    The zero mode is symmetric under ``r -> 1-r``, which is used above
    ``r = 0.9`` where the series converges slowly.
    """
    _check_open("kappa", kappa, 4.0, 8.0)
    if not 0.0 <= r <= 1.0:
        raise DomainError(f"cross ratio r={r!r} outside [0, 1]")
    if r == 0.0:
        return 0.0
    if r == 1.0:
        return 1.0
    if r > 0.9:
        return 1.0 - cardy_crossing(kappa, 1.0 - r)
    b = 4.0 / kappa
    pre = special.gamma(2.0 - 2.0 * b) / (special.gamma(2.0 - b) * special.gamma(1.0 - b))
    return pre * r ** (1.0 - b) * special.hyp2f1(b, 1.0 - b, 2.0 - b, r)


@dataclass(frozen=True)
class RectangleGeometry:
    """Rectangle of aspect ``L'/L`` with its elliptic modulus and cross ratio.

    ``kprime`` is stored separately so that ``1 - k`` stays accurate for
    flat rectangles where ``k`` is within rounding of 1.
    """

    aspect: float
    k: float
    kprime: float
    cross_ratio: float

    @property
    def K(self):
        return math.pi / (2.0 * special.agm(1.0, self.kprime))

    @property
    def Kprime(self):
        return math.pi / (2.0 * special.agm(1.0, self.k))


def _aspect_of(k, kp):
    # K'(k) / (2 K(k)) with both moduli given exactly
    return special.agm(1.0, kp) / (2.0 * special.agm(1.0, k))


def _solve_small_k(aspect, tol):
    # aspect >= 1/2 <=> k <= 1/sqrt(2); bisection on log k
    lo, hi = math.log(1e-300), math.log(math.sqrt(0.5))
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        k = math.exp(mid)
        if _aspect_of(k, math.sqrt((1.0 - k) * (1.0 + k))) > aspect:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    k = math.exp(0.5 * (lo + hi))
    return k, math.sqrt((1.0 - k) * (1.0 + k))


def rectangle_to_r(aspect, tol=1e-14):
    """Solve ``K'(k)/(2K(k)) = aspect`` by bisection and return the geometry.

    Aspects below 1/2 are solved through the complementary modulus
    (``k <-> k'`` sends the aspect to ``1/(4 aspect)``).
    """
    if not (aspect > 0 and math.isfinite(aspect)):
        raise DomainError("aspect must be positive and finite")
    if aspect >= 0.5:
        k, kp = _solve_small_k(aspect, tol)
    else:
        kp, k = _solve_small_k(0.25 / aspect, tol)
    one_minus_k = kp * kp / (1.0 + k)
    r = (one_minus_k / (1.0 + k)) ** 2
    return RectangleGeometry(float(aspect), k, kp, r)


def rectangle_vertex_images(geometry):
    """Images of the vertices A, B, C, D under ``k (1 + sn z)/(1 - k sn z)``."""
    k = geometry.k
    K, Kp = geometry.K, geometry.Kprime

    def phi(z):
        s = special.jacobi_sn(z, k)
        return k * (1.0 + s) / (1.0 - k * s)

    # D = K + iK' is the pole of the map; report it as infinity
    return {"A": phi(complex(-K, Kp)), "B": phi(complex(-K, 0.0)), "C": phi(complex(K, 0.0)), "D": complex(math.inf)}


# --------------------------------------------------------------------------
# dimension and derivative moments
# --------------------------------------------------------------------------

def fractal_dimension(kappa):
    if not kappa > 0:
        raise DomainError("kappa must be positive")
    return min(1.0 + kappa / 8.0, 2.0)


def derivative_expectation(kappa, h, x, t):
    """Closed form of ``E[|w_t'(x)|^h]`` for a boundary point ``x``.

    ``Gamma(a)/Gamma(c) y^(Delta/2) e^-y M(a, c; y)`` with ``y = x^2/(2 kappa t)``,
    ``a = 2/kappa + 1/2 + Delta/2`` and ``c = 2/kappa + 1/2 + Delta``.
    For ``kappa > 4`` swallowed points count as zero, so ``h = 0`` gives
    the survival probability of ``x``.
    """
    if not kappa > 0:
        raise DomainError("kappa must be positive")
    if x == 0 or not t > 0:
        raise DomainError("need x != 0 and t > 0")
    d = delta_h(kappa, h)
    y = x * x / (2.0 * kappa * t)
    a = 2.0 / kappa + 0.5 + 0.5 * d
    c = 2.0 / kappa + 0.5 + d
    return math.exp(math.lgamma(a) - math.lgamma(c)) * y ** (0.5 * d) * special.hyp1f1_scaled(a, c, y)


# --------------------------------------------------------------------------
# restriction
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SlitHull:
    """Vertical segment ``[x0, x0 + i l]`` standing on the real axis."""

    base: float
    height: float

    def __post_init__(self):
        if self.base == 0:
            raise DomainError("the slit must not touch the origin")
        if not self.height >= 0:
            raise DomainError("slit height must be non-negative")

    def map(self, z):
        """``Phi_A(z) = sqrt((z-x0)^2 + l^2) - sqrt(x0^2 + l^2)`` on the branch with ``Phi(0) = 0``."""
        dt = 0.25 * self.height ** 2
        return elementary_slit_map(z, self.base, dt) - elementary_slit_map(0.0, self.base, dt)

    def derivative_at_origin(self):
        return abs(self.base) / math.hypot(self.base, self.height)


def restriction_prob_slit(hull, kappa=8.0 / 3.0):
    """Probability that SLE_8/3 avoids the slit: ``Phi_A'(0)^(5/8)``."""
    if abs(kappa - 8.0 / 3.0) > 1e-12:
        raise DomainError("the restriction formula holds for kappa = 8/3 only")
    return hull.derivative_at_origin() ** 0.625


# --------------------------------------------------------------------------
# one-dimensional escape problems
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EscapeProbabilities:
    p_a: float
    p_b: float


def escape_probability(drift, diffusion_sq, a, b, x, rel_tol=1e-10):
    """Exit probabilities through ``a`` and ``b`` for ``dX = u dt + v dB`` started at ``x``.

    Builds the zero mode ``f' = exp(-int 2u/v^2)`` (anchored at the interval
    midpoint) and returns ``P_a = (f(x) - f(b)) / (f(a) - f(b))``.  The
    endpoints may carry integrable singularities of ``f'``.
    """
    if not a < x < b:
        raise DomainError("need a < x < b")
    mid = 0.5 * (a + b)

    def log_fprime(s):
        val, _ = integrate.quad(lambda r: 2.0 * drift(r) / diffusion_sq(r), mid, s, epsabs=1e-15, epsrel=1e-13, limit=200)
        return -val

    def fprime(s):
        return math.exp(log_fprime(s))

    opts = dict(epsabs=0.0, epsrel=rel_tol, limit=400)
    with warnings.catch_warnings():
        # endpoint singularities make QUADPACK warn about its extrapolation
        # table; the returned error estimates are checked below instead
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        left, err_l = integrate.quad(fprime, a, x, **opts)
        right, err_r = integrate.quad(fprime, x, b, **opts)
    total = left + right
    if not (math.isfinite(total) and total > 0):
        raise ConvergenceError("zero mode is not integrable on (a, b)", partial=total)
    if err_l + err_r > 1e-6 * total:
        raise ConvergenceError("escape quadrature did not reach its tolerance", partial=left / total)
    p_a = right / total
    return EscapeProbabilities(p_a, left / total)


def bessel_hit_probability(kappa, x0, T):
    """Probability that ``dx = 2/x dt - sqrt(kappa) dB`` from ``x0`` hits 0 by time ``T``.

    ``x/sqrt(kappa)`` is a Bessel process of dimension ``1 + 4/kappa``,
    which reaches 0 only for ``kappa > 4``.
    """
    if not kappa > 0:
        raise DomainError("kappa must be positive")
    if kappa <= 4:
        return 0.0
    # the h = 0 moment is the survival probability
    return 1.0 - derivative_expectation(kappa, 0.0, x0, T)
