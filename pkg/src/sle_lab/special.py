"""Special functions used by the closed-form SLE results.

Everything here is written from scratch on top of :mod:`math`/:mod:`cmath`
so the numerical kernel has no hidden dependencies:

* Gamma function (Lanczos, g=7, with reflection) and Pochhammer symbols,
* Gauss hypergeometric 2F1 for real x < 1 (direct series + Pfaff transform),
* Kummer's confluent function 1F1 (series + Kummer transform, and an
  exponentially scaled variant with a large-argument asymptotic branch),
* complete elliptic integrals K, K' via the arithmetic-geometric mean,
* Jacobi sn for complex argument via descending Landen / AGM.

All functions are pure and thread safe.
"""

import cmath
import math
from dataclasses import dataclass

from .errors import ConvergenceError, DomainError

__all__ = [
    "SeriesControl",
    "gamma",
    "pochhammer",
    "hyp2f1",
    "hyp1f1",
    "hyp1f1_scaled",
    "agm",
    "elliptic_K",
    "elliptic_Kprime",
    "jacobi_sncndn",
    "jacobi_sn",
]


@dataclass(frozen=True)
class SeriesControl:
    """Stopping rule for the power series in this module."""

    rel_tol: float = 1e-15
    max_terms: int = 10000

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")


DEFAULT_CONTROL = SeriesControl()

_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _is_nonpositive_integer(x):
    return x <= 0 and x == math.floor(x)


def _sinpi(x):
    # argument reduction keeps sin(pi x) accurate for large |x|
    n = round(x)
    r = x - n
    s = math.sin(math.pi * r)
    return -s if n % 2 else s


def gamma(x):
    """Gamma function for real ``x`` (not a pole), ~1e-14 relative accuracy.

    >>> gamma(5.0)
    24.000000000000004
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"gamma: non-finite argument {x!r}")
    if _is_nonpositive_integer(x):
        raise DomainError(f"gamma: pole at {x!r}")
    if x < 0.5:
        return math.pi / (_sinpi(x) * gamma(1.0 - x))
    z = x - 1.0
    acc = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        acc += _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    # split the power so that t**(z+1/2) does not overflow before e^-t is applied
    half = t ** (0.5 * (z + 0.5))
    return _SQRT_2PI * half * (half * math.exp(-t)) * acc


def pochhammer(a, m):
    """Rising factorial (a)_m = a (a+1) ... (a+m-1)."""
    if m < 0 or int(m) != m:
        raise DomainError("pochhammer: m must be a non-negative integer")
    out = 1.0
    for j in range(int(m)):
        out *= a + j
    return out


def _series_2f1(a, b, c, x, ctl):
    total = 1.0
    term = 1.0
    # the tail of a series whose term ratio tends to |x| is bounded by term/(1-|x|)
    shrink = 1.0 - abs(x)
    for n in range(ctl.max_terms):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * x
        total += term
        if term == 0.0:
            return total
        if abs(term) <= ctl.rel_tol * abs(total) * shrink and n > 2:
            return total
    raise ConvergenceError(
        f"hyp2f1({a}, {b}; {c}; {x}) did not converge in {ctl.max_terms} terms",
        partial=total,
        n_terms=ctl.max_terms,
    )


def _rgamma(x):
    return 0.0 if _is_nonpositive_integer(x) else 1.0 / gamma(x)


def _connection_2f1(a, b, c, x, ctl):
    # expansion about infinity in powers of 1/x; needs b - a away from the integers
    w = 1.0 / x
    gc = gamma(c)
    t1 = gc * gamma(b - a) * _rgamma(b) * _rgamma(c - a) * (-x) ** (-a)
    t2 = gc * gamma(a - b) * _rgamma(a) * _rgamma(c - b) * (-x) ** (-b)
    s1 = _series_2f1(a, a - c + 1.0, a - b + 1.0, w, ctl) if t1 != 0.0 else 0.0
    s2 = _series_2f1(b, b - c + 1.0, b - a + 1.0, w, ctl) if t2 != 0.0 else 0.0
    return t1 * s1 + t2 * s2


def hyp2f1(a, b, c, x, ctl=DEFAULT_CONTROL):
    """Gauss hypergeometric function 2F1(a, b; c; x) for real x < 1.

    For ``x < -1/2`` the Pfaff transformation
    ``F(a,b;c;x) = (1-x)^(-a) F(a, c-b; c; x/(x-1))`` maps the argument
    into ``[1/3, 1)``; it is also used on ``[-1/2, 0)`` when a parameter
    exceeds 4 and a form with positive terms exists.  Below ``x = -4`` the
    expansion about infinity takes over whenever ``b - a`` is further than
    1e-4 from an integer.  Closer to an integer the Pfaff series is kept,
    and its length grows like ``|x|`` (about 40 |x| terms).  The parameters
    are put in a canonical order first, so the result is exactly symmetric
    in ``a`` and ``b``.
    """
    if _is_nonpositive_integer(c):
        raise DomainError(f"hyp2f1: c={c!r} is a non-positive integer")
    if not x < 1.0:
        raise DomainError(f"hyp2f1: argument x={x!r} must be < 1")
    if x == 0.0:
        return 1.0
    a, b = (a, b) if a <= b else (b, a)
    # for x < 0 a Pfaff form with positive parameters has no cancellation
    positive = [(p, q) for p, q in ((a, c - b), (b, c - a)) if p > 0 and q > 0]
    if x >= 0.0 or (x >= -0.5 and (not positive or max(abs(a), abs(b)) <= 4.0)):
        return _series_2f1(a, b, c, x, ctl)
    d = b - a
    if x < -4.0 and abs(d - round(d)) > 1e-4:
        return _connection_2f1(a, b, c, x, ctl)
    z = x / (x - 1.0)
    # transform on the parameter that gives the faster tail
    if positive:
        p, q = min(positive, key=sum)
    else:
        p, q = min(((a, c - b), (b, c - a)), key=sum)
    return (1.0 - x) ** (-p) * _series_2f1(p, q, c, z, ctl)


def _series_1f1(a, c, y, ctl):
    total = 1.0
    term = 1.0
    for n in range(ctl.max_terms):
        ratio = (a + n) / ((c + n) * (n + 1.0)) * y
        term *= ratio
        total += term
        if term == 0.0:
            return total
        if abs(term) <= ctl.rel_tol * abs(total) and abs(ratio) < 0.5:
            return total
    raise ConvergenceError(
        f"hyp1f1({a}; {c}; {y}) did not converge in {ctl.max_terms} terms",
        partial=total,
        n_terms=ctl.max_terms,
    )


def hyp1f1(a, c, y, ctl=DEFAULT_CONTROL):
    """Kummer's confluent hypergeometric function M(a, c; y).

    Negative arguments go through Kummer's transformation
    ``M(a,c;y) = e^y M(c-a, c; -y)`` to avoid cancellation.
    """
    if _is_nonpositive_integer(c):
        raise DomainError(f"hyp1f1: c={c!r} is a non-positive integer")
    if y == 0.0:
        return 1.0
    if y < 0.0 and not _is_nonpositive_integer(a):
        return math.exp(y) * _series_1f1(c - a, c, -y, ctl)
    return _series_1f1(a, c, y, ctl)


def hyp1f1_scaled(a, c, y, ctl=DEFAULT_CONTROL):
    """``exp(-y) * M(a, c; y)`` for ``y >= 0`` without overflow.

    Above ``y = 60`` the leading asymptotic series
    ``Gamma(c)/Gamma(a) y^(a-c) sum (c-a)_n (1-a)_n / (n! y^n)`` is used,
    truncated at its smallest term; the neglected piece is O(e^-y).
    """
    if y < 0:
        raise DomainError("hyp1f1_scaled: y must be non-negative")
    if _is_nonpositive_integer(c):
        raise DomainError(f"hyp1f1_scaled: c={c!r} is a non-positive integer")
    if y <= 60.0 or _is_nonpositive_integer(a):
        return math.exp(-y) * _series_1f1(a, c, y, ctl)
    total = 1.0
    term = 1.0
    for n in range(200):
        nxt = term * (c - a + n) * (1.0 - a + n) / ((n + 1.0) * y)
        if abs(nxt) >= abs(term) or nxt == 0.0:
            break
        term = nxt
        total += term
        if abs(term) <= ctl.rel_tol * abs(total):
            break
    return gamma(c) / gamma(a) * y ** (a - c) * total


def agm(a, b, tol=1e-16, max_iter=64):
    """Arithmetic-geometric mean of two non-negative reals."""
    for _ in range(max_iter):
        if abs(a - b) <= tol * abs(a):
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


def _check_modulus(k):
    if not 0.0 <= k < 1.0:
        raise DomainError(f"elliptic modulus must satisfy 0 <= k < 1, got {k!r}")


def _complement(k):
    return math.sqrt((1.0 - k) * (1.0 + k))


def elliptic_K(k):
    """Complete elliptic integral of the first kind, modulus convention K(k)."""
    _check_modulus(k)
    return math.pi / (2.0 * agm(1.0, _complement(k)))


def elliptic_Kprime(k):
    """K'(k) = K(sqrt(1 - k^2)); evaluated as pi / (2 AGM(1, k))."""
    _check_modulus(k)
    if k == 0.0:
        return math.inf
    return math.pi / (2.0 * agm(1.0, k))


def jacobi_sncndn(u, k):
    """Real Jacobi functions (sn, cn, dn)(u, k) by the descending Landen scheme."""
    if not 0.0 <= k <= 1.0:
        raise DomainError(f"jacobi_sncndn: modulus {k!r} outside [0, 1]")
    if k == 0.0:
        return math.sin(u), math.cos(u), 1.0
    if k == 1.0:
        s = 1.0 / math.cosh(u)
        return math.tanh(u), s, s
    a = [1.0]
    c = [k]
    b = _complement(k)
    while abs(c[-1]) > 1e-16 and len(a) < 40:
        an, bn = a[-1], b
        a.append(0.5 * (an + bn))
        c.append(0.5 * (an - bn))
        b = math.sqrt(an * bn)
    n = len(a) - 1
    phi = (2.0 ** n) * a[n] * u
    for j in range(n, 0, -1):
        phi = 0.5 * (phi + math.asin(c[j] / a[j] * math.sin(phi)))
    sn = math.sin(phi)
    cn = math.cos(phi)
    dn = math.sqrt(max(0.0, 1.0 - k * k * sn * sn))
    return sn, cn, dn


def jacobi_sn(z, k):
    """Jacobi elliptic sn(z, k) for complex z and real modulus 0 <= k < 1.

    The complex value is assembled from real functions at modulus k and the
    complementary modulus k' (Jacobi's imaginary transformation).
    """
    _check_modulus(k)
    z = complex(z)
    if k == 0.0:
        return cmath.sin(z)
    s, c, d = jacobi_sncndn(z.real, k)
    s1, c1, d1 = jacobi_sncndn(z.imag, _complement(k))
    den = c1 * c1 + k * k * s * s * s1 * s1
    # within ~1e-13 of a pole the quotient is rounding noise
    if abs(den) < 1e-26:
        raise DomainError(f"jacobi_sn: pole at z={z!r}")
    return complex(s * d1, c * d * s1 * c1) / den
