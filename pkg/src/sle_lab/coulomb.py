"""Coulomb-gas dictionary for SLE_kappa and the multifractal exponents.

Conventions: coupling ``g = 4/kappa``, background charge
``2 alpha_0 = sqrt(kappa)/2 - 2/sqrt(kappa)``, screening charges
``alpha_+ = sqrt(kappa)/2`` and ``alpha_- = -2/sqrt(kappa)``, Kac charges
``alpha_{r,s} = (1-r) alpha_+/2 + (1-s) alpha_-/2`` with weight
``h = alpha (alpha - 2 alpha_0)``.

The charge dressing a boundary operator of weight ``h`` is
``alpha_h = alpha_0 + sqrt(alpha_0^2 + h)``; with ``alpha_{1,2} = 1/sqrt(kappa)``
it gives ``Delta(h) = 2 alpha_{1,2} alpha_h``, the root with ``Delta(1) = 1``.
"""

import math
from dataclasses import dataclass
from itertools import combinations

from .errors import DomainError

__all__ = [
    "CoulombConstants",
    "KacLabel",
    "constants",
    "central_charge",
    "central_charge_dual",
    "kac_weight",
    "kac_charge",
    "curve_operator_dims",
    "charge_for_weight",
    "delta_h",
    "boundary_exponent",
    "bulk_exponent",
    "higher_boundary_exponent",
    "higher_bulk_exponent",
]


def _check_kappa(kappa):
    if not (kappa > 0 and math.isfinite(kappa)):
        raise DomainError(f"kappa must be positive and finite, got {kappa!r}")


@dataclass(frozen=True)
class CoulombConstants:
    kappa: float
    g: float
    n: float
    q: float
    q_in_validity_range: bool
    radius: float
    alpha0: float
    alpha_plus: float
    alpha_minus: float
    c: float

    def as_dict(self):
        return dict(self.__dict__)


@dataclass(frozen=True)
class KacLabel:
    r: float
    s: float


def central_charge(kappa):
    _check_kappa(kappa)
    return (8.0 - 3.0 * kappa) * (kappa - 6.0) / (2.0 * kappa)


def constants(kappa):
    """All Coulomb-gas constants for ``kappa``.

    The Potts weight ``q`` is reported for every kappa but only carries its
    loop-model meaning for ``4 <= kappa <= 8`` (see ``q_in_validity_range``).
    """
    _check_kappa(kappa)
    g = 4.0 / kappa
    sk = math.sqrt(kappa)
    return CoulombConstants(
        kappa=float(kappa),
        g=g,
        n=-2.0 * math.cos(math.pi * g),
        q=2.0 + 2.0 * math.cos(2.0 * math.pi * g),
        q_in_validity_range=4.0 <= kappa <= 8.0,
        radius=math.sqrt(8.0 / kappa),
        alpha0=0.5 * (0.5 * sk - 2.0 / sk),
        alpha_plus=0.5 * sk,
        alpha_minus=-2.0 / sk,
        c=central_charge(kappa),
    )


def central_charge_dual(kappa):
    """Return ``(c(kappa), 16/kappa)``; the central charge is invariant under the duality."""
    _check_kappa(kappa)
    return central_charge(kappa), 16.0 / kappa


def kac_charge(label, kappa):
    cc = constants(kappa)
    return 0.5 * (1.0 - label.r) * cc.alpha_plus + 0.5 * (1.0 - label.s) * cc.alpha_minus


def kac_weight(label, kappa):
    """``(h_{r,s}, alpha_{r,s})`` for a (not necessarily integer) Kac label."""
    _check_kappa(kappa)
    h = ((label.r * kappa - 4.0 * label.s) ** 2 - (kappa - 4.0) ** 2) / (16.0 * kappa)
    return h, kac_charge(label, kappa)


def curve_operator_dims(n_curves, kappa):
    """Weights and magnetic charges of the operators creating ``n`` curves.

    Returns ``(h_{1,n+1}, h_{0,n/2}, m_boundary, m_bulk)``.
    """
    _check_kappa(kappa)
    n = int(n_curves)
    if n < 1 or n != n_curves:
        raise DomainError("n_curves must be a positive integer")
    h_bdry = (2.0 * n * n + n * (4.0 - kappa)) / (2.0 * kappa)
    h_bulk = (4.0 * n * n - (kappa - 4.0) ** 2) / (16.0 * kappa)
    sk = math.sqrt(kappa)
    return h_bdry, h_bulk, n / sk, n / (2.0 * sk)


def _discriminant(kappa, h):
    d = (kappa - 4.0) ** 2 + 16.0 * kappa * h
    if d < 0:
        raise DomainError(f"h={h!r} below the admissible minimum {-(kappa - 4) ** 2 / (16 * kappa)!r}")
    return d


def charge_for_weight(h, kappa):
    """``alpha_h = alpha_0 + sqrt(alpha_0^2 + h)``."""
    _check_kappa(kappa)
    a0 = constants(kappa).alpha0
    disc = a0 * a0 + h
    if disc < 0:
        raise DomainError(f"h={h!r} below the admissible minimum {-a0 * a0!r}")
    return a0 + math.sqrt(disc)


def delta_h(kappa, h):
    """Boundary exponent ``Delta(h) = (kappa - 4 + sqrt((kappa-4)^2 + 16 kappa h)) / (2 kappa)``.

    ``Delta(1) = 1`` for every kappa.  ``Delta(0)`` is 0 for ``kappa <= 4``
    and ``1 - 4/kappa`` for ``kappa > 4``.
    """
    _check_kappa(kappa)
    return (kappa - 4.0 + math.sqrt(_discriminant(kappa, h))) / (2.0 * kappa)


def boundary_exponent(n_curves, h, kappa):
    """``Delta^(n)(h) = n Delta(h)``, cross-checked against ``2 alpha_{1,n+1} alpha_h``."""
    n = int(n_curves)
    if n < 1 or n != n_curves:
        raise DomainError("n_curves must be a positive integer")
    direct = n * delta_h(kappa, h)
    charge = 2.0 * kac_charge(KacLabel(1.0, n + 1.0), kappa) * charge_for_weight(h, kappa)
    if abs(direct - charge) > 1e-10 * max(1.0, abs(direct)):
        raise ArithmeticError(f"charge form {charge!r} disagrees with {direct!r}")
    return direct


def bulk_exponent(n_curves, h, kappa):
    """``-h/2 + (1/16 + (n-1)/(4 kappa)) (kappa - 4 + sqrt((kappa-4)^2 + 16 kappa h))``.

    For ``kappa > 4`` the value at ``h = 0`` is not zero; the multifractal
    reading of this formula is established for ``kappa <= 4``.
    """
    _check_kappa(kappa)
    n = int(n_curves)
    if n < 1 or n != n_curves:
        raise DomainError("n_curves must be a positive integer")
    root = math.sqrt(_discriminant(kappa, h))
    return -0.5 * h + (1.0 / 16.0 + (n - 1.0) / (4.0 * kappa)) * (kappa - 4.0 + root)


def _pair_sum(values):
    return sum(a * b for a, b in combinations(values, 2))


def higher_boundary_exponent(n_curves, h_list, kappa):
    """``sum_i n Delta(h_i) + (kappa/2) sum_{i<j} Delta(h_i) Delta(h_j)`` over ``n+1`` weights."""
    h_list = list(h_list)
    if len(h_list) != int(n_curves) + 1:
        raise DomainError("h_list must have n_curves + 1 entries")
    deltas = [delta_h(kappa, h) for h in h_list]
    return sum(int(n_curves) * d for d in deltas) + 0.5 * kappa * _pair_sum(deltas)


def higher_bulk_exponent(n_curves, h_list, kappa):
    """``sum_i Delta_bulk^(n)(h_i) + (kappa/4) sum_{i<j} Delta(h_i) Delta(h_j)`` over ``n`` weights."""
    h_list = list(h_list)
    if len(h_list) != int(n_curves):
        raise DomainError("h_list must have n_curves entries")
    deltas = [delta_h(kappa, h) for h in h_list]
    single = sum(bulk_exponent(n_curves, h, kappa) for h in h_list)
    return single + 0.25 * kappa * _pair_sum(deltas)
