"""Monte-Carlo experiments that confront sampled SLE with closed forms.

Every estimator takes a master seed; sample ``i`` draws only from its own
counter-based stream, and results are reduced in index order, so a run is
bit-identical for any number of workers.

Verdicts use a 3-sigma gate plus an explicit additive allowance for the
time-discretization bias of each experiment.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from numba import njit
from scipy import stats

from . import __version__
from .errors import ConfigError, DomainError
from .formulas import (
    RectangleGeometry,
    SlitHull,
    bessel_hit_probability,
    cardy_crossing,
    delta_h,
    derivative_expectation,
    fractal_dimension,
    left_passage_prob,
    restriction_prob_slit,
)
from .sampler import (
    DEFAULT_SEED,
    boundary_log_derivative,
    boundary_pair_race,
    bulk_passage,
    sample_rng,
    slit_race,
)

__all__ = [
    "Estimate",
    "RegressionFit",
    "fit_line",
    "bernoulli",
    "map_samples",
    "estimate_left_passage",
    "estimate_crossing",
    "box_counts",
    "estimate_box_dimension",
    "estimate_derivative_exponent",
    "estimate_restriction",
    "estimate_swallow_fraction",
    "report",
]

GATE_SIGMAS = 3.0


# --------------------------------------------------------------------------
# result types
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Estimate:
    """A Monte-Carlo mean with its standard error and comparison metadata."""

    value: float
    std_error: float
    n_samples: int
    target: float = None
    allowance: float = 0.0
    unresolved: int = 0
    fingerprint: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    @property
    def z_score(self):
        if self.target is None:
            return None
        diff = self.value - self.target
        if self.std_error > 0:
            return diff / self.std_error
        return 0.0 if diff == 0 else math.copysign(math.inf, diff)

    @property
    def unresolved_fraction(self):
        total = self.n_samples + self.unresolved
        return self.unresolved / total if total else 0.0

    @property
    def warning(self):
        """More than 5% of the samples ended undecided."""
        return self.unresolved_fraction > 0.05

    @property
    def passed(self):
        if self.target is None:
            return None
        return abs(self.value - self.target) <= GATE_SIGMAS * self.std_error + self.allowance


@dataclass(frozen=True)
class RegressionFit:
    """Least-squares line ``y = slope x + intercept`` with the points it used."""

    slope: float
    intercept: float
    slope_std_error: float
    r_squared: float
    x_range: tuple
    x: np.ndarray
    y: np.ndarray
    target: float = None
    excluded: tuple = ()
    fingerprint: dict = field(default_factory=dict)
    table: dict = field(default_factory=dict)

    def fitted(self, x=None):
        x = self.x if x is None else np.asarray(x, dtype=float)
        return self.slope * x + self.intercept


def fit_line(x, y, target=None, excluded=(), fingerprint=None, table=None):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 4:
        raise DomainError(f"a fit needs at least 4 points, got {x.size}")
    res = stats.linregress(x, y)
    return RegressionFit(
        slope=float(res.slope),
        intercept=float(res.intercept),
        slope_std_error=float(res.stderr),
        r_squared=float(min(max(res.rvalue ** 2, 0.0), 1.0)),
        x_range=(float(x.min()), float(x.max())),
        x=x,
        y=y,
        target=target,
        excluded=tuple(excluded),
        fingerprint=dict(fingerprint or {}),
        table=dict(table or {}),
    )


def bernoulli(successes, n, **meta):
    """Estimate of a probability from ``successes`` out of ``n`` resolved samples."""
    if n < 1:
        raise DomainError("no resolved samples")
    p = successes / n
    return Estimate(p, math.sqrt(p * (1.0 - p) / n), int(n), **meta)


# --------------------------------------------------------------------------
# sample loops
# --------------------------------------------------------------------------

def map_samples(func, n_samples, workers=1, chunksize=64):
    """``[func(0), ..., func(n-1)]`` computed serially or on a process pool."""
    if workers is None or workers <= 1:
        return [func(i) for i in range(n_samples)]
    with ProcessPoolExecutor(max_workers=int(workers)) as pool:
        return list(pool.map(func, range(n_samples), chunksize=chunksize))


def _check_samples(n_samples):
    if int(n_samples) != n_samples or n_samples < 1:
        raise ConfigError("n_samples", "must be a positive integer")
    return int(n_samples)


def _fingerprint(experiment, kappa, seed, n_samples, **params):
    return dict(experiment=experiment, kappa=kappa, seed=int(seed), n_samples=int(n_samples), version=__version__, **params)


# --------------------------------------------------------------------------
# left passage
# --------------------------------------------------------------------------

def _left_passage_sample(i, seed, z0, kappa, eta, q_cut, t_max, max_steps):
    side, _ = bulk_passage(z0, kappa, sample_rng(seed, i), eta, q_cut, t_max, max_steps)
    return side


def estimate_left_passage(kappa, z0, n_samples, seed=DEFAULT_SEED, eta=1e-3, q_cut=1e3,
                          t_max=math.inf, max_steps=10 ** 7, allowance=0.01, workers=1):
    """Fraction of traces passing left of ``z0``.

    ``q = Re w / Im w`` for ``w = g_t(z0) - xi_t`` is followed until it
    leaves ``(-q_cut, q_cut)`` or ``z0`` is swallowed; the sign decides the
    side.  Samples still inside the band at ``t_max`` are unresolved.
    """
    if not 0 < kappa < 8:
        raise ConfigError("kappa", "left passage needs 0 < kappa < 8")
    z0 = complex(z0)
    if not z0.imag > 0:
        raise ConfigError("z0", "must lie in the upper half plane")
    n = _check_samples(n_samples)
    fn = partial(_left_passage_sample, seed=seed, z0=z0, kappa=kappa, eta=eta, q_cut=q_cut, t_max=t_max, max_steps=max_steps)
    sides = np.array(map_samples(fn, n, workers), dtype=np.int64)
    resolved = int(np.count_nonzero(sides))
    fp = _fingerprint("left-passage", kappa, seed, n, z0=[z0.real, z0.imag], eta=eta, q_cut=q_cut, t_max=t_max)
    return bernoulli(int(np.count_nonzero(sides > 0)), resolved, target=left_passage_prob(kappa, z0.real, z0.imag),
                     allowance=allowance, unresolved=n - resolved, fingerprint=fp)


# --------------------------------------------------------------------------
# crossing
# --------------------------------------------------------------------------

def _crossing_sample(i, seed, xa, xc, kappa, eta, t_max):
    side, _ = boundary_pair_race(xa, xc, kappa, sample_rng(seed, i), eta, t_max=t_max)
    return side


def estimate_crossing(kappa, geometry, n_samples, seed=DEFAULT_SEED, eta=2e-3, t_max=math.inf,
                      allowance=0.01, workers=1):
    """Frequency of ``tau_c < tau_a`` for ``a = -r`` and ``c = 1 - r``.

    ``geometry`` is a :class:`RectangleGeometry` or a cross ratio ``r``.
    Both points are driven by the same Brownian path.
    """
    if not 4 < kappa < 8:
        raise ConfigError("kappa", "crossing needs 4 < kappa < 8")
    r = geometry.cross_ratio if isinstance(geometry, RectangleGeometry) else float(geometry)
    if not 0 < r < 1:
        raise ConfigError("geometry", "cross ratio must lie in (0, 1)")
    n = _check_samples(n_samples)
    fn = partial(_crossing_sample, seed=seed, xa=-r, xc=1.0 - r, kappa=kappa, eta=eta, t_max=t_max)
    out = np.array(map_samples(fn, n, workers), dtype=np.int64)
    resolved = int(np.count_nonzero(out))
    fp = _fingerprint("crossing", kappa, seed, n, cross_ratio=r, eta=eta, t_max=t_max)
    return bernoulli(int(np.count_nonzero(out > 0)), resolved, target=cardy_crossing(kappa, r), allowance=allowance,
                     unresolved=n - resolved, fingerprint=fp)


# --------------------------------------------------------------------------
# box counting
# --------------------------------------------------------------------------

@njit(cache=True)
def _box_count(x, y, eps, ox, oy):
    # cells of side eps met by the polyline, each chord walked at eps/4
    n = x.size
    cap = 1
    for i in range(n - 1):
        cap += int(math.hypot(x[i + 1] - x[i], y[i + 1] - y[i]) / (0.25 * eps)) + 1
    keys = np.empty(cap, dtype=np.int64)
    k = 0
    for i in range(n):
        if i < n - 1:
            m = int(math.hypot(x[i + 1] - x[i], y[i + 1] - y[i]) / (0.25 * eps)) + 1
        else:
            m = 1
        for j in range(m):
            s = j / m
            px = x[i] + s * (x[i + 1] - x[i]) if i < n - 1 else x[i]
            py = y[i] + s * (y[i + 1] - y[i]) if i < n - 1 else y[i]
            cx = int(math.floor((px - ox) / eps)) + (1 << 30)
            cy = int(math.floor((py - oy) / eps)) + (1 << 30)
            keys[k] = (cx << 31) | cy
            k += 1
    keys = np.sort(keys[:k])
    count = 1
    for i in range(1, k):
        if keys[i] != keys[i - 1]:
            count += 1
    return count


def box_counts(points, radii, offsets):
    """Number of grid cells met by a polyline, averaged over grid offsets.

    ``offsets`` are fractions of the cell size, shape ``(m, 2)``.
    """
    p = np.asarray(points, dtype=complex)
    x = np.ascontiguousarray(p.real)
    y = np.ascontiguousarray(p.imag)
    out = np.empty(len(radii))
    for j, eps in enumerate(radii):
        out[j] = np.mean([_box_count(x, y, float(eps), ox * eps, oy * eps) for ox, oy in offsets])
    return out


def estimate_box_dimension(traces, radii, kappa=None, seed=DEFAULT_SEED, n_offsets=4, min_resolution=2.0):
    """Slope of ``log N(eps)`` against ``log(1/eps)`` over a set of traces.

    Radii below ``min_resolution`` times the longest chord of any trace, or
    above a quarter of the smallest trace diameter, fall outside the
    scaling window and are excluded with a note.
    """
    radii = np.sort(np.asarray(radii, dtype=float))
    if radii.size < 4 or np.log10(radii[-1] / radii[0]) < 1.5:
        raise DomainError("need at least 4 radii spanning 1.5 decades")
    pts = [np.asarray(getattr(tr, "points", tr), dtype=complex) for tr in traces]
    if not pts:
        raise DomainError("no traces")
    chord = max(float(np.abs(np.diff(p)).max()) for p in pts)
    diam = min(_diameter(p) for p in pts)
    keep = (radii >= min_resolution * chord) & (radii <= 0.25 * diam)
    excluded = []
    for eps in radii[~keep]:
        why = "below trace resolution" if eps < min_resolution * chord else "above a quarter of the trace diameter"
        excluded.append(f"eps={eps:.6g}: {why}")
    used = radii[keep]
    if used.size < 4:
        raise DomainError(f"only {used.size} radii inside the scaling window [{min_resolution * chord:.3g}, {0.25 * diam:.3g}]")
    offsets = sample_rng(seed, 0).random((n_offsets, 2))
    counts = np.mean([box_counts(p, used, offsets) for p in pts], axis=0)
    target = fractal_dimension(kappa) if kappa else (1.0 if kappa == 0 else None)
    fp = dict(experiment="dimension", kappa=kappa, seed=int(seed), n_traces=len(pts), n_offsets=int(n_offsets), version=__version__)
    return fit_line(np.log(1.0 / used), np.log(counts), target=target, excluded=excluded, fingerprint=fp,
                    table=dict(eps=used, counts=counts))


def _diameter(p):
    # enough for a window bound: the larger extent of the bounding box
    return float(max(np.ptp(p.real), np.ptp(p.imag)))


# --------------------------------------------------------------------------
# derivative moments
# --------------------------------------------------------------------------

def _log_derivative_sample(i, seed, x0, kappa, ladder, eta, max_steps):
    return boundary_log_derivative(x0, kappa, ladder, sample_rng(seed, i), eta, max_steps=max_steps)


def estimate_derivative_exponent(kappa, h, x0, time_ladder, n_samples, seed=DEFAULT_SEED, eta=1e-3,
                                 max_steps=10 ** 8, workers=1):
    """Fit ``log E|w_t'(x0)|^h`` against ``log(|x0| / sqrt(2 kappa t))``.

    Swallowed samples contribute zero.  The table carries the per-time
    means, their standard errors, the closed form and the z-scores, so the
    full curve can be checked and not only its slope.
    """
    if not kappa > 0:
        raise ConfigError("kappa", "must be positive")
    if not h > 0:
        raise ConfigError("h", "must be positive")
    if x0 == 0:
        raise ConfigError("x0", "must be non-zero")
    ladder = np.asarray(time_ladder, dtype=float)
    n = _check_samples(n_samples)
    fn = partial(_log_derivative_sample, seed=seed, x0=float(x0), kappa=kappa, ladder=ladder, eta=eta, max_steps=max_steps)
    logs = np.array(map_samples(fn, n, workers))
    unresolved = np.isnan(logs)
    if unresolved.any():
        raise DomainError("step budget exhausted before the last ladder time")
    vals = np.exp(h * logs)
    mean = vals.mean(axis=0)
    se = vals.std(axis=0, ddof=1) / math.sqrt(n)
    exact = np.array([derivative_expectation(kappa, h, x0, t) for t in ladder])
    absorbed = np.isneginf(logs).mean(axis=0)
    x = np.log(abs(x0) / np.sqrt(2.0 * kappa * ladder))
    fp = _fingerprint("derivative", kappa, seed, n, h=h, x0=float(x0), ladder=ladder.tolist(), eta=eta)
    table = dict(t=ladder, mean=mean, std_error=se, closed_form=exact, z_score=(mean - exact) / se,
                 absorbed_fraction=absorbed)
    return fit_line(x, np.log(mean), target=delta_h(kappa, h), fingerprint=fp, table=table)


# --------------------------------------------------------------------------
# restriction
# --------------------------------------------------------------------------

def _restriction_sample(i, seed, x0, height, radii, eta, hit_eps, max_steps):
    status, steps, n_left = slit_race(x0, height, 8.0 / 3.0, sample_rng(seed, i), radii, eta, hit_eps, max_steps)
    return status, n_left


def estimate_restriction(hull, n_samples, seed=DEFAULT_SEED, escape_factor=20.0, n_doublings=1, eta=0.02,
                         hit_eps=1e-3, max_steps=1 << 17, allowance=0.02, workers=1):
    """Frequency with which SLE_8/3 avoids the slit ``hull``.

    A trace avoids the slit if it leaves the disc of radius
    ``R = escape_factor (|x0| + l)`` first.  The same runs continue to
    ``2R, 4R, ...`` (``n_doublings`` times), which measures how the
    finite-radius surrogate depends on ``R``; that trend is in ``extras``.
    """
    if not isinstance(hull, SlitHull):
        raise ConfigError("hull", "must be a SlitHull")
    n = _check_samples(n_samples)
    r0 = escape_factor * (abs(hull.base) + hull.height)
    radii = r0 * 2.0 ** np.arange(n_doublings + 1)
    fn = partial(_restriction_sample, seed=seed, x0=hull.base, height=hull.height, radii=radii, eta=eta,
                 hit_eps=hit_eps, max_steps=max_steps)
    out = np.array(map_samples(fn, n, workers), dtype=np.int64)
    status, n_left = out[:, 0], out[:, 1]
    trend = []
    for j, r in enumerate(radii):
        # decided at radius r once the run ended or left the r-disc
        decided = (status != 0) | (n_left > j)
        avoided = decided & (n_left > j)
        trend.append((float(r), float(avoided.sum() / max(decided.sum(), 1))))
        if j == 0:
            resolved, n_avoided = int(decided.sum()), int(avoided.sum())
    fp = _fingerprint("restriction", 8.0 / 3.0, seed, n, slit=[hull.base, hull.height], escape_radius=r0,
                      n_doublings=int(n_doublings), eta=eta, hit_eps=hit_eps)
    return bernoulli(n_avoided, resolved, target=restriction_prob_slit(hull), allowance=allowance,
                     unresolved=n - resolved, fingerprint=fp, extras=dict(radius_trend=trend))


# --------------------------------------------------------------------------
# swallowing phase
# --------------------------------------------------------------------------

def estimate_swallow_fraction(kappa, x0, T, n_samples, seed=DEFAULT_SEED, eta=1e-3, max_steps=10 ** 8, workers=1):
    """Fraction of boundary points ``x0`` swallowed by time ``T``.

    The target is the phase value (0 for ``kappa <= 4``, 1 above); the
    exact finite-``T`` probability is in ``extras``.
    """
    if not kappa > 0:
        raise ConfigError("kappa", "must be positive")
    if x0 == 0:
        raise ConfigError("x0", "must be non-zero")
    if not T > 0:
        raise ConfigError("T", "must be positive")
    n = _check_samples(n_samples)
    fn = partial(_log_derivative_sample, seed=seed, x0=float(x0), kappa=kappa, ladder=np.array([float(T)]), eta=eta,
                 max_steps=max_steps)
    logs = np.array(map_samples(fn, n, workers))[:, 0]
    resolved = ~np.isnan(logs)
    fp = _fingerprint("swallow", kappa, seed, n, x0=float(x0), T=float(T), eta=eta)
    exact = bessel_hit_probability(kappa, abs(x0), T)
    return bernoulli(int(np.isneginf(logs).sum()), int(resolved.sum()), target=0.0 if kappa <= 4 else 1.0,
                     unresolved=int((~resolved).sum()), fingerprint=fp, extras=dict(finite_time_probability=exact))


# --------------------------------------------------------------------------
# reports
# --------------------------------------------------------------------------

def report(result, experiment=None, kappa=None, params=None):
    """Machine-readable summary of an :class:`Estimate` or :class:`RegressionFit`."""
    fp = dict(result.fingerprint)
    experiment = experiment or fp.get("experiment")
    kappa = kappa if kappa is not None else fp.get("kappa")
    params = dict(params or {k: v for k, v in fp.items() if k not in ("experiment", "kappa", "version")})
    if isinstance(result, Estimate):
        out = dict(estimate=result.value, std_error=result.std_error, target=result.target, z_score=result.z_score,
                   unresolved_fraction=result.unresolved_fraction, n_samples=result.n_samples,
                   allowance=result.allowance, passed=result.passed, extras=result.extras)
    else:
        z = None
        if result.target is not None and result.slope_std_error > 0:
            z = (result.slope - result.target) / result.slope_std_error
        out = dict(estimate=result.slope, std_error=result.slope_std_error, target=result.target, z_score=z,
                   unresolved_fraction=0.0, intercept=result.intercept, r_squared=result.r_squared,
                   x_range=list(result.x_range), excluded=list(result.excluded),
                   points=dict(x=result.x, y=result.y, fitted=result.fitted()),
                   table=result.table)
    return dict(experiment=experiment, kappa=kappa, params=params, fingerprint=fp, version=__version__, **out)
