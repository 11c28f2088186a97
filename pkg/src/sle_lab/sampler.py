"""Random SLE: Brownian driving, sampled traces and the reduced diffusions.

Randomness is counter based.  Sample ``i`` of a run with master seed ``s``
draws from ``Philox(SeedSequence(s, spawn_key=(i, stream)))``, so its
numbers do not depend on which worker produced it or in what order.

Two families of integrators live here:

* uniform-step Euler-Maruyama for a boundary point ``x_t`` and a bulk
  point ``(u_t, v_t)``; these share the Brownian increments of
  :func:`sample_driving` exactly;
* scale-adaptive splitting schemes used by the Monte-Carlo experiments.
  A step of length ``dt = eta |w|^2`` translates by half the driving
  increment, applies the exact slit map ``w -> sqrt(w^2 + 4 dt)`` and
  translates by the other half.  This is the discrete Loewner chain
  itself, keeps the upper half plane invariant and resolves the approach
  to the driving point at every scale.
"""

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .coulomb import constants
from .errors import ConfigError
from .formulas import fractal_dimension
from .loewner import (
    DrivingFunction,
    MapChain,
    Trace,
    ZipperIndex,
    _block_storage,
    _extend_blocks,
    _fast_pullback,
    discretize,
    full_trace,
    uniform_grid,
)

__all__ = [
    "DEFAULT_SEED",
    "KappaContext",
    "SamplerConfig",
    "BoundaryDiffusionState",
    "BulkDiffusionState",
    "sample_rng",
    "brownian_increments",
    "sample_driving",
    "sample_trace",
    "refine_trace",
    "evolve_boundary_point",
    "evolve_bulk_point",
    "default_absorb_eps",
    "near_self_intersection",
    "touches_boundary",
    "NormalFeed",
    "bulk_passage",
    "boundary_pair_race",
    "boundary_log_derivative",
    "SLIT_AVOIDED",
    "SLIT_HIT",
    "SLIT_UNRESOLVED",
    "slit_race",
]

DEFAULT_SEED = 20240607

# stream ids inside one sample
STREAM_DRIVING = 0
STREAM_LATTICE = 1
STREAM_REFINE = 2


# --------------------------------------------------------------------------
# parameters
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class KappaContext:
    """A validated kappa with its Coulomb-gas constants and phase."""

    kappa: float

    def __post_init__(self):
        k = self.kappa
        if not (math.isfinite(k) and k >= 0):
            raise ConfigError("kappa", f"must be finite and >= 0, got {k!r}")
        object.__setattr__(self, "kappa", float(k))

    @property
    def phase(self):
        if self.kappa <= 4:
            return "simple"
        if self.kappa < 8:
            return "touching"
        return "space-filling"

    @property
    def constants(self):
        """Coulomb-gas constants (None for the deterministic case kappa = 0)."""
        return constants(self.kappa) if self.kappa > 0 else None

    @property
    def g(self):
        return 4.0 / self.kappa if self.kappa > 0 else math.inf

    @property
    def n(self):
        return self.constants.n if self.kappa > 0 else None

    @property
    def q(self):
        return self.constants.q if self.kappa > 0 else None

    @property
    def c(self):
        return self.constants.c if self.kappa > 0 else None

    @property
    def d_f(self):
        return fractal_dimension(self.kappa) if self.kappa > 0 else 1.0

    @property
    def sqrt_kappa(self):
        return math.sqrt(self.kappa)


@dataclass(frozen=True)
class SamplerConfig:
    total_time: float
    n_steps: int
    master_seed: int = DEFAULT_SEED
    sample_index: int = 0

    def __post_init__(self):
        if not (self.total_time > 0 and math.isfinite(self.total_time)):
            raise ConfigError("total_time", "must be positive and finite")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ConfigError("n_steps", "must be a positive integer")
        if int(self.master_seed) != self.master_seed or not 0 <= self.master_seed < 2 ** 64:
            raise ConfigError("master_seed", "must be an integer in [0, 2^64)")
        if int(self.sample_index) != self.sample_index or self.sample_index < 0:
            raise ConfigError("sample_index", "must be a non-negative integer")

    @property
    def dt(self):
        return self.total_time / self.n_steps

    def with_index(self, index):
        return SamplerConfig(self.total_time, self.n_steps, self.master_seed, int(index))


@dataclass(frozen=True)
class BoundaryDiffusionState:
    """Boundary point after evolution; ``log_deriv`` is ``log|w_t'(x0)|``."""

    x: float
    log_deriv: float
    alive: bool
    absorb_time: float = None


@dataclass(frozen=True)
class BulkDiffusionState:
    """Bulk point ``w_t = u + iv`` with ``q = u/v`` and the accumulated ``D``."""

    u: float
    v: float
    q: float
    D: float
    alive: bool
    time: float = 0.0


# --------------------------------------------------------------------------
# randomness
# --------------------------------------------------------------------------

def sample_rng(master_seed, sample_index, stream=STREAM_DRIVING):
    """Independent generator for one (seed, sample, stream) triple."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(sample_index), int(stream)))
    return np.random.Generator(np.random.Philox(ss))


def brownian_increments(cfg):
    """Standard Brownian increments ``B(t_{i+1}) - B(t_i)`` on the uniform grid."""
    rng = sample_rng(cfg.master_seed, cfg.sample_index)
    return rng.standard_normal(cfg.n_steps) * math.sqrt(cfg.dt)


def sample_driving(ctx, cfg):
    """``xi = sqrt(kappa) B`` on the uniform grid of ``cfg``."""
    inc = ctx.sqrt_kappa * brownian_increments(cfg)
    values = np.concatenate([[0.0], np.cumsum(inc)])
    return DrivingFunction(uniform_grid(cfg.total_time, cfg.n_steps), values)


def sample_trace(ctx, cfg, tip_eps=None, stride=1):
    """Trace of one SLE sample, ``gamma(0) = 0``, every ``stride``-th grid time."""
    return full_trace(discretize(sample_driving(ctx, cfg)), tip_eps=tip_eps, stride=stride)


def refine_trace(ctx, cfg, max_segment, max_rounds=16, max_points=2_000_000, tip_eps=None):
    """Sample trace whose long polyline segments are resolved by bisection.

    Capacity time is a poor clock for a fractal curve: a few grid intervals
    carry long straight chords.  Each round finds the chords longer than
    ``max_segment``, splits their intervals at the midpoint with a Brownian
    bridge value (the same Brownian path, sampled finer) and recomputes
    the trace.  Bridge normals come from their own stream.

    Returns ``(trace, n_long)`` with ``n_long`` the chords still longer than
    ``max_segment`` when the rounds or the point budget ran out.
    """
    drv = sample_driving(ctx, cfg)
    t, v = drv.times, drv.values
    bridge = sample_rng(cfg.master_seed, cfg.sample_index, STREAM_REFINE)
    min_dt = 1e-13 * cfg.total_time
    for rnd in range(max_rounds + 1):
        chain = MapChain(np.diff(t), 0.5 * (v[1:] + v[:-1]))
        pts = ZipperIndex(chain).points(np.arange(t.size), tip_eps)
        pts[0] = 0.0
        long = np.nonzero((np.abs(np.diff(pts)) > max_segment) & (chain.dt > min_dt))[0]
        if rnd == max_rounds or long.size == 0 or t.size + long.size > max_points:
            break
        span = t[long + 1] - t[long]
        mid = 0.5 * (v[long] + v[long + 1]) + 0.5 * ctx.sqrt_kappa * np.sqrt(span) * bridge.standard_normal(long.size)
        t = np.insert(t, long + 1, 0.5 * (t[long] + t[long + 1]))
        v = np.insert(v, long + 1, mid)
    return Trace(t, pts), int(long.size)


# --------------------------------------------------------------------------
# uniform-step Euler-Maruyama
# --------------------------------------------------------------------------

def default_absorb_eps(ctx, cfg):
    return 1e-4 * ctx.sqrt_kappa * math.sqrt(cfg.dt)


@njit(cache=True)
def _boundary_em(x0, dB, dt, sqrt_kappa, absorb_eps):
    x = x0
    logd = 0.0
    for i in range(dB.size):
        drift = 2.0 * dt / x
        cap = 0.5 * abs(x)
        if abs(drift) > cap:
            drift = math.copysign(cap, drift)
        logd -= 2.0 * dt / (x * x)
        xn = x + drift - sqrt_kappa * dB[i]
        if abs(xn) < absorb_eps or (xn > 0.0) != (x > 0.0):
            return xn, logd, False, i + 1
        x = xn
    return x, logd, True, dB.size


def evolve_boundary_point(x0, ctx, cfg, absorb_eps=None):
    """Euler-Maruyama for ``dx = 2/x dt - sqrt(kappa) dB`` on the grid of ``cfg``.

    Uses the same increments as :func:`sample_driving` for the same
    ``(seed, index)``.  The drift is capped at ``|x|/2`` per step.  The
    point is absorbed when ``|x| < absorb_eps`` or when a step carries it
    across 0.
    """
    if x0 == 0:
        raise ValueError("x0 must be nonzero")
    eps = default_absorb_eps(ctx, cfg) if absorb_eps is None else float(absorb_eps)
    dB = brownian_increments(cfg)
    x, logd, alive, steps = _boundary_em(float(x0), dB, cfg.dt, ctx.sqrt_kappa, eps)
    return BoundaryDiffusionState(float(x), float(logd), bool(alive), None if alive else steps * cfg.dt)


@njit(cache=True)
def _bulk_em(u0, v0, dB, dt, sqrt_kappa, absorb_eps, q_cut):
    u = u0
    v = v0
    D = 0.0
    for i in range(dB.size):
        r2 = u * u + v * v
        du = 2.0 * u * dt / r2
        cap = 0.5 * math.sqrt(r2)
        if abs(du) > cap:
            du = math.copysign(cap, du)
        dv = 2.0 * v * dt / r2
        if dv > 0.5 * v:
            dv = 0.5 * v
        D += 4.0 * v * v / (r2 * r2) * dt
        u = u + du - sqrt_kappa * dB[i]
        v = v - dv
        if u * u + v * v < absorb_eps * absorb_eps or abs(u) >= q_cut * v:
            return u, v, D, False, i + 1
    return u, v, D, True, dB.size


def evolve_bulk_point(z0, ctx, cfg, absorb_eps=None, q_cut=math.inf):
    """Euler-Maruyama for ``du = 2u/|w|^2 dt - sqrt(kappa) dB``, ``dv = -2v/|w|^2 dt``.

    ``v`` decreases at every step (its decrement is capped at ``v/2``).
    Integration stops early when ``|w| < absorb_eps`` or ``|q| >= q_cut``.
    """
    z0 = complex(z0)
    if not z0.imag > 0:
        raise ValueError("z0 must lie in the open upper half plane")
    eps = default_absorb_eps(ctx, cfg) if absorb_eps is None else float(absorb_eps)
    dB = brownian_increments(cfg)
    u, v, D, alive, steps = _bulk_em(z0.real, z0.imag, dB, cfg.dt, ctx.sqrt_kappa, eps, float(q_cut))
    return BulkDiffusionState(float(u), float(v), float(u / v), float(D), bool(alive), steps * cfg.dt)


# --------------------------------------------------------------------------
# regularized geometric checks on traces
# --------------------------------------------------------------------------

@njit(cache=True)
def _near_pairs(x, y, s, delta, min_sep):
    n = x.size
    cx = np.floor(x / delta).astype(np.int64)
    cy = np.floor(y / delta).astype(np.int64)
    key = (cx - cx.min()) * (cy.max() - cy.min() + 3) + (cy - cy.min() + 1)
    width = cy.max() - cy.min() + 3
    order = np.argsort(key)
    sk = key[order]
    d2 = delta * delta
    for i in range(n):
        for ox in (-1, 0, 1):
            for oy in (-1, 0, 1):
                target = key[i] + ox * width + oy
                lo = np.searchsorted(sk, target)
                hi = np.searchsorted(sk, target + 1)
                for m in range(lo, hi):
                    j = order[m]
                    if j <= i:
                        continue
                    if abs(s[j] - s[i]) <= min_sep:
                        continue
                    dx = x[j] - x[i]
                    dy = y[j] - y[i]
                    if dx * dx + dy * dy < d2:
                        return True
    return False


def near_self_intersection(trace, delta, separation=4.0):
    """True when the trace comes within ``delta`` of an earlier part of itself.

    Only pairs separated by more than ``separation * delta`` of arc length
    count, so consecutive samples never trigger the test.
    """
    p = np.asarray(trace.points)
    seg = np.abs(np.diff(p))
    s = np.concatenate([[0.0], np.cumsum(seg)])
    return bool(_near_pairs(p.real.copy(), p.imag.copy(), s, float(delta), separation * delta))


def touches_boundary(trace, delta, exclude_radius=None):
    """True when the trace comes within ``delta`` of the real axis away from 0.

    Points inside ``|z| <= exclude_radius`` (default ``10 delta``) are ignored,
    because every trace starts on the axis.
    """
    r0 = 10.0 * delta if exclude_radius is None else exclude_radius
    p = np.asarray(trace.points)
    return bool(np.any((p.imag < delta) & (np.abs(p) > r0)))


# --------------------------------------------------------------------------
# scale-adaptive splitting schemes
# --------------------------------------------------------------------------

NEED_NORMALS = -99


class NormalFeed:
    """Refillable buffer of standard normals drawn from one sample stream."""

    def __init__(self, rng, chunk=4096):
        self.rng = rng
        self.chunk = int(chunk)
        self.buf = rng.standard_normal(self.chunk)
        self.pos = np.zeros(1, dtype=np.int64)

    def refill(self):
        self.chunk = min(2 * self.chunk, 1 << 20)
        self.buf = self.rng.standard_normal(self.chunk)
        self.pos[0] = 0


@njit(cache=True, inline="always")
def _slit_upper(u, v, dt):
    # (u + iv) -> sqrt((u + iv)^2 + 4 dt) on the branch with Im >= 0
    re = u * u - v * v + 4.0 * dt
    im = 2.0 * u * v
    m = math.sqrt(re * re + im * im)
    if re >= 0.0:
        sr = math.sqrt(0.5 * (m + re))
        si = 0.5 * im / sr if sr > 0.0 else 0.0
    else:
        si = math.sqrt(0.5 * (m - re))
        sr = 0.5 * im / si
    if si < 0.0:
        sr = -sr
        si = -si
    return sr, si


@njit(cache=True)
def _bulk_passage_kernel(state, buf, pos, eta, sqrt_kappa, q_cut, t_max, max_steps):
    # state: u, v, t, steps ; returns +1 left, -1 right, 0 unresolved, NEED_NORMALS
    u, v, t, steps = state[0], state[1], state[2], state[3]
    p = pos[0]
    status = 0
    while True:
        if abs(u) >= q_cut * v:
            status = 1 if u > 0 else -1
            break
        if t >= t_max or steps >= max_steps:
            status = 0
            break
        if p + 2 > buf.size:
            status = NEED_NORMALS
            break
        dt = eta * (u * u + v * v)
        if t + dt > t_max:
            dt = t_max - t
        h = math.sqrt(0.5 * dt) * sqrt_kappa
        u -= h * buf[p]
        u, v = _slit_upper(u, v, dt)
        u -= h * buf[p + 1]
        p += 2
        t += dt
        steps += 1
        if v <= 0.0:
            status = 1 if u > 0 else -1
            break
    state[0], state[1], state[2], state[3] = u, v, t, steps
    pos[0] = p
    return status


def bulk_passage(z0, kappa, rng, eta=1e-3, q_cut=1e3, t_max=math.inf, max_steps=10 ** 7):
    """Evolve ``w_t = g_t(z0) - xi_t`` until ``|u/v| >= q_cut``.

    Returns ``(side, steps)`` where ``side`` is +1 when the trace passes to
    the left of ``z0`` (``q -> +inf``), -1 for the right, 0 if unresolved.
    """
    z0 = complex(z0)
    state = np.array([z0.real, z0.imag, 0.0, 0.0])
    feed = NormalFeed(rng)
    while True:
        s = _bulk_passage_kernel(state, feed.buf, feed.pos, eta, math.sqrt(kappa), q_cut, t_max, max_steps)
        if s != NEED_NORMALS:
            return int(s), int(state[3])
        feed.refill()


@njit(cache=True, inline="always")
def _slit_real(x, dt):
    r = math.sqrt(x * x + 4.0 * dt)
    return r if x >= 0.0 else -r


@njit(cache=True)
def _pair_race_kernel(state, buf, pos, eta, sqrt_kappa, rel_eps, t_max, max_steps):
    # state: xa (<0), xc (>0), t, steps ; returns +1 c first, -1 a first, 0 unresolved
    xa, xc, t, steps = state[0], state[1], state[2], state[3]
    p = pos[0]
    status = 0
    while True:
        gap = xc - xa
        if xa >= -rel_eps * gap:
            status = -1
            break
        if xc <= rel_eps * gap:
            status = 1
            break
        if t >= t_max or steps >= max_steps:
            status = 0
            break
        if p + 2 > buf.size:
            status = NEED_NORMALS
            break
        near = min(-xa, xc)
        dt = eta * near * near
        if t + dt > t_max:
            dt = t_max - t
        h = math.sqrt(0.5 * dt) * sqrt_kappa
        d = h * buf[p]
        xa = _slit_real(xa - d, dt)
        xc = _slit_real(xc - d, dt)
        d = h * buf[p + 1]
        xa -= d
        xc -= d
        p += 2
        t += dt
        steps += 1
        # a jump across the driving point (an ~18 sigma event at the default
        # eta) swallows the point that crossed it
        if xa >= 0.0:
            status = -1
            break
        if xc <= 0.0:
            status = 1
            break
    state[0], state[1], state[2], state[3] = xa, xc, t, steps
    pos[0] = p
    return status


def boundary_pair_race(xa, xc, kappa, rng, eta=2e-3, rel_eps=1e-13, t_max=math.inf, max_steps=10 ** 8):
    """Which of two boundary points ``xa < 0 < xc`` is swallowed first.

    Both follow ``dx = 2/x dt - sqrt(kappa) dB`` with the same noise.  A
    point counts as swallowed once it is within ``rel_eps`` times the
    current gap of the driving point.  Returns ``(+1 | -1 | 0, steps)``:
    +1 means ``xc`` went first (a crossing), -1 means ``xa``.
    """
    if not xa < 0 < xc:
        raise ValueError("need xa < 0 < xc")
    state = np.array([float(xa), float(xc), 0.0, 0.0])
    feed = NormalFeed(rng)
    while True:
        s = _pair_race_kernel(state, feed.buf, feed.pos, eta, math.sqrt(kappa), rel_eps, t_max, max_steps)
        if s != NEED_NORMALS:
            return int(s), int(state[3])
        feed.refill()


@njit(cache=True)
def _log_derivative_kernel(state, out, ladder, buf, pos, eta, sqrt_kappa, rel_eps, max_steps):
    # state: x, logd, t, steps, next_ladder_index, x0 ; out[j] = log|w'| at ladder[j]
    x, logd, t, steps = state[0], state[1], state[2], state[3]
    j = int(state[4])
    x0 = state[5]
    p = pos[0]
    while j < ladder.size:
        if abs(x) <= rel_eps * abs(x0):
            for m in range(j, ladder.size):
                out[m] = -np.inf
            j = ladder.size
            break
        if steps >= max_steps:
            break
        if p + 2 > buf.size:
            state[0], state[1], state[2], state[3], state[4] = x, logd, t, steps, j
            pos[0] = p
            return NEED_NORMALS
        dt = eta * x * x
        if t + dt >= ladder[j]:
            dt = ladder[j] - t
        h = math.sqrt(0.5 * dt) * sqrt_kappa
        xn = x - h * buf[p]
        if (xn > 0.0) != (x > 0.0):
            x = 0.0
            continue
        logd -= 0.5 * math.log1p(4.0 * dt / (xn * xn))
        xn = _slit_real(xn, dt)
        x = xn - h * buf[p + 1]
        if (x > 0.0) != (xn > 0.0):
            x = 0.0
        p += 2
        t += dt
        steps += 1
        if t >= ladder[j]:
            t = ladder[j]
            out[j] = logd
            j += 1
    state[0], state[1], state[2], state[3], state[4] = x, logd, t, steps, j
    pos[0] = p
    return 0 if j >= ladder.size else 1


def boundary_log_derivative(x0, kappa, ladder, rng, eta=1e-3, rel_eps=1e-13, max_steps=10 ** 8):
    """``log|w_t'(x0)|`` at the (increasing) ``ladder`` times.

    The derivative of each slit step is exact, ``x/sqrt(x^2 + 4 dt)``.  Once
    ``x`` reaches the driving point (relative to ``x0``) it is swallowed and
    later entries are ``-inf``.  Entries past ``max_steps`` are NaN.
    """
    ladder = np.asarray(ladder, dtype=float)
    if ladder.ndim != 1 or np.any(np.diff(ladder) <= 0) or ladder[0] <= 0:
        raise ValueError("ladder must be positive and increasing")
    out = np.full(ladder.size, np.nan)
    state = np.array([float(x0), 0.0, 0.0, 0.0, 0.0, float(x0)])
    feed = NormalFeed(rng)
    while True:
        s = _log_derivative_kernel(state, out, ladder, feed.buf, feed.pos, eta, math.sqrt(kappa), rel_eps, max_steps)
        if s != NEED_NORMALS:
            return out
        feed.refill()


# --------------------------------------------------------------------------
# trace against a vertical slit
# --------------------------------------------------------------------------

SLIT_AVOIDED = 1
SLIT_HIT = -1
SLIT_UNRESOLVED = 0


@njit(cache=True, inline="always")
def _slit_distance(x, y, x0, height):
    return math.hypot(x - x0, y - min(max(y, 0.0), height))


@njit(cache=True)
def _slit_race_kernel(state, dt, xi, blocks_size, blocks_offset, center, radius, coef,
                      buf, pos, x0, height, radii, eta, sqrt_kappa, hit_eps):
    # state: n, xi_end, t, tip_x, tip_y, number of radii already left
    n = int(state[0])
    k = int(state[5])
    xe, t, tx, ty = state[1], state[2], state[3], state[4]
    p = pos[0]
    status = SLIT_UNRESOLVED
    while n < dt.size:
        if p + 2 > buf.size:
            status = NEED_NORMALS
            break
        d = _slit_distance(tx, ty, x0, height)
        scale = max(math.hypot(tx, ty), 2.0 * math.sqrt(t), hit_eps)
        s = max(min(d, scale), hit_eps)
        h = eta * s * s
        half = math.sqrt(0.5 * h) * sqrt_kappa
        xm = xe + half * buf[p]
        xe = xm + half * buf[p + 1]
        p += 2
        dt[n] = h
        xi[n] = xm
        n += 1
        t += h
        _extend_blocks(dt, xi, n, blocks_size, blocks_offset, center, radius, coef)
        # the tip of the newest slit is the pre-image of its base point
        x, y = _fast_pullback(xm, 0.0, n, dt, xi, blocks_size, blocks_offset, center, radius, coef)
        if (tx - x0) * (x - x0) <= 0.0 and tx != x:
            yc = ty + (x0 - tx) / (x - tx) * (y - ty)
            if yc <= height:
                status = SLIT_HIT
                tx, ty = x, y
                break
        tx, ty = x, y
        if _slit_distance(tx, ty, x0, height) < hit_eps:
            status = SLIT_HIT
            break
        rt = math.hypot(tx, ty)
        while k < radii.size and rt > radii[k]:
            k += 1
        if k == radii.size:
            status = SLIT_AVOIDED
            break
    state[0], state[1], state[2], state[3], state[4], state[5] = n, xe, t, tx, ty, k
    pos[0] = p
    return status


class _SlitWorkspace:
    # chain and block tables are reused across samples of one process
    cache = {}

    @classmethod
    def get(cls, max_steps):
        ws = cls.cache.get(max_steps)
        if ws is None:
            ws = (np.empty(max_steps), np.empty(max_steps), _block_storage(max_steps, 8))
            cls.cache = {max_steps: ws}
        return ws


def slit_race(x0, height, kappa, rng, r_escape, eta=0.02, hit_eps=1e-3, max_steps=1 << 17):
    """Grow a trace until it meets the slit ``[x0, x0 + i height]`` or leaves ``|z| < r_escape``.

    ``r_escape`` may be a sequence of radii; the run then continues to the
    largest one and also reports how many of them were left before a hit.

    Steps are ``dt = eta s^2`` with ``s`` the smaller of the tip's distance to
    the slit and the current size of the trace (floored at ``hit_eps``).  The
    tip is recomputed after every step through incrementally built block
    expansions of the chain.  A hit is a polyline segment crossing the slit
    or a tip closer than ``hit_eps``.

    Returns ``(status, steps, n_left)`` with status ``SLIT_AVOIDED``,
    ``SLIT_HIT`` or ``SLIT_UNRESOLVED`` (step budget exhausted) and
    ``n_left`` the number of escape radii crossed before the run ended.
    """
    if x0 == 0 or not height >= 0:
        raise ValueError("slit must stand off the origin with non-negative height")
    radii = np.sort(np.atleast_1d(np.asarray(r_escape, dtype=float)))
    if radii[0] <= abs(x0) + height:
        raise ValueError("escape radius must enclose the slit")
    dt, xi, blocks = _SlitWorkspace.get(int(max_steps))
    state = np.zeros(6)
    feed = NormalFeed(rng)
    while True:
        s = _slit_race_kernel(state, dt, xi, *blocks, feed.buf, feed.pos, float(x0), float(height),
                              radii, float(eta), math.sqrt(kappa), float(hit_eps))
        if s != NEED_NORMALS:
            return int(s), int(state[0]), int(state[5])
        feed.refill()
