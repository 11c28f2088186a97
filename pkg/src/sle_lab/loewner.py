"""Deterministic chordal Loewner evolution by composition of slit maps.

A driving function sampled on a capacity-time grid is turned into a
:class:`MapChain`: step ``i`` removes a vertical slit of capacity ``2*dt_i``
standing on ``xi_i``.  Forward composition evolves points (and detects
swallowing), inverse composition reconstructs the trace ("zipper").

Branch convention: both elementary maps are written as
``xi + zeta*sqrt(1 +- 4 dt / zeta^2)`` with ``zeta = w - xi`` and the
principal square root.  This form is analytic off the slit (resp. off
the real segment ``[xi - 2 sqrt(dt), xi + 2 sqrt(dt)]``), keeps the upper
half plane invariant and keeps real points on the correct side of ``xi``.
A final sign flip guards the exact-cut case where roundoff lands below
the axis.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

__all__ = [
    "SWALLOW_EPS",
    "DrivingFunction",
    "MapChain",
    "Trace",
    "PointFate",
    "elementary_slit_map",
    "inverse_slit_map",
    "discretize",
    "evolve_point",
    "evolve_points",
    "trace_point",
    "trace_points",
    "full_trace",
    "ZipperIndex",
    "capacity_check",
    "uniform_grid",
    "refined_grid",
]

SWALLOW_EPS = 1e-6
FAST_THRESHOLD = 4096


# --------------------------------------------------------------------------
# elementary maps
# --------------------------------------------------------------------------

@njit(cache=True, inline="always")
def _slit(w, xi, dt):
    zeta = w - xi
    if dt == 0.0:
        return w
    if zeta == 0.0:
        return xi + 2.0 * math.sqrt(dt)
    r = zeta * np.sqrt(1.0 + 4.0 * dt / (zeta * zeta))
    if r.imag < 0.0:
        r = -r
    return xi + r


@njit(cache=True, inline="always")
def _csqrt_upper(re, im):
    # sqrt(re + i im) on the branch with Im >= 0, real-arithmetic form
    m = math.sqrt(re * re + im * im)
    if m == 0.0:
        return 0.0, 0.0
    if re >= 0.0:
        sr = math.sqrt(0.5 * (m + re))
        si = 0.5 * im / sr
    else:
        si = math.sqrt(0.5 * (m - re))
        sr = 0.5 * im / si
    if si < 0.0:
        return -sr, -si
    return sr, si


@njit(cache=True, inline="always")
def _unslit_xy(x, y, xi, dt):
    """Inverse slit map on (x, y) pairs; the hot loop of the zipper."""
    a = x - xi
    sr, si = _csqrt_upper(a * a - y * y - 4.0 * dt, 2.0 * a * y)
    if si == 0.0 and y == 0.0 and sr != 0.0:
        # real point outside the cut stays on its own side of xi
        sr = math.copysign(abs(sr), a)
    return xi + sr, si


@njit(cache=True, inline="always")
def _unslit(w, xi, dt):
    zeta = w - xi
    if dt == 0.0:
        return w
    if zeta == 0.0:
        return xi + 2.0j * math.sqrt(dt)
    r = zeta * np.sqrt(1.0 - 4.0 * dt / (zeta * zeta))
    if r.imag < 0.0:
        r = -r
    return xi + r


def _np_map(w, xi, dt, sign):
    w = np.asarray(w, dtype=complex)
    xi = np.asarray(xi, dtype=float)
    dt = np.asarray(dt, dtype=float)
    zeta = w - xi
    with np.errstate(divide="ignore", invalid="ignore"):
        r = zeta * np.sqrt(1.0 + sign * 4.0 * dt / (zeta * zeta))
    r = np.where(r.imag < 0.0, -r, r)
    base = np.where(sign > 0, 2.0 * np.sqrt(dt) + 0j, 2.0j * np.sqrt(dt))
    r = np.where(zeta == 0.0, base, r)
    out = np.where(dt == 0.0, w, xi + r)
    return out[()] if out.ndim == 0 else out


def elementary_slit_map(w, xi, dt):
    """Map removing the vertical slit ``[xi, xi + 2i sqrt(dt)]``.

    ``xi + sqrt((w - xi)^2 + 4 dt)`` on the branch with ``Im >= 0``.
    Accepts scalars or arrays (broadcast).
    """
    if np.any(np.asarray(dt) < 0):
        raise ValueError("dt must be non-negative")
    if np.isscalar(w) and np.isscalar(xi) and np.isscalar(dt):
        return complex(_slit(complex(w), float(xi), float(dt)))
    return _np_map(w, xi, dt, 1.0)


def inverse_slit_map(w, xi, dt):
    """Inverse of :func:`elementary_slit_map`: ``xi + sqrt((w - xi)^2 - 4 dt)``."""
    if np.isscalar(w) and np.isscalar(xi) and np.isscalar(dt):
        return complex(_unslit(complex(w), float(xi), float(dt)))
    return _np_map(w, xi, dt, -1.0)


# --------------------------------------------------------------------------
# data types
# --------------------------------------------------------------------------

def uniform_grid(total_time, n_steps):
    return np.linspace(0.0, float(total_time), int(n_steps) + 1)


def refined_grid(total_time, n_steps, n_refine=0):
    """Uniform grid whose last interval is bisected ``n_refine`` times.

    Each refinement level halves the spacing of the final stretch, which
    resolves drivings that are singular at the end of the chain.
    """
    t = uniform_grid(total_time, n_steps)
    T = float(total_time)
    extra = []
    gap = t[-1] - t[-2]
    for _ in range(n_refine):
        gap *= 0.5
        extra.append(T - gap)
    if extra:
        t = np.concatenate([t[:-1], np.array(extra), [T]])
    return t


@dataclass(frozen=True)
class DrivingFunction:
    """Real driving path sampled on a capacity-time grid starting at t=0.

    ``interpolation`` picks how a grid interval becomes slit steps:
    ``"midpoint"`` uses one slit at the interval's midpoint value
    (``midpoints`` if supplied, otherwise the mean of the two samples);
    ``"linear"`` uses two half-interval slits at the quarter points of the
    linear interpolant.
    """

    times: np.ndarray
    values: np.ndarray
    interpolation: str = "midpoint"
    midpoints: np.ndarray = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or t.size < 1:
            raise ValueError("times and values must be 1-D arrays of equal length")
        if t[0] != 0.0:
            raise ValueError("driving grid must start at t=0")
        if np.any(np.diff(t) <= 0):
            raise ValueError("driving times must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValueError("driving values must be finite")
        if self.interpolation not in ("midpoint", "linear"):
            raise ValueError(f"unknown interpolation {self.interpolation!r}")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)
        if self.midpoints is not None:
            m = np.asarray(self.midpoints, dtype=float)
            if m.shape != (t.size - 1,):
                raise ValueError("midpoints must have one entry per interval")
            object.__setattr__(self, "midpoints", m)

    @classmethod
    def from_callable(cls, func, times, interpolation="midpoint"):
        """Sample ``func`` on ``times`` (midpoints evaluated exactly)."""
        t = np.asarray(times, dtype=float)
        f = np.vectorize(func, otypes=[float])
        mid = f(0.5 * (t[1:] + t[:-1])) if t.size > 1 else np.empty(0)
        return cls(t, f(t), interpolation, mid)

    @property
    def total_time(self):
        return float(self.times[-1])

    def to_csv(self, path):
        """Write ``t,xi`` rows with 17 significant digits."""
        _write_csv(path, "t,xi", np.column_stack([self.times, self.values]))


@dataclass(frozen=True)
class MapChain:
    """Immutable sequence of slit steps ``(dt_i, xi_i)`` applied in order."""

    dt: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        dt = np.array(self.dt, dtype=float)
        xi = np.array(self.xi, dtype=float)
        if dt.shape != xi.shape or dt.ndim != 1:
            raise ValueError("dt and xi must be 1-D arrays of equal length")
        if np.any(dt <= 0):
            raise ValueError("all capacity-time increments must be positive")
        dt.flags.writeable = False
        xi.flags.writeable = False
        object.__setattr__(self, "dt", dt)
        object.__setattr__(self, "xi", xi)

    def __len__(self):
        return self.dt.size

    @property
    def total_capacity_time(self):
        return float(self.dt.sum())

    @property
    def times(self):
        """Capacity time at the end of each step, with a leading 0."""
        return np.concatenate([[0.0], np.cumsum(self.dt)])

    def head(self, n):
        return MapChain(self.dt[:n], self.xi[:n])

    def tail(self, n):
        return MapChain(self.dt[n:], self.xi[n:])

    def then(self, other):
        """Chain that applies ``self`` first and ``other`` afterwards."""
        return MapChain(np.concatenate([self.dt, other.dt]), np.concatenate([self.xi, other.xi]))


@dataclass(frozen=True)
class Trace:
    """Polyline approximation of the trace, ``points[i] ~ gamma(times[i])``."""

    times: np.ndarray
    points: np.ndarray

    def to_csv(self, path):
        """Write ``t,re,im`` rows with 17 significant digits."""
        p = np.asarray(self.points)
        _write_csv(path, "t,re,im", np.column_stack([self.times, p.real, p.imag]))

    @classmethod
    def from_csv(cls, path):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 0], data[:, 1] + 1j * data[:, 2])


@dataclass(frozen=True)
class PointFate:
    """Outcome of evolving one point: alive with an image, or swallowed at a time."""

    alive: bool
    image: complex = None
    swallow_time: float = None
    steps_taken: int = field(default=0, compare=False)


def _write_csv(path, header, rows):
    np.savetxt(path, rows, delimiter=",", header=header, comments="", fmt="%.17g", encoding="utf-8")


# --------------------------------------------------------------------------
# chain construction and evaluation
# --------------------------------------------------------------------------

def discretize(driving):
    """Turn a :class:`DrivingFunction` into the slit-step :class:`MapChain`."""
    t = driving.times
    v = driving.values
    dt = np.diff(t)
    if driving.interpolation == "midpoint":
        xi = driving.midpoints if driving.midpoints is not None else 0.5 * (v[1:] + v[:-1])
        return MapChain(dt, xi)
    half = np.repeat(0.5 * dt, 2)
    quarter = np.empty(2 * dt.size)
    quarter[0::2] = 0.75 * v[:-1] + 0.25 * v[1:]
    quarter[1::2] = 0.25 * v[:-1] + 0.75 * v[1:]
    return MapChain(half, quarter)


@njit(cache=True)
def _evolve_kernel(z, dt, xi, swallow_eps):
    n = z.size
    out = np.empty(n, dtype=np.complex128)
    tau = np.full(n, np.nan)
    nsteps = np.zeros(n, dtype=np.int64)
    eps2 = swallow_eps * swallow_eps
    for p in range(n):
        w = z[p]
        inside = w.imag > 0.0
        t = 0.0
        for i in range(dt.size):
            zeta = w - xi[i]
            if zeta.real * zeta.real + zeta.imag * zeta.imag <= eps2 * dt[i]:
                tau[p] = t
                nsteps[p] = i
                break
            w = _slit(w, xi[i], dt[i])
            t += dt[i]
            if inside and w.imag <= 0.0:
                # the point sat on the freshly removed slit
                tau[p] = t
                nsteps[p] = i + 1
                break
        else:
            nsteps[p] = dt.size
        out[p] = w
    return out, tau, nsteps


def evolve_points(z, chain, swallow_eps=SWALLOW_EPS):
    """Forward-evolve many points; returns ``(images, swallow_times)``.

    ``swallow_times`` is NaN for points still alive at the end of the chain.
    A point is swallowed at the first step with
    ``|w - xi_i|^2 <= swallow_eps^2 dt_i``, or when an interior point is
    pushed onto the real axis (it lay on the removed slit).
    """
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    if np.any(z.imag < 0):
        raise ValueError("points must lie in the closed upper half plane")
    images, tau, _ = _evolve_kernel(z, chain.dt, chain.xi, float(swallow_eps))
    return images, tau


def evolve_point(z, chain, swallow_eps=SWALLOW_EPS):
    """Forward-evolve a single point through ``chain`` and report its fate."""
    z = complex(z)
    if z.imag < 0:
        raise ValueError("point must lie in the closed upper half plane")
    img, tau, steps = _evolve_kernel(np.array([z]), chain.dt, chain.xi, float(swallow_eps))
    if np.isnan(tau[0]):
        return PointFate(True, complex(img[0]), None, int(steps[0]))
    return PointFate(False, None, float(tau[0]), int(steps[0]))


@njit(cache=True)
def _trace_kernel(dt, xi, ks, tip_eps):
    out = np.empty(ks.size, dtype=np.complex128)
    for j in range(ks.size):
        k = ks[j]
        if k == 0:
            out[j] = complex(0.0, tip_eps)
            continue
        x = xi[k - 1]
        y = tip_eps
        for i in range(k - 1, -1, -1):
            x, y = _unslit_xy(x, y, xi[i], dt[i])
        out[j] = complex(x, y)
    return out


# --------------------------------------------------------------------------
# fast zipper: block Laurent expansions
#
# A block of consecutive inverse steps composes to H(w) = w + sum b_n (w-c)^-n,
# analytic off a real interval [c - rho, c + rho] (the image of the block's
# hull).  For points with |w - c| > beta * rho the truncated series replaces
# the whole block.  Blocks are aligned on powers of `base`, so a point
# pulled back from step k descends through large blocks once it is far from
# the recent part of the hull.  The coefficients are real (H commutes with
# conjugation) and are read off a discrete Fourier transform of H on the
# circle |w - c| = 2 rho.
# --------------------------------------------------------------------------

_N_SAMPLE = 64
_N_TERMS = 36
_BETA = 2.5


@njit(cache=True)
def _footprint(dt, xi, s0, s1):
    lo = 0.0
    hi = 0.0
    for i in range(s0, s1):
        r = 2.0 * math.sqrt(dt[i])
        if i == s0:
            lo = xi[i] - r
            hi = xi[i] + r
            continue
        a = lo - xi[i]
        glo = xi[i] + math.copysign(math.sqrt(a * a + 4.0 * dt[i]), a)
        a = hi - xi[i]
        ghi = xi[i] + math.copysign(math.sqrt(a * a + 4.0 * dt[i]), a)
        lo = min(glo, xi[i] - r)
        hi = max(ghi, xi[i] + r)
    return 0.5 * (lo + hi), 0.5 * (hi - lo)


@njit(cache=True)
def _block_coefficients(dt, xi, s0, s1, c, rho, out):
    P = _N_SAMPLE
    R = 2.0 * rho
    F = np.empty(P // 2 + 1, dtype=np.complex128)
    for q in range(P // 2 + 1):
        th = 2.0 * math.pi * q / P
        x0 = c + R * math.cos(th)
        y0 = R * math.sin(th) if 0 < q < P // 2 else 0.0
        x = x0
        y = y0
        for i in range(s1 - 1, s0 - 1, -1):
            x, y = _unslit_xy(x, y, xi[i], dt[i])
        F[q] = complex(x - x0, y - y0)
    for n in range(1, out.size + 1):
        acc = F[0].real + (F[P // 2].real if n % 2 == 0 else -F[P // 2].real)
        for q in range(1, P // 2):
            th = 2.0 * math.pi * q * n / P
            acc += 2.0 * (F[q].real * math.cos(th) - F[q].imag * math.sin(th))
        out[n - 1] = acc / P


@njit(cache=True)
def _build_blocks(dt, xi, base):
    n = dt.size
    sizes = []
    s = base
    while s <= n:
        sizes.append(s)
        s *= base
    nlev = len(sizes)
    size_arr = np.empty(nlev, dtype=np.int64)
    offset = np.zeros(nlev + 1, dtype=np.int64)
    for lv in range(nlev):
        size_arr[lv] = sizes[lv]
        offset[lv + 1] = offset[lv] + n // sizes[lv]
    total = offset[nlev]
    center = np.empty(total)
    radius = np.empty(total)
    coef = np.empty((total, _N_TERMS))
    for lv in range(nlev):
        sz = size_arr[lv]
        for m in range(n // sz):
            b = offset[lv] + m
            c, rho = _footprint(dt, xi, m * sz, (m + 1) * sz)
            center[b] = c
            radius[b] = rho
            _block_coefficients(dt, xi, m * sz, (m + 1) * sz, c, rho, coef[b])
    return size_arr, offset, center, radius, coef


@njit(cache=True)
def _fast_pullback(x, y, k, dt, xi, size_arr, offset, center, radius, coef):
    """Pull ``x + iy`` back through steps ``k..1`` using block expansions where valid."""
    nlev = size_arr.size
    nt = coef.shape[1]
    j = k
    while j > 0:
        used = False
        top = -1
        while top + 1 < nlev and j % size_arr[top + 1] == 0:
            top += 1
        for lv in range(top, -1, -1):
            sz = size_arr[lv]
            b = offset[lv] + j // sz - 1
            c = center[b]
            rho = radius[b]
            dx = x - c
            d2 = dx * dx + y * y
            if d2 <= (_BETA * rho) ** 2:
                continue
            # u = 2 rho / (w - c); H(w) = w + sum b_n u^n
            ur = 2.0 * rho * dx / d2
            ui = -2.0 * rho * y / d2
            # terms decay like (rho/|w-c|)^n; keep those above 1e-17
            m = int(-39.0 / math.log(rho * rho / d2) * 2.0) + 1
            if m > nt:
                m = nt
            sr = 0.0
            si = 0.0
            for t in range(m - 1, -1, -1):
                a = sr + coef[b, t]
                sr = a * ur - si * ui
                si = a * ui + si * ur
            x += sr
            y += si
            if y < 0.0:
                y = 0.0
            j -= sz
            used = True
            break
        if not used:
            x, y = _unslit_xy(x, y, xi[j - 1], dt[j - 1])
            j -= 1
    return x, y


@njit(cache=True)
def _fast_trace_kernel(dt, xi, ks, tip_eps, size_arr, offset, center, radius, coef):
    out = np.empty(ks.size, dtype=np.complex128)
    for jj in range(ks.size):
        k = ks[jj]
        if k == 0:
            out[jj] = complex(0.0, tip_eps)
            continue
        x, y = _fast_pullback(xi[k - 1], tip_eps, k, dt, xi, size_arr, offset, center, radius, coef)
        out[jj] = complex(x, y)
    return out


def _block_storage(capacity, base):
    """Empty block tables able to hold every aligned block of a chain of ``capacity`` steps."""
    sizes = []
    s = base
    while s <= capacity:
        sizes.append(s)
        s *= base
    size_arr = np.array(sizes, dtype=np.int64)
    offset = np.zeros(size_arr.size + 1, dtype=np.int64)
    for lv, sz in enumerate(sizes):
        offset[lv + 1] = offset[lv] + capacity // sz
    total = int(offset[-1])
    return size_arr, offset, np.zeros(total), np.zeros(total), np.zeros((total, _N_TERMS))


@njit(cache=True)
def _extend_blocks(dt, xi, n, size_arr, offset, center, radius, coef):
    """Fill in every aligned block that ends exactly at step ``n``."""
    for lv in range(size_arr.size):
        sz = size_arr[lv]
        if n % sz != 0:
            break
        b = offset[lv] + n // sz - 1
        c, rho = _footprint(dt, xi, n - sz, n)
        center[b] = c
        radius[b] = rho
        _block_coefficients(dt, xi, n - sz, n, c, rho, coef[b])


class ZipperIndex:
    """Precomputed block expansions of a chain for repeated trace queries.

    Building costs ``O(n log n)``; each trace point then costs roughly
    ``O(base * log n)`` instead of ``O(k)`` map applications.
    """

    def __init__(self, chain, base=8):
        self.chain = chain
        self.base = int(base)
        self._blocks = _build_blocks(chain.dt, chain.xi, self.base)

    def points(self, steps, tip_eps=None):
        eps = default_tip_eps(self.chain) if tip_eps is None else float(tip_eps)
        ks = np.asarray(steps, dtype=np.int64)
        if ks.size and (ks.min() < 0 or ks.max() > len(self.chain)):
            raise IndexError("step index out of range")
        return _fast_trace_kernel(self.chain.dt, self.chain.xi, ks, eps, *self._blocks)


def default_tip_eps(chain):
    return 1e-6 * math.sqrt(max(chain.total_capacity_time, 0.0))


def trace_point(chain, upto_step, tip_eps=None):
    """Approximate ``gamma(t_k)`` by pulling ``xi_k + i tip_eps`` back through steps k..1."""
    if not 0 <= upto_step <= len(chain):
        raise IndexError("upto_step out of range")
    eps = default_tip_eps(chain) if tip_eps is None else float(tip_eps)
    return complex(_trace_kernel(chain.dt, chain.xi, np.array([upto_step], dtype=np.int64), eps)[0])


def trace_points(chain, steps, tip_eps=None, method="auto"):
    """Vector version of :func:`trace_point` for an array of step indices.

    ``method`` is ``"direct"`` (exact composition, O(k) per point),
    ``"fast"`` (block expansions, see :class:`ZipperIndex`) or ``"auto"``.
    """
    eps = default_tip_eps(chain) if tip_eps is None else float(tip_eps)
    ks = np.asarray(steps, dtype=np.int64)
    if ks.size and (ks.min() < 0 or ks.max() > len(chain)):
        raise IndexError("step index out of range")
    if method == "auto":
        method = "fast" if len(chain) >= FAST_THRESHOLD and ks.size > 16 else "direct"
    if method == "fast":
        return ZipperIndex(chain).points(ks, eps)
    if method != "direct":
        raise ValueError(f"unknown method {method!r}")
    return _trace_kernel(chain.dt, chain.xi, ks, eps)


def full_trace(chain, tip_eps=None, stride=1, method="auto", origin=0.0):
    """Trace sampled at every ``stride``-th grid time (always including the end).

    ``origin`` is the driving value at t=0, where the trace starts.
    """
    ks = np.arange(0, len(chain) + 1, stride, dtype=np.int64)
    if ks[-1] != len(chain):
        ks = np.append(ks, len(chain))
    pts = trace_points(chain, ks, tip_eps, method)
    pts[0] = float(origin)
    return Trace(chain.times[ks], pts)


def capacity_check(chain, probe_radius=1e3, n_probe=64, order=4):
    """Half-plane capacity of the hull, fitted from ``g(z) - z`` on a far semicircle.

    Fits ``g(z) - z = sum_{n=1..order} a_n / z^n`` by least squares on
    ``n_probe`` points of the semicircle ``|z| = probe_radius`` and returns
    ``Re a_1``, which should equal ``2 * total_capacity_time``.
    """
    if len(chain) == 0:
        return 0.0
    # the hull lies in the disc of radius 4 max(sqrt(T), max |xi|)
    hull_bound = 4.0 * max(math.sqrt(chain.total_capacity_time), float(np.max(np.abs(chain.xi))))
    if probe_radius <= hull_bound:
        raise ValueError(f"probe radius {probe_radius!r} is not outside the hull bound {hull_bound:.6g}")
    theta = np.linspace(0.0, np.pi, n_probe + 2)[1:-1]
    z = probe_radius * np.exp(1j * theta)
    g, _ = evolve_points(z, chain, swallow_eps=0.0)
    design = np.column_stack([z ** (-n) for n in range(1, order + 1)])
    coef, *_ = np.linalg.lstsq(design, g - z, rcond=None)
    return float(coef[0].real)
