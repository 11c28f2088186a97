"""Critical site percolation on the triangular lattice and its exploration path.

Sites are hexagons in axial coordinates ``(q, r)`` embedded at
``x = q + r/2``, ``y = r sqrt(3)/2 + 1/sqrt(3)`` (unit spacing between
centres); the vertical shift puts the first vertex of the interface at the
origin.  The domain is the half-disc ``|z| <= R``: rows ``r <= -1`` and
sites centred outside the disc form the boundary, grey for ``x < 0`` and
white for ``x > 0``.  The interface therefore runs from the origin to the
top of the disc, near ``iR``.  Interior sites are revealed lazily, each
exactly once, grey with probability 1/2.  The interface keeps grey on its
left.
"""

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConfigError, DomainError
from .formulas import left_passage_prob
from .montecarlo import _check_samples, bernoulli, box_counts, fit_line, map_samples
from .sampler import DEFAULT_SEED, STREAM_LATTICE, sample_rng

__all__ = [
    "ExplorationState",
    "LatticePath",
    "explore_interface",
    "closed_winding",
    "half_disc_to_half_plane",
    "lattice_left_passage",
    "lattice_box_dimension",
]

SQRT3 = math.sqrt(3.0)
GREY = 1
WHITE = 2

# neighbour offsets in counter-clockwise order
_DIRS = np.array([(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)], dtype=np.int64)

_NEED_BITS = -99
_DONE = 0
_TRUNCATED = 1


@dataclass
class ExplorationState:
    """Mutable state of one exploration: colours, the current edge and the path so far."""

    colors: np.ndarray
    qoff: int
    roff: int
    ints: np.ndarray
    px: np.ndarray
    py: np.ndarray

    @classmethod
    def empty(cls, radius, max_steps):
        qoff = int(math.ceil(1.6 * radius)) + 8
        width = qoff + int(radius) + 8
        rows = int(math.ceil(2.0 * radius / SQRT3)) + 8
        # ints: Lq, Lr, Rq, Rr, n_points, n_draws
        ints = np.array([0, -1, 1, -1, 0, 0], dtype=np.int64)
        px = np.zeros(max_steps + 1)
        py = np.zeros(max_steps + 1)
        return cls(np.zeros((rows, width), dtype=np.int8), qoff, 2, ints, px, py)


@dataclass(frozen=True)
class LatticePath:
    """Vertices of an exploration path in embedded coordinates."""

    x: np.ndarray
    y: np.ndarray
    truncated: bool
    n_draws: int
    radius: float

    @property
    def points(self):
        return self.x + 1j * self.y

    def to_csv(self, path):
        rows = np.column_stack([np.arange(self.x.size), self.x, self.y])
        np.savetxt(path, rows, delimiter=",", header="step,x,y", comments="", fmt=["%d", "%.17g", "%.17g"], encoding="utf-8")


@njit(cache=True, inline="always")
def _center(q, r):
    return q + 0.5 * r, 0.5 * SQRT3 * r + 1.0 / SQRT3


@njit(cache=True)
def _explore_kernel(colors, qoff, roff, ints, px, py, bits, bpos, field, use_field, forced, radius, dirs):
    lq, lr, rq, rr, npts, draws = ints[0], ints[1], ints[2], ints[3], ints[4], ints[5]
    b = bpos[0]
    r2 = radius * radius
    status = _TRUNCATED
    while npts < px.size:
        dq = rq - lq
        dr = rr - lr
        k = 0
        while dirs[k, 0] != dq or dirs[k, 1] != dr:
            k += 1
        k1 = (k + 1) % 6
        aq = lq + dirs[k1, 0]
        ar = lr + dirs[k1, 1]
        ax, ay = _center(aq, ar)
        if ar < 0 or ax * ax + ay * ay > r2:
            c = GREY if ax < 0.0 else WHITE
        else:
            c = colors[ar + roff, aq + qoff]
            if c == 0:
                if forced:
                    c = GREY if ax <= 0.0 else WHITE
                elif use_field:
                    c = field[ar + roff, aq + qoff]
                else:
                    if b >= bits.size:
                        status = _NEED_BITS
                        break
                    c = GREY if bits[b] else WHITE
                    b += 1
                draws += 1
                colors[ar + roff, aq + qoff] = c
        # vertex shared by the three hexagons
        x1, y1 = _center(lq, lr)
        x2, y2 = _center(rq, rr)
        px[npts] = (x1 + x2 + ax) / 3.0
        py[npts] = (y1 + y2 + ay) / 3.0
        npts += 1
        if c == GREY:
            lq, lr = aq, ar
        else:
            rq, rr = aq, ar
        # done once both sides are arc sites: the grey and white arcs meet at the top
        x1, y1 = _center(lq, lr)
        x2, y2 = _center(rq, rr)
        if lr >= 0 and rr >= 0 and x1 * x1 + y1 * y1 > r2 and x2 * x2 + y2 * y2 > r2:
            status = _DONE
            break
    ints[0], ints[1], ints[2], ints[3], ints[4], ints[5] = lq, lr, rq, rr, npts, draws
    bpos[0] = b
    return status


def explore_interface(radius, seed=DEFAULT_SEED, sample_index=0, max_steps=None, forced=False, field=None):
    """Exploration path in the half-disc of ``radius`` from the origin to the top arc.

    ``forced`` colours every interior site by the sign of its ``x``
    (a straight interface, used for calibration).  ``field`` supplies the
    interior colours as an array over the state's grid instead of drawing
    them; it must have the shape of ``ExplorationState.empty(radius, ...).colors``.
    """
    if not radius >= 10:
        raise ConfigError("radius", "must be at least 10")
    if max_steps is None:
        max_steps = int(8 * radius * radius) + 1000
    st = ExplorationState.empty(radius, int(max_steps))
    use_field = field is not None
    fld = np.asarray(field, dtype=np.int8) if use_field else np.zeros((1, 1), dtype=np.int8)
    if use_field and fld.shape != st.colors.shape:
        raise ValueError("field has the wrong shape")
    rng = sample_rng(seed, sample_index, STREAM_LATTICE)
    chunk = 1 << 14
    bits = rng.integers(0, 2, size=chunk, dtype=np.uint8)
    bpos = np.zeros(1, dtype=np.int64)
    while True:
        s = _explore_kernel(st.colors, st.qoff, st.roff, st.ints, st.px, st.py, bits, bpos, fld, use_field, forced,
                            float(radius), _DIRS)
        if s != _NEED_BITS:
            break
        chunk = min(2 * chunk, 1 << 22)
        bits = rng.integers(0, 2, size=chunk, dtype=np.uint8)
        bpos[0] = 0
    n = int(st.ints[4])
    st.px[0] = st.py[0] = 0.0  # the origin, free of rounding
    draws = int(st.ints[5])
    if not forced and not use_field:
        # revealed-once discipline: one draw per revealed interior site
        revealed = int(np.count_nonzero(st.colors[st.roff:]))
        if revealed != draws:
            raise AssertionError(f"{draws} colour draws for {revealed} revealed sites")
    return LatticePath(st.px[:n].copy(), st.py[:n].copy(), s == _TRUNCATED, draws, float(radius))


# --------------------------------------------------------------------------
# left passage by winding number
# --------------------------------------------------------------------------

@njit(cache=True)
def _winding(x, y, zx, zy):
    w = 0
    n = x.size
    for i in range(n):
        x1 = x[i] - zx
        y1 = y[i] - zy
        j = i + 1 if i + 1 < n else 0
        x2 = x[j] - zx
        y2 = y[j] - zy
        cross = x1 * y2 - x2 * y1
        if y1 <= 0.0:
            if y2 > 0.0 and cross > 0.0:
                w += 1
        elif y2 <= 0.0 and cross < 0.0:
            w -= 1
    return w


def closed_winding(points, z, n_arc=512):
    """Winding number around ``z`` of the path closed by an arc and a segment.

    From the last point the curve follows the circle of radius ``|tip|``
    clockwise down to the positive real axis and returns along the real
    axis to the origin.  A path passing to the left of ``z`` encloses it.
    """
    p = np.asarray(points, dtype=complex)
    tip = p[-1]
    rho = abs(tip)
    theta = math.atan2(tip.imag, tip.real)
    if theta < 0:
        theta = 0.0 if tip.real > 0 else math.pi
    arc = rho * np.exp(1j * np.linspace(theta, 0.0, n_arc)[1:])
    loop = np.concatenate([p, arc, [0.0]])
    return int(_winding(loop.real.copy(), loop.imag.copy(), float(z.real), float(z.imag)))


def half_disc_to_half_plane(z, radius):
    """Conformal map of the half-disc onto the upper half plane, ``0 -> 0`` and ``i radius -> inf``."""
    w = complex(z) / radius
    return 2.0 * w / (1.0 + w * w)


def _lattice_side(i, seed, radius, z, max_steps):
    path = explore_interface(radius, seed, i, max_steps)
    if path.truncated:
        return 0
    return 1 if closed_winding(path.points, z) != 0 else -1


def lattice_left_passage(z_lattice, radius, n_samples, seed=DEFAULT_SEED, max_steps=None, allowance=0.02, workers=1):
    """Fraction of interfaces passing left of ``z_lattice`` (lattice units).

    The interface is the half-disc exploration, whose scaling limit is SLE_6
    from 0 to ``i radius``; the target is the half-plane left-passage
    probability at the conformal image of ``z``.  Truncated interfaces are
    excluded and counted.
    """
    z = complex(z_lattice)
    if not z.imag > 0:
        raise ConfigError("z_lattice", "must lie in the upper half plane")
    if abs(z) > radius / 3.0:
        raise ConfigError("z_lattice", "must satisfy |z| <= radius/3")
    n = _check_samples(n_samples)
    fn = _SideJob(seed, float(radius), z, max_steps)
    sides = np.array(map_samples(fn, n, workers), dtype=np.int64)
    resolved = int(np.count_nonzero(sides))
    fp = dict(experiment="percolation-left-passage", kappa=6.0, seed=int(seed), n_samples=n, radius=float(radius),
              z=[z.real, z.imag])
    img = half_disc_to_half_plane(z, radius)
    return bernoulli(int(np.count_nonzero(sides > 0)), resolved, target=left_passage_prob(6.0, img.real, img.imag),
                     allowance=allowance, unresolved=n - resolved, fingerprint=fp)


@dataclass(frozen=True)
class _SideJob:
    seed: int
    radius: float
    z: complex
    max_steps: int

    def __call__(self, i):
        return _lattice_side(i, self.seed, self.radius, self.z, self.max_steps)


# --------------------------------------------------------------------------
# dimension
# --------------------------------------------------------------------------

def lattice_box_dimension(paths, radii, seed=DEFAULT_SEED, n_offsets=4):
    """Box-counting slope of exploration paths, target 7/4.

    ``paths`` may be any iterable (a generator keeps memory flat).  Radii
    below 3 lattice units are rejected; radii above a quarter of the
    smallest exploration radius are excluded with a note.
    """
    radii = np.sort(np.asarray(radii, dtype=float))
    if radii[0] < 3:
        raise DomainError("radii below 3 lattice units are below the lattice resolution")
    offsets = sample_rng(seed, 0, STREAM_LATTICE).random((n_offsets, 2))
    total = np.zeros(radii.size)
    n_paths = 0
    rmin = math.inf
    for p in paths:
        total += box_counts(p.points, radii, offsets)
        rmin = min(rmin, p.radius)
        n_paths += 1
    if not n_paths:
        raise DomainError("no paths")
    keep = radii <= rmin / 4.0
    excluded = [f"eps={e:.6g}: above a quarter of the exploration radius" for e in radii[~keep]]
    used = radii[keep]
    if used.size < 4:
        raise DomainError("fewer than 4 radii inside [3, radius/4]")
    counts = total[keep] / n_paths
    fp = dict(experiment="percolation-dimension", kappa=6.0, seed=int(seed), n_paths=n_paths)
    return fit_line(np.log(1.0 / used), np.log(counts), target=1.75, excluded=excluded, fingerprint=fp,
                    table=dict(eps=used, counts=counts))
