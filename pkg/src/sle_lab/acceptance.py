"""Acceptance criteria: each check runs at its stated size and tolerance.

The ``quick`` suite holds the deterministic checks (seconds); ``monte-carlo``
holds the statistical experiments (minutes each).  Every check returns a
:class:`CriterionResult` whose ``line()`` is a one-line PASS/FAIL summary.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import coulomb, formulas
from .exact import ArcSpec, arc_driving, arc_map, vertical_slit
from .formulas import SlitHull
from .loewner import DrivingFunction, discretize, evolve_points, uniform_grid
from .montecarlo import (
    estimate_box_dimension,
    estimate_crossing,
    estimate_derivative_exponent,
    estimate_left_passage,
    estimate_restriction,
    estimate_swallow_fraction,
)
from .percolation import explore_interface, lattice_box_dimension, lattice_left_passage
from .sampler import DEFAULT_SEED, KappaContext, SamplerConfig, refine_trace, sample_trace

__all__ = ["CriterionResult", "QUICK", "MONTE_CARLO", "SUITES", "run_suite"]


@dataclass(frozen=True)
class CriterionResult:
    name: str
    passed: bool
    measured: str
    requirement: str

    def line(self):
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.measured} (required: {self.requirement})"


def _gate(est):
    return f"{est.value:.5f} +- {est.std_error:.5f} vs {est.target:.5f} (z = {est.z_score:+.2f})"


# --------------------------------------------------------------------------
# deterministic checks
# --------------------------------------------------------------------------

_PROBES = np.array([complex(x, y) for x in (-1.5, -0.5, 0.5, 1.5, 2.5) for y in (0.3, 0.8, 1.5, 3.0)])


def oracle_constant_driving(**_):
    c, T, n = 0.7, 1.0, 10 ** 4
    t = uniform_grid(T, n)
    chain = discretize(DrivingFunction(t, np.full(t.size, c)))
    g, _ = evolve_points(_PROBES, chain)
    err = float(np.max(np.abs(g - vertical_slit(_PROBES, c, T))))
    return CriterionResult("oracle: constant driving", err <= 1e-10, f"max error {err:.3e} on 20 probes", "<= 1e-10")


def arc_errors(dts=(1e-3, 2.5e-4, 6.25e-5), r=1.0):
    spec = ArcSpec(r)
    T = 0.25 * r * r
    probes = np.array([complex(x, y) for x in (-2.0, -0.8, 0.6, 1.8, 3.0) for y in (0.5, 1.2, 2.0, 3.5)])
    exact = np.array([arc_map(z, spec, T) for z in probes])
    errs = []
    for dt in dts:
        drv = DrivingFunction.from_callable(lambda s: arc_driving(s, spec), uniform_grid(T, round(T / dt)))
        g, _ = evolve_points(probes, discretize(drv))
        errs.append(float(np.max(np.abs(g - exact))))
    return errs


def oracle_arc(**_):
    e = arc_errors()
    ratios = [e[i] / e[i + 1] for i in range(len(e) - 1)]
    ok = all(q >= 2.0 for q in ratios)
    return CriterionResult("oracle: circular-arc driving", ok,
                           f"errors {', '.join(f'{x:.2e}' for x in e)}; ratios {', '.join(f'{q:.1f}' for q in ratios)}",
                           "error ratio >= 2 per 4x smaller dt (O(sqrt dt) or better)")


def arc_swallowing_limit(r=1.0, n_steps=4000, **_):
    spec = ArcSpec(r)
    inside = np.array([0.5j, 0.3 + 0.3j, -0.5 + 0.2j, 0.1 + 0.8j, -0.2 + 0.9j])
    deltas = np.array([1e-6, 2.5e-7, 6.25e-8])
    images = []
    for d in deltas:
        T = spec.end_time - d
        # grid uniform in u = sqrt(r^2 - 2t), where the driving is linear
        u = np.linspace(r, math.sqrt(r * r - 2.0 * T), n_steps + 1)
        t = 0.5 * (r * r - u * u)
        t[0] = 0.0
        drv = DrivingFunction.from_callable(lambda s: arc_driving(min(s, T), spec), t)
        g, _ = evolve_points(inside, discretize(drv))
        images.append(g)
    images = np.array(images)
    # leading correction is proportional to sqrt(delta): extrapolate
    h = np.sqrt(deltas)
    coef = np.polyfit(h, images.real, 2)
    limit = coef[-1]
    err = float(np.max(np.abs(limit + 2.0 * r)))
    raw = float(np.max(np.abs(images[0] + 2.0 * r)))
    return CriterionResult("arc swallowing limit", err <= 1e-3,
                           f"extrapolated max |g + 2r| = {err:.2e} (at delta = 1e-6 itself: {raw:.2e})", "<= 1e-3")


KAPPA_GRID = np.linspace(0.16, 8.0, 50)


def formula_identities(**_):
    worst = 0.0
    for k in KAPPA_GRID:
        cc = coulomb.constants(k)
        h01, _ = coulomb.kac_weight(coulomb.KacLabel(0, 1), k)
        d_f = formulas.fractal_dimension(k)
        checks = [
            coulomb.delta_h(k, 1.0) - 1.0,
            d_f - (1.0 + coulomb.bulk_exponent(2, 1.0, k)),
            d_f - (2.0 - 2.0 * h01),
            cc.c - coulomb.central_charge(16.0 / k),
        ]
        worst = max(worst, max(abs(x) for x in checks))
    fixed = [
        coulomb.kac_weight(coulomb.KacLabel(1, 2), 8.0 / 3.0)[0] - 0.625,
        coulomb.central_charge(6.0),
        coulomb.central_charge(8.0 / 3.0),
        coulomb.constants(2.0).n + 2.0,
    ]
    worst = max(worst, max(abs(x) for x in fixed))
    return CriterionResult("formula identity suite", worst <= 1e-12, f"largest deviation {worst:.2e} over 50 kappas",
                           "<= 1e-12")


def _zero_mode_p_a(kappa, a, b, x):
    e = 1.0 - 4.0 / kappa
    f = (lambda s: math.log(s)) if e == 0 else (lambda s: s ** e)
    return (f(x) - f(b)) / (f(a) - f(b))


def escape_solver(**_):
    worst_zero = 0.0
    for kappa in (2.0, 3.0, 6.0):
        for a, b, x in ((0.5, 2.0, 1.0), (0.2, 5.0, 0.7), (1.0, 1.5, 1.2)):
            p = formulas.escape_probability(lambda s: 2.0 / s, lambda s: kappa, a, b, x)
            worst_zero = max(worst_zero, abs(p.p_a - _zero_mode_p_a(kappa, a, b, x)))
    worst_cardy = 0.0
    for kappa in (5.0, 6.0, 7.0):
        for r in (0.1, 0.3, 0.5, 0.8):
            p = formulas.escape_probability(lambda y: 2.0 * (1.0 - 2.0 * y), lambda y, k=kappa: k * y * (1.0 - y), 0.0, 1.0, r)
            worst_cardy = max(worst_cardy, abs(p.p_b - formulas.cardy_crossing(kappa, r)))
    ok = worst_zero <= 1e-8 and worst_cardy <= 1e-6
    return CriterionResult("escape-probability solver", ok,
                           f"zero-mode error {worst_zero:.2e}, Cardy error {worst_cardy:.2e}", "<= 1e-8 and <= 1e-6")


def makarov_slope(**_):
    step = 1e-5
    worst = 0.0
    for kappa in (2.0, 8.0 / 3.0, 4.0):
        def f(h):
            return h + coulomb.bulk_exponent(2, h, kappa)
        d = (f(1.0 + step) - f(1.0 - step)) / (2.0 * step)
        worst = max(worst, abs(d - 1.0))
    return CriterionResult("Makarov slope", worst <= 1e-6, f"max |d/dh (h + Delta2_bulk) - 1| = {worst:.2e}", "<= 1e-6")


# --------------------------------------------------------------------------
# Monte-Carlo checks
# --------------------------------------------------------------------------

def left_passage_symmetric(workers=1, seed=DEFAULT_SEED):
    e = estimate_left_passage(6.0, 1j, 10 ** 4, seed=seed, allowance=0.0, workers=workers)
    return CriterionResult("left passage, kappa=6, z=i", bool(e.passed), _gate(e), "|est - 0.5| <= 3 sigma")


def left_passage_8_3(workers=1, seed=DEFAULT_SEED):
    e = estimate_left_passage(8.0 / 3.0, 1 + 1j, 10 ** 4, seed=seed, allowance=0.01, workers=workers)
    return CriterionResult("left passage, kappa=8/3, z=1+i", bool(e.passed), _gate(e), "<= 3 sigma + 0.01")


def crossing_square(workers=1, seed=DEFAULT_SEED):
    geo = formulas.rectangle_to_r(1.0)
    e = estimate_crossing(6.0, geo, 10 ** 4, seed=seed, allowance=0.01, workers=workers)
    lo = estimate_crossing(6.0, 0.3, 10 ** 4, seed=seed + 1, workers=workers)
    hi = estimate_crossing(6.0, 0.7, 10 ** 4, seed=seed + 2, workers=workers)
    s = lo.value + hi.value
    sig = math.hypot(lo.std_error, hi.std_error)
    dual_ok = abs(s - 1.0) <= 3.0 * sig
    return CriterionResult("Cardy crossing, kappa=6", bool(e.passed) and dual_ok,
                           f"square {_gate(e)}; P(0.3) + P(0.7) = {s:.4f} +- {sig:.4f}",
                           "square <= 3 sigma + 0.01; duality within 3 combined sigma")


# box-counting setup: traces of capacity time 1, refined until chords are
# shorter than DIM_MAX_SEGMENT or DIM_ROUNDS rounds have run
DIM_TRACES = 16
DIM_STEPS = 50_000
DIM_MAX_SEGMENT = 3e-3
DIM_ROUNDS = 14
DIM_RADII = np.geomspace(0.008, 0.256, 8)


def dimension_traces(kappa, n_traces=DIM_TRACES, seed=DEFAULT_SEED):
    ctx = KappaContext(kappa)
    out = []
    for i in range(n_traces):
        tr, _ = refine_trace(ctx, SamplerConfig(1.0, DIM_STEPS, seed, i), DIM_MAX_SEGMENT, DIM_ROUNDS)
        out.append(tr)
    return out


def _sle_dimension(kappa, lo, hi, seed):
    fit = estimate_box_dimension(dimension_traces(kappa, seed=seed), DIM_RADII, kappa=kappa, seed=seed,
                                 min_resolution=0.0)
    ok = lo <= fit.slope <= hi
    return CriterionResult(f"box dimension, kappa={kappa:.4g}", ok,
                           f"slope {fit.slope:.3f} +- {fit.slope_std_error:.3f} (d_f = {fit.target:.4f})",
                           f"[{lo:.2f}, {hi:.2f}]")


def box_dimension_6(workers=1, seed=DEFAULT_SEED):
    return _sle_dimension(6.0, 1.70, 1.80, seed)


def box_dimension_8_3(workers=1, seed=DEFAULT_SEED):
    return _sle_dimension(8.0 / 3.0, 1.28, 1.38, seed)


def box_dimension_line(workers=1, seed=DEFAULT_SEED):
    # the polyline of a straight trace is exact, so no resolution floor applies;
    # radii stay well below the length to keep the +1 end cell negligible
    line = sample_trace(KappaContext(0.0), SamplerConfig(1.0, 1000, seed))
    fit = estimate_box_dimension([line], np.geomspace(5e-4, 0.05, 8), kappa=0.0, seed=seed, min_resolution=0.0)
    return CriterionResult("box dimension, straight line", 0.98 <= fit.slope <= 1.02, f"slope {fit.slope:.4f}",
                           "[0.98, 1.02]")


DERIV_LADDER = np.geomspace(25.0, 2500.0, 6)


def derivative_exponent(workers=1, seed=DEFAULT_SEED):
    fit = estimate_derivative_exponent(2.0, 1.0, 1.0, DERIV_LADDER, 10 ** 4, seed=seed, workers=workers)
    zmax = float(np.max(np.abs(fit.table["z_score"])))
    ok = 0.9 <= fit.slope <= 1.1 and zmax <= 3.0
    return CriterionResult("derivative exponent, kappa=2, h=1", ok,
                           f"slope {fit.slope:.4f}; max pointwise |z| vs closed form {zmax:.2f}",
                           "slope in [0.9, 1.1]; |z| <= 3 at every ladder time")


def restriction(workers=1, seed=DEFAULT_SEED):
    e = estimate_restriction(SlitHull(1.0, 1.0), 5000, seed=seed, allowance=0.02, workers=workers)
    (r1, p1), (r2, p2) = e.extras["radius_trend"]
    drift = p1 - p2
    ok = bool(e.passed) and 0.0 <= drift < 0.01
    return CriterionResult("restriction, slit (1, 1)", ok,
                           f"{_gate(e)}; R={r1:g}: {p1:.4f}, R={r2:g}: {p2:.4f}",
                           "<= 3 sigma + 0.02; R-doubling shift monotone and < 0.01")


def swallowing_subcritical(workers=1, seed=DEFAULT_SEED):
    e = estimate_swallow_fraction(2.0, 1.0, 100.0, 10 ** 4, seed=seed, workers=workers)
    return CriterionResult("swallowing, kappa=2, T=100", e.value <= 0.01, f"fraction {e.value:.4f}", "<= 0.01")


def swallowing_supercritical(workers=1, seed=DEFAULT_SEED):
    e = estimate_swallow_fraction(6.0, 1.0, 100.0, 10 ** 4, seed=seed, workers=workers)
    return CriterionResult("swallowing, kappa=6, T=100", e.value >= 0.99,
                           f"fraction {e.value:.4f} +- {e.std_error:.4f} "
                           f"(exact at T=100: {e.extras['finite_time_probability']:.4f})", ">= 0.99")


PERC_RADIUS = 300
PERC_SAMPLES = 4000
PERC_DIM_RADIUS = 500
PERC_DIM_PATHS = 1000
PERC_DIM_RADII = np.geomspace(4.0, 125.0, 8)


def percolation_symmetric(workers=1, seed=DEFAULT_SEED):
    R = PERC_RADIUS
    e = lattice_left_passage(complex(0, R / 5), R, PERC_SAMPLES, seed=seed, allowance=0.0, workers=workers)
    return CriterionResult("percolation left passage, symmetric point", bool(e.passed), _gate(e), "<= 3 sigma")


def percolation_diagonal(workers=1, seed=DEFAULT_SEED):
    R = PERC_RADIUS
    e = lattice_left_passage(complex(R / 8, R / 8), R, PERC_SAMPLES, seed=seed + 1, allowance=0.02, workers=workers)
    return CriterionResult("percolation left passage, z = (R/8)(1+i)", bool(e.passed), _gate(e), "<= 3 sigma + 0.02")


def percolation_dimension(workers=1, seed=DEFAULT_SEED):
    paths = (explore_interface(PERC_DIM_RADIUS, seed, i) for i in range(PERC_DIM_PATHS))
    fit = lattice_box_dimension((p for p in paths if not p.truncated), PERC_DIM_RADII, seed=seed)
    return CriterionResult("percolation box dimension, radius 500", 1.70 <= fit.slope <= 1.80,
                           f"slope {fit.slope:.3f} +- {fit.slope_std_error:.3f}", "[1.70, 1.80]")


QUICK = {
    "oracle-constant": oracle_constant_driving,
    "oracle-arc": oracle_arc,
    "arc-swallowing": arc_swallowing_limit,
    "identities": formula_identities,
    "escape": escape_solver,
    "makarov": makarov_slope,
}

MONTE_CARLO = {
    "left-passage-symmetric": left_passage_symmetric,
    "left-passage-8/3": left_passage_8_3,
    "crossing": crossing_square,
    "box-dimension-6": box_dimension_6,
    "box-dimension-8/3": box_dimension_8_3,
    "box-dimension-line": box_dimension_line,
    "derivative": derivative_exponent,
    "restriction": restriction,
    "swallowing-2": swallowing_subcritical,
    "swallowing-6": swallowing_supercritical,
    "percolation-symmetric": percolation_symmetric,
    "percolation-diagonal": percolation_diagonal,
    "percolation-dimension": percolation_dimension,
}

SUITES = {"quick": QUICK, "monte-carlo": MONTE_CARLO, "full": {**QUICK, **MONTE_CARLO}}


def run_suite(suite="quick", workers=1, seed=DEFAULT_SEED, echo=None):
    """Run every check of ``suite``; ``echo`` is called with each result line."""
    results = []
    for name, check in SUITES[suite].items():
        kwargs = {} if name in QUICK else dict(workers=workers, seed=seed)
        res = check(**kwargs)
        results.append(res)
        if echo is not None:
            echo(res.line())
    return results
