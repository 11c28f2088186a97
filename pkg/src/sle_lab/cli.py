"""Command-line harness: ``sle-lab <command> [options]``.

Settings are resolved as built-in defaults, then ``SLE_LAB_SEED``, then a
JSON config file (``--config``; a previous report works too, through its
``run_config``), then explicit flags.  Reports are JSON on stdout or
``--out``; series go to ``--csv``.  Exit status: 0 success, 1 error,
2 statistical gate failed.
"""

import argparse
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import __version__, coulomb, formulas
from .errors import ConfigError, ConvergenceError, DomainError
from .reporting import to_json, write_columns, write_text
from .sampler import DEFAULT_SEED, KappaContext, SamplerConfig, refine_trace, sample_trace

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_GATE = 2

DEFAULTS = {
    "formulas": dict(kappa=None, h=[1.0], n_curves=1),
    "trace": dict(kappa=None, total_time=1.0, n_steps=10_000, index=0, max_segment=None, rounds=14),
    "left-passage": dict(kappa=None, z="0+1i", samples=10_000, eta=1e-3, q_cut=1e3, allowance=0.01),
    "crossing": dict(kappa=None, r=None, aspect=None, samples=10_000, eta=2e-3, allowance=0.01),
    "dimension": dict(kappa=None, traces=16, n_steps=50_000, total_time=1.0, max_segment=3e-3, rounds=14,
                      radii="0.008,0.256,8", tolerance=0.05),
    "derivative": dict(kappa=None, h=1.0, x0=1.0, times="25,2500,6", samples=10_000, eta=1e-3, tolerance=0.1),
    "restriction": dict(x0=1.0, height=1.0, samples=5000, escape_factor=20.0, doublings=1, eta=0.02, allowance=0.02),
    "swallow": dict(kappa=None, x0=1.0, T=100.0, samples=10_000, eta=1e-3),
    "percolation": dict(mode="left-passage", radius=300, samples=4000, z="0+60i", radii="4,125,8", allowance=0.02,
                        tolerance=0.05),
    "verify": dict(suite="quick"),
    "plot-data": dict(report=None, sweep=None, kappa=None, y=1.0, x="-5,5,101"),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_ERROR)


# --------------------------------------------------------------------------
# parsing helpers
# --------------------------------------------------------------------------

def parse_complex(text):
    try:
        return complex(str(text).replace(" ", "").replace("i", "j"))
    except ValueError:
        raise ConfigError("z", f"not a complex number: {text!r}") from None


def parse_ladder(text, field):
    try:
        lo, hi, n = str(text).split(",")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise ConfigError(field, f"expected 'lo,hi,count', got {text!r}") from None
    if not (0 < lo < hi and n >= 2):
        raise ConfigError(field, "need 0 < lo < hi and count >= 2")
    return np.geomspace(lo, hi, n)


def _need(cfg, *names):
    for name in names:
        if cfg.get(name) is None:
            raise ConfigError(name, "is required")


def _kappa(cfg, lo=0.0, hi=math.inf, lo_open=True, hi_open=True, why=""):
    _need(cfg, "kappa")
    k = float(cfg["kappa"])
    ok_lo = k > lo if lo_open else k >= lo
    ok_hi = k < hi if hi_open else k <= hi
    if not (ok_lo and ok_hi and math.isfinite(k)):
        raise ConfigError("kappa", f"{k!r} outside the admissible range {why}".rstrip())
    return k


def _positive_int(cfg, name):
    v = cfg[name]
    if int(v) != v or v < 1:
        raise ConfigError(name, "must be a positive integer")
    return int(v)


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_formulas(cfg):
    k = _kappa(cfg, why="(kappa > 0)")
    n = _positive_int(cfg, "n_curves")
    cc = coulomb.constants(k)
    c, kdual = coulomb.central_charge_dual(k)
    hb, hk, mb, mk = coulomb.curve_operator_dims(n, k)
    exps = []
    for h in cfg["h"]:
        h = float(h)
        exps.append(dict(h=h, delta=coulomb.delta_h(k, h), boundary=coulomb.boundary_exponent(n, h, k),
                         bulk=coulomb.bulk_exponent(n, h, k)))
    out = dict(constants=cc.as_dict(), d_f=formulas.fractal_dimension(k), c=c, kappa_dual=kdual, n=cc.n, q=cc.q,
               h12=coulomb.kac_weight(coulomb.KacLabel(1, 2), k)[0],
               curve_operators=dict(n_curves=n, h_boundary=hb, h_bulk=hk, m_boundary=mb, m_bulk=mk),
               exponents=exps)
    return dict(experiment="formulas", kappa=k, result=out), None, True


def cmd_trace(cfg):
    k = _kappa(cfg, lo=0.0, lo_open=False, why="(kappa >= 0)")
    scfg = SamplerConfig(float(cfg["total_time"]), _positive_int(cfg, "n_steps"), int(cfg["seed"]), int(cfg["index"]))
    ctx = KappaContext(k)
    if cfg["max_segment"] is None:
        tr, n_long = sample_trace(ctx, scfg), None
    else:
        tr, n_long = refine_trace(ctx, scfg, float(cfg["max_segment"]), int(cfg["rounds"]))
    p = tr.points
    series = (["t", "re", "im"], [tr.times, p.real, p.imag])
    result = dict(n_points=int(p.size), tip=[p[-1].real, p[-1].imag], max_chord=float(np.abs(np.diff(p)).max()),
                  long_chords_left=n_long)
    return dict(experiment="trace", kappa=k, result=result), series, True


def _estimate_report(est):
    from .montecarlo import report
    return report(est)


def cmd_left_passage(cfg):
    from .montecarlo import estimate_left_passage
    k = _kappa(cfg, 0.0, 8.0, why="(0 < kappa < 8)")
    z = parse_complex(cfg["z"])
    est = estimate_left_passage(k, z, _positive_int(cfg, "samples"), seed=int(cfg["seed"]), eta=float(cfg["eta"]),
                                q_cut=float(cfg["q_cut"]), allowance=float(cfg["allowance"]), workers=cfg["workers"])
    return _estimate_report(est), None, est.passed


def cmd_crossing(cfg):
    from .montecarlo import estimate_crossing
    k = _kappa(cfg, 4.0, 8.0, why="(crossing requires 4 < kappa < 8)")
    if cfg["aspect"] is not None:
        geo = formulas.rectangle_to_r(float(cfg["aspect"]))
    elif cfg["r"] is not None:
        geo = float(cfg["r"])
    else:
        raise ConfigError("r", "give --r or --aspect")
    est = estimate_crossing(k, geo, _positive_int(cfg, "samples"), seed=int(cfg["seed"]), eta=float(cfg["eta"]),
                            allowance=float(cfg["allowance"]), workers=cfg["workers"])
    return _estimate_report(est), None, est.passed


def _fit_series(fit, xname, yname):
    return ([xname, yname, "fitted"], [fit.x, fit.y, fit.fitted()])


def cmd_dimension(cfg):
    from .montecarlo import estimate_box_dimension, report
    k = _kappa(cfg, 0.0, 8.0, lo_open=False, hi_open=False, why="(0 <= kappa <= 8)")
    radii = parse_ladder(cfg["radii"], "radii")
    if radii.size < 4 or np.log10(radii[-1] / radii[0]) < 1.5:
        raise ConfigError("radii", "need at least 4 radii spanning 1.5 decades")
    n = _positive_int(cfg, "traces")
    ctx = KappaContext(k)
    traces = []
    for i in range(n):
        scfg = SamplerConfig(float(cfg["total_time"]), _positive_int(cfg, "n_steps"), int(cfg["seed"]), i)
        if k == 0 or cfg["max_segment"] is None:
            traces.append(sample_trace(ctx, scfg))
        else:
            traces.append(refine_trace(ctx, scfg, float(cfg["max_segment"]), int(cfg["rounds"]))[0])
    fit = estimate_box_dimension(traces, radii, kappa=k, seed=int(cfg["seed"]), min_resolution=0.0)
    rep = report(fit)
    passed = abs(fit.slope - fit.target) <= float(cfg["tolerance"])
    rep["passed"] = passed
    return rep, _fit_series(fit, "log_inv_eps", "log_count"), passed


def cmd_derivative(cfg):
    from .montecarlo import estimate_derivative_exponent, report
    k = _kappa(cfg, why="(kappa > 0)")
    if not float(cfg["h"]) > 0:
        raise ConfigError("h", "must be positive")
    ladder = parse_ladder(cfg["times"], "times")
    fit = estimate_derivative_exponent(k, float(cfg["h"]), float(cfg["x0"]), ladder, _positive_int(cfg, "samples"),
                                       seed=int(cfg["seed"]), eta=float(cfg["eta"]), workers=cfg["workers"])
    rep = report(fit)
    zmax = float(np.max(np.abs(fit.table["z_score"])))
    passed = abs(fit.slope - fit.target) <= float(cfg["tolerance"]) * abs(fit.target) and zmax <= 3.0
    rep["passed"] = passed
    return rep, _fit_series(fit, "log_x_over_sqrt_2kt", "log_moment"), passed


def cmd_restriction(cfg):
    from .montecarlo import estimate_restriction
    hull = formulas.SlitHull(float(cfg["x0"]), float(cfg["height"]))
    est = estimate_restriction(hull, _positive_int(cfg, "samples"), seed=int(cfg["seed"]),
                               escape_factor=float(cfg["escape_factor"]), n_doublings=int(cfg["doublings"]),
                               eta=float(cfg["eta"]), allowance=float(cfg["allowance"]), workers=cfg["workers"])
    return _estimate_report(est), None, est.passed


def cmd_swallow(cfg):
    from .montecarlo import estimate_swallow_fraction
    k = _kappa(cfg, why="(kappa > 0)")
    if float(cfg["x0"]) == 0:
        raise ConfigError("x0", "must be non-zero")
    est = estimate_swallow_fraction(k, float(cfg["x0"]), float(cfg["T"]), _positive_int(cfg, "samples"),
                                    seed=int(cfg["seed"]), eta=float(cfg["eta"]), workers=cfg["workers"])
    rep = _estimate_report(est)
    # the phase statement is a limit; the gate uses the exact finite-T value
    p = est.extras["finite_time_probability"]
    passed = abs(est.value - p) <= 3.0 * max(est.std_error, 1e-12)
    rep["passed"] = passed
    return rep, None, passed


def cmd_percolation(cfg):
    from .montecarlo import report
    from .percolation import explore_interface, lattice_box_dimension, lattice_left_passage
    radius = float(cfg["radius"])
    if radius < 10:
        raise ConfigError("radius", "must be at least 10")
    n = _positive_int(cfg, "samples")
    seed = int(cfg["seed"])
    if cfg["mode"] == "left-passage":
        est = lattice_left_passage(parse_complex(cfg["z"]), radius, n, seed=seed, allowance=float(cfg["allowance"]),
                                   workers=cfg["workers"])
        return report(est), None, est.passed
    if cfg["mode"] == "dimension":
        radii = parse_ladder(cfg["radii"], "radii")
        if radii.min() < 3 or np.count_nonzero(radii <= radius / 4) < 4:
            raise ConfigError("radii", f"need at least 4 radii in [3, radius/4] = [3, {radius / 4:g}]")
        paths = (explore_interface(radius, seed, i) for i in range(n))
        fit = lattice_box_dimension((p for p in paths if not p.truncated), radii, seed=seed)
        rep = report(fit)
        passed = abs(fit.slope - 1.75) <= float(cfg["tolerance"])
        rep["passed"] = passed
        return rep, _fit_series(fit, "log_inv_eps", "log_count"), passed
    if cfg["mode"] == "path":
        p = explore_interface(radius, seed, 0)
        return (dict(experiment="percolation-path", kappa=6.0, result=dict(n_steps=int(p.x.size), truncated=p.truncated)),
                (["step", "x", "y"], [np.arange(p.x.size), p.x, p.y]), True)
    raise ConfigError("mode", "one of left-passage, dimension, path")


def cmd_verify(cfg):
    from .acceptance import SUITES, run_suite
    if cfg["suite"] not in SUITES:
        raise ConfigError("suite", f"one of {', '.join(SUITES)}")
    results = run_suite(cfg["suite"], workers=cfg["workers"], seed=int(cfg["seed"]), echo=lambda s: print(s, file=sys.stderr))
    passed = all(r.passed for r in results)
    out = dict(experiment="verify", suite=cfg["suite"], passed=passed,
               criteria=[dict(name=r.name, passed=r.passed, measured=r.measured, required=r.requirement) for r in results])
    return out, None, passed


def cmd_plot_data(cfg):
    import json
    if cfg["sweep"] == "left-passage":
        k = _kappa(cfg, 0.0, 8.0, why="(0 < kappa < 8)")
        lo, hi, n = str(cfg["x"]).split(",")
        xs = np.linspace(float(lo), float(hi), int(n))
        y = float(cfg["y"])
        ps = np.array([formulas.left_passage_prob(k, x, y) for x in xs])
        return dict(experiment="plot-data", kappa=k, result=dict(sweep="left-passage", y=y)), (["x_over_y", "p_left"], [xs / y, ps]), True
    _need(cfg, "report")
    with open(cfg["report"], encoding="utf-8") as fh:
        rep = json.load(fh)
    pts = rep.get("points")
    if not pts:
        raise ConfigError("report", f"{rep.get('experiment')!r} is not a regression report")
    return dict(experiment="plot-data", kappa=rep.get("kappa"), result=dict(source=rep.get("experiment"))), \
        (["x", "y", "fitted"], [pts["x"], pts["y"], pts["fitted"]]), True


COMMANDS = {
    "formulas": cmd_formulas,
    "trace": cmd_trace,
    "left-passage": cmd_left_passage,
    "crossing": cmd_crossing,
    "dimension": cmd_dimension,
    "derivative": cmd_derivative,
    "restriction": cmd_restriction,
    "swallow": cmd_swallow,
    "percolation": cmd_percolation,
    "verify": cmd_verify,
    "plot-data": cmd_plot_data,
}


# --------------------------------------------------------------------------
# argument parser
# --------------------------------------------------------------------------

def _real(text):
    """Float flag that also takes fractions such as ``8/3``."""
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def build_parser():
    p = _Parser(prog="sle-lab", description="Loewner-evolution experiments and closed-form checks.")
    p.add_argument("--version", action="version", version=f"sle-lab {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, defaults in DEFAULTS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON file of settings (a report's run_config is accepted)")
        sp.add_argument("--seed", type=int, help="master seed")
        sp.add_argument("--workers", type=int, help="worker processes (results do not depend on it)")
        sp.add_argument("--out", help="write the JSON report here instead of stdout")
        sp.add_argument("--csv", help="write the series of this run here")
        for key, val in defaults.items():
            flag = "--" + key.replace("_", "-")
            if key == "h" and name == "formulas":
                sp.add_argument(flag, type=_real, nargs="+", dest=key)
            elif key == "T":
                sp.add_argument("--T", "--time", type=_real, dest=key)
            elif isinstance(val, bool):
                sp.add_argument(flag, type=lambda s: s.lower() in ("1", "true", "yes"), dest=key)
            elif isinstance(val, int):
                sp.add_argument(flag, type=int, dest=key)
            elif isinstance(val, float) or key in ("kappa", "r", "aspect", "max_segment"):
                sp.add_argument(flag, type=_real, dest=key)
            else:
                sp.add_argument(flag, dest=key)
    return p


def resolve_config(args):
    import json
    cfg = dict(DEFAULTS[args.command])
    cfg["seed"] = DEFAULT_SEED
    cfg["workers"] = 1
    env = os.environ.get("SLE_LAB_SEED")
    if env is not None:
        try:
            cfg["seed"] = int(env)
        except ValueError:
            raise ConfigError("SLE_LAB_SEED", f"not an integer: {env!r}") from None
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            data = json.load(fh)
        data = data.get("run_config", data)
        unknown = set(data) - set(cfg) - {"command"}
        if unknown:
            raise ConfigError("config", f"unknown settings {sorted(unknown)}")
        if data.get("command", args.command) != args.command:
            raise ConfigError("config", f"written for {data['command']!r}, not {args.command!r}")
        cfg.update({k: v for k, v in data.items() if k != "command"})
    for key in cfg:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if int(cfg["workers"]) < 1:
        raise ConfigError("workers", "must be at least 1")
    cfg["workers"] = int(cfg["workers"])
    return cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        rep, series, passed = COMMANDS[args.command](cfg)
    except (ConfigError, DomainError, ConvergenceError, ValueError, OSError) as exc:
        print(f"sle-lab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    # worker count never changes results, so it stays out of the fingerprint
    run_config = {k: v for k, v in cfg.items() if k != "workers"}
    run_config["command"] = args.command
    rep = dict(rep)
    rep["run_config"] = run_config
    rep["version"] = __version__
    text = to_json(rep)
    if args.out:
        write_text(args.out, text)
    else:
        sys.stdout.write(text)
    if series is not None and args.csv:
        write_columns(args.csv, *series)
    return EXIT_OK if passed in (True, None) else EXIT_GATE


if __name__ == "__main__":
    raise SystemExit(main())
