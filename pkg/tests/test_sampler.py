import math

import numpy as np
import pytest

from sle_lab.errors import ConfigError
from sle_lab.loewner import trace_points
from sle_lab.sampler import (
    DEFAULT_SEED,
    SLIT_AVOIDED,
    SLIT_HIT,
    SLIT_UNRESOLVED,
    KappaContext,
    SamplerConfig,
    boundary_log_derivative,
    boundary_pair_race,
    brownian_increments,
    bulk_passage,
    default_absorb_eps,
    evolve_boundary_point,
    evolve_bulk_point,
    near_self_intersection,
    refine_trace,
    sample_driving,
    sample_rng,
    sample_trace,
    slit_race,
    touches_boundary,
)


class TestContext:
    @pytest.mark.parametrize("kappa,phase", [(0.0, "simple"), (4.0, "simple"), (4.5, "touching"), (8.0, "space-filling")])
    def test_phase(self, kappa, phase):
        assert KappaContext(kappa).phase == phase

    def test_constants(self):
        ctx = KappaContext(6.0)
        assert ctx.c == pytest.approx(0.0, abs=1e-15) and ctx.d_f == 1.75
        assert ctx.q == pytest.approx(1.0) and ctx.g == pytest.approx(2 / 3)
        assert KappaContext(0.0).d_f == 1.0 and KappaContext(0.0).constants is None

    @pytest.mark.parametrize("bad", [-1.0, math.inf, math.nan])
    def test_bad_kappa(self, bad):
        with pytest.raises(ConfigError):
            KappaContext(bad)

    @pytest.mark.parametrize("kw", [
        dict(total_time=0.0, n_steps=10), dict(total_time=1.0, n_steps=0), dict(total_time=1.0, n_steps=2.5),
        dict(total_time=1.0, n_steps=10, master_seed=-1), dict(total_time=1.0, n_steps=10, sample_index=-2),
    ])
    def test_bad_config(self, kw):
        with pytest.raises(ConfigError):
            SamplerConfig(**kw)

    def test_config_error_names_field(self):
        with pytest.raises(ConfigError) as info:
            SamplerConfig(1.0, 0)
        assert "n_steps" in str(info.value)


class TestDriving:
    def test_zero_kappa(self):
        drv = sample_driving(KappaContext(0.0), SamplerConfig(1.0, 100))
        assert np.all(drv.values == 0.0)

    def test_variance(self):
        kappa = 3.0
        ctx = KappaContext(kappa)
        end = np.array([sample_driving(ctx, SamplerConfig(2.0, 8, 7, i)).values[-1] for i in range(10_000)])
        ratio = end ** 2 / 2.0
        assert abs(ratio.mean() - kappa) <= 3 * ratio.std(ddof=1) / math.sqrt(ratio.size)

    def test_brownian_scaling(self):
        # a^-1 xi(a^2 t) has the law of xi(t): compare variances at t = 1 and t = 4 (a = 2)
        ctx = KappaContext(2.0)
        v1 = np.array([sample_driving(ctx, SamplerConfig(1.0, 4, 1, i)).values[-1] for i in range(4000)])
        v4 = np.array([sample_driving(ctx, SamplerConfig(4.0, 4, 2, i)).values[-1] / 2 for i in range(4000)])
        f = v1.var() / v4.var()
        assert abs(f - 1) < 0.1

    def test_reproducible_and_independent(self):
        a = brownian_increments(SamplerConfig(1.0, 100, 5, 3))
        b = brownian_increments(SamplerConfig(1.0, 100, 5, 3))
        c = brownian_increments(SamplerConfig(1.0, 100, 5, 4))
        d = brownian_increments(SamplerConfig(1.0, 100, 6, 3))
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c) and not np.array_equal(a, d)

    def test_streams_are_distinct(self):
        x = sample_rng(1, 0, 0).standard_normal(5)
        y = sample_rng(1, 0, 1).standard_normal(5)
        assert not np.array_equal(x, y)

    def test_csv(self, tmp_path):
        drv = sample_driving(KappaContext(2.0), SamplerConfig(1.0, 10))
        drv.to_csv(tmp_path / "d.csv")
        lines = (tmp_path / "d.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "t,xi" and len(lines) == 12


class TestTrace:
    def test_zero_kappa_is_vertical(self):
        tr = sample_trace(KappaContext(0.0), SamplerConfig(1.0, 200))
        assert tr.points[0] == 0
        assert np.max(np.abs(tr.points - 2j * np.sqrt(tr.times))) < 1e-5

    def test_endpoint_scaling(self):
        # with shared normals the 4T trace is exactly twice the T trace
        ctx = KappaContext(3.0)
        im1, im4 = [], []
        for i in range(40):
            im1.append(sample_trace(ctx, SamplerConfig(1.0, 500, 3, i)).points[-1].imag)
            im4.append(sample_trace(ctx, SamplerConfig(4.0, 500, 3, i)).points[-1].imag)
        assert np.mean(im4) / np.mean(im1) == pytest.approx(2.0, rel=0.05)

    def test_upper_half_plane(self):
        tr = sample_trace(KappaContext(6.0), SamplerConfig(1.0, 2000, 1, 2))
        assert np.all(tr.points.imag >= 0)

    def test_self_intersection_fraction_shrinks(self):
        ctx = KappaContext(8.0 / 3.0)
        traces = [sample_trace(ctx, SamplerConfig(1.0, 2000, 11, i)) for i in range(30)]
        frac = [np.mean([near_self_intersection(t, d) for t in traces]) for d in (0.05, 0.01, 0.002)]
        assert frac[0] >= frac[1] >= frac[2]
        assert frac[2] < frac[0] or frac[0] == 0

    def test_touching_phase_hits_axis(self):
        traces6 = [sample_trace(KappaContext(6.0), SamplerConfig(1.0, 2000, 12, i)) for i in range(30)]
        traces2 = [sample_trace(KappaContext(2.0), SamplerConfig(1.0, 2000, 12, i)) for i in range(30)]
        # a discrete trace stays about 3 sqrt(dt) above the axis, so delta must exceed that
        f6 = np.mean([touches_boundary(t, 0.1, 0.3) for t in traces6])
        f2 = np.mean([touches_boundary(t, 0.1, 0.3) for t in traces2])
        assert f6 > 0.3 and f2 == 0

    def test_self_intersection_detector(self):
        class T:
            points = np.array([0, 0.5j, 1j, 1 + 1j, 1 + 0.5j, 0.001 + 0.5j])
        assert near_self_intersection(T, 0.01)
        assert not near_self_intersection(T, 0.0005)

    def test_refinement(self):
        ctx = KappaContext(2.0)
        cfg = SamplerConfig(1.0, 2000, 4, 0)
        tr, n_long = refine_trace(ctx, cfg, 0.01, max_rounds=20)
        base = sample_trace(ctx, cfg)
        assert n_long == 0
        assert np.max(np.abs(np.diff(tr.points))) <= 0.01
        assert np.max(np.abs(np.diff(base.points))) > 0.01
        assert np.all(np.isin(base.times, tr.times))
        again, _ = refine_trace(ctx, cfg, 0.01, max_rounds=20)
        assert np.array_equal(again.points, tr.points)


class TestBoundaryPoint:
    def test_zero_kappa_exact(self):
        cfg = SamplerConfig(2.0, 200_000)
        st = evolve_boundary_point(1.5, KappaContext(0.0), cfg)
        assert st.alive
        assert st.x == pytest.approx(math.sqrt(1.5 ** 2 + 8.0), rel=1e-4)
        assert st.log_deriv == pytest.approx(math.log(1.5 / math.sqrt(1.5 ** 2 + 8.0)), rel=1e-4)

    def test_noise_sharing(self):
        # replaying the driving increments reproduces the boundary path exactly
        ctx = KappaContext(2.0)
        cfg = SamplerConfig(1.0, 500, 9, 1)
        dxi = np.diff(sample_driving(ctx, cfg).values)
        dB = brownian_increments(cfg)
        assert np.allclose(dxi, ctx.sqrt_kappa * dB, rtol=0, atol=1e-15)
        x = 1.0
        for d in dxi:
            drift = 2 * cfg.dt / x
            drift = math.copysign(min(abs(drift), 0.5 * abs(x)), drift)
            x = x + drift - d
        assert evolve_boundary_point(1.0, ctx, cfg).x == pytest.approx(x, rel=1e-12)

    def test_log_derivative_monotone(self):
        ctx = KappaContext(3.0)
        prev = 0.0
        for n in (10, 100, 1000):
            st = evolve_boundary_point(1.0, ctx, SamplerConfig(1.0 * n / 1000, n, 2, 0))
            assert st.log_deriv <= prev
            prev = st.log_deriv

    def test_absorb_eps(self):
        ctx, cfg = KappaContext(4.0), SamplerConfig(1.0, 100)
        assert default_absorb_eps(ctx, cfg) == pytest.approx(1e-4 * 2 * 0.1)

    def test_phases(self):
        f6 = np.mean([not evolve_boundary_point(1.0, KappaContext(6.0), SamplerConfig(100.0, 20_000, 3, i)).alive
                      for i in range(200)])
        f2 = np.mean([not evolve_boundary_point(1.0, KappaContext(2.0), SamplerConfig(100.0, 20_000, 3, i)).alive
                      for i in range(200)])
        assert f2 <= 0.01
        assert f6 > 0.5

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            evolve_boundary_point(0.0, KappaContext(2.0), SamplerConfig(1.0, 10))


class TestBulkPoint:
    def test_zero_kappa_symmetric(self):
        # the vertical slit reaches i at t = 1/4
        st = evolve_bulk_point(1j, KappaContext(0.0), SamplerConfig(0.2, 20_000))
        assert st.u == 0.0 and st.q == 0.0 and st.alive
        assert st.v == pytest.approx(math.sqrt(1 - 0.8), rel=1e-3) and st.D > 0

    def test_v_decreases(self):
        ctx = KappaContext(6.0)
        vs = [evolve_bulk_point(0.3 + 1j, ctx, SamplerConfig(t, int(1000 * t), 5, 0)).v for t in (0.1, 0.2, 0.4, 0.8)]
        assert 1.0 > vs[0] and np.all(np.diff(vs) < 0)

    def test_symmetric_passage(self):
        rng_sides = [bulk_passage(1j, 6.0, sample_rng(21, i), eta=5e-3)[0] for i in range(600)]
        sides = np.array(rng_sides)
        assert np.all(sides != 0)
        p = np.mean(sides > 0)
        assert abs(p - 0.5) <= 3 * math.sqrt(0.25 / sides.size)

    def test_rejects_real_point(self):
        with pytest.raises(ValueError):
            evolve_bulk_point(1.0 + 0j, KappaContext(2.0), SamplerConfig(1.0, 10))


class TestAdaptiveSchemes:
    def test_bulk_passage_reproducible(self):
        a = bulk_passage(1 + 1j, 8 / 3, sample_rng(1, 5))
        b = bulk_passage(1 + 1j, 8 / 3, sample_rng(1, 5))
        assert a == b and a[0] in (-1, 1)

    def test_pair_race(self):
        sides = [boundary_pair_race(-1.0, 1.0, 6.0, sample_rng(2, i))[0] for i in range(300)]
        assert set(sides) <= {-1, 1}
        assert abs(np.mean(np.array(sides) > 0) - 0.5) < 0.1

    def test_log_derivative_ladder(self):
        out = boundary_log_derivative(1.0, 2.0, [0.1, 1.0, 10.0], sample_rng(3, 0))
        assert np.all(np.isfinite(out)) and np.all(np.diff(out) < 0) and out[0] < 0
        with pytest.raises(ValueError):
            boundary_log_derivative(1.0, 2.0, [1.0, 0.5], sample_rng(3, 0))

    def test_log_derivative_absorbed(self):
        outs = [boundary_log_derivative(1.0, 6.0, [1.0, 1e4], sample_rng(4, i)) for i in range(50)]
        assert any(np.isneginf(o[-1]) for o in outs)

    def test_slit_race(self):
        res = [slit_race(1.0, 1.0, 8 / 3, sample_rng(6, i), [20.0, 40.0]) for i in range(40)]
        status = [r[0] for r in res]
        assert set(status) <= {SLIT_AVOIDED, SLIT_HIT, SLIT_UNRESOLVED}
        assert SLIT_AVOIDED in status and SLIT_HIT in status
        for s, _, n_left in res:
            if s == SLIT_AVOIDED:
                assert n_left == 2
        assert slit_race(1.0, 1.0, 8 / 3, sample_rng(6, 3), 20.0) == slit_race(1.0, 1.0, 8 / 3, sample_rng(6, 3), 20.0)

    def test_slit_race_straight(self):
        # kappa = 0 grows the vertical slit at 0, which never meets [1, 1 + i]
        assert slit_race(1.0, 1.0, 0.0, sample_rng(0, 0), 10.0)[0] == SLIT_AVOIDED
        # a slit on the imaginary axis' foot is hit immediately by a tall curve
        assert slit_race(1e-3, 5.0, 0.0, sample_rng(0, 0), 10.0, hit_eps=2e-3)[0] == SLIT_HIT

    def test_slit_race_validation(self):
        with pytest.raises(ValueError):
            slit_race(0.0, 1.0, 8 / 3, sample_rng(0, 0), 10.0)
        with pytest.raises(ValueError):
            slit_race(1.0, 1.0, 8 / 3, sample_rng(0, 0), 1.2)


def test_default_seed_constant():
    assert DEFAULT_SEED == 20240607
