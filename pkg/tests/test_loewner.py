import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sle_lab.exact import vertical_slit
from sle_lab.loewner import (
    DrivingFunction,
    MapChain,
    Trace,
    ZipperIndex,
    capacity_check,
    discretize,
    elementary_slit_map,
    evolve_point,
    evolve_points,
    full_trace,
    inverse_slit_map,
    refined_grid,
    trace_point,
    trace_points,
    uniform_grid,
)

uhp = st.builds(complex, st.floats(-5, 5), st.floats(1e-3, 5))


def constant_chain(c=0.0, T=1.0, n=10):
    return MapChain(np.full(n, T / n), np.full(n, c))


def brownian_chain(kappa, n, T=1.0, seed=0):
    rng = np.random.default_rng(seed)
    t = uniform_grid(T, n)
    b = np.concatenate([[0.0], np.cumsum(rng.normal(0.0, math.sqrt(T / n), n))])
    return discretize(DrivingFunction(t, math.sqrt(kappa) * b))


class TestSlitMaps:
    def test_base_point_is_mapped_to_real_axis(self):
        # the slit base xi sits on the real axis next to both slit sides
        assert elementary_slit_map(0.3, 0.3, 0.25) == pytest.approx(0.3 + 2 * math.sqrt(0.25))

    def test_tip_of_slit(self):
        # the tip xi + 2i sqrt(dt) is the preimage of xi
        assert abs(elementary_slit_map(0.3 + 2j * math.sqrt(0.25), 0.3, 0.25) - 0.3) < 1e-15

    def test_identity(self):
        assert elementary_slit_map(1.5 + 2j, 0.4, 0.0) == 1.5 + 2j

    def test_far_point(self):
        g = elementary_slit_map(10.0 + 0j, 0.0, 0.01)
        assert g == pytest.approx(10.0 + 2 * 0.01 / 10.0, abs=1e-6)
        assert abs(g - 10.002) < 1e-5

    def test_inverse_examples(self):
        w = 1 + 1j
        assert abs(inverse_slit_map(elementary_slit_map(w, 0.0, 0.01), 0.0, 0.01) - w) <= 1e-12
        t = 0.3
        assert abs(inverse_slit_map(0.0, 0.0, t) - 2j * math.sqrt(t)) < 1e-15

    @given(uhp, st.floats(-3, 3), st.floats(0, 2))
    def test_upper_half_plane(self, w, xi, dt):
        assert elementary_slit_map(w, xi, dt).imag >= -1e-14
        assert inverse_slit_map(w, xi, dt).imag >= -1e-14

    @given(uhp, st.floats(-3, 3), st.floats(1e-6, 1))
    def test_round_trip(self, w, xi, dt):
        tip = xi + 2j * math.sqrt(dt)
        if abs(w - tip) < math.sqrt(dt):
            return
        back = inverse_slit_map(elementary_slit_map(w, xi, dt), xi, dt)
        assert abs(back - w) <= 1e-12 * max(1.0, abs(w))

    def test_array_matches_scalar(self):
        rng = np.random.default_rng(3)
        w = rng.uniform(-3, 3, 50) + 1j * rng.uniform(0, 3, 50)
        xi = rng.uniform(-1, 1, 50)
        dt = rng.uniform(0, 1, 50)
        vec = elementary_slit_map(w, xi, dt)
        sca = np.array([elementary_slit_map(complex(a), float(b), float(c)) for a, b, c in zip(w, xi, dt)])
        assert np.allclose(vec, sca, rtol=1e-14, atol=1e-15)
        vec = inverse_slit_map(w, xi, dt)
        sca = np.array([inverse_slit_map(complex(a), float(b), float(c)) for a, b, c in zip(w, xi, dt)])
        assert np.allclose(vec, sca, rtol=1e-14, atol=1e-15)

    def test_negative_dt(self):
        with pytest.raises(ValueError):
            elementary_slit_map(1j, 0.0, -1.0)

    def test_chain_round_trip(self):
        chain = brownian_chain(4.0, 1000, seed=2)
        z = 0.3 + 1.0j
        w, _ = evolve_points(z, chain)
        back = complex(w[0])
        for dt, xi in zip(chain.dt[::-1], chain.xi[::-1]):
            back = inverse_slit_map(back, xi, dt)
        assert abs(back - z) <= 1e-8


class TestTypes:
    def test_discretize_constant(self):
        chain = discretize(DrivingFunction(uniform_grid(1.0, 10), np.zeros(11)))
        assert len(chain) == 10
        assert np.allclose(chain.dt, 0.1) and np.all(chain.xi == 0.0)

    def test_discretize_linear_midpoint(self):
        drv = DrivingFunction.from_callable(lambda t: t, uniform_grid(1.0, 2))
        chain = discretize(drv)
        assert np.allclose(chain.dt, [0.5, 0.5])
        assert np.allclose(chain.xi, [0.25, 0.75])

    def test_discretize_linear_mode(self):
        chain = discretize(DrivingFunction(np.array([0.0, 1.0]), np.array([0.0, 1.0]), "linear"))
        assert np.allclose(chain.dt, [0.5, 0.5])
        assert np.allclose(chain.xi, [0.25, 0.75])

    @pytest.mark.parametrize("times,values", [
        ([0.1, 1.0], [0.0, 0.0]),
        ([0.0, 1.0, 1.0], [0.0, 0.0, 0.0]),
        ([0.0, 1.0], [0.0, math.nan]),
        ([0.0, 1.0], [0.0]),
    ])
    def test_driving_validation(self, times, values):
        with pytest.raises(ValueError):
            DrivingFunction(np.array(times), np.array(values))

    def test_chain_validation(self):
        with pytest.raises(ValueError):
            MapChain([0.1, 0.0], [0.0, 0.0])
        with pytest.raises(ValueError):
            MapChain([0.1], [0.0, 0.0])

    def test_chain_is_immutable(self):
        chain = constant_chain()
        with pytest.raises(ValueError):
            chain.dt[0] = 1.0

    def test_chain_slicing(self):
        chain = brownian_chain(2.0, 20)
        joined = chain.head(7).then(chain.tail(7))
        assert np.array_equal(joined.xi, chain.xi) and np.array_equal(joined.dt, chain.dt)
        assert chain.total_capacity_time == pytest.approx(1.0)
        assert chain.times[0] == 0.0 and chain.times[-1] == pytest.approx(1.0)

    def test_refined_grid(self):
        t = refined_grid(1.0, 4, 3)
        assert t[0] == 0 and t[-1] == 1.0
        assert np.all(np.diff(t) > 0)
        assert np.diff(t)[-1] == pytest.approx(0.25 / 8)

    def test_trace_csv_round_trip(self, tmp_path):
        tr = full_trace(brownian_chain(3.0, 50))
        path = tmp_path / "trace.csv"
        tr.to_csv(path)
        text = path.read_text(encoding="utf-8")
        assert text.splitlines()[0] == "t,re,im"
        back = Trace.from_csv(path)
        assert np.array_equal(back.times, tr.times)
        assert np.array_equal(back.points, tr.points)


class TestEvolution:
    def test_closed_form_point(self):
        chain = constant_chain(0.0, 1.0, 100)
        fate = evolve_point(3j, chain)
        assert fate.alive
        assert abs(fate.image - 1j * math.sqrt(5.0)) < 1e-12

    def test_point_on_slit_swallowed(self):
        # z = i sqrt(2) lies on the slit once 2 sqrt(t) >= sqrt(2), i.e. tau = 1/2
        chain = constant_chain(0.0, 1.0, 1000)
        fate = evolve_point(1j * math.sqrt(2.0), chain)
        assert not fate.alive
        assert fate.swallow_time == pytest.approx(0.5, abs=2e-3)
        assert 0 < fate.swallow_time <= 1.0

    def test_far_point(self):
        chain = brownian_chain(4.0, 500)
        z = 1e6 + 0j + 1j
        fate = evolve_point(z, chain)
        assert fate.alive
        # g - z loses ~1e-10 per step to cancellation at |z| = 1e6
        assert fate.image - z == pytest.approx(2.0 / z, rel=0.05)

    def test_matches_vertical_slit(self):
        rng = np.random.default_rng(0)
        z = rng.uniform(-3, 3, 20) + 1j * rng.uniform(0.1, 3, 20)
        chain = constant_chain(0.7, 1.0, 10_000)
        g, tau = evolve_points(z, chain)
        assert np.all(np.isnan(tau))
        assert np.max(np.abs(g - vertical_slit(z, 0.7, 1.0))) <= 1e-10

    def test_rejects_lower_half_plane(self):
        with pytest.raises(ValueError):
            evolve_points([1 - 1j], constant_chain())

    def test_branch_correctness_random(self):
        chain = brownian_chain(6.0, 2000, seed=5)
        rng = np.random.default_rng(1)
        z = rng.uniform(-2, 2, 200) + 1j * rng.uniform(0, 2, 200)
        g, tau = evolve_points(z, chain)
        alive = np.isnan(tau)
        assert np.all(g[alive].imag >= -1e-14)
        assert np.all(g[alive].imag > 0)
        assert np.all((tau[~alive] > 0) & (tau[~alive] <= 1.0 + 1e-12))

    def test_scaling(self):
        # g_t(z) under xi equals (1/a) g_{a^2 t}(a z) under a xi(./a^2)
        a = 1.7
        chain = brownian_chain(3.0, 400, seed=4)
        scaled = MapChain(a * a * chain.dt, a * chain.xi)
        z = np.array([0.4 + 0.9j, -1.2 + 0.3j, 2.0 + 2.0j])
        g1, _ = evolve_points(z, chain)
        g2, _ = evolve_points(a * z, scaled)
        assert np.max(np.abs(g1 - g2 / a)) <= 1e-8


class TestTrace:
    def test_vertical_slit_tip(self):
        chain = constant_chain(0.0, 1.0, 100)
        for k in (1, 25, 100):
            t = chain.times[k]
            assert abs(trace_point(chain, k, 1e-9) - 2j * math.sqrt(t)) < 1e-6

    def test_empty_composition(self):
        chain = constant_chain(0.4)
        assert trace_point(chain, 0, 1e-3) == pytest.approx(0.0 + 1e-3j)

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            trace_point(constant_chain(), 11)

    def test_trace_in_upper_half_plane(self):
        tr = full_trace(brownian_chain(6.0, 3000, seed=9))
        assert tr.points[0] == 0
        assert np.all(tr.points.imag >= 0)

    def test_inverse_consistency(self):
        chain = brownian_chain(4.0, 800, seed=3)
        eps = 1e-6
        for k in (10, 200, 800):
            g = trace_point(chain, k, eps)
            fate = evolve_point(g, chain.head(k), swallow_eps=0.0)
            assert abs(fate.image - (chain.xi[k - 1] + 1j * eps)) <= 10 * eps

    def test_fast_matches_direct(self):
        chain = brownian_chain(6.0, 20_000, seed=11)
        ks = np.arange(0, 20_001, 37)
        d = trace_points(chain, ks, method="direct")
        f = trace_points(chain, ks, method="fast")
        assert np.max(np.abs(d - f)) < 1e-10
        assert np.array_equal(ZipperIndex(chain).points(ks), f)

    def test_continuity_deterministic(self):
        # max gap shrinks by about 2 when the number of steps is quadrupled
        gaps = []
        for n in (250, 1000, 4000):
            drv = DrivingFunction.from_callable(lambda t: math.sin(3 * t), uniform_grid(1.0, n))
            tr = full_trace(discretize(drv))
            gaps.append(np.max(np.abs(np.diff(tr.points))))
        assert gaps[0] / gaps[1] == pytest.approx(2.0, rel=0.1)
        assert gaps[1] / gaps[2] == pytest.approx(2.0, rel=0.1)

    def test_bad_method(self):
        with pytest.raises(ValueError):
            trace_points(constant_chain(), [1], method="nope")


class TestCapacity:
    def test_vertical_slit(self):
        assert capacity_check(constant_chain(0.0, 1.0, 50), 1e3) == pytest.approx(2.0, abs=1e-3)

    def test_empty(self):
        assert capacity_check(MapChain(np.empty(0), np.empty(0))) == 0.0

    @settings(max_examples=20, deadline=None)
    @given(st.integers(1, 299), st.integers(0, 1000))
    def test_additivity(self, split, seed):
        chain = brownian_chain(4.0, 300, seed=seed)
        whole = capacity_check(chain)
        parts = capacity_check(chain.head(split)) + capacity_check(chain.tail(split))
        assert whole == pytest.approx(parts, abs=1e-3)
        assert whole == pytest.approx(2 * chain.total_capacity_time, abs=1e-3)

    def test_probe_inside_hull(self):
        chain = constant_chain(0.0, 100.0, 10)
        with pytest.raises(ValueError):
            capacity_check(chain, probe_radius=5.0)
