import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from llg_inviscid import evolve
from llg_inviscid.data import bump_datum, random_band_limited
from llg_inviscid.errors import IncompatibleScalingError
from llg_inviscid.spectral_core import Grid, transform_forward
from llg_inviscid.sphere_maps import LlgParams, constant_field, inverse_stereographic, pointwise_norm
from llg_inviscid.trajectory import Trajectory


@pytest.fixture(scope="module")
def small_solution():
    g = Grid.cube(16, 3)
    u0 = bump_datum(g, 0.05, width=1.0)
    p = LlgParams(1.0, 0.1)
    return g, u0, p, evolve.solve(g, u0, 0.2, p, 0.005)


class TestLinear:
    @given(st.floats(0, 2), st.floats(0, 1), st.floats(0, 2))
    def test_single_mode_multiplier(self, t, eps, a):
        g = Grid.cube(16, 1)
        x = g.coords[0]
        u = np.exp(3j * x)
        out = evolve.linear_propagate(g, u, t, eps, a)
        assert np.max(np.abs(out - np.exp(-(1j * a + eps) * 9 * t) * u)) <= 1e-13

    def test_semigroup(self, grid3, rng):
        u = random_band_limited(grid3, 2)
        for eps in (0.0, 0.3):
            a = evolve.linear_propagate(grid3, u, 0.35, eps)
            b = evolve.linear_propagate(grid3, evolve.linear_propagate(grid3, u, 0.1, eps), 0.25, eps)
            assert np.max(np.abs(a - b)) <= 1e-12 * np.max(np.abs(u))

    def test_backward_only_without_damping(self, grid1):
        u = np.ones(16, dtype=complex)
        with pytest.raises(ValueError):
            evolve.linear_propagate(grid1, u, -0.1, 0.2)
        back = evolve.linear_propagate(grid1, evolve.linear_propagate(grid1, u, 0.3, 0.0), -0.3, 0.0)
        assert np.allclose(back, u, atol=1e-14)

    def test_contractive(self, grid3):
        for t in (0.0, 0.1, 3.0):
            for eps in (0.0, 1.0):
                assert np.max(np.abs(evolve.linear_multiplier(grid3, t, eps))) <= 1.0 + 1e-15

    def test_propagator_object(self, grid1):
        P = evolve.Propagator(grid1, 0.1)
        u = np.exp(2j * grid1.coords[0])
        assert np.allclose(P(u, 0.5), evolve.linear_propagate(grid1, u, 0.5, 0.1))

    def test_free_trajectory(self, grid1):
        u = np.exp(1j * grid1.coords[0])
        tr = evolve.free_trajectory(grid1, u, np.linspace(0, 1, 5), 0.0)
        assert np.allclose(tr.values[-1], np.exp(-1j) * u)


class TestIntegrator:
    def test_linear_step_exact(self, grid3):
        u = random_band_limited(grid3, 4)
        for eps in (0.0, 0.5):
            p = LlgParams(1.0, eps)
            out = evolve.step_dgl(grid3, u, 0.05, p, nonlinear=False)
            assert np.max(np.abs(out - evolve.linear_propagate(grid3, u, 0.05, eps))) <= 1e-14

    def test_zero_is_fixed(self, grid3):
        tr = evolve.solve(grid3, np.zeros(grid3.shape, complex), 0.1, LlgParams(1.0, 0.5), 0.01)
        assert np.all(tr.values == 0)

    def test_constant_sphere_field_fixed(self, grid3):
        s0 = constant_field(grid3, [0.0, 0.6, 0.8])
        tr = evolve.solve(grid3, s0, 0.05, LlgParams(1.0, 0.5), 0.01)
        assert np.max(np.abs(tr.values - s0)) <= 1e-15

    def test_large_steps_stable(self):
        # the integrating factor removes the stiffness for every eps in [0, 1]
        g = Grid.cube(32, 3)
        u0 = bump_datum(g, 0.05, width=1.0)
        for eps in (0.0, 0.01, 0.1, 1.0):
            tr = evolve.solve(g, u0, 0.5, LlgParams(1.0, eps), 0.05)
            assert np.all(np.isfinite(tr.values))
            assert tr.meta["sup_critical_norm"] <= 2 * tr.meta["initial_critical_norm"]

    def test_sample_every_matches_full(self, grid3):
        u0 = bump_datum(grid3, 0.05, width=1.0)
        p = LlgParams(1.0, 0.2)
        full = evolve.solve(grid3, u0, 0.1, p, 0.01)
        sparse = evolve.solve(grid3, u0, 0.1, p, 0.01, sample_every=5)
        assert np.array_equal(sparse.values, full.values[::5])
        assert np.allclose(sparse.times, [0, 0.05, 0.1])

    def test_bad_steps(self, grid1):
        with pytest.raises(ValueError):
            evolve.solve(grid1, np.zeros(16, complex), 0.25, LlgParams(), 0.02)
        with pytest.raises(ValueError):
            evolve.solve(grid1, np.zeros(16, complex), 0.1, LlgParams(), 0.01, sample_every=3)
        assert evolve.steps_for(0.25, 0.0025) == 100

    def test_sphere_drift_fifth_order(self):
        g = Grid.cube(16, 3)
        u = random_band_limited(g, 1, kcut=2)
        s = inverse_stereographic(0.1 * u / np.max(np.abs(u)))
        p = LlgParams(1.0, 0.3)
        drift = [np.max(np.abs(pointwise_norm(evolve.step_llg_raw(g, s, dt, p)) - 1)) for dt in (0.02, 0.01)]
        C = drift[0] / 0.02**5
        assert drift[1] <= 2 * C * 0.01**5
        out = evolve.step_llg(g, s, 0.02, p)
        assert np.max(np.abs(pointwise_norm(out) - 1)) <= 1e-15

    def test_projected_and_lifted(self, small_solution):
        g, u0, p, tr = small_solution
        back = evolve.projected(evolve.lifted(tr))
        assert np.max(np.abs(back.values - tr.values)) <= 1e-14


class TestDuhamel:
    def test_solver_output_is_near_fixed_point(self, small_solution):
        g, u0, p, tr = small_solution
        mapped = evolve.duhamel_map(tr, u0, p)
        assert np.max(np.abs(mapped.values - tr.values)) <= 1e-8 * np.max(np.abs(u0))

    def test_zero_datum(self, grid3):
        tr = Trajectory(grid3, np.linspace(0, 0.1, 5), np.zeros((5,) + grid3.shape, complex))
        assert np.all(evolve.duhamel_map(tr, np.zeros(grid3.shape), LlgParams()).values == 0)

    def test_linear_candidate_integral_is_quadrature_exact(self, grid1):
        # time-independent candidate: the integral has a closed form
        d = 0.1
        u = d * np.exp(1j * grid1.coords[0])
        times = np.linspace(0, 0.4, 9)
        cand = Trajectory(grid1, times, np.repeat(u[None], 9, axis=0))
        p = LlgParams(1.0, 0.0)
        # G(u) = -d^3 e^{ix}/(1+d^2); N = -2i G; e^{(t-s)L} on mode 1 is e^{-i(t-s)}
        N = -2j * (-(d**3) / (1 + d**2))
        integral = N * (1 - np.exp(-1j * times)) / 1j
        F = evolve.duhamel_integral(cand, p)
        coeff = np.array([transform_forward(grid1, np.exp(1j * grid1.coords[0]))[1] for _ in times])
        got = F[:, 1] / coeff
        assert np.max(np.abs(got - integral)) <= 1e-7 * abs(N)

    def test_picard_contracts_and_converges(self, small_solution):
        g, u0, p, tr = small_solution
        state = evolve.picard_iterate(g, u0, tr.times, p, 5)
        assert len(state.diffs) == 5 and state.m == 5
        assert all(r <= 0.5 for r in state.ratios[:4])
        assert np.max(np.abs(state.trajectory.values - tr.values)) <= 1e-8 * np.max(np.abs(u0))

    def test_picard_ratio_zero_convention(self, grid3):
        st_ = evolve.PicardState(1, None, [1e-3, 0.0, 0.0])
        assert st_.ratios == [0.0, 0.0]


class TestScaling:
    def test_identity(self, small_solution):
        tr = small_solution[3]
        same = evolve.scaling_transform(tr, 1)
        assert np.array_equal(same.values, tr.values)
        assert np.array_equal(same.times, tr.times)

    def test_incompatible(self, small_solution):
        g, u0, _, tr = small_solution
        with pytest.raises(IncompatibleScalingError):
            evolve.dilate(g, u0, 3)
        with pytest.raises(IncompatibleScalingError):
            evolve.dilate(g, u0, 1.5)
        with pytest.raises(IncompatibleScalingError):
            evolve.scaling_transform(evolve.lifted(tr), 2)

    def test_periodic_dilation_mode(self, grid1):
        u = np.exp(1j * grid1.coords[0])
        assert np.allclose(evolve.dilate(grid1, u, 2), np.exp(2j * grid1.coords[0]))

    def test_scaled_solution_still_solves(self):
        g = Grid.cube(32, 3)
        u0 = bump_datum(g, 0.05, width=1.0)
        p = LlgParams(1.0, 0.1)
        tr = evolve.solve(g, u0, 0.2, p, 0.005)
        lam = 2
        sc = evolve.scaling_transform(tr, lam)
        assert sc.T == pytest.approx(tr.T / lam**2)
        # time derivatives grow by lam^2; compare residuals relative to that scale
        r0 = evolve.dgl_residual(tr, p)
        r1 = evolve.dgl_residual(sc, p) / lam**2
        assert r1 <= 10 * r0

    def test_localized_dilation_support(self):
        g = Grid.cube(16, 1)
        f = np.zeros(16)
        f[8] = 1.0
        f[9] = 2.0
        out = evolve.dilate(g, f, 2, mode="localized")
        assert out[8] == 1.0 and out[9] == 0.0 and out[7] == 0.0


def test_log2_ratio():
    assert evolve.log2_ratio(8.0, 1.0) == 3.0
    assert math.isnan(evolve.log2_ratio(0.0, 1.0))


def test_required_steps_uniform_in_damping():
    g = Grid.cube(16, 3)
    u0 = bump_datum(g, 0.05, width=1.0)
    T, target = 0.25, 1e-13
    counts = []
    for eps in (0.0, 0.01, 0.1, 1.0):
        p = LlgParams(1.0, eps)
        ref = evolve.solve(g, u0, T, p, T / 160).values[-1]
        err = np.max(np.abs(evolve.solve(g, u0, T, p, T / 10).values[-1] - ref))
        # steps needed for the target, from the fourth-order error law
        counts.append(10 * (err / target) ** 0.25)
    assert max(counts) / min(counts) < 2
