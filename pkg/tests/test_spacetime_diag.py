import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from llg_inviscid import evolve
from llg_inviscid import spacetime_diag as sd
from llg_inviscid.data import bump_datum, random_band_limited, shell_packet
from llg_inviscid.errors import GridMismatchError
from llg_inviscid.spectral_core import Grid, l2_norm
from llg_inviscid.sphere_maps import LlgParams
from llg_inviscid.trajectory import Trajectory


@pytest.fixture(scope="module")
def small_run():
    g = Grid.cube(16, 3)
    u0 = bump_datum(g, 0.05, width=1.0)
    return evolve.solve(g, u0, 0.25, LlgParams(1.0, 0.0), 0.005)


class TestWindow:
    def test_plateau_and_ends(self):
        t = np.linspace(0, 1, 201)
        w = sd.time_window(t)
        assert w[0] == 0.0 and w[-1] == 0.0
        assert np.all(w[(t >= 0.1) & (t <= 0.9)] == 1.0)
        assert np.all((w >= 0) & (w <= 1))

    def test_derivative_oracle(self):
        t = np.linspace(0, 2, 4001)
        h = 1e-6
        inner = t[1:-1]
        fd = (sd.time_window(inner + h, 2.0) - sd.time_window(inner - h, 2.0)) / (2 * h)
        assert np.max(np.abs(fd - sd.time_window_derivative(inner, 2.0))) <= 1e-6

    def test_no_periodic_jump(self, small_run):
        F = sd.windowed(small_run)
        assert F.periodic_jump == 0.0
        assert F.n_times == small_run.n_samples - 1
        assert F.period == pytest.approx(small_run.T)


class TestTransforms:
    def test_parseval(self, grid2, rng):
        f = rng.standard_normal((12,) + grid2.shape) + 1j * rng.standard_normal((12,) + grid2.shape)
        dt = 0.03
        C = sd.spacetime_forward(grid2, dt, f)
        assert np.sum(np.abs(C) ** 2) == pytest.approx(np.sum(np.abs(f) ** 2) * dt * grid2.cell_volume, rel=1e-12)
        assert np.max(np.abs(sd.spacetime_inverse(grid2, dt, C) - f)) <= 1e-12

    def test_free_wave_sits_on_paraboloid(self):
        # e^{i(3x - 9t)} sampled over whole periods has modulation exactly 0
        g = Grid.cube(16, 1)
        M = 32
        dt = 2 * math.pi / 9 / M * 4
        times = np.arange(M) * dt
        vals = np.exp(1j * (3 * g.coords[0][None] - 9 * times[:, None]))
        C = sd.spacetime_forward(g, dt, vals)
        tau = 2 * math.pi * np.fft.fftfreq(M, dt)
        i, j = np.unravel_index(np.argmax(np.abs(C)), C.shape)
        assert tau[i] + g.ksq[j] == pytest.approx(0.0, abs=1e-9)

    def test_sphere_trajectory_rejected(self, grid1):
        tr = Trajectory(grid1, np.linspace(0, 1, 5), np.zeros((5, 3, 16)), kind="sphere")
        with pytest.raises(GridMismatchError):
            sd.windowed(tr)


class TestModulation:
    def test_partition(self, small_run):
        F = sd.windowed(small_run)
        assert sd.modulation_partition_error(F) <= 1e-10
        assert sd.modulation_partition_error(F, jmin=3) <= 1e-10

    def test_projector_support(self, small_run):
        F = sd.windowed(small_run)
        for j in (1, 4, 7):
            Q = sd.modulation_project(F, j)
            lo, hi = 0.8 * 2.0 ** (j - 1), 1.6 * 2.0**j
            r = np.abs(F.modulation)
            assert np.max(np.abs(Q.coefficients[(r < lo) | (r > hi)]), initial=0.0) == 0.0

    def test_free_solution_concentrates_at_low_modulation(self):
        g = Grid.cube(16, 3)
        times = np.linspace(0, 0.25, 51)
        u0 = random_band_limited(g, 3)
        F = sd.windowed(evolve.free_trajectory(g, u0, times, 0.0))
        C = sd.window_bandwidth(times)
        assert sd.low_modulation_fraction(F, C) >= 0.99

    def test_shell_of(self):
        assert sd.shell_of(1.0) == 0 and sd.shell_of(8.0) == 3 and sd.shell_of(0.9 * 16) == 4


class TestX01:
    def test_dual_routes_agree(self, small_run):
        rep = sd.x01_norm(sd.windowed(small_run))
        assert rep.relative_gap <= 1e-10
        assert "free" in rep.caveat

    @pytest.mark.parametrize("mu", [0.0, 3.0, -20.0])
    def test_detuned_wave_oracle(self, mu):
        # |(i d_t + Lap)(w e^{i(xi x + mu t)})|^2 = (mu + |xi|^2)^2 w^2 + w'^2
        g = Grid.cube(8, 1)
        T = 1.0
        times = np.linspace(0, T, 1025)
        xi0 = (2,)
        F = sd.windowed(sd.detuned_wave(g, times, xi0, mu))
        m = mu + 4.0
        t = times[:-1]
        w, dw = sd.time_window(t, T), sd.time_window_derivative(t, T)
        exact = math.sqrt((m**2 * np.sum(w**2) + np.sum(dw**2)) * F.dt * g.volume)
        rep = sd.x01_norm(F)
        assert rep.spectral == pytest.approx(exact, rel=1e-12)
        assert rep.physical == pytest.approx(exact, rel=1e-12)

    def test_duhamel_part_is_cubic_in_amplitude(self):
        g = Grid.cube(16, 3)
        vals = []
        deltas = [0.02, 0.04, 0.08]
        for d in deltas:
            tr = evolve.solve(g, bump_datum(g, d, width=1.0), 0.25, LlgParams(1.0, 0.0), 0.005)
            vals.append(sd.x01_norm(sd.windowed(sd.remove_free_part(tr))).spectral)
        slope = np.polyfit(np.log(deltas), np.log(vals), 1)[0]
        assert slope == pytest.approx(3.0, abs=0.05)


class TestNullStructure:
    def test_residual_on_solver_output(self, small_run):
        F = sd.windowed(small_run)
        G = sd.windowed(small_run.with_values(np.conj(small_run.values)))
        assert sd.null_identity_residual(F, G) <= 1e-8
        assert sd.null_identity_residual(F, F) <= 1e-8

    def test_mismatch(self, small_run):
        F = sd.windowed(small_run)
        short = sd.windowed(Trajectory(small_run.grid, small_run.times[:20], small_run.values[:20]))
        with pytest.raises(GridMismatchError):
            sd.null_identity_residual(F, short)

    @given(st.lists(st.integers(-20, 20), min_size=3, max_size=3),
           st.lists(st.integers(-20, 20), min_size=3, max_size=3))
    def test_resonance_identity(self, a, b):
        a, b = np.array(a, float), np.array(b, float)
        expected = a @ a + b @ b - (a + b) @ (a + b)
        assert sd.resonance(a, b) == pytest.approx(expected, abs=1e-9)

    def test_resonance_bound_on_dyadic_annuli(self):
        r = np.arange(-12, 13)
        pts = np.stack(np.meshgrid(r, r, indexing="ij"), axis=-1).reshape(-1, 2).astype(float)
        for k1 in range(0, 4):
            for k2 in range(0, 4):
                A, B = sd.dyadic_annulus(pts, k1), sd.dyadic_annulus(pts, k2)
                H = np.abs(-2.0 * A @ B.T)
                assert H.max() <= 2 * 2.0 ** (k1 + k2)


class TestStrichartz:
    def test_exponents(self):
        assert sd.strichartz_exponent(3) == (6.0, False)
        assert sd.strichartz_exponent(2) == (math.inf, True)

    def test_constant_field(self):
        g = Grid.cube(16, 3)
        times = np.linspace(0, 0.5, 6)
        c = 0.3
        tr = Trajectory(g, times, np.full((6,) + g.shape, c, dtype=complex))
        rep = sd.strichartz_norm(tr)
        assert rep.value == pytest.approx(c * g.volume ** (1 / 6) * math.sqrt(0.5), rel=1e-12)
        assert not rep.flagged
        assert sd.energy_norm(tr) == pytest.approx(c * math.sqrt(g.volume), rel=1e-12)

    def test_low_dimensions_flagged(self, grid1, grid2):
        tr1 = Trajectory(grid1, np.linspace(0, 1, 3), np.ones((3, 16), complex))
        rep = sd.strichartz_norm(tr1)
        assert math.isnan(rep.value) and rep.flagged
        tr2 = Trajectory(grid2, np.linspace(0, 1, 3), np.ones((3,) + grid2.shape, complex))
        rep = sd.strichartz_norm(tr2)
        assert rep.flagged and rep.value == pytest.approx(1.0)

    def test_energy_conserved_by_free_flow(self, grid3):
        u0 = random_band_limited(grid3, 2)
        tr = evolve.free_trajectory(grid3, u0, np.linspace(0, 1, 5), 0.0)
        assert sd.energy_norm(tr) == pytest.approx(l2_norm(grid3, u0), rel=1e-12)


@pytest.fixture(scope="module")
def shell_norms_64():
    g = Grid.cube(64, 3)
    times = np.linspace(0, 0.1, 41)
    out = {}
    for k in (2, 3, 4):
        u = shell_packet(g, k)
        for eps in (0.0, 0.01, 0.1, 1.0):
            out[k, eps] = sd.strichartz_norm(evolve.free_trajectory(g, u, times, eps)).value
    return out


@pytest.mark.slow
def test_strichartz_uniform_in_shell(shell_norms_64):
    v = [shell_norms_64[k, 0.0] for k in (2, 3, 4)]
    assert max(v) / min(v) <= 2.0


@pytest.mark.slow
def test_strichartz_damping_never_exceeds_undamped(shell_norms_64):
    for k in (2, 3, 4):
        for eps in (0.01, 0.1, 1.0):
            assert shell_norms_64[k, eps] <= shell_norms_64[k, 0.0]


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="damping shrinks the windowed norm by about 2.2x at eps = 1; "
                                       "only the upper bound is uniform in eps")
def test_strichartz_eps_spread_below_two(shell_norms_64):
    for k in (2, 3, 4):
        v = [shell_norms_64[k, e] for e in (0.0, 0.01, 0.1, 1.0)]
        assert max(v) / min(v) < 2.0


def test_diagnostic_record():
    rec = sd.diagnostic_record("abc", "x01", 1.5, window="smoothstep")
    assert rec == {"manifest": "abc", "diagnostic": "x01", "params": {"window": "smoothstep"}, "value": 1.5}
