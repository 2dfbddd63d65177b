import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from llg_inviscid.errors import GridMismatchError, NonFiniteError
from llg_inviscid.littlewood_paley import chi, project_shell
from llg_inviscid.spectral_core import (
    Grid,
    apply_multiplier,
    band_limit,
    dealias,
    gradient,
    laplacian,
    l2_norm,
    padded_product_coefficients,
    product_dealiased,
    spectral_l2_norm,
    transform_forward,
    transform_inverse,
)

from conftest import random_complex


class TestGrid:
    def test_wavenumbers_symmetric(self):
        g = Grid((8, 16), (2 * np.pi, 4 * np.pi))
        for j in range(2):
            k = g.axis_wavenumbers(j)
            m = g.axis_modes(j)
            n = g.sizes[j]
            assert m.min() == -n // 2 and m.max() == n // 2 - 1
            for mm in range(1, n // 2):
                assert k[m == mm][0] == -k[m == -mm][0]

    def test_point_count(self):
        g = Grid((8, 16, 32))
        assert g.npoints == 8 * 16 * 32
        assert g.shape == (8, 16, 32)

    @pytest.mark.parametrize("sizes", [(6,), (9, 8), (8,) * 4, ()])
    def test_rejects_bad_sizes(self, sizes):
        with pytest.raises(ValueError):
            Grid(sizes)

    def test_round_trip_dict(self):
        g = Grid((8, 16), (1.0, 2.0))
        assert Grid.from_dict(g.to_dict()) == g


class TestTransforms:
    def test_constant_has_single_mode(self, grid3):
        F = transform_forward(grid3, np.ones(grid3.shape))
        nz = np.abs(F) > 1e-12
        assert nz.sum() == 1 and nz[0, 0, 0]

    def test_cosine_two_modes(self, grid1):
        x = grid1.coords[0]
        F = transform_forward(grid1, np.cos(x))
        nz = np.flatnonzero(np.abs(F) > 1e-12)
        k = grid1.axis_wavenumbers(0)
        assert sorted(k[nz]) == [-1.0, 1.0]
        assert abs(abs(F[nz[0]]) - abs(F[nz[1]])) < 1e-14

    def test_parseval_direct_summation_16pt(self, rng):
        # oracle: explicit DFT matrix, coefficients c_m = sqrt(dx / N) sum_j f_j e^{-2 pi i jm/N}
        g = Grid.cube(16, 1)
        f = random_complex(rng, 16)
        n = np.arange(16)
        W = np.exp(-2j * np.pi * np.outer(n, n) / 16)
        F_direct = (W @ f) * math.sqrt(g.dx[0] / 16)
        F = transform_forward(g, f)
        assert np.max(np.abs(F - F_direct)) < 1e-12 * np.max(np.abs(F))
        assert abs(l2_norm(g, f) - spectral_l2_norm(F)) <= 1e-12 * l2_norm(g, f)

    @given(st.integers(0, 2**32 - 1))
    def test_parseval_random(self, seed):
        g = Grid((8, 16, 8))
        f = random_complex(np.random.default_rng(seed), g.shape)
        a, b = l2_norm(g, f), spectral_l2_norm(transform_forward(g, f))
        assert abs(a - b) <= 1e-12 * a

    @given(st.integers(0, 2**32 - 1))
    def test_round_trip(self, seed):
        g = Grid((16, 8))
        f = random_complex(np.random.default_rng(seed), g.shape)
        back = transform_inverse(g, transform_forward(g, f))
        assert np.max(np.abs(back - f)) <= 1e-12 * np.max(np.abs(f))

    def test_batch_axes(self, grid3, rng):
        f = random_complex(rng, (3,) + grid3.shape)
        F = transform_forward(grid3, f)
        assert np.allclose(F[1], transform_forward(grid3, f[1]), rtol=0, atol=1e-14)

    def test_real_field_hermitian(self, grid3, rng):
        f = rng.standard_normal(grid3.shape)
        F = transform_forward(grid3, f)
        idx = tuple(np.mod(-np.arange(n), n) for n in grid3.shape)
        Fneg = F[np.ix_(*idx)]
        assert np.max(np.abs(F - np.conj(Fneg))) < 1e-13

    def test_size_mismatch(self, grid3):
        with pytest.raises(GridMismatchError):
            transform_forward(grid3, np.zeros((8, 8, 8)))

    def test_worker_count_bit_identical(self, rng):
        f = random_complex(rng, (16, 16, 16))
        a = transform_forward(Grid.cube(16, 3, workers=1), f)
        b = transform_forward(Grid.cube(16, 3, workers=2), f)
        assert np.array_equal(a, b)


class TestMultipliers:
    def test_identity(self, grid2, rng):
        F = random_complex(rng, grid2.shape)
        assert np.array_equal(apply_multiplier(grid2, F, 1.0), F)

    def test_laplacian_eigenfunction(self, grid1):
        x = grid1.coords[0]
        F = transform_forward(grid1, np.sin(2 * x))
        out = transform_inverse(grid1, apply_multiplier(grid1, F, lambda g: -g.ksq)).real
        assert np.max(np.abs(out + 4 * np.sin(2 * x))) < 1e-13

    def test_non_finite_rejected(self, grid1):
        with pytest.raises(NonFiniteError), np.errstate(divide="ignore"):
            apply_multiplier(grid1, np.ones(16), lambda g: 1.0 / g.ksq)

    def test_shell_multiplier_matches_project_shell(self, grid2, rng):
        f = random_complex(rng, grid2.shape)
        via_mult = transform_inverse(grid2, apply_multiplier(grid2, transform_forward(grid2, f), chi(2, grid2.kmag)))
        assert np.max(np.abs(via_mult - project_shell(grid2, f, 2))) < 1e-13


class TestDerivatives:
    def test_constant(self, grid3):
        assert np.max(np.abs(laplacian(grid3, np.full(grid3.shape, 3.0)))) < 1e-12
        assert all(np.max(np.abs(d)) < 1e-12 for d in gradient(grid3, np.full(grid3.shape, 3.0)))

    def test_laplacian_product_of_sines(self, grid2):
        x, y = grid2.coords
        f = np.sin(x) * np.sin(y)
        assert np.max(np.abs(laplacian(grid2, f) + 2 * f)) < 1e-12

    def test_real_in_real_out(self, grid3, rng):
        f = rng.standard_normal(grid3.shape)
        assert np.isrealobj(laplacian(grid3, f))
        assert all(np.isrealobj(d) for d in gradient(grid3, f))

    def test_gradient_vs_finite_differences(self):
        # oracle: centred differences, order -> 2
        errs = []
        for n in (32, 64, 128, 256):
            g = Grid.cube(n, 1)
            x = g.coords[0]
            f = np.sin(3 * x) + 0.5 * np.cos(5 * x)
            h = g.dx[0]
            fd = (np.roll(f, -1) - np.roll(f, 1)) / (2 * h)
            errs.append(np.max(np.abs(gradient(g, f)[0] - fd)))
        orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
        assert min(orders) >= 1.9

    def test_commute_with_shells(self, grid3, rng):
        F = random_complex(rng, grid3.shape)
        c = chi(2, grid3.kmag)
        a = c * (-grid3.ksq * F)
        b = -grid3.ksq * (c * F)
        assert np.max(np.abs(a - b)) <= 1e-13


class TestDealias:
    def test_band_limited_unchanged(self, grid2, rng):
        F = dealias(grid2, random_complex(rng, grid2.shape))
        assert np.array_equal(dealias(grid2, F), F)

    def test_nyquist_removed(self, grid1):
        f = np.cos(8 * grid1.coords[0])
        assert np.max(np.abs(dealias(grid1, transform_forward(grid1, f)))) == 0.0

    def test_product_matches_padded_convolution(self, grid2, rng):
        # u, v inside the 2/3 band: dealiased product is exact on the band
        U = dealias(grid2, random_complex(rng, grid2.shape))
        V = dealias(grid2, random_complex(rng, grid2.shape))
        u, v = transform_inverse(grid2, U), transform_inverse(grid2, V)
        exact = dealias(grid2, padded_product_coefficients(grid2, U, V))
        got = product_dealiased(grid2, u, v)
        assert np.max(np.abs(got - exact)) <= 1e-12 * np.max(np.abs(exact))

    def test_band_limit_idempotent(self, grid2, rng):
        f = random_complex(rng, grid2.shape)
        once = band_limit(grid2, f)
        assert np.max(np.abs(band_limit(grid2, once) - once)) < 1e-13
