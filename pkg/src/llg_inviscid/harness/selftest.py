"""Module-level invariant checks bundled for the ``selftest`` verb.

Each check returns ``(passed, value, threshold_description)`` and runs on a
small grid in well under a second.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .. import dgl, evolve
from .. import littlewood_paley as lp
from .. import spacetime_diag as sd
from ..data import random_band_limited
from ..sphere_maps import (
    LlgParams,
    dot,
    inverse_stereographic,
    llg_rhs,
    pointwise_norm,
    rotate_about_axis,
    stereographic,
)
from ..spectral_core import Grid, l2_norm, spectral_l2_norm, transform_forward


def _rng(seed=0):
    return np.random.default_rng(seed)


def check_partition_of_unity():
    g = Grid.cube(32, 3)
    sr = lp.default_shell_range(g)
    total = lp.shell_multipliers(g, sr).sum(axis=0)
    mask = lp.covered(g.kmag, sr)
    err = float(np.max(np.abs(total[mask] - 1.0)))
    return err <= 1e-12, err, "<= 1e-12"


def check_shell_support():
    g = Grid.cube(32, 2)
    f = random_band_limited(g, 1)
    worst = 0.0
    sr = lp.default_shell_range(g)
    for k in range(sr[0], sr[1] + 1):
        lo, hi = lp.shell_support(k)
        F = transform_forward(g, lp.project_shell(g, f, k))
        outside = (g.kmag < lo) | (g.kmag > hi)
        if np.any(outside):
            worst = max(worst, float(np.max(np.abs(F[outside]))))
    return worst <= 1e-14, worst, "<= 1e-14"


def check_almost_orthogonality():
    g = Grid.cube(32, 2)
    sr = lp.default_shell_range(g)
    m = lp.shell_multipliers(g, sr)
    worst = 0.0
    for i, j in itertools.combinations(range(m.shape[0]), 2):
        if j - i >= 2:
            worst = max(worst, float(np.max(np.abs(m[i] * m[j]))))
    return worst == 0.0, worst, "== 0"


def check_besov_l2_equivalence():
    g = Grid.cube(32, 2)
    f = random_band_limited(g, 2)
    f = f - np.mean(f)
    r = lp.besov_norm(g, f, 0.0, 2) / l2_norm(g, f)
    return 1 / math.sqrt(2) <= r <= math.sqrt(2), r, "in [1/sqrt2, sqrt2]"


def check_parseval():
    g = Grid.cube(16, 3)
    f = _rng(3).standard_normal(g.shape) + 1j * _rng(4).standard_normal(g.shape)
    a, b = l2_norm(g, f), spectral_l2_norm(transform_forward(g, f))
    err = abs(a - b) / a
    return err <= 1e-12, err, "<= 1e-12 relative"


def check_projection_roundtrip():
    rng = _rng(5)
    u = 0.3 * (rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16)))
    s = inverse_stereographic(u)
    e1 = float(np.max(np.abs(stereographic(s) - u)))
    e2 = float(np.max(np.abs(inverse_stereographic(stereographic(s)) - s)))
    e3 = float(np.max(np.abs(pointwise_norm(s) - 1.0)))
    err = max(e1, e2)
    return err <= 1e-12 and e3 <= 1e-14, err, "round trip <= 1e-12, |s| - 1 <= 1e-14"


def check_tangency():
    g = Grid.cube(16, 3)
    s = inverse_stereographic(0.2 * random_band_limited(g, 6, kcut=4))
    rhs = llg_rhs(g, s, LlgParams(1.0, 0.3))
    err = float(np.max(np.abs(dot(rhs, s))))
    return err <= 1e-10, err, "<= 1e-10"


def check_equivariance():
    rng = _rng(7)
    u = 0.2 * (rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8)))
    s = inverse_stereographic(u)
    err = float(np.max(np.abs(stereographic(rotate_about_axis(s, math.pi / 2)) - 1j * u)))
    return err <= 1e-14, err, "<= 1e-14"


def check_taylor_convergence():
    g = Grid.cube(16, 2)
    u = random_band_limited(g, 8, kcut=3)
    u = 0.3 * u / np.max(np.abs(u))
    exact = dgl.g_nonlinearity(g, u, dealiased=False)
    errs = [float(np.max(np.abs(dgl.g_taylor(g, u, K, dealiased=False) - exact))) for K in (1, 3, 5)]
    ok = errs[0] > errs[1] > errs[2]
    return ok, errs[-1], "decreasing in K"


def check_semigroup():
    g = Grid.cube(16, 3)
    u = random_band_limited(g, 9)
    a = evolve.linear_propagate(g, u, 0.3, 0.1)
    b = evolve.linear_propagate(g, evolve.linear_propagate(g, u, 0.1, 0.1), 0.2, 0.1)
    err = float(np.max(np.abs(a - b))) / float(np.max(np.abs(u)))
    return err <= 1e-12, err, "<= 1e-12"


def check_propagator_contractive():
    g = Grid.cube(16, 3)
    worst = max(float(np.max(np.abs(evolve.linear_multiplier(g, t, e)))) for t in (0.1, 1.0) for e in (0, 0.5))
    return worst <= 1.0 + 1e-15, worst, "<= 1"


def check_single_mode_nonlinearity():
    g = Grid.cube(16, 1)
    d = 0.1
    x = g.coords[0]
    u = d * np.exp(1j * x)
    G = dgl.g_nonlinearity(g, u)
    err = float(np.max(np.abs(G + d**3 * np.exp(1j * x) / (1 + d**2))))
    return err <= 1e-12, err, "<= 1e-12"


def _small_trajectory():
    g = Grid.cube(16, 2)
    u0 = random_band_limited(g, 10, kcut=3)
    u0 = 0.02 * u0 / lp.critical_besov_norm(g, u0)
    return evolve.solve(g, u0, 0.2, LlgParams(1.0, 0.0), 0.01)


def check_modulation_partition():
    F = sd.windowed(_small_trajectory())
    err = sd.modulation_partition_error(F)
    return err <= 1e-10, err, "<= 1e-10"


def check_x01_dual_route():
    F = sd.windowed(_small_trajectory())
    gap = sd.x01_norm(F).relative_gap
    return gap <= 1e-10, gap, "<= 1e-10 relative"


def check_null_identity():
    tr = _small_trajectory()
    F = sd.windowed(tr)
    G = sd.windowed(tr.with_values(np.conj(tr.values)))
    r = sd.null_identity_residual(F, G)
    return r <= 1e-9, r, "<= 1e-9"


def check_resonance_bound():
    g = Grid.cube(16, 2)
    pts = np.stack([np.broadcast_to(k, g.shape).ravel() for k in g.k], axis=1)
    worst = 0.0
    for k1 in range(0, 4):
        for k2 in range(0, 4):
            a, b = sd.dyadic_annulus(pts, k1), sd.dyadic_annulus(pts, k2)
            if len(a) and len(b):
                H = np.abs(-2.0 * a @ b.T)
                worst = max(worst, float(H.max()) / (2.0 * 2.0 ** (k1 + k2)))
    return worst <= 1.0, worst, "|H| <= 2 * 2^(k1+k2)"


def check_directional_reconstruction():
    g = Grid.cube(32, 3)
    k = 3
    f = lp.project_shell(g, random_band_limited(g, 11), k)
    target = lp.project_shell(g, f, k)
    dec = lp.directional_decompose(g, f, k)
    err = l2_norm(g, dec.total() - target) / l2_norm(g, target)
    return err <= 1e-11, err, "<= 1e-11 relative"


CHECKS = [
    check_partition_of_unity,
    check_shell_support,
    check_almost_orthogonality,
    check_besov_l2_equivalence,
    check_parseval,
    check_projection_roundtrip,
    check_tangency,
    check_equivariance,
    check_taylor_convergence,
    check_semigroup,
    check_propagator_contractive,
    check_single_mode_nonlinearity,
    check_modulation_partition,
    check_x01_dual_route,
    check_null_identity,
    check_resonance_bound,
    check_directional_reconstruction,
]
