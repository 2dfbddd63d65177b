"""Seeded synthetic initial data (family definitions are versioned)."""

from __future__ import annotations

import numpy as np

from .littlewood_paley import chi, critical_besov_norm, default_shell_range
from .spectral_core import Grid, band_limit, dealias, transform_forward, transform_inverse, l2_norm

DATUM_SCHEMA_VERSION = 1


def periodic_bump(grid: Grid, width: float = 0.6, center=None) -> np.ndarray:
    """exp(-sum_j (1 - cos(theta_j - c_j)) / width^2): a smooth periodic Gaussian."""
    center = [L / 2 for L in grid.lengths] if center is None else center
    expo = 0.0
    for x, L, c in zip(grid.coords, grid.lengths, center):
        theta = 2 * np.pi * (x - c) / L
        expo = expo + (1.0 - np.cos(theta))
    return np.exp(-expo / width**2)


def _normalize(grid: Grid, u: np.ndarray, delta: float | None) -> np.ndarray:
    if delta is None:
        return u
    norm = critical_besov_norm(grid, u)
    return u if norm == 0 else u * (delta / norm)


def bump_datum(grid: Grid, delta: float | None = 0.05, width: float = 0.6, twist: int = 0,
               center=None) -> np.ndarray:
    """Projected bump u0 = A * bump * exp(i twist x_1), band-limited, scaled to critical norm delta.

    Its sphere preimage P^{-1}(u0) is a smooth bump around Q = (0, 0, 1).
    """
    u = periodic_bump(grid, width, center).astype(complex)
    if twist:
        u = u * np.exp(1j * twist * 2 * np.pi * grid.coords[0] / grid.lengths[0])
    u = band_limit(grid, u)
    return _normalize(grid, u, delta)


def shell_weights(grid: Grid, decay: float | None = None) -> np.ndarray:
    """Target ||P_k phi|| per shell: 2^{-k n/2} / max(k, 1)^2 by default."""
    kmin, kmax = default_shell_range(grid)
    ks = np.arange(kmin, kmax + 1)
    n = grid.dim
    if decay is None:
        return 2.0 ** (-ks * n / 2.0) / np.maximum(ks, 1) ** 2
    return 2.0 ** (-ks * decay)


def shell_datum(grid: Grid, delta: float | None = 0.05, seed: int = 0, decay: float | None = None,
                kmax: int | None = None) -> np.ndarray:
    """Rough mean-zero random field with prescribed shell masses (approximately)."""
    rng = np.random.default_rng(seed)
    Z = (rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)) / np.sqrt(2)
    kmin, kmax_grid = default_shell_range(grid)
    weights = shell_weights(grid, decay)
    amp = np.zeros(grid.shape)
    for i, k in enumerate(range(kmin, kmax_grid + 1)):
        if kmax is not None and k > kmax:
            break
        c = chi(k, grid.kmag)
        count = float(np.sum(c**2 * grid.dealias_mask))
        if count > 0:
            amp = amp + c * weights[i] / np.sqrt(count)
    F = dealias(grid, amp * Z)
    F[(0,) * grid.dim] = 0.0
    return _normalize(grid, transform_inverse(grid, F), delta)


def shell_packet(grid: Grid, k: int, center=None) -> np.ndarray:
    """P_k of a point mass at the centre, unit L^2 norm (a localized wave packet)."""
    center = [L / 2 for L in grid.lengths] if center is None else center
    phase = 0.0
    for kj, c in zip(grid.k, center):
        phase = phase + kj * c
    F = chi(k, grid.kmag) * np.exp(-1j * phase)
    F = dealias(grid, F)
    u = transform_inverse(grid, F)
    return u / l2_norm(grid, u)


def random_band_limited(grid: Grid, seed: int = 0, kcut: float | None = None, real: bool = False) -> np.ndarray:
    """Random trig polynomial with modes inside the dealiased band (and |xi| <= kcut)."""
    rng = np.random.default_rng(seed)
    F = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    F = dealias(grid, F)
    if kcut is not None:
        F = np.where(grid.kmag <= kcut, F, 0.0)
    u = transform_inverse(grid, F)
    return u.real.copy() if real else u


def make_datum(grid: Grid, spec: dict) -> np.ndarray:
    """Build a datum from a config entry {family, delta, seed, ...}."""
    spec = dict(spec)
    family = spec.pop("family", "bump")
    delta = spec.pop("delta", 0.05)
    if family == "zero":
        return np.zeros(grid.shape, dtype=complex)
    if family == "bump":
        return bump_datum(grid, delta, width=spec.get("width", 0.6), twist=spec.get("twist", 0))
    if family == "shell":
        return shell_datum(grid, delta, seed=spec.get("seed", 0), decay=spec.get("decay"))
    raise ValueError(f"unknown datum family {family!r}")


def spectrum_tail(grid: Grid, u: np.ndarray) -> float:
    """Largest coefficient magnitude outside the dealiased band (diagnostic)."""
    F = transform_forward(grid, u)
    out = np.abs(F[~grid.dealias_mask])
    return float(out.max()) if out.size else 0.0
