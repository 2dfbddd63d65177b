"""Dyadic frequency decomposition, Besov norms and anisotropic norms.

All cutoffs are built from one bump ``eta``: even, equal to 1 on
``|x| <= 5/4`` and vanishing for ``|x| >= 8/5``, with the C^inf transition
``g(t) = phi(t) / (phi(t) + phi(1 - t))``, ``phi(t) = exp(-1/t)``.

Shell ``k`` uses ``chi_k(r) = eta(r / 2^k) - eta(r / 2^(k-1))``, supported in
``[2^(k-1) * 5/4, 2^k * 8/5]`` and identically 1 on ``[2^k * 4/5, 2^k * 5/4]``.
The mean (xi = 0) is never part of a shell; homogeneous norms drop it and
report it separately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ShellRangeError, UnsupportedExponentError
from .spectral_core import Grid, transform_forward, transform_inverse
from .trajectory import Trajectory

ETA_INNER = 5.0 / 4.0
ETA_OUTER = 8.0 / 5.0


def smoothstep(t: np.ndarray) -> np.ndarray:
    """C^inf step: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


def eta(x: np.ndarray) -> np.ndarray:
    r = np.abs(np.asarray(x, dtype=float))
    return smoothstep((ETA_OUTER - r) / (ETA_OUTER - ETA_INNER))


def chi(k: int, r: np.ndarray) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return eta(r / 2.0**k) - eta(r / 2.0 ** (k - 1))


def chi_below(k: int, r: np.ndarray) -> np.ndarray:
    return eta(np.asarray(r, dtype=float) / 2.0**k)


def chi_window(k: int, width: int, r: np.ndarray) -> np.ndarray:
    """sum_{l=-width}^{width} chi_{k+l}(r), by telescoping."""
    r = np.asarray(r, dtype=float)
    return eta(r / 2.0 ** (k + width)) - eta(r / 2.0 ** (k - width - 1))


def shell_support(k: int) -> tuple[float, float]:
    return 2.0 ** (k - 1) * ETA_INNER, 2.0**k * ETA_OUTER


def covering_range(rmin: float, rmax: float) -> tuple[int, int]:
    """Smallest shell range whose cutoffs sum to exactly 1 on [rmin, rmax]."""
    # sum_{kmin}^{kmax} chi_k(r) = eta(r/2^kmax) - eta(r/2^(kmin-1)) = 1 iff
    # r <= 2^kmax * 5/4 and r >= 2^kmin * 4/5
    kmin = math.floor(math.log2(rmin / 0.8) + 1e-12)
    kmax = math.ceil(math.log2(rmax / ETA_INNER) - 1e-12)
    return kmin, max(kmax, kmin)


def default_shell_range(grid: Grid) -> tuple[int, int]:
    """Shell range covering every nonzero wavevector of the grid."""
    return covering_range(grid.min_wavenumber(), grid.max_wavenumber())


def covered(r: np.ndarray, shell_range: tuple[int, int]) -> np.ndarray:
    kmin, kmax = shell_range
    return (r >= 2.0**kmin * 0.8) & (r <= 2.0**kmax * ETA_INNER)


@lru_cache(maxsize=32)
def _shell_multipliers(grid: Grid, shell_range: tuple[int, int]) -> np.ndarray:
    kmin, kmax = shell_range
    return np.stack([chi(k, grid.kmag) for k in range(kmin, kmax + 1)])


def shell_multipliers(grid: Grid, shell_range: tuple[int, int] | None = None) -> np.ndarray:
    """Stack of chi_k(|xi|) arrays for k in the shell range (read-only cache)."""
    sr = tuple(shell_range) if shell_range is not None else default_shell_range(grid)
    return _shell_multipliers(grid, sr)


def _resolve_range(grid, shell_range):
    return tuple(shell_range) if shell_range is not None else default_shell_range(grid)


def _check_k(grid: Grid, k: int, shell_range) -> tuple[int, int]:
    sr = _resolve_range(grid, shell_range)
    if not sr[0] <= k <= sr[1]:
        raise ShellRangeError(f"shell {k} outside representable range {sr}")
    return sr


def project_shell(grid: Grid, f: np.ndarray, k: int, shell_range=None) -> np.ndarray:
    _check_k(grid, k, shell_range)
    f = np.asarray(f)
    out = transform_inverse(grid, chi(k, grid.kmag) * transform_forward(grid, f))
    return out.real if np.isrealobj(f) else out


def project_below(grid: Grid, f: np.ndarray, k: int, shell_range=None) -> np.ndarray:
    """P_{<=k}; includes the mean."""
    _check_k(grid, k, shell_range)
    f = np.asarray(f)
    out = transform_inverse(grid, chi_below(k, grid.kmag) * transform_forward(grid, f))
    return out.real if np.isrealobj(f) else out


def mean_value(grid: Grid, f: np.ndarray) -> complex | float:
    m = np.mean(f, axis=tuple(range(np.ndim(f) - grid.dim, np.ndim(f))))
    return m


@dataclass
class DyadicDecomposition:
    grid: Grid
    shell_range: tuple[int, int]
    shells: np.ndarray  # (nshells, *grid.shape)
    mean: complex

    def reconstruct(self) -> np.ndarray:
        return self.shells.sum(axis=0) + self.mean

    def __getitem__(self, k: int) -> np.ndarray:
        return self.shells[k - self.shell_range[0]]


def decompose(grid: Grid, f: np.ndarray, shell_range=None) -> DyadicDecomposition:
    sr = _resolve_range(grid, shell_range)
    F = transform_forward(grid, f)
    shells = transform_inverse(grid, shell_multipliers(grid, sr) * F)
    if np.isrealobj(f):
        shells = shells.real
    mean = np.mean(f)
    return DyadicDecomposition(grid, sr, shells, mean.item())


# -- Besov norms -----------------------------------------------------------


@dataclass(frozen=True)
class BesovParams:
    s: float
    q: int = 1
    p: int = 2

    def __post_init__(self):
        if self.q not in (1, 2):
            raise UnsupportedExponentError(f"q must be 1 or 2, got {self.q}")
        if self.p != 2:
            raise UnsupportedExponentError("only p = 2 Besov norms are implemented")

    @classmethod
    def critical(cls, dim: int, q: int = 1) -> "BesovParams":
        return cls(s=dim / 2.0, q=q)


@dataclass
class BesovReport:
    value: float | np.ndarray
    params: BesovParams
    shell_range: tuple[int, int]
    shell_norms: np.ndarray  # (..., nshells) L^2 norms of P_k f
    mean: complex | np.ndarray


def shell_norms(grid: Grid, f: np.ndarray, shell_range=None) -> np.ndarray:
    """L^2 norms of P_k f for every shell, via Parseval (batch axes allowed)."""
    return shell_norms_coefficients(grid, transform_forward(grid, f), shell_range)


def shell_norms_coefficients(grid: Grid, F: np.ndarray, shell_range=None) -> np.ndarray:
    sr = _resolve_range(grid, shell_range)
    chis = shell_multipliers(grid, sr)
    power = np.abs(F) ** 2
    axes = tuple(range(power.ndim - grid.dim, power.ndim))
    # fixed summation order: one shell at a time
    out = np.stack([np.sum(c**2 * power, axis=axes) for c in chis], axis=-1)
    return np.sqrt(out)


def _combine(norms: np.ndarray, params: BesovParams, sr) -> np.ndarray | float:
    weights = 2.0 ** (params.s * np.arange(sr[0], sr[1] + 1))
    if params.q == 1:
        value = np.sum(weights * norms, axis=-1)
    else:
        value = np.sqrt(np.sum((weights * norms) ** 2, axis=-1))
    return float(value) if np.ndim(value) == 0 else value


def besov_report(grid: Grid, f: np.ndarray, params: BesovParams, shell_range=None) -> BesovReport:
    sr = _resolve_range(grid, shell_range)
    norms = shell_norms(grid, f, sr)
    return BesovReport(_combine(norms, params, sr), params, sr, norms, mean_value(grid, f))


def besov_norm_coefficients(grid: Grid, F: np.ndarray, s: float, q: int = 1, shell_range=None):
    """Besov norm from unitary coefficients (no transform, no extra rounding)."""
    sr = _resolve_range(grid, shell_range)
    return _combine(shell_norms_coefficients(grid, F, sr), BesovParams(s=s, q=q), sr)


def besov_norm(grid: Grid, f: np.ndarray, s: float, q: int = 1, shell_range=None):
    """Homogeneous B^s_{2,q} norm over the shell range.

    The mean is ignored (it is orthogonal to every shell).  With leading batch
    axes an array of norms is returned.
    """
    return besov_report(grid, f, BesovParams(s=s, q=q), shell_range).value


def critical_besov_norm(grid: Grid, f: np.ndarray, shell_range=None):
    return besov_norm(grid, f, grid.dim / 2.0, 1, shell_range)


# -- directional decomposition --------------------------------------------


@dataclass
class DirectionalDecomposition:
    k: int
    pieces: list[np.ndarray]
    window: int
    tilde_window: int
    diagnostics: dict = field(default_factory=dict)

    def total(self) -> np.ndarray:
        return sum(self.pieces)


def directional_multipliers(
    grid: Grid, k: int, window: int | None = None, tilde_window: int | None = None
) -> tuple[list[np.ndarray], dict]:
    """Fourier multipliers of P_{k,e_j} Theta_k^j, j = 1..n.

    ``window`` is the half-width of the shell sum in beta_k^j (default 5n) and
    ``tilde_window`` the half-width of the widened cutoff (default 9n).
    """
    n = grid.dim
    w = 5 * n if window is None else int(window)
    wt = 9 * n if tilde_window is None else int(tilde_window)
    if w < 1 or wt < w + 1:
        raise ValueError("need window >= 1 and tilde_window >= window + 1")
    absk = [np.abs(kj) * np.ones(grid.shape) for kj in grid.k]
    numer = [chi_window(k, w, a) for a in absk]
    denom = sum(numer)
    near = chi_window(k, 1, grid.kmag)
    chik = chi(k, grid.kmag)
    safe = np.where(denom > 0, denom, 1.0)
    mults = []
    for j in range(n):
        beta = np.where(denom > 0, numer[j] / safe, 0.0) * near
        mults.append(chi_window(k, wt, absk[j]) * chik * beta)

    kmin_axis = min(2 * math.pi / L for L in grid.lengths)
    kmax_axis = max(np.abs(kj).max() for kj in grid.k)
    diagnostics = {
        "beta_window_covers_grid": bool(
            2.0 ** (k - w) * 0.8 <= kmin_axis and 2.0 ** (k + w) * ETA_INNER >= kmax_axis
        ),
        "tilde_window_covers_grid": bool(
            2.0 ** (k - wt) * 0.8 <= kmin_axis and 2.0 ** (k + wt) * ETA_INNER >= kmax_axis
        ),
    }
    return mults, diagnostics


def directional_decompose(
    grid: Grid, f: np.ndarray, k: int, window: int | None = None, tilde_window: int | None = None
) -> DirectionalDecomposition:
    """Split P_k f into n pieces, piece j concentrated where |xi_j| ~ 2^k."""
    mults, diag = directional_multipliers(grid, k, window, tilde_window)
    F = transform_forward(grid, f)
    pieces = []
    for m in mults:
        piece = transform_inverse(grid, m * F)
        pieces.append(piece.real if np.isrealobj(f) else piece)
    n = grid.dim
    return DirectionalDecomposition(
        k,
        pieces,
        5 * n if window is None else window,
        9 * n if tilde_window is None else tilde_window,
        diag,
    )


# -- anisotropic space-time norms -----------------------------------------

_EXPONENTS = (1, 2, math.inf)


def _lp_reduce(a: np.ndarray, w: np.ndarray | float, p, axis) -> np.ndarray:
    if p == math.inf:
        return np.max(a, axis=axis)
    return np.sum(w * a**p, axis=axis) ** (1.0 / p)


def anisotropic_norm(traj: Trajectory, axis: int, p: float, q: float) -> float:
    """L^p over x_axis of L^q over (other axes, t), Riemann/trapezoid weights."""
    if p not in _EXPONENTS or q not in _EXPONENTS:
        raise UnsupportedExponentError(f"exponents must be in {{1, 2, inf}}, got p={p}, q={q}")
    grid = traj.grid
    if not 0 <= axis < grid.dim:
        raise ValueError(f"axis {axis} out of range for dim {grid.dim}")
    a = np.abs(traj.values)  # (M+1, *shape)
    # move the distinguished axis first, then time, then the rest
    a = np.moveaxis(a, axis + 1, 0)
    inner_cell = grid.cell_volume / grid.dx[axis]
    tw = traj.time_weights().reshape((1, -1) + (1,) * (grid.dim - 1))
    inner_axes = tuple(range(1, a.ndim))
    inner = _lp_reduce(a, tw * inner_cell, q, inner_axes)
    return float(_lp_reduce(inner, grid.dx[axis], p, 0))


def spacetime_lp_norm(traj: Trajectory, p: float) -> float:
    """Full L^p_{t,x} norm with the same quadrature."""
    grid = traj.grid
    a = np.abs(traj.values)
    if p == math.inf:
        return float(a.max())
    tw = traj.time_weights().reshape((-1,) + (1,) * grid.dim)
    return float(np.sum(tw * grid.cell_volume * a**p) ** (1.0 / p))


def norm_record(field_id: str, norm_name: str, params: dict, value: float, shell_range) -> dict:
    """NDJSON-ready record for a norm evaluation."""
    return {
        "field_id": field_id,
        "norm_name": norm_name,
        "params": params,
        "value": float(value),
        "shell_range": list(shell_range) if shell_range is not None else None,
    }
