"""Periodic grids, unitary Fourier transforms and spectral operators.

Fields are plain numpy arrays shaped like ``grid.shape`` (row-major, axis 0
first).  Spectral coefficients live in numpy FFT ordering.

Normalization
-------------
``forward`` returns the coefficients of ``f`` in the orthonormal basis
``e_xi(x) = exp(i xi.x) / sqrt(vol)`` with the inner product computed by the
grid Riemann sum::

    c(xi) = sqrt(dV / N_tot) * sum_x f(x) exp(-i xi.x)

so that ``sum |c|**2 == sum |f|**2 * dV`` (Parseval, exact up to rounding)
and ``||f||_{L^2(torus)}`` can be read off either side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
import scipy.fft

from .errors import GridMismatchError, NonFiniteError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on the torus prod_j [0, L_j).

    ``workers`` is forwarded to scipy.fft; it never changes results.
    """

    sizes: tuple[int, ...]
    lengths: tuple[float, ...] | None = None
    workers: int = field(default=1, compare=False)

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.sizes)
        if not 1 <= len(sizes) <= 3:
            raise ValueError(f"dimension must be 1, 2 or 3, got {len(sizes)}")
        for n in sizes:
            if n < 8 or n % 2:
                raise ValueError(f"axis sizes must be even and >= 8, got {sizes}")
        lengths = self.lengths
        if lengths is None:
            lengths = (TWO_PI,) * len(sizes)
        lengths = tuple(float(L) for L in lengths)
        if len(lengths) != len(sizes) or any(L <= 0 for L in lengths):
            raise ValueError(f"bad lengths {lengths} for sizes {sizes}")
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "lengths", lengths)

    @classmethod
    def cube(cls, n: int, dim: int, length: float = TWO_PI, workers: int = 1) -> "Grid":
        return cls((n,) * dim, (length,) * dim, workers=workers)

    @property
    def dim(self) -> int:
        return len(self.sizes)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.sizes

    @property
    def npoints(self) -> int:
        return math.prod(self.sizes)

    @property
    def dx(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.lengths, self.sizes))

    @property
    def cell_volume(self) -> float:
        return math.prod(self.dx)

    @property
    def volume(self) -> float:
        return math.prod(self.lengths)

    @property
    def norm_factor(self) -> float:
        """Scale from ``scipy.fft.fftn(norm='ortho')`` to our coefficients."""
        return math.sqrt(self.cell_volume)

    def axis_wavenumbers(self, j: int) -> np.ndarray:
        n, L = self.sizes[j], self.lengths[j]
        return TWO_PI * np.fft.fftfreq(n, d=L / n)

    def axis_modes(self, j: int) -> np.ndarray:
        """Integer mode indices m in FFT order."""
        n = self.sizes[j]
        return np.fft.fftfreq(n, d=1.0 / n).astype(int)

    def _broadcast(self, j: int, arr: np.ndarray) -> np.ndarray:
        shape = [1] * self.dim
        shape[j] = arr.size
        return arr.reshape(shape)

    @cached_property
    def k(self) -> tuple[np.ndarray, ...]:
        """Per-axis wavenumbers, broadcastable against ``shape``."""
        return tuple(self._broadcast(j, self.axis_wavenumbers(j)) for j in range(self.dim))

    @cached_property
    def ksq(self) -> np.ndarray:
        out = np.zeros(self.shape)
        for kj in self.k:
            out = out + kj**2
        return out

    @cached_property
    def kmag(self) -> np.ndarray:
        return np.sqrt(self.ksq)

    @cached_property
    def nyquist_mask(self) -> tuple[np.ndarray, ...]:
        """Per axis: True at the unpaired Nyquist index -N/2."""
        return tuple(
            self._broadcast(j, self.axis_modes(j) == -self.sizes[j] // 2) for j in range(self.dim)
        )

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        mask = np.ones(self.shape, dtype=bool)
        for j in range(self.dim):
            m = np.abs(self.axis_modes(j))
            keep = m <= (2.0 / 3.0) * (self.sizes[j] / 2)
            mask = mask & self._broadcast(j, keep)
        return mask

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        """Physical coordinates x_j = i * L_j / N_j, broadcastable."""
        return tuple(
            self._broadcast(j, np.arange(n) * (L / n))
            for j, (n, L) in enumerate(zip(self.sizes, self.lengths))
        )

    def min_wavenumber(self) -> float:
        return min(TWO_PI / L for L in self.lengths)

    def max_wavenumber(self, dealiased: bool = False) -> float:
        if dealiased:
            return float(self.kmag[self.dealias_mask].max())
        return float(self.kmag.max())

    def check(self, f: np.ndarray, leading: int = 0) -> np.ndarray:
        f = np.asarray(f)
        if f.shape[leading:] != self.shape:
            raise GridMismatchError(f"field shape {f.shape} does not match grid {self.shape}")
        return f

    def to_dict(self) -> dict:
        return {"dim": self.dim, "sizes": list(self.sizes), "lengths": list(self.lengths)}

    @classmethod
    def from_dict(cls, d: dict, workers: int = 1) -> "Grid":
        return cls(tuple(d["sizes"]), tuple(d.get("lengths") or []) or None, workers=workers)


# -- transforms ------------------------------------------------------------


def _axes(grid: Grid, f: np.ndarray) -> tuple[int, ...]:
    return tuple(range(f.ndim - grid.dim, f.ndim))


def transform_forward(grid: Grid, f: np.ndarray) -> np.ndarray:
    """Unitary coefficients of ``f`` (see module docstring).

    Leading batch axes are allowed; the last ``grid.dim`` axes must match.
    """
    f = np.asarray(f)
    if f.ndim < grid.dim or f.shape[f.ndim - grid.dim:] != grid.shape:
        raise GridMismatchError(f"field shape {f.shape} does not match grid {grid.shape}")
    F = scipy.fft.fftn(f, axes=_axes(grid, f), norm="ortho", workers=grid.workers)
    return F * grid.norm_factor


def transform_inverse(grid: Grid, F: np.ndarray, real: bool = False) -> np.ndarray:
    F = np.asarray(F)
    if F.ndim < grid.dim or F.shape[F.ndim - grid.dim:] != grid.shape:
        raise GridMismatchError(f"coefficient shape {F.shape} does not match grid {grid.shape}")
    f = scipy.fft.ifftn(F, axes=_axes(grid, F), norm="ortho", workers=grid.workers)
    f = f / grid.norm_factor
    return f.real if real else f


def l2_norm(grid: Grid, f: np.ndarray) -> float:
    """Continuous L^2 norm by Riemann sum."""
    return math.sqrt(float(np.sum(np.abs(f) ** 2)) * grid.cell_volume)


def spectral_l2_norm(F: np.ndarray) -> float:
    return math.sqrt(float(np.sum(np.abs(F) ** 2)))


# -- multipliers -----------------------------------------------------------

Multiplier = Callable[[Grid], np.ndarray] | np.ndarray | complex | float


def evaluate_multiplier(grid: Grid, m: Multiplier) -> np.ndarray:
    """Turn a multiplier spec (array, scalar, or ``grid -> array``) into an array."""
    if callable(m):
        m = m(grid)
    m = np.asarray(m)
    if not np.all(np.isfinite(m)):
        raise NonFiniteError("multiplier has non-finite values on the grid")
    return m


def apply_multiplier(grid: Grid, F: np.ndarray, m: Multiplier) -> np.ndarray:
    """Coefficient-wise product ``m(xi) * F(xi)``."""
    return evaluate_multiplier(grid, m) * grid.check(F, leading=np.ndim(F) - grid.dim)


def dealias(grid: Grid, F: np.ndarray) -> np.ndarray:
    """2/3 rule: zero coefficients with any |m_j| > (2/3)(N_j/2)."""
    return np.where(grid.dealias_mask, F, 0.0)


def derivative_multiplier(grid: Grid, j: int) -> np.ndarray:
    """i*k_j with the unpaired Nyquist mode zeroed (keeps real fields real)."""
    return np.where(grid.nyquist_mask[j], 0.0, 1j * grid.k[j])


def laplacian(grid: Grid, f: np.ndarray) -> np.ndarray:
    f = np.asarray(f)
    out = transform_inverse(grid, -grid.ksq * transform_forward(grid, f))
    return out.real if np.isrealobj(f) else out


def gradient(grid: Grid, f: np.ndarray) -> tuple[np.ndarray, ...]:
    f = np.asarray(f)
    F = transform_forward(grid, f)
    out = []
    for j in range(grid.dim):
        g = transform_inverse(grid, derivative_multiplier(grid, j) * F)
        out.append(g.real if np.isrealobj(f) else g)
    return tuple(out)


def spectral_gradient(grid: Grid, F: np.ndarray) -> list[np.ndarray]:
    """Physical-space partial derivatives from coefficients (complex)."""
    return [transform_inverse(grid, derivative_multiplier(grid, j) * F) for j in range(grid.dim)]


def product_dealiased(grid: Grid, *factors: np.ndarray) -> np.ndarray:
    """Pointwise product of physical fields, returned as dealiased coefficients."""
    prod = factors[0]
    for f in factors[1:]:
        prod = prod * f
    return dealias(grid, transform_forward(grid, prod))


def band_limit(grid: Grid, f: np.ndarray) -> np.ndarray:
    """Project a physical field onto the 2/3 band (returns physical field)."""
    f = np.asarray(f)
    out = transform_inverse(grid, dealias(grid, transform_forward(grid, f)))
    return out.real if np.isrealobj(f) else out


def padded_product_coefficients(grid: Grid, F: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Exact coefficients of the product of two trig polynomials.

    Both inputs are zero-padded onto a grid twice as fine per axis, multiplied
    there, and the product's coefficients on the original index set are
    returned.  Used as an aliasing-free reference.
    """
    fine = Grid(tuple(2 * n for n in grid.sizes), grid.lengths)
    Fp = _pad(grid, fine, F)
    Gp = _pad(grid, fine, G)
    prod = transform_inverse(fine, Fp) * transform_inverse(fine, Gp)
    return _truncate(grid, fine, transform_forward(fine, prod))


def _index_map(grid: Grid, fine: Grid) -> tuple[np.ndarray, ...]:
    idx = []
    for j in range(grid.dim):
        m = grid.axis_modes(j)
        idx.append(np.mod(m, fine.sizes[j]))
    return np.ix_(*idx)


def _pad(grid: Grid, fine: Grid, F: np.ndarray) -> np.ndarray:
    # basis coefficients are resolution independent, so padding is a copy
    out = np.zeros(fine.shape, dtype=complex)
    out[_index_map(grid, fine)] = F
    return out


def _truncate(grid: Grid, fine: Grid, F: np.ndarray) -> np.ndarray:
    return F[_index_map(grid, fine)]


def max_abs(f: np.ndarray) -> float:
    return float(np.max(np.abs(f))) if np.size(f) else 0.0
