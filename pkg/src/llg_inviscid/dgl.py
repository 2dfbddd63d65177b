"""Nonlinearity and vector field of the projected (derivative Ginzburg-Landau) equation.

With u = P(s) the LLG flow becomes::

    (i d_t + a Lap - i eps Lap) u = (2a - 2i eps) G(u),
    G(u) = conj(u) / (1 + |u|^2) * sum_j (d_j u)^2 .

Solving for the time derivative (multiply by -i)::

    d_t u = (i a + eps) Lap u - i (2a - 2i eps) G(u)
          = (i a + eps) (Lap u - 2 G(u)).

For a = 1 this is the familiar (i + eps) Lap u - i(2 - 2i eps) G(u).  The
linear part carries the factor a as well; without it the projected and
sphere formulations disagree for a != 1.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError
from .sphere_maps import LlgParams
from .spectral_core import (
    Grid,
    dealias,
    spectral_gradient,
    transform_forward,
    transform_inverse,
)


def linear_coefficient(params: LlgParams) -> complex:
    """c in d_t u = c (Lap u - 2 G(u))."""
    return 1j * params.a + params.epsilon


def nonlinear_factor(params: LlgParams) -> complex:
    """Factor multiplying G(u) on the right-hand side: -i (2a - 2i eps)."""
    return -1j * (2.0 * params.a - 2.0j * params.epsilon)


def _grad_square_sum(grid: Grid, U: np.ndarray) -> np.ndarray:
    total = 0.0
    for d in spectral_gradient(grid, U):
        total = total + d * d
    return total


def g_nonlinearity_spectral(grid: Grid, U: np.ndarray, dealiased: bool = True) -> np.ndarray:
    """Coefficients of G(u) given the coefficients U of u."""
    u = transform_inverse(grid, U)
    g = np.conj(u) / (1.0 + np.abs(u) ** 2) * _grad_square_sum(grid, U)
    G = transform_forward(grid, g)
    return dealias(grid, G) if dealiased else G


def g_nonlinearity(grid: Grid, u: np.ndarray, dealiased: bool = True) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    U = transform_forward(grid, u)
    if not dealiased:
        return np.conj(u) / (1.0 + np.abs(u) ** 2) * _grad_square_sum(grid, U)
    return transform_inverse(grid, g_nonlinearity_spectral(grid, U))


def g_taylor(grid: Grid, u: np.ndarray, K: int, dealiased: bool = True) -> np.ndarray:
    """Partial sum to order K of conj(u) sum_k (-|u|^2)^k sum_j (d_j u)^2."""
    u = np.asarray(u, dtype=complex)
    sup = float(np.max(np.abs(u)))
    if sup >= 1.0:
        raise DomainError(f"Taylor form needs ||u||_inf < 1, got {sup:.4f}")
    m = np.abs(u) ** 2
    series = np.zeros(grid.shape)
    term = np.ones(grid.shape)
    for _ in range(K + 1):
        series = series + term
        term = -term * m
    g = np.conj(u) * series * _grad_square_sum(grid, transform_forward(grid, u))
    if not dealiased:
        return g
    return transform_inverse(grid, dealias(grid, transform_forward(grid, g)))


def dgl_nonlinear_spectral(grid: Grid, U: np.ndarray, params: LlgParams) -> np.ndarray:
    """Coefficients of the nonlinear part -i(2a - 2i eps) G(u), dealiased."""
    return nonlinear_factor(params) * g_nonlinearity_spectral(grid, U)


def dgl_rhs_spectral(grid: Grid, U: np.ndarray, params: LlgParams) -> np.ndarray:
    lin = linear_coefficient(params) * (-grid.ksq) * U
    return lin + dgl_nonlinear_spectral(grid, U, params)


def dgl_rhs(grid: Grid, u: np.ndarray, params: LlgParams) -> np.ndarray:
    """Time derivative d_t u of the projected equation (physical field)."""
    U = transform_forward(grid, np.asarray(u, dtype=complex))
    return transform_inverse(grid, dgl_rhs_spectral(grid, U, params))
