"""Sphere-valued fields, the LLG vector field and stereographic projection.

A sphere field is an array of shape ``(3, *grid.shape)``.  The base point is
Q = (0, 0, 1); the projection ``u = (s1 + i s2) / (1 + s3)`` is singular at the
south pole and is refused when ``1 + s3`` drops below ``POLE_GUARD``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFieldError, GridMismatchError, PoleProximityError, UnitNormError
from .spectral_core import (
    Grid,
    dealias,
    derivative_multiplier,
    transform_forward,
    transform_inverse,
)

POLE_GUARD = 0.1
UNIT_TOL = 1e-6
BASE_POINT = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class LlgParams:
    a: float = 1.0
    epsilon: float = 0.0

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError(f"damping must be non-negative, got {self.epsilon}")


def constant_field(grid: Grid, vec=BASE_POINT) -> np.ndarray:
    v = np.asarray(vec, dtype=float).reshape((3,) + (1,) * grid.dim)
    return np.broadcast_to(v, (3,) + grid.shape).copy()


def cross(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Pointwise cross product of two 3-vector fields (component axis 0)."""
    if u.shape != v.shape or u.shape[0] != 3:
        raise GridMismatchError(f"cannot cross fields of shapes {u.shape} and {v.shape}")
    return np.stack(
        [
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        ]
    )


def dot(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def pointwise_norm(s: np.ndarray) -> np.ndarray:
    return np.sqrt(dot(s, s))


def vector_laplacian(grid: Grid, s: np.ndarray) -> np.ndarray:
    return transform_inverse(grid, -grid.ksq * transform_forward(grid, s)).real


def _dealias_vec(grid: Grid, v: np.ndarray) -> np.ndarray:
    return transform_inverse(grid, dealias(grid, transform_forward(grid, v))).real


def llg_rhs(grid: Grid, s: np.ndarray, params: LlgParams) -> np.ndarray:
    """a s x Lap s - eps s x (s x Lap s).

    Each cross product is dealiased; the result is then projected onto the
    tangent plane at s so that rhs . s = 0 holds to rounding for any unit
    field (for resolved fields the projection changes nothing measurable).
    """
    grid.check(s, leading=1)
    dev = np.max(np.abs(pointwise_norm(s) - 1.0))
    if dev > UNIT_TOL:
        raise UnitNormError(f"|s| deviates from 1 by {dev:.3e}; renormalize first")
    lap = vector_laplacian(grid, s)
    s_x_lap = _dealias_vec(grid, cross(s, lap))
    rhs = params.a * s_x_lap
    if params.epsilon != 0.0:
        rhs = rhs - params.epsilon * _dealias_vec(grid, cross(s, s_x_lap))
    return rhs - dot(rhs, s) * s


def stereographic(s: np.ndarray) -> np.ndarray:
    """u = (s1 + i s2) / (1 + s3)."""
    denom = 1.0 + s[2]
    worst = float(np.min(denom))
    if worst < POLE_GUARD:
        raise PoleProximityError(
            f"1 + s3 = {worst:.3e} < {POLE_GUARD}: field too close to the south pole"
        )
    return (s[0] + 1j * s[1]) / denom


def inverse_stereographic(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    m = np.abs(u) ** 2
    d = 1.0 + m
    return np.stack([2.0 * u.real / d, 2.0 * u.imag / d, (1.0 - m) / d])


def renormalize(s: np.ndarray) -> np.ndarray:
    r = pointwise_norm(s)
    if np.min(r) < 1e-8:
        raise DegenerateFieldError("pointwise norm below 1e-8, cannot renormalize")
    return s / r


def dirichlet_energy(grid: Grid, s: np.ndarray) -> float:
    """sum over grid of |grad s|^2 dV (spectral derivatives)."""
    S = transform_forward(grid, s)
    total = 0.0
    for j in range(grid.dim):
        dj = transform_inverse(grid, derivative_multiplier(grid, j) * S).real
        total += float(np.sum(dj**2))
    return total * grid.cell_volume


def rotate_about_axis(s: np.ndarray, theta: float) -> np.ndarray:
    """Rotate every vector about the Q axis (e3) by angle theta."""
    c, sn = np.cos(theta), np.sin(theta)
    return np.stack([c * s[0] - sn * s[1], sn * s[0] + c * s[1], s[2]])


def rotation_to_base(q) -> np.ndarray:
    """Rotation matrix R with R q = (0, 0, 1) (Rodrigues); use to pre-rotate other Q."""
    q = np.asarray(q, dtype=float)
    q = q / np.linalg.norm(q)
    e3 = BASE_POINT
    v = np.cross(q, e3)
    c = float(np.dot(q, e3))
    if np.linalg.norm(v) < 1e-15:
        return np.eye(3) if c > 0 else np.diag([1.0, -1.0, -1.0])
    vx = np.array([[0, -v[2], v[1]], [v[2], 0, -v[0]], [-v[1], v[0], 0]])
    return np.eye(3) + vx + vx @ vx / (1.0 + c)


def apply_rotation(R: np.ndarray, s: np.ndarray) -> np.ndarray:
    return np.tensordot(R, s, axes=(1, 0))
