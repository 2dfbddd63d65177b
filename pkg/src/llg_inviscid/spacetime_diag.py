"""Space-time Fourier diagnostics on stored trajectories.

A trajectory on [0, T] is multiplied by a smooth window ``w`` (1 on
[0.1 T, 0.9 T], vanishing to infinite order at 0 and T) and then treated as
periodic in time with period T, using the samples t_0 .. t_{M-1}.

Time frequencies follow the convention f(t) = sum_tau F(tau) e^{i tau t}, so a
free wave e^{i(xi x - |xi|^2 t)} sits at tau = -|xi|^2 and the modulation
variable is ``tau + |xi|^2``; ``(i d_t + Lap)`` has symbol ``-(tau + |xi|^2)``.

Space-time coefficients are unitary: sum |F|^2 = sum |f|^2 dt dV.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .errors import GridMismatchError
from .evolve import free_trajectory
from .littlewood_paley import chi, chi_below, smoothstep
from .spectral_core import Grid, transform_forward, transform_inverse
from .trajectory import Trajectory

PLATEAU = (0.1, 0.9)
X_NORM_CAVEAT = (
    "windowed discrete X^{0,1}: no quotient by free solutions unless the free part was removed"
)


def time_window(times: np.ndarray, T: float | None = None) -> np.ndarray:
    """C^inf window: 1 on [0.1 T, 0.9 T], 0 at (and beyond) the endpoints."""
    times = np.asarray(times, dtype=float)
    T = float(times[-1]) if T is None else T
    ramp = PLATEAU[0] * T
    return smoothstep(times / ramp) * smoothstep((T - times) / ramp)


def time_window_derivative(times: np.ndarray, T: float | None = None) -> np.ndarray:
    """d/dt of ``time_window`` (closed form, for oracles)."""
    times = np.asarray(times, dtype=float)
    T = float(times[-1]) if T is None else T
    ramp = PLATEAU[0] * T

    def g(t):
        return smoothstep(t)

    def dg(t):
        t = np.clip(t, 0.0, 1.0)
        out = np.zeros_like(t)
        inside = (t > 0) & (t < 1)
        ti = t[inside]
        a = np.exp(-1.0 / ti)
        b = np.exp(-1.0 / (1.0 - ti))
        da = a / ti**2
        db = -b / (1.0 - ti) ** 2
        out[inside] = (da * (a + b) - a * (da + db)) / (a + b) ** 2
        return out

    s1, s2 = times / ramp, (T - times) / ramp
    return dg(s1) / ramp * g(s2) - g(s1) * dg(s2) / ramp


@dataclass
class SpaceTimeField:
    """Windowed, time-periodized field with its (tau, xi) coefficients.

    ``values`` holds w(t_m) u(t_m) for m = 0 .. M-1; the period is M * dt.
    """

    grid: Grid
    dt: float
    values: np.ndarray  # (M, *grid.shape), windowed samples
    coefficients: np.ndarray  # (M, *grid.shape), unitary, tau along axis 0
    window: np.ndarray
    periodic_jump: float
    meta: dict = field(default_factory=dict)

    @property
    def n_times(self) -> int:
        return self.values.shape[0]

    @property
    def period(self) -> float:
        return self.n_times * self.dt

    @property
    def tau(self) -> np.ndarray:
        return 2.0 * math.pi * np.fft.fftfreq(self.n_times, self.dt)

    @property
    def modulation(self) -> np.ndarray:
        """tau + |xi|^2 on the full (tau, xi) grid."""
        return self.tau.reshape((-1,) + (1,) * self.grid.dim) + self.grid.ksq[None]

    def with_coefficients(self, C: np.ndarray, **meta) -> "SpaceTimeField":
        vals = spacetime_inverse(self.grid, self.dt, C)
        return SpaceTimeField(self.grid, self.dt, vals, C, self.window, self.periodic_jump,
                              {**self.meta, **meta})

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.coefficients) ** 2)))


def spacetime_forward(grid: Grid, dt: float, f: np.ndarray) -> np.ndarray:
    F = transform_forward(grid, f)
    return sfft.fft(F, axis=0, norm="ortho", workers=grid.workers) * math.sqrt(dt)


def spacetime_inverse(grid: Grid, dt: float, C: np.ndarray) -> np.ndarray:
    F = sfft.ifft(C, axis=0, norm="ortho", workers=grid.workers) / math.sqrt(dt)
    return transform_inverse(grid, F)


def windowed(traj: Trajectory) -> SpaceTimeField:
    """Window a scalar trajectory and build its space-time coefficients."""
    if traj.kind != "scalar":
        raise GridMismatchError("space-time diagnostics act on scalar trajectories")
    if traj.n_samples < 4:
        raise ValueError("need at least 4 samples for a space-time field")
    w = time_window(traj.times)
    shape = (-1,) + (1,) * traj.grid.dim
    full = w.reshape(shape) * traj.values
    jump = float(np.max(np.abs(full[-1] - full[0])))
    vals = full[:-1].astype(complex)
    C = spacetime_forward(traj.grid, traj.dt_sample, vals)
    meta = {"window": "smoothstep", "plateau": list(PLATEAU), "T": traj.T, "samples": traj.n_samples}
    return SpaceTimeField(traj.grid, traj.dt_sample, vals, C, w[:-1], jump, meta)


def remove_free_part(traj: Trajectory, a: float = 1.0) -> Trajectory:
    """u(t) - e^{i a t Lap} u(0): the Duhamel part, modulo free Schrodinger waves."""
    free = free_trajectory(traj.grid, traj.values[0], traj.times, 0.0, a)
    return traj.with_values(traj.values - free.values, free_part_removed=True)


# -- modulation projectors --------------------------------------------------


def modulation_range(F: SpaceTimeField, jmin: int = 0) -> tuple[int, int]:
    """(jmin, jmax) with jmax the smallest index whose cutoffs reach every modulation."""
    top = float(np.max(np.abs(F.modulation)))
    jmax = jmin if top <= 1.25 * 2.0**jmin else math.ceil(math.log2(top / 1.25) - 1e-12)
    return jmin, max(jmax, jmin)


def modulation_project(F: SpaceTimeField, j: int) -> SpaceTimeField:
    """Q_j: multiplier chi_j(tau + |xi|^2)."""
    m = chi(j, np.abs(F.modulation))
    return F.with_coefficients(m * F.coefficients, modulation_shell=j)


def modulation_remainder(F: SpaceTimeField, jmin: int) -> SpaceTimeField:
    """Q_{< jmin}: multiplier eta((tau + |xi|^2) / 2^(jmin - 1))."""
    m = chi_below(jmin - 1, np.abs(F.modulation))
    return F.with_coefficients(m * F.coefficients, modulation_shell=f"<{jmin}")


def modulation_masses(F: SpaceTimeField, jmin: int = 0, jmax: int | None = None) -> dict:
    """Squared L^2 mass of Q_j F for each shell, plus the low remainder."""
    jmin, jmax_auto = modulation_range(F, jmin)
    jmax = jmax_auto if jmax is None else jmax
    r = np.abs(F.modulation)
    power = np.abs(F.coefficients) ** 2
    masses = {"remainder": float(np.sum(chi_below(jmin - 1, r) ** 2 * power))}
    for j in range(jmin, jmax + 1):
        masses[j] = float(np.sum(chi(j, r) ** 2 * power))
    return masses


def modulation_partition_error(F: SpaceTimeField, jmin: int = 0) -> float:
    """max |sum_j Q_j F + remainder - F| over coefficients, relative to max |F|."""
    jmin, jmax = modulation_range(F, jmin)
    r = np.abs(F.modulation)
    total = chi_below(jmin - 1, r) + sum(chi(j, r) for j in range(jmin, jmax + 1))
    scale = max(float(np.max(np.abs(F.coefficients))), 1e-300)
    return float(np.max(np.abs((total - 1.0) * F.coefficients))) / scale


def window_bandwidth(times: np.ndarray, fraction: float = 0.99) -> float:
    """Smallest 2^j with at least ``fraction`` of the window's L^2 mass at |tau| <= 1.25 * 2^j.

    A free solution's modulation spectrum is the window spectrum translated to
    tau + |xi|^2 = 0, so this is the empirical broadening scale C_window.
    """
    times = np.asarray(times, dtype=float)
    w = time_window(times)[:-1]
    dt = times[1] - times[0]
    power = np.abs(np.fft.fft(w)) ** 2
    tau = np.abs(2.0 * math.pi * np.fft.fftfreq(w.size, dt))
    total = power.sum()
    j = 0
    while np.sum(power[tau <= 1.25 * 2.0**j]) < fraction * total:
        j += 1
    return 2.0**j


def low_modulation_fraction(F: SpaceTimeField, cutoff: float) -> float:
    """Fraction of L^2 mass in Q_{<jmin} and Q_j with 2^j <= cutoff."""
    masses = modulation_masses(F)
    total = sum(masses.values())
    if total == 0:
        return 1.0
    low = masses["remainder"] + sum(v for j, v in masses.items() if j != "remainder" and 2.0**j <= cutoff)
    return low / total


def shell_of(value: float) -> int:
    """Dyadic index j whose plateau [0.8 * 2^j, 1.25 * 2^j] contains value (> 0)."""
    return int(round(math.log2(value)))


# -- X^{0,1} ---------------------------------------------------------------


@dataclass
class X01Report:
    spectral: float
    physical: float
    l2: float
    caveat: str = X_NORM_CAVEAT

    @property
    def relative_gap(self) -> float:
        scale = max(abs(self.spectral), abs(self.physical), 1e-300)
        return abs(self.spectral - self.physical) / scale


def schrodinger_operator(F: SpaceTimeField) -> np.ndarray:
    """(i d_t + Lap) f in physical space, with spectral time and space derivatives."""
    grid = F.grid
    Fx = transform_forward(grid, F.values)
    dt_hat = sfft.fft(Fx, axis=0, workers=grid.workers)
    shape = (-1,) + (1,) * grid.dim
    dt_hat = 1j * F.tau.reshape(shape) * dt_hat
    i_dt = 1j * transform_inverse(grid, sfft.ifft(dt_hat, axis=0, workers=grid.workers))
    lap = transform_inverse(grid, -grid.ksq[None] * Fx)
    return i_dt + lap


def x01_norm(F: SpaceTimeField) -> X01Report:
    spectral = float(np.sqrt(np.sum(np.abs(F.modulation * F.coefficients) ** 2)))
    L = schrodinger_operator(F)
    physical = float(np.sqrt(np.sum(np.abs(L) ** 2) * F.dt * F.grid.cell_volume))
    return X01Report(spectral, physical, F.l2_norm())


def detuned_wave(grid: Grid, times: np.ndarray, xi0, mu: float) -> Trajectory:
    """e^{i (xi0 . x + mu t)}: modulation mu + |xi0|^2 under the convention above."""
    phase = sum(k * x for k, x in zip(xi0, grid.coords))
    vals = np.exp(1j * (phase[None] + mu * np.asarray(times).reshape((-1,) + (1,) * grid.dim)))
    return Trajectory(grid, times, vals, {"detuned": {"xi0": list(xi0), "mu": mu}})


# -- null structure ------------------------------------------------------------


def _truncate_two_thirds(F: SpaceTimeField) -> np.ndarray:
    M = F.n_times
    m = np.fft.fftfreq(M, 1.0 / M)
    keep_t = np.abs(m) <= (2.0 / 3.0) * (M // 2)
    mask = keep_t.reshape((-1,) + (1,) * F.grid.dim) & F.grid.dealias_mask[None]
    return mask


def null_identity_residual(u: SpaceTimeField, v: SpaceTimeField) -> float:
    """sup | -2 grad u . grad v - [(L u) v + u (L v) - L(u v)] |, L = i d_t + Lap.

    Both inputs are truncated to the 2/3 band in space and time so that every
    product is resolved; each side is then truncated to the same band.
    """
    if u.values.shape != v.values.shape or u.dt != v.dt:
        raise GridMismatchError("space-time fields must share grid and sampling")
    grid = u.grid
    mask = _truncate_two_thirds(u)
    U = np.where(mask, u.coefficients, 0.0)
    V = np.where(mask, v.coefficients, 0.0)
    symbol = -u.modulation

    def phys(C):
        return spacetime_inverse(grid, u.dt, C)

    def coeff(f):
        return np.where(mask, spacetime_forward(grid, u.dt, f), 0.0)

    uu, vv = phys(U), phys(V)
    Lu, Lv = phys(symbol * U), phys(symbol * V)
    L_uv = symbol * spacetime_forward(grid, u.dt, uu * vv)
    rhs = coeff(Lu * vv + uu * Lv) - np.where(mask, L_uv, 0.0)
    grad_dot = 0.0
    for kj in grid.k:
        grad_dot = grad_dot + phys(1j * kj[None] * U) * phys(1j * kj[None] * V)
    lhs = coeff(-2.0 * grad_dot)
    return float(np.max(np.abs(phys(lhs - rhs))))


def resonance(xi1, xi2) -> float:
    """H = |xi1|^2 + |xi2|^2 - |xi1 + xi2|^2 = -2 xi1 . xi2."""
    a = np.asarray(xi1, dtype=float)
    b = np.asarray(xi2, dtype=float)
    return float(-2.0 * np.dot(a, b))


def dyadic_annulus(points: np.ndarray, k: int) -> np.ndarray:
    """Rows xi of ``points`` (shape (m, n)) with 2^(k-1) < |xi| <= 2^k."""
    r = np.linalg.norm(points, axis=1)
    return points[(r > 2.0 ** (k - 1)) & (r <= 2.0**k)]


# -- Strichartz quantities ----------------------------------------------------


@dataclass
class StrichartzReport:
    value: float
    exponent: float
    flagged: bool
    note: str = ""


def strichartz_exponent(dim: int) -> tuple[float, bool]:
    """Spatial exponent 2n/(n-2) and whether it is the admissible non-endpoint case n = 3."""
    if dim == 2:
        return math.inf, True
    return 2.0 * dim / (dim - 2), dim != 3


def strichartz_norm(traj: Trajectory) -> StrichartzReport:
    """L^2_t L^r_x with r = 2n/(n-2); trapezoid weights in t, Riemann sums in x."""
    grid = traj.grid
    r, flagged = strichartz_exponent(grid.dim)
    a = np.abs(traj.values)
    axes = tuple(range(1, a.ndim))
    if r == math.inf:
        inner = np.max(a, axis=axes)
        note = "n = 2: exponent degenerate, L^inf used"
    elif r < 0:
        return StrichartzReport(float("nan"), r, True, "n = 1: no admissible exponent")
    else:
        inner = (np.sum(a**r, axis=axes) * grid.cell_volume) ** (1.0 / r)
        note = "" if not flagged else f"n = {grid.dim}: exponent outside theory"
    value = float(np.sqrt(np.sum(traj.time_weights() * inner**2)))
    return StrichartzReport(value, r, flagged, note)


def energy_norm(traj: Trajectory) -> float:
    """L^inf_t L^2_x."""
    grid = traj.grid
    axes = tuple(range(1, traj.values.ndim))
    return float(np.sqrt(np.max(np.sum(np.abs(traj.values) ** 2, axis=axes)) * grid.cell_volume))


def diagnostic_record(manifest_hash: str, name: str, value, **params) -> dict:
    """NDJSON-ready record keyed by trajectory manifest hash."""
    return {"manifest": manifest_hash, "diagnostic": name, "params": params, "value": value}
