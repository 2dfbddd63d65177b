"""Time evolution: exact linear semigroup, integrators, Duhamel/Picard map.

The linear part of the projected equation, ``(i a + eps) Lap``, is applied
exactly in Fourier space.  ``step_dgl`` is the Lawson (integrating-factor)
RK4 scheme: classical RK4 on ``v(t) = exp(-t L) u(t)``, restarted every step,
so the stiffness of ``L`` never limits the step size for any eps in [0, 1].
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import dgl
from .errors import BlowUpError, IncompatibleScalingError
from .littlewood_paley import besov_norm, besov_norm_coefficients
from .sphere_maps import LlgParams, inverse_stereographic, llg_rhs, renormalize, stereographic
from .spectral_core import Grid, band_limit, transform_forward, transform_inverse
from .trajectory import Trajectory

log = logging.getLogger(__name__)

DEFAULT_DELTA = 0.05


def linear_symbol(grid: Grid, epsilon: float, a: float = 1.0) -> np.ndarray:
    """L(xi) = -(i a + eps) |xi|^2."""
    return -(1j * a + epsilon) * grid.ksq


def linear_multiplier(grid: Grid, t: float, epsilon: float, a: float = 1.0) -> np.ndarray:
    if t < 0 and epsilon > 0:
        raise ValueError("the dissipative semigroup only runs forward (t >= 0 when eps > 0)")
    return np.exp(t * linear_symbol(grid, epsilon, a))


@dataclass(frozen=True)
class Propagator:
    grid: Grid
    epsilon: float
    a: float = 1.0

    def multiplier(self, t: float) -> np.ndarray:
        return linear_multiplier(self.grid, t, self.epsilon, self.a)

    def __call__(self, u0: np.ndarray, t: float) -> np.ndarray:
        return linear_propagate(self.grid, u0, t, self.epsilon, self.a)


def linear_propagate(grid: Grid, u0: np.ndarray, t: float, epsilon: float, a: float = 1.0) -> np.ndarray:
    """exp(t (i a + eps) Lap) u0."""
    M = linear_multiplier(grid, t, epsilon, a)
    return transform_inverse(grid, M * transform_forward(grid, np.asarray(u0, dtype=complex)))


def free_trajectory(grid: Grid, u0: np.ndarray, times, epsilon: float, a: float = 1.0) -> Trajectory:
    U0 = transform_forward(grid, np.asarray(u0, dtype=complex))
    values = np.stack([transform_inverse(grid, linear_multiplier(grid, t, epsilon, a) * U0) for t in times])
    return Trajectory(grid, np.asarray(times), values, {"epsilon": epsilon, "a": a, "integrator": "exact-linear"})


# -- projected equation -----------------------------------------------------


class DglStepper:
    """Integrating-factor RK4 for the projected equation, in spectral space."""

    def __init__(self, grid: Grid, dt: float, params: LlgParams, nonlinear: bool = True):
        if dt <= 0:
            raise ValueError(f"time step must be positive, got {dt}")
        self.grid = grid
        self.dt = dt
        self.params = params
        self.nonlinear = nonlinear
        self.half = linear_multiplier(grid, 0.5 * dt, params.epsilon, params.a)
        self.full = self.half * self.half

    def N(self, U: np.ndarray) -> np.ndarray:
        if not self.nonlinear:
            return np.zeros_like(U)
        return dgl.dgl_nonlinear_spectral(self.grid, U, self.params)

    def step(self, U: np.ndarray) -> np.ndarray:
        dt, E, E2 = self.dt, self.half, self.full
        k1 = self.N(U)
        EU = E * U
        k2 = self.N(EU + 0.5 * dt * E * k1)
        k3 = self.N(EU + 0.5 * dt * k2)
        k4 = self.N(E2 * U + dt * E * k3)
        return E2 * U + (dt / 6.0) * (E2 * k1 + 2.0 * E * (k2 + k3) + k4)


def step_dgl(grid: Grid, u: np.ndarray, dt: float, params: LlgParams, nonlinear: bool = True,
             step_index: int = 0) -> np.ndarray:
    stepper = DglStepper(grid, dt, params, nonlinear)
    U = stepper.step(transform_forward(grid, np.asarray(u, dtype=complex)))
    if not np.all(np.isfinite(U)):
        raise BlowUpError(f"non-finite values at step {step_index}", step_index)
    return transform_inverse(grid, U)


# -- sphere formulation -----------------------------------------------------


def _rk4(f, y, dt):
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step_llg_raw(grid: Grid, s: np.ndarray, dt: float, params: LlgParams) -> np.ndarray:
    """One RK4 step of the sphere equation without renormalization."""
    # intermediate stages leave the sphere by O(dt^2); renormalize them so the
    # unit-norm guard in llg_rhs stays meaningful
    return _rk4(lambda y: llg_rhs(grid, renormalize(y), params), s, dt)


def step_llg(grid: Grid, s: np.ndarray, dt: float, params: LlgParams, step_index: int = 0) -> np.ndarray:
    out = step_llg_raw(grid, s, dt, params)
    if not np.all(np.isfinite(out)):
        raise BlowUpError(f"non-finite values at step {step_index}", step_index)
    return renormalize(out)


# -- Duhamel / Picard ---------------------------------------------------------


def duhamel_integral(candidate: Trajectory, params: LlgParams) -> np.ndarray:
    """Coefficients of int_0^{t_m} e^{(t_m - s)L} N(u(s)) ds at every sample time.

    N is the full nonlinear right-hand side (-i(2a - 2i eps) G).  Composite
    Simpson on sample pairs, with the exact semigroup carrying partial
    integrals forward; odd-index times start from a four-point rule on the
    first interval (three-point / trapezoid for very short trajectories).
    """
    grid = candidate.grid
    M = candidate.n_samples - 1
    h = candidate.dt_sample
    out = np.zeros(candidate.values.shape, dtype=complex)
    if M == 0:
        return out
    N = [dgl.dgl_nonlinear_spectral(grid, transform_forward(grid, v), params) for v in candidate.values]
    E1 = linear_multiplier(grid, h, params.epsilon, params.a)
    E2 = E1 * E1
    if M == 1:
        out[1] = 0.5 * h * (E1 * N[0] + N[1])
    elif M == 2:
        Einv = 1.0 / E1
        out[1] = (h / 12.0) * (5.0 * E1 * N[0] + 8.0 * N[1] - Einv * N[2])
    else:
        Einv = 1.0 / E1
        out[1] = (h / 24.0) * (9.0 * E1 * N[0] + 19.0 * N[1] - 5.0 * Einv * N[2] + Einv * Einv * N[3])
    for m in range(2, M + 1):
        out[m] = E2 * out[m - 2] + (h / 3.0) * (E2 * N[m - 2] + 4.0 * E1 * N[m - 1] + N[m])
    if not np.all(np.isfinite(out)):
        bad = int(np.argmax(~np.all(np.isfinite(out.reshape(M + 1, -1)), axis=1)))
        raise BlowUpError(f"non-finite Duhamel value at sample {bad}", bad)
    return out


def _free_coefficients(grid: Grid, U0: np.ndarray, times, params: LlgParams) -> np.ndarray:
    return np.stack([linear_multiplier(grid, t, params.epsilon, params.a) * U0 for t in times])


def duhamel_map(candidate: Trajectory, u0: np.ndarray, params: LlgParams) -> Trajectory:
    """Phi(u)(t) = e^{tL} u0 + int_0^t e^{(t-s)L} N(u(s)) ds on the sample times."""
    grid = candidate.grid
    U0 = transform_forward(grid, np.asarray(u0, dtype=complex))
    coeffs = _free_coefficients(grid, U0, candidate.times, params) + duhamel_integral(candidate, params)
    return candidate.with_values(transform_inverse(grid, coeffs), integrator="duhamel-simpson")


@dataclass
class PicardState:
    m: int
    trajectory: Trajectory
    diffs: list[float] = field(default_factory=list)

    @property
    def ratios(self) -> list[float]:
        """d_{m+1} / d_m; an exact repeat (d_m = 0) counts as ratio 0."""
        d = self.diffs
        return [d[i + 1] / d[i] if d[i] > 0 else 0.0 for i in range(len(d) - 1)]


def sup_besov_difference(a: Trajectory, b: Trajectory, s: float | None = None, shell_range=None) -> float:
    grid = a.grid
    s = grid.dim / 2.0 if s is None else s
    return float(np.max(besov_norm(grid, a.values - b.values, s, 1, shell_range)))


def picard_iterate(grid: Grid, u0: np.ndarray, times, params: LlgParams, iterations: int,
                   shell_range=None) -> PicardState:
    """Iterate Phi starting from the free evolution; record d_m for m >= 1.

    Iterates share the same free part bit for bit, so successive differences
    are taken between the Duhamel integrals (in coefficient space) rather than
    between full fields, which would cancel catastrophically.
    """
    times = np.asarray(times, dtype=float)
    U0 = transform_forward(grid, np.asarray(u0, dtype=complex))
    free = _free_coefficients(grid, U0, times, params)
    integral = np.zeros_like(free)
    traj = Trajectory(grid, times, transform_inverse(grid, free),
                      {"epsilon": params.epsilon, "a": params.a, "integrator": "exact-linear"})
    state = PicardState(0, traj)
    s = grid.dim / 2.0
    for m in range(1, iterations + 1):
        nxt = duhamel_integral(state.trajectory, params)
        diff = besov_norm_coefficients(grid, nxt - integral, s, 1, shell_range)
        state.diffs.append(float(np.max(diff)))
        integral = nxt
        state.trajectory = state.trajectory.with_values(
            transform_inverse(grid, free + integral), integrator="picard", picard_iterate=m
        )
        state.m = m
    return state


# -- full solves --------------------------------------------------------------


def _n_steps(T: float, dt: float) -> int:
    n = int(round(T / dt))
    if n < 1 or abs(n * dt - T) > 1e-9 * max(1.0, T):
        raise ValueError(f"dt={dt} does not divide T={T}")
    return n


def is_sphere_field(grid: Grid, x: np.ndarray) -> bool:
    return np.isrealobj(x) and x.shape == (3,) + grid.shape


def solve(grid: Grid, initial: np.ndarray, T: float, params: LlgParams, dt: float,
          sample_every: int = 1, delta: float = DEFAULT_DELTA, shell_range=None,
          nonlinear: bool = True) -> Trajectory:
    """Integrate to time T from a complex datum u0 or a sphere datum s0 (shape (3, ...)).

    Snapshots are stored every ``sample_every`` steps.  ``meta`` carries the
    run parameters plus the smallness report (critical Besov norms).
    """
    n_steps = _n_steps(T, dt)
    if n_steps % sample_every:
        raise ValueError("sample_every must divide the number of steps")
    sphere = is_sphere_field(grid, initial)
    n = grid.dim

    if sphere:
        s = renormalize(np.asarray(initial, dtype=float))
        snaps = [s]
        for i in range(1, n_steps + 1):
            s = step_llg(grid, s, dt, params, step_index=i)
            if i % sample_every == 0:
                snaps.append(s)
        values = np.stack(snaps)
        u_for_norms = np.stack([stereographic(v) for v in values])
        integrator = "rk4-sphere"
    else:
        stepper = DglStepper(grid, dt, params, nonlinear)
        U = transform_forward(grid, np.asarray(initial, dtype=complex))
        snaps = [transform_inverse(grid, U)]
        for i in range(1, n_steps + 1):
            U = stepper.step(U)
            if not np.all(np.isfinite(U)):
                raise BlowUpError(f"non-finite values at step {i}", i)
            if i % sample_every == 0:
                snaps.append(transform_inverse(grid, U))
        values = np.stack(snaps)
        u_for_norms = values
        integrator = "if-rk4"

    crit = besov_norm(grid, u_for_norms, n / 2.0, 1, shell_range)
    initial_crit = float(crit[0])
    if initial_crit > delta * (1 + 1e-9):
        log.warning("initial critical Besov norm %.3g exceeds small-data threshold %.3g", initial_crit, delta)
    times = np.arange(values.shape[0]) * (dt * sample_every)
    meta = {
        "epsilon": params.epsilon,
        "a": params.a,
        "dt": dt,
        "T": T,
        "sample_every": sample_every,
        "integrator": integrator,
        "grid": grid.to_dict(),
        "delta": delta,
        "initial_critical_norm": initial_crit,
        "sup_critical_norm": float(np.max(crit)),
        "small_data": initial_crit <= delta,
        "dimension_below_theory": n < 3,
    }
    return Trajectory(grid, times, values, meta, kind="sphere" if sphere else "scalar")


def projected(traj: Trajectory) -> Trajectory:
    """Scalar trajectory u = P(s) of a sphere trajectory."""
    if traj.kind != "sphere":
        return traj
    vals = np.stack([stereographic(v) for v in traj.values])
    return Trajectory(traj.grid, traj.times, vals, dict(traj.meta), kind="scalar")


def lifted(traj: Trajectory) -> Trajectory:
    """Sphere trajectory P^{-1}(u) of a scalar trajectory."""
    if traj.kind == "sphere":
        return traj
    vals = np.stack([inverse_stereographic(v) for v in traj.values])
    return Trajectory(traj.grid, traj.times, vals, dict(traj.meta), kind="sphere")


# -- residuals and scaling ---------------------------------------------------------


def dgl_residual(traj: Trajectory, params: LlgParams) -> float:
    """max over interior samples of sup |d_t u - rhs(u)|, d_t by 4th-order centred differences."""
    grid, v, h = traj.grid, traj.values, traj.dt_sample
    if traj.n_samples < 5:
        raise ValueError("need at least 5 samples for the residual")
    worst = 0.0
    for m in range(2, traj.n_samples - 2):
        dudt = (-v[m + 2] + 8.0 * v[m + 1] - 8.0 * v[m - 1] + v[m - 2]) / (12.0 * h)
        r = dudt - dgl.dgl_rhs(grid, v[m], params)
        worst = max(worst, float(np.max(np.abs(r))))
    return worst


def _dilate_periodic(values: np.ndarray, grid: Grid, lam: int) -> np.ndarray:
    out = values
    lead = values.ndim - grid.dim
    for j, n in enumerate(grid.sizes):
        idx = (lam * np.arange(n)) % n
        out = np.take(out, idx, axis=lead + j)
    return out


def _dilate_localized(values: np.ndarray, grid: Grid, lam: int) -> np.ndarray:
    out = values
    lead = values.ndim - grid.dim
    for j, n in enumerate(grid.sizes):
        c = n // 2
        src = c + lam * (np.arange(n) - c)
        valid = (src >= 0) & (src < n)
        out = np.take(out, np.clip(src, 0, n - 1), axis=lead + j)
        shape = [1] * out.ndim
        shape[lead + j] = n
        out = out * valid.reshape(shape)
    return out


def dilate(grid: Grid, f: np.ndarray, lam: int, mode: str = "periodic") -> np.ndarray:
    """f(lam x) by index dilation.

    ``periodic``: the exact torus symmetry (lam^n periodic copies).
    ``localized``: one copy about the box centre, zero outside; for data that
    vanish near the box edges this is the whole-space dilation.
    """
    if int(lam) != lam or lam < 1:
        raise IncompatibleScalingError(f"dilation factor must be a positive integer, got {lam}")
    lam = int(lam)
    if any(n % lam for n in grid.sizes):
        raise IncompatibleScalingError(f"lambda={lam} must divide every axis size {grid.sizes}")
    if lam == 1:
        return np.array(f, copy=True)
    if mode == "periodic":
        return _dilate_periodic(np.asarray(f), grid, lam)
    if mode == "localized":
        return _dilate_localized(np.asarray(f), grid, lam)
    raise ValueError(f"unknown dilation mode {mode!r}")


def scaling_transform(traj: Trajectory, lam: int, mode: str = "periodic") -> Trajectory:
    """u(x, t) -> u(lam x, lam^2 t); sample times shrink by lam^2."""
    if traj.kind != "scalar":
        raise IncompatibleScalingError("scaling acts on scalar (projected) trajectories")
    values = dilate(traj.grid, traj.values, lam, mode)
    lam = int(lam)
    meta = dict(traj.meta)
    if "dt" in meta:
        meta["dt"] = meta["dt"] / lam**2
    meta["T"] = traj.T / lam**2
    meta["scaling"] = {"lambda": lam, "mode": mode}
    return Trajectory(traj.grid, traj.times / lam**2, values, meta, kind="scalar")


def critical_norm_sweep(grid: Grid, u0: np.ndarray, T: float, dt: float, epsilons, a: float = 1.0,
                        shell_range=None) -> dict[float, float]:
    """sup_t critical Besov norm for each damping value (same dt)."""
    out = {}
    for eps in epsilons:
        tr = solve(grid, u0, T, LlgParams(a, eps), dt, shell_range=shell_range)
        out[eps] = tr.meta["sup_critical_norm"]
    return out


def project_datum(grid: Grid, u0: np.ndarray) -> np.ndarray:
    """Band-limit a datum to the dealiased band."""
    return band_limit(grid, np.asarray(u0, dtype=complex))


def steps_for(T: float, dt: float) -> int:
    return _n_steps(T, dt)


def log2_ratio(a: float, b: float) -> float:
    return math.log2(a / b) if a > 0 and b > 0 else float("nan")
