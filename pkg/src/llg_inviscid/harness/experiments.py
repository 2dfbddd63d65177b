"""Experiment drivers: inviscid sweep, truncation study, equivalence check, self-test."""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .. import evolve
from ..data import make_datum
from ..fieldio import _manifest, manifest_hash, write_trajectory
from ..littlewood_paley import besov_norm, critical_besov_norm, default_shell_range, project_below
from ..sphere_maps import LlgParams, inverse_stereographic, pointwise_norm, stereographic
from ..trajectory import Trajectory
from .config import ExperimentConfig
from .report import ExperimentReport, loglog_slope

log = logging.getLogger(__name__)

MACHINE_EPS = float(np.finfo(float).eps)
UNIFORM_BOUND = 5.0
REGULARITY_BOUND = 10.0


def parallel_map(fn, keys, workers: int = 1) -> dict:
    """Evaluate fn(key) for every key; results keyed and ordered like sorted(keys)."""
    keys = sorted(keys)
    if workers <= 1 or len(keys) <= 1:
        return {k: fn(k) for k in keys}
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {k: pool.submit(fn, k) for k in keys}
        return {k: futures[k].result() for k in keys}


def trajectory_hash(traj: Trajectory) -> str:
    files = [f"snap_{m:05d}.llgf" for m in range(traj.n_samples)]
    return manifest_hash(_manifest(traj, files))


def _persist(config: ExperimentConfig, traj: Trajectory, label: str) -> str:
    if config.save_trajectories and config.output:
        return write_trajectory(Path(config.output) / "trajectories" / label, traj)
    return trajectory_hash(traj)


def _base_metadata(config: ExperimentConfig, report: ExperimentReport) -> None:
    grid = config.grid_obj
    report.metadata.update(
        {
            "grid": grid.to_dict(),
            "shell_range": list(config.shell_range_tuple or default_shell_range(grid)),
            "dimension_below_theory": grid.dim < 3,
            "dt": config.dt,
            "datum": dict(config.datum),
        }
    )


def sup_besov_error(grid, a: np.ndarray, b: np.ndarray, shell_range=None) -> float:
    """sup over samples of the critical B^{n/2}_{2,1} norm of a - b."""
    return float(np.max(besov_norm(grid, a - b, grid.dim / 2.0, 1, shell_range)))


def _is_smooth(datum: dict) -> bool:
    return bool(datum.get("smooth", datum.get("family") in ("bump", "zero")))


# -- inviscid limit -----------------------------------------------------------


def inviscid_errors(config: ExperimentConfig, T: float) -> tuple[dict, dict]:
    """e(eps) for every eps in the config plus manifest hashes (eps = 0 is the reference)."""
    grid = config.grid_obj
    u0 = make_datum(grid, config.datum)
    sr = config.shell_range_tuple

    def run(eps):
        return evolve.solve(grid, u0, T, LlgParams(config.a, eps), config.dt,
                            sample_every=config.sample_every, delta=config.delta, shell_range=sr)

    trajs = parallel_map(run, set(config.epsilons) | {0.0}, config.workers)
    ref = trajs[0.0]
    errors = {eps: sup_besov_error(grid, trajs[eps].values, ref.values, sr) for eps in config.epsilons}
    hashes = {eps: _persist(config, tr, f"T{T:g}_eps{eps:g}") for eps, tr in trajs.items()}
    return errors, hashes


def run_inviscid_sweep(config: ExperimentConfig) -> ExperimentReport:
    report = ExperimentReport.empty("sweep", config.to_dict())
    _base_metadata(config, report)
    grid = config.grid_obj
    Ts = sorted(config.T_list) if config.T_list else [config.T]
    eps = list(config.epsilons)
    u0 = make_datum(grid, config.datum)
    n = grid.dim
    report.metadata["datum_norms"] = {
        "critical": critical_besov_norm(grid, u0),
        "regularity_n_plus_4_over_2": float(besov_norm(grid, u0, (n + 4) / 2.0)),
    }
    smooth = _is_smooth(config.datum)
    zero = config.datum.get("family") == "zero" or not np.any(u0)
    per_T = {}
    start = time.perf_counter()
    for T in Ts:
        errors, hashes = inviscid_errors(config, T)
        per_T[T] = errors
        curve = report.curve(f"inviscid_error_T{T:g}", "epsilon", "sup_t_besov_error")
        for e in eps:
            curve.add(e, errors[e])
            report.records.append(
                {"manifest": hashes[e], "reference_manifest": hashes[0.0], "T": T, "epsilon": e,
                 "error": errors[e], "dt": config.dt, "grid": grid.to_dict()}
            )
    report.metadata["runtime_s"] = time.perf_counter() - start
    main = per_T[Ts[-1]]
    for e in eps:
        report.curves["inviscid_error"].add(e, main[e])

    for T in Ts:
        errs = [per_T[T][e] for e in eps]
        if zero:
            report.check(f"zero_datum_T{T:g}", all(x == 0.0 for x in errs), max(errs), "e(eps) = 0")
            continue
        mono = all(b < a for a, b in zip(errs, errs[1:]))
        report.check(f"monotone_decrease_T{T:g}", mono, None, "e strictly decreasing as eps decreases",
                     " ".join(f"{x:.3e}" for x in errs))
        if smooth:
            slope = loglog_slope(eps, errs)
            report.fits[f"slope_T{T:g}"] = slope
            lo, hi = config.tol("slope_low"), config.tol("slope_high")
            report.check(f"rate_slope_T{T:g}", lo <= slope <= hi, slope, f"[{lo}, {hi}]")
        else:
            red = config.tol("rough_reduction")
            ratio = errs[-1] / errs[0]
            report.check(f"rough_reduction_T{T:g}", ratio <= 1.0 / red, ratio, f"e(min eps)/e(max eps) <= 1/{red:g}")
    if smooth and not zero and len(Ts) >= 2:
        T1, T2 = Ts[0], Ts[-1]
        tol = config.tol("T_linearity")
        worst = max(abs(per_T[T2][e] / per_T[T1][e] / (T2 / T1) - 1.0) for e in eps)
        report.fits["T_linearity_worst_deviation"] = worst
        report.check("linear_in_T", worst <= tol, worst, f"|e(T2)/e(T1) / (T2/T1) - 1| <= {tol}")
    return report


# -- low-frequency truncation ------------------------------------------------------


def run_truncation_study(config: ExperimentConfig) -> ExperimentReport:
    """Three-term split |S^e(phi) - S(phi)| <= |S^e(phi) - S^e(phi_K)| + |S^e(phi_K) - S(phi_K)| + |S(phi_K) - S(phi)|."""
    report = ExperimentReport.empty("truncate", config.to_dict())
    _base_metadata(config, report)
    grid = config.grid_obj
    sr = config.shell_range_tuple
    phi = make_datum(grid, config.datum)
    eps = list(config.epsilons)
    all_eps = sorted(set(eps) | {0.0})
    params = lambda e: LlgParams(config.a, e)  # noqa: E731

    def solve_all(u0):
        return parallel_map(
            lambda e: evolve.solve(grid, u0, config.T, params(e), config.dt,
                                   sample_every=config.sample_every, delta=config.delta, shell_range=sr).values,
            all_eps, config.workers,
        )

    full = solve_all(phi)
    C = config.tol("stability_constant")
    scale = critical_besov_norm(grid, phi)
    Ks = config.K_list or [default_shell_range(grid)[1] - 2]
    worst_constant = 0.0
    for K in Ks:
        phiK = project_below(grid, phi, K, sr)
        tail = critical_besov_norm(grid, phi - phiK, sr)
        trunc = solve_all(phiK)
        t1 = [sup_besov_error(grid, full[e], trunc[e], sr) for e in eps]
        t3 = sup_besov_error(grid, trunc[0.0], full[0.0], sr)
        t2 = [sup_besov_error(grid, trunc[e], trunc[0.0], sr) for e in eps]
        slope = loglog_slope(eps, t2)
        for e, a, b in zip(eps, t1, t2):
            report.records.append({"K": K, "epsilon": e, "term1": a, "term2": b, "term3": t3, "tail": tail})
        if tail <= 1e-14 * max(scale, 1e-300):
            ok = max(t1 + [t3]) <= 1e-12 * max(scale, 1e-300)
            report.check(f"band_limited_terms_vanish_K{K}", ok, max(t1 + [t3]), "terms 1, 3 ~ 0")
        else:
            c1 = max(t1) / tail
            c3 = t3 / tail
            worst_constant = max(worst_constant, c1, c3)
            report.curves["term1_over_tail"].add(K, c1)
            report.curves["term3_over_tail"].add(K, c3)
            report.check(f"term1_bounded_K{K}", c1 <= C, c1, f"max_eps term1 / tail <= {C:g}")
            report.check(f"term3_bounded_K{K}", c3 <= C, c3, f"term3 / tail <= {C:g}")
        report.curves["term2_slope"].add(K, slope)
        report.fits[f"term2_slope_K{K}"] = slope
        stol = config.tol("truncation_slope_tol")
        report.check(f"term2_linear_K{K}", abs(slope - 1.0) <= stol, slope, f"1 +- {stol}")
    report.fits["stability_constant"] = worst_constant
    return report


# -- sphere / projected equivalence -----------------------------------------------


def rk4_amplification(z: complex) -> float:
    return abs(1 + z + z**2 / 2 + z**3 / 6 + z**4 / 24)


def sphere_step_admissible(grid, dt: float, T: float, params: LlgParams, tolerance: float) -> tuple[bool, float]:
    """Explicit RK4 on the sphere system: is round-off growth over [0, T] below tolerance?

    The stiffest linear mode has eigenvalue -(eps + i a) |xi|^2 at the largest
    dealiased wavenumber.  Growth |R(z)|^steps times machine epsilon must not
    reach the acceptance tolerance.
    """
    kmax2 = grid.max_wavenumber(dealiased=True) ** 2
    z = -(params.epsilon + 1j * params.a) * kmax2 * dt
    r = rk4_amplification(z)
    steps = round(T / dt)
    log_growth = steps * math.log(max(r, 1e-300))
    growth = math.exp(min(log_growth, 700.0))
    return growth * MACHINE_EPS <= tolerance, growth


def equivalence_discrepancy(grid, u0: np.ndarray, T: float, dt: float, params: LlgParams, shell_range=None) -> dict:
    s0 = inverse_stereographic(u0)
    sphere = evolve.solve(grid, s0, T, params, dt, shell_range=shell_range)
    proj = evolve.solve(grid, u0, T, params, dt, shell_range=shell_range)
    u_s = evolve.projected(sphere).values
    sup = float(np.max(np.abs(u_s - proj.values)))
    bes = sup_besov_error(grid, u_s, proj.values, shell_range)
    unit = float(np.max(np.abs(pointwise_norm(np.moveaxis(sphere.values, 1, 0)) - 1.0)))
    return {"sup": sup, "besov": bes, "unit_drift": unit,
            "manifests": [trajectory_hash(sphere), trajectory_hash(proj)]}


def run_equivalence_check(config: ExperimentConfig) -> ExperimentReport:
    report = ExperimentReport.empty("equivalence", config.to_dict())
    _base_metadata(config, report)
    grid = config.grid_obj
    u0 = make_datum(grid, config.datum)
    stereographic(inverse_stereographic(u0))  # pole guard on the datum
    dts = sorted(config.dt_list or [config.dt], reverse=True)
    tol = config.tol("equivalence_sup")
    order_tol = config.tol("order_tol")
    for eps in config.epsilons:
        params = LlgParams(config.a, eps)
        usable = []
        for dt in dts:
            ok, growth = sphere_step_admissible(grid, dt, config.T, params, tol)
            report.records.append({"epsilon": eps, "dt": dt, "admissible": ok, "rk4_growth": growth})
            if ok:
                usable.append(dt)
        if len(usable) < 2:
            report.check(f"refinement_possible_eps{eps:g}", False, len(usable), ">= 2 admissible dt",
                         f"admissible: {usable}")
            continue
        results = parallel_map(
            lambda dt: equivalence_discrepancy(grid, u0, config.T, dt, params, config.shell_range_tuple),
            usable, config.workers,
        )
        curve = report.curve(f"discrepancy_eps{eps:g}", "dt", "sup_discrepancy")
        for dt in usable:
            curve.add(dt, results[dt]["sup"])
            report.records.append({"epsilon": eps, "dt": dt, **results[dt]})
        if eps == config.epsilons[-1]:
            for dt in usable:
                report.curves["discrepancy"].add(dt, results[dt]["sup"])
        finest = min(usable)
        report.check(f"discrepancy_eps{eps:g}", results[finest]["sup"] <= tol, results[finest]["sup"],
                     f"<= {tol:g} at dt={finest:g}")
        ordered = sorted(usable, reverse=True)
        orders = [math.log(results[a]["sup"] / results[b]["sup"]) / math.log(a / b)
                  for a, b in zip(ordered, ordered[1:])]
        report.fits[f"orders_eps{eps:g}"] = orders
        for (a, b), p in zip(zip(ordered, ordered[1:]), orders):
            report.check(f"order_eps{eps:g}_dt{a:g}->{b:g}", abs(p - 4.0) <= order_tol, p, f"4 +- {order_tol}")
    return report


# -- simulate / well-posedness proxy -------------------------------------------


def run_simulation(config: ExperimentConfig) -> ExperimentReport:
    """Solve for each eps; assert the uniform smallness and regularity bounds; optional Picard check."""
    report = ExperimentReport.empty("simulate", config.to_dict())
    _base_metadata(config, report)
    grid = config.grid_obj
    sr = config.shell_range_tuple
    u0 = make_datum(grid, config.datum)
    n = grid.dim
    amp = float(config.datum.get("delta", config.delta))

    def run(eps):
        return evolve.solve(grid, u0, config.T, LlgParams(config.a, eps), config.dt,
                            sample_every=config.sample_every, delta=config.delta, shell_range=sr)

    trajs = parallel_map(run, config.epsilons, config.workers)
    reg0 = float(besov_norm(grid, u0, (n + 4) / 2.0, 1, sr))
    for eps in sorted(trajs, reverse=True):
        tr = trajs[eps]
        h = _persist(config, tr, f"eps{eps:g}")
        crit = besov_norm(grid, tr.values, n / 2.0, 1, sr)
        reg = besov_norm(grid, tr.values, (n + 4) / 2.0, 1, sr)
        if eps == config.epsilons[0]:
            for t, c in zip(tr.times, crit):
                report.curves["critical_norm"].add(t, c)
        for t, c, r in zip(tr.times, crit, reg):
            report.records.append({"manifest": h, "epsilon": eps, "time": float(t),
                                   "critical_besov": float(c), "besov_n_plus_4_over_2": float(r)})
        sup = float(np.max(crit))
        if amp > 0:
            report.check(f"uniform_smallness_eps{eps:g}", sup <= UNIFORM_BOUND * amp, sup,
                         f"sup_t critical norm <= {UNIFORM_BOUND:g} * delta = {UNIFORM_BOUND * amp:g}")
            ratio = float(np.max(reg)) / reg0
            report.check(f"persistence_of_regularity_eps{eps:g}", ratio <= REGULARITY_BOUND, ratio,
                         f"sup_t B^(n+4)/2 / initial <= {REGULARITY_BOUND:g}")
        else:
            report.check(f"zero_solution_eps{eps:g}", sup == 0.0, sup, "u0 = 0 stays 0")
    if config.picard_iterations and amp > 0:
        times = trajs[config.epsilons[0]].times
        for eps in sorted({config.epsilons[0], config.epsilons[-1]}, reverse=True):
            state = evolve.picard_iterate(grid, u0, times, LlgParams(config.a, eps), config.picard_iterations, sr)
            report.fits[f"picard_diffs_eps{eps:g}"] = state.diffs
            report.fits[f"picard_ratios_eps{eps:g}"] = state.ratios
            worst = max(state.ratios[:4]) if state.ratios else math.nan
            report.check(f"picard_contraction_eps{eps:g}", bool(state.ratios) and worst <= 0.5, worst,
                         "d_{m+1}/d_m <= 0.5 for m = 1..4")
    return report


# -- self-test ----------------------------------------------------------------------


def run_lp_selftest(config: ExperimentConfig) -> ExperimentReport:
    from .selftest import CHECKS

    report = ExperimentReport.empty("selftest", config.to_dict())
    report.metadata["environment"]["checks"] = len(CHECKS)
    for i, check in enumerate(CHECKS):
        t0 = time.perf_counter()
        try:
            passed, value, threshold = check()
            detail = ""
        except Exception as exc:  # a crashing check is a failed check
            passed, value, threshold, detail = False, None, "no exception", repr(exc)
        name = check.__name__.removeprefix("check_")
        c = report.check(name, passed, value, threshold, detail)
        report.curves["selftest"].add(i, 1.0 if c.passed else 0.0)
        report.records.append({"check": name, "passed": c.passed, "value": c.value,
                               "seconds": time.perf_counter() - t0})
    return report


RUNNERS = {
    "simulate": run_simulation,
    "sweep": run_inviscid_sweep,
    "truncate": run_truncation_study,
    "equivalence": run_equivalence_check,
    "selftest": run_lp_selftest,
}
