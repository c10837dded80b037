"""Experiment drivers: convergence studies, observable trajectories, and the
self-verification report.

Grid points may run in a process pool; workers rebuild the model from its
registry name and parameters (model objects hold closures and do not
pickle), and the output order is fixed by sorting, not completion time.
"""

from __future__ import annotations

import inspect
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from ..dilation import (
    dilate_by_order,
    dilate_generic,
    dilate_order2_compact,
    first_column_residual,
)
from ..kraus import (
    apply_kraus,
    kraus_series,
    kraus_series_compact_order2,
    trace_residual,
)
from ..linalg import DensityMatrix, trace_norm
from ..models import (
    SZ,
    LindbladModel,
    damped_qubit,
    peak_be_norm,
    periodic_qubit,
    site_operator,
    tfim_damping,
    tfim_driven,
)
from ..reference import reference_solution, rk4_trajectory
from ..stepper import evolve
from ..unraveler import evolve_batch, mc_density
from .config import ExperimentConfig, InitialStateSpec
from .io import (
    load_cached_reference,
    reference_cache_key,
    store_cached_reference,
    write_convergence_csv,
    write_json,
    write_observable_csv,
)

MODEL_BUILDERS = {
    "tfim_damping": tfim_damping,
    "tfim_driven": tfim_driven,
    "periodic_qubit": periodic_qubit,
    "damped_qubit": damped_qubit,
}

SLOPE_BAND = (-0.25, 0.6)  # acceptance window around each integer order
RESIDUAL_RATIO_SLACK = 1.5


def build_model(name: str, params: dict) -> LindbladModel:
    if name not in MODEL_BUILDERS:
        raise ValueError(f"unknown model {name!r}; known: {sorted(MODEL_BUILDERS)}")
    builder = MODEL_BUILDERS[name]
    allowed = set(inspect.signature(builder).parameters)
    unknown = set(params) - allowed
    if unknown:
        raise ValueError(f"unknown parameter(s) for {name}: {sorted(unknown)}")
    return builder(**params)


def initial_density(spec: InitialStateSpec, model: LindbladModel) -> DensityMatrix:
    if spec.kind == "ground_state":
        _, vecs = np.linalg.eigh(model.hamiltonian(0.0))
        return DensityMatrix.pure(vecs[:, 0])
    if spec.kind == "random":
        return DensityMatrix.random(model.dim, spec.seed)
    if spec.index >= model.dim:
        raise ValueError(f"basis index {spec.index} out of range for dim {model.dim}")
    return DensityMatrix.basis(model.dim, spec.index)


def observable_function(name: str, model: LindbladModel, rho0: DensityMatrix):
    if name == "overlap_with_initial":
        m0 = rho0.matrix

        def value(rho: np.ndarray) -> float:
            return float(np.trace(m0 @ rho).real)

        return value
    sites = round(math.log2(model.dim))
    if 2**sites != model.dim:
        raise ValueError("pauli_z_expectation needs a qubit-register dimension")
    z1 = site_operator(SZ, 1, sites)

    def value(rho: np.ndarray) -> float:
        return float(np.trace(z1 @ rho).real)

    return value


def fit_slope(points: list) -> float:
    """Least-squares slope of log(error) against log(dt)."""
    if len(points) < 3:
        raise ValueError("need at least 3 points to fit a slope")
    dts = np.array([p[0] for p in points], dtype=float)
    errs = np.array([p[1] for p in points], dtype=float)
    if np.any(dts <= 0) or np.any(errs <= 0):
        raise ValueError("slope fit requires positive dt and error values")
    return float(np.polyfit(np.log(dts), np.log(errs), 1)[0])


def _reference_with_cache(cfg: ExperimentConfig, model: LindbladModel,
                          rho0: DensityMatrix) -> np.ndarray:
    key = reference_cache_key(cfg)
    cached = load_cached_reference(cfg.output_dir, key)
    if cached is not None:
        return cached
    ref = reference_solution(model, rho0, 0.0, cfg.T).matrix
    store_cached_reference(cfg.output_dir, key, ref)
    return ref


def _convergence_task(model_name: str, params: dict, order: int, rho0_matrix: np.ndarray,
                      t_final: float, num_steps: int, max_step_factor: float):
    """One (order, dt) grid point; top-level so process pools can pickle it."""
    model = build_model(model_name, params)
    rho0 = DensityMatrix(rho0_matrix)
    started = time.perf_counter()
    states = evolve(model, order, rho0, t_final, num_steps, max_step_factor)
    wall = time.perf_counter() - started
    return states[-1].matrix, wall


def run_convergence(cfg: ExperimentConfig) -> dict:
    """Final-time trace-norm error against the reference for every
    (order, dt) grid point; writes convergence.csv and slopes.json."""
    os.makedirs(cfg.output_dir, exist_ok=True)
    model = build_model(cfg.model.name, cfg.model.params)
    rho0 = initial_density(cfg.initial_state, model)
    ref = _reference_with_cache(cfg, model, rho0)

    grid = [(k, dt) for k in sorted(cfg.orders) for dt in cfg.dt_list]
    outcomes = {}
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = {
                point: pool.submit(
                    _convergence_task, cfg.model.name, cfg.model.params, point[0],
                    rho0.matrix, cfg.T, round(cfg.T / point[1]), cfg.max_step_factor,
                )
                for point in grid
            }
            for point, fut in futures.items():
                outcomes[point] = fut.result()
    else:
        for k, dt in grid:
            outcomes[(k, dt)] = _convergence_task(
                cfg.model.name, cfg.model.params, k, rho0.matrix, cfg.T,
                round(cfg.T / dt), cfg.max_step_factor,
            )

    rows = []
    for k, dt in grid:
        final, wall = outcomes[(k, dt)]
        rows.append((k, float(dt), float(trace_norm(final - ref)), float(wall)))

    slopes = {}
    if len(cfg.dt_list) >= 3:
        for k in sorted(cfg.orders):
            slopes[str(k)] = fit_slope([(dt, err) for kk, dt, err, _ in rows if kk == k])

    csv_path = os.path.join(cfg.output_dir, "convergence.csv")
    write_convergence_csv(csv_path, rows)
    slopes_path = os.path.join(cfg.output_dir, "slopes.json")
    write_json(slopes_path, slopes)
    return {"rows": rows, "slopes": slopes, "csv_path": csv_path, "slopes_path": slopes_path}


def _reference_curve_steps(model: LindbladModel, t_final: float, coarse_steps: int) -> int:
    """RK4 step count for the reference curve: fine enough for plotting
    accuracy and a multiple of the coarse grid so samples align."""
    base = max(512, 32 * math.ceil(t_final * peak_be_norm(model, 0.0, t_final)))
    return coarse_steps * math.ceil(base / coarse_steps)


def run_observable(cfg: ExperimentConfig) -> dict:
    """Observable time series at the coarsest dt for each order, plus the
    RK4 reference curve on the same time grid (order column 0)."""
    os.makedirs(cfg.output_dir, exist_ok=True)
    model = build_model(cfg.model.name, cfg.model.params)
    rho0 = initial_density(cfg.initial_state, model)
    value = observable_function(cfg.observable, model, rho0)

    dt = cfg.dt_list[0]
    coarse = round(cfg.T / dt)
    n_ref = _reference_curve_steps(model, cfg.T, coarse)
    records = rk4_trajectory(model, rho0, 0.0, cfg.T, n_ref, n_ref // coarse)
    rows = [(0, n, n * dt, value(mat)) for n, (_, mat) in enumerate(records)]
    for k in sorted(cfg.orders):
        states = evolve(model, k, rho0, cfg.T, coarse, cfg.max_step_factor)
        rows.extend((k, n, n * dt, value(s.matrix)) for n, s in enumerate(states))

    csv_path = os.path.join(cfg.output_dir, "observable.csv")
    write_observable_csv(csv_path, rows)
    return {"rows": rows, "csv_path": csv_path}


def _check(name: str, passed: bool, measured, tolerance) -> dict:
    return {"name": name, "passed": bool(passed), "measured": measured, "tolerance": tolerance}


def _structural_models():
    return [
        ("damped_qubit", damped_qubit()),
        ("tfim_damping_m2", tfim_damping(m=2)),
        ("tfim_driven_m2", tfim_driven(m=2)),
        ("periodic_qubit", periodic_qubit()),
    ]


def _hermiticity_check() -> dict:
    worst = 0.0
    for _, model in _structural_models():
        for k in (1, 2, 3):
            dh = dilate_by_order(model, k, 0.3, 0.01)
            defect = np.linalg.norm(dh.assembled - dh.assembled.conj().T)
            worst = max(worst, float(defect / max(1.0, np.linalg.norm(dh.assembled))))
    return _check("assembled_hermiticity", worst <= 1e-12, worst, 1e-12)


def _generic_vs_explicit_check() -> dict:
    worst = 0.0
    for name, model in _structural_models():
        static = not model.time_dependent
        for k in (1, 2, 3):
            explicit = dilate_by_order(model, k, 0.3, 0.01)
            generic = dilate_generic(kraus_series(model, 0.3, k), 0.01)
            scale = max(np.linalg.norm(b) for b in explicit.blocks)
            for be, bg in zip(explicit.blocks, generic.blocks):
                worst = max(worst, float(np.linalg.norm(be - bg) / scale))
        if static:
            explicit = dilate_order2_compact(model, 0.01)
            generic = dilate_generic(kraus_series_compact_order2(model), 0.01)
            scale = max(np.linalg.norm(b) for b in explicit.blocks)
            for be, bg in zip(explicit.blocks, generic.blocks):
                worst = max(worst, float(np.linalg.norm(be - bg) / scale))
    return _check("generic_matches_explicit", worst <= 1e-10, worst, 1e-10)


def _ratio_band_check(name: str, measure) -> dict:
    """measure(model, k, dt) -> scalar residual; the dt -> dt/2 ratio must
    sit within RESIDUAL_RATIO_SLACK of 2**(k+1)."""
    worst = 0.0
    for model, t in ((damped_qubit(), 0.0), (periodic_qubit(), 0.3)):
        for k in (1, 2, 3):
            coarse = measure(model, t, k, 1e-2)
            fine = measure(model, t, k, 5e-3)
            ratio = coarse / fine
            ideal = 2.0 ** (k + 1)
            worst = max(worst, ratio / ideal, ideal / ratio)
    return _check(name, worst <= RESIDUAL_RATIO_SLACK, worst, RESIDUAL_RATIO_SLACK)


def _first_column_ratio_check() -> dict:
    def measure(model, t, k, dt):
        kset = kraus_series(model, t, k)
        return first_column_residual(dilate_generic(kset, dt), kset, dt)

    return _ratio_band_check("first_column_residual_ratio", measure)


def _trace_residual_ratio_check() -> dict:
    def measure(model, t, k, dt):
        return trace_residual(kraus_series(model, t, k), dt)

    return _ratio_band_check("kraus_trace_residual_ratio", measure)


def _trace_positivity_checks() -> list:
    drift = 0.0
    floor = 0.0
    runs = [(damped_qubit(), k, 100) for k in (1, 2, 3)]
    runs.append((periodic_qubit(), 2, 200))
    for model, k, steps in runs:
        states = evolve(model, k, DensityMatrix.basis(model.dim, 1), 1.0, steps,
                        max_step_factor=4.0)
        traces = np.array([np.trace(s.matrix).real for s in states])
        drift = max(drift, float(np.abs(np.diff(traces)).max()))
        floor = min(floor, float(min(np.linalg.eigvalsh(s.matrix).min() for s in states)))
    return [
        _check("per_step_trace_drift", drift <= 1e-12, drift, 1e-12),
        _check("positivity_floor", floor >= -1e-10, floor, -1e-10),
    ]


def _mc_checks(base_seed: int) -> list:
    model = damped_qubit()
    psi0 = np.array([1.0, 1.0], dtype=np.complex128) / math.sqrt(2.0)
    rho0 = DensityMatrix.pure(psi0)

    dt, t_final, m_em = 0.01, 1.0, 2000
    batch = evolve_batch(model, "em", psi0, t_final, round(t_final / dt), m_em, base_seed)
    mean, stderr = mc_density(batch)
    ref = reference_solution(model, rho0, 0.0, t_final).matrix
    dev_em = trace_norm(mean - ref)
    tol_em = max(3 * stderr, 5 * dt)

    m_w2 = 10_000
    batch = evolve_batch(model, "weak2", psi0, dt, 1, m_w2, base_seed + 1)
    mean, stderr = mc_density(batch)
    target = apply_kraus(kraus_series_compact_order2(model), dt, rho0)
    dev_w2 = trace_norm(mean - target)
    tol_w2 = 3 * stderr

    return [
        _check("mc_em_agreement", dev_em <= tol_em, dev_em, tol_em),
        _check("mc_weak2_single_step", dev_w2 <= tol_w2, dev_w2, tol_w2),
    ]


def verify(cfg: ExperimentConfig) -> dict:
    """Machine-readable pass/fail report over the structural, stochastic,
    and convergence properties; written to verify_report.json."""
    os.makedirs(cfg.output_dir, exist_ok=True)
    checks = [
        _hermiticity_check(),
        _generic_vs_explicit_check(),
        _first_column_ratio_check(),
        _trace_residual_ratio_check(),
    ]
    checks.extend(_trace_positivity_checks())
    checks.extend(_mc_checks(cfg.base_seed))

    conv = run_convergence(cfg)
    slopes = conv["slopes"]
    lo, hi = SLOPE_BAND
    in_band = all(k + lo <= slopes[str(k)] <= k + hi for k in cfg.orders) if slopes else False
    checks.append(_check(
        "convergence_slopes", in_band, slopes,
        {str(k): [k + lo, k + hi] for k in cfg.orders},
    ))

    report = {
        "checks": checks,
        "all_passed": all(c["passed"] for c in checks),
        "slopes": slopes,
    }
    write_json(os.path.join(cfg.output_dir, "verify_report.json"), report)
    return report
