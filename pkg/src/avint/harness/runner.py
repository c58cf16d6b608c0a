"""Experiment runner: one config in, one deterministic CSV plus summary out."""

import json
import os
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from ..bbm import (
    ConservativeBbmStepper,
    GaussBbmStepper,
    HermiteFeFunction,
    PeriodicHermiteSpace,
    bbm_invariants,
    soliton_ic,
    soliton_speed,
    write_snapshot_csv,
)
from ..bbm.dynamics import peak_position
from ..conservative import (
    run_trajectory,
    step_conservative,
    step_gauss,
    step_implicit_midpoint,
    step_mean_value_dg,
)
from ..errors import ParameterError
from ..generic import step_generic
from ..problems import engine, kepler, kovalevskaya
from ..quadrature import IntegralOperator
from .config import ExperimentConfig

FLOAT_FMT = "{:.17g}"


@dataclass
class RunSummary:
    problem: str
    scheme: str
    stages: int
    dt: float
    t_final: float
    rows: int
    output: str
    max_drifts: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)
    newton: dict = field(default_factory=dict)
    wall_time_s: float = 0.0

    def write(self, path):
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _format_row(values):
    return ",".join(FLOAT_FMT.format(v) for v in values)


def _write_csv(path, header, int_cols, rows):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = [str(int(v)) if i in int_cols else FLOAT_FMT.format(v)
                     for i, v in enumerate(row)]
            fh.write(",".join(cells) + "\n")


def _operator(config: ExperimentConfig) -> IntegralOperator:
    if config.quad == "exact":
        return IntegralOperator.exact(config.quad_ref_stages)
    return IntegralOperator.stage(config.stages, config.quad_ref_stages)


def _ode_stepper(config: ExperimentConfig, counters):
    kw = dict(newton_tol=config.newton_tol, newton_max_iter=config.newton_max_iter,
              counters=counters)
    op = _operator(config)
    if config.problem == "kepler":
        if config.scheme == "ours":
            sys = kepler.system()
            return lambda x, dt: step_conservative(sys, x, dt, config.stages, op, **kw)[0]
        if config.scheme == "im":
            return lambda x, dt: step_implicit_midpoint(kepler.rhs, x, dt, **kw)
        if config.scheme == "gauss":
            return lambda x, dt: step_gauss(kepler.rhs, x, dt, config.stages, **kw)
        if config.scheme == "mvdg":
            psys = kepler.poisson_system()
            ref = op.reference_rule
            return lambda x, dt: step_mean_value_dg(psys, x, dt, reference_rule=ref, **kw)
    if config.problem == "kovalevskaya":
        if config.scheme == "ours":
            sys = kovalevskaya.system()
            return lambda x, dt: step_conservative(sys, x, dt, config.stages, op, **kw)[0]
        if config.scheme == "im":
            return lambda x, dt: step_implicit_midpoint(kovalevskaya.rhs, x, dt, **kw)
        if config.scheme == "gauss":
            return lambda x, dt: step_gauss(kovalevskaya.rhs, x, dt, config.stages, **kw)
    if config.problem == "engine":
        params = _engine_params(config)
        if config.scheme == "ours":
            sys = engine.system(params, validate=False)
            return lambda x, dt: step_generic(sys, x, dt, config.stages, op, **kw)
        if config.scheme in ("gauss", "im"):
            s = 1 if config.scheme == "im" else config.stages
            f = lambda x: engine.engine_rhs(params, x)
            return lambda x, dt: step_gauss(f, x, dt, s, **kw)
    raise ParameterError(f"scheme {config.scheme!r} is not available for problem {config.problem!r}")


def _engine_params(config: ExperimentConfig) -> engine.EngineParams:
    return engine.EngineParams(
        cylinders=config.engine_cylinders,
        piston_volume=config.engine_piston_volume,
        env_temperature=config.engine_env_temperature,
        heat_capacity=config.engine_heat_capacity,
    )


def _problem_setup(config: ExperimentConfig):
    if config.problem == "kepler":
        observers = [
            ("H", lambda x: kepler.kepler_invariants(x)[0]),
            ("L", lambda x: kepler.kepler_invariants(x)[1]),
            ("A1", lambda x: kepler.kepler_invariants(x)[2][0]),
            ("A2", lambda x: kepler.kepler_invariants(x)[2][1]),
        ]
        return kepler.STANDARD_IC, ["x1", "x2", "v1", "v2"], observers
    if config.problem == "kovalevskaya":
        observers = [
            ("H", lambda x: kovalevskaya.kovalevskaya_invariants(x)[0]),
            ("nsq", lambda x: kovalevskaya.kovalevskaya_invariants(x)[1]),
            ("L", lambda x: kovalevskaya.kovalevskaya_invariants(x)[2]),
            ("K", lambda x: kovalevskaya.kovalevskaya_invariants(x)[3]),
        ]
        return kovalevskaya.STANDARD_IC, ["n1", "n2", "n3", "l1", "l2", "l3"], observers
    if config.problem == "engine":
        params = _engine_params(config)
        x0 = engine.initial_state(params, omega0=config.engine_omega0).array
        names = (["theta", "omega"]
                 + [f"S_{c}" for c in range(1, params.cylinders + 1)] + ["S_0"])
        observers = [
            ("E", lambda x: engine.engine_quantities(params, x)["E"]),
            ("S", lambda x: engine.engine_quantities(params, x)["S"]),
        ]
        return x0, names, observers
    raise ParameterError(f"unknown problem {config.problem!r}")


def run(config: ExperimentConfig) -> RunSummary:
    """Execute one experiment and write its CSV (and summary JSON) deterministically."""
    if config.problem == "bbm":
        return _run_bbm(config)
    started = time.perf_counter()
    counters = {}
    stepper = _ode_stepper(config, counters)
    x0, state_names, observers = _problem_setup(config)
    result = run_trajectory(stepper, x0, config.dt, config.t_final, observers)

    out = config.resolved_output()
    header = ["step", "t"] + state_names + [name for name, _ in observers]
    obs_matrix = np.stack([result.observed[name] for name, _ in observers], axis=1)
    rows = np.concatenate([
        np.arange(result.times.size)[:, None], result.times[:, None],
        result.states, obs_matrix,
    ], axis=1)
    _write_csv(out, header, {0}, rows)

    drifts = {name: float(np.max(np.abs(result.observed[name] - result.observed[name][0])))
              for name, _ in observers}
    summary = RunSummary(
        problem=config.problem, scheme=config.scheme, stages=config.stages,
        dt=config.dt, t_final=config.t_final, rows=result.times.size,
        output=out, max_drifts=drifts, newton=dict(counters),
        wall_time_s=time.perf_counter() - started,
    )
    summary.write(out + ".summary.json")
    return summary


def _run_bbm(config: ExperimentConfig) -> RunSummary:
    """Soliton run: per-step invariants to CSV, full fields to snapshot files."""
    started = time.perf_counter()
    a, b = config.bbm_domain
    space = PeriodicHermiteSpace(a, b, config.bbm_cells)
    u = soliton_ic(space)
    if config.scheme == "ours":
        stepper = ConservativeBbmStepper(space, config.stages, config.dt,
                                         config.newton_tol, config.newton_max_iter)
    elif config.scheme in ("gauss", "im"):
        s = 1 if config.scheme == "im" else config.stages
        stepper = GaussBbmStepper(space, s, config.dt,
                                  config.newton_tol, config.newton_max_iter)
    else:
        raise ParameterError(f"scheme {config.scheme!r} is not available for bbm")

    n_steps = int(round(config.t_final / config.dt))
    times = np.arange(n_steps + 1) * config.dt
    inv0 = bbm_invariants(u)
    inv_rows = np.empty((n_steps + 1, 3))
    inv_rows[0] = (inv0.H, inv0.I1, inv0.I2)

    snap_times = [times[0]]
    snap_coeffs = [u.coefficients.copy()]
    requested = sorted(set(config.bbm_snapshot_times))
    request_steps = {int(round(t / config.dt)) for t in requested}
    out = config.resolved_output()
    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    if 0 in request_steps:
        write_snapshot_csv(u, _snapshot_path(out, 0.0), config.bbm_points_per_cell)

    coeffs = u.coefficients
    for k in range(1, n_steps + 1):
        stepped = stepper.step(coeffs)
        coeffs = stepped[0] if isinstance(stepped, tuple) else stepped
        fn = HermiteFeFunction(space, coeffs)
        inv = bbm_invariants(fn)
        inv_rows[k] = (inv.H, inv.I1, inv.I2)
        if k % config.bbm_snapshot_every == 0 or k == n_steps:
            snap_times.append(times[k])
            snap_coeffs.append(coeffs.copy())
        if k in request_steps:
            write_snapshot_csv(fn, _snapshot_path(out, times[k]), config.bbm_points_per_cell)

    header = ["step", "t", "H", "I1", "I2"]
    rows = np.concatenate([np.arange(n_steps + 1)[:, None], times[:, None], inv_rows], axis=1)
    _write_csv(out, header, {0}, rows)

    snap_times = np.asarray(snap_times)
    extras = {}
    t_end = times[-1]
    try:
        extras["speed_full"] = soliton_speed(snap_times, snap_coeffs, space=space)
        extras["speed_late"] = soliton_speed(
            snap_times, snap_coeffs, window=(0.9 * t_end, t_end), space=space)
    except Exception as exc:  # diagnostics only; the CSV is the deliverable
        extras["speed_error"] = str(exc)
    peak_pos, peak_amp = peak_position(space, coeffs)
    extras["final_peak_position"] = peak_pos
    extras["final_peak_amplitude"] = peak_amp
    extras["final_offpeak_max"] = float(offpeak_max(space, coeffs, peak_pos, halfwidth=10.0))
    extras["i2_band_width"] = float(inv_rows[:, 2].max() - inv_rows[:, 2].min())

    drifts = {
        "H": float(np.max(np.abs(inv_rows[:, 0] - inv_rows[0, 0]))),
        "I1": float(np.max(np.abs(inv_rows[:, 1] - inv_rows[0, 1]))),
        "I2": float(np.max(np.abs(inv_rows[:, 2] - inv_rows[0, 2]))),
    }
    summary = RunSummary(
        problem="bbm", scheme=config.scheme, stages=config.stages,
        dt=config.dt, t_final=config.t_final, rows=n_steps + 1, output=out,
        max_drifts=drifts, extras=extras, newton=dict(stepper._counters),
        wall_time_s=time.perf_counter() - started,
    )
    summary.write(out + ".summary.json")
    return summary


def offpeak_max(space, coeffs, peak_pos, halfwidth=10.0, points_per_cell=20):
    """Largest |u| outside a periodic window around the tracked peak."""
    x = space.grid(points_per_cell)
    vals = space.evaluate_on_grid(coeffs, points_per_cell)
    length = space.b - space.a
    dist = np.abs((x - peak_pos + 0.5 * length) % length - 0.5 * length)
    outside = dist > halfwidth
    return np.max(np.abs(vals[outside])) if outside.any() else 0.0


def _snapshot_path(output, t):
    root, ext = os.path.splitext(output)
    return f"{root}_snapshot_t{t:g}{ext or '.csv'}"
