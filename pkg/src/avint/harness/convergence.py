"""Convergence study: position error after one orbital period vs timestep."""

import json
import os
import time
import numpy as np

from ..conservative import step_conservative
from ..errors import ParameterError, StepError
from ..problems import kepler
from ..quadrature import IntegralOperator
from .config import ExperimentConfig
from .runner import FLOAT_FMT, RunSummary

PERIOD = kepler.ORBIT_PERIOD


def _one_period_error(s, k, config):
    """Error in the body position after one period at dt = 2 pi 2^-k."""
    dt = PERIOD * 2.0**-k
    n = 2**k
    op = IntegralOperator.stage(s, config.quad_ref_stages)
    sys = kepler.system()
    x = kepler.STANDARD_IC
    for _ in range(n):
        x, _ = step_conservative(sys, x, dt, s, op, newton_tol=config.newton_tol,
                                 newton_max_iter=config.newton_max_iter)
    return float(np.linalg.norm(x[:2] - kepler.STANDARD_IC[:2]))


def fit_slope(dts, errors, floor):
    """Least-squares slope of log error vs log dt above the round-off floor."""
    dts = np.asarray(dts, dtype=float)
    errors = np.asarray(errors, dtype=float)
    keep = np.isfinite(errors) & (errors > floor)
    if keep.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(dts[keep]), np.log(errors[keep]), 1)[0])


def convergence_study(config: ExperimentConfig) -> RunSummary:
    """Run the timestep sweep for each stage count and fit observed orders."""
    if config.problem != "kepler":
        raise ParameterError("the convergence study is defined for the kepler problem")
    if len(config.conv_stages) != len(config.conv_k_ranges):
        raise ParameterError("conv_stages and conv_k_ranges must align")
    started = time.perf_counter()
    rows = []
    per_stage = {}
    for s, (k_lo, k_hi) in zip(config.conv_stages, config.conv_k_ranges):
        dts, errs = [], []
        for k in range(k_lo, k_hi + 1):
            dt = PERIOD * 2.0**-k
            try:
                err = _one_period_error(s, k, config)
            except StepError:
                err = float("nan")  # missing cell, not fatal
            rows.append((dt, s, err))
            dts.append(dt)
            errs.append(err)
        per_stage[s] = (dts, errs)

    out = config.resolved_output()
    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    with open(out, "w", newline="") as fh:
        fh.write("dt,s,error\n")
        for dt, s, err in rows:
            fh.write(f"{FLOAT_FMT.format(dt)},{s},{FLOAT_FMT.format(err)}\n")

    slopes = {f"slope_s{s}": fit_slope(dts, errs, config.conv_fit_floor)
              for s, (dts, errs) in per_stage.items()}
    anchors = {f"error_s{s}_k{k_lo}": errs[0]
               for (s, (dts, errs)), (k_lo, _) in zip(per_stage.items(), config.conv_k_ranges)}
    summary = RunSummary(
        problem="kepler", scheme="ours", stages=0, dt=0.0, t_final=PERIOD,
        rows=len(rows), output=out, extras={**slopes, **anchors, "fit_floor": config.conv_fit_floor},
        wall_time_s=time.perf_counter() - started,
    )
    summary.write(out + ".summary.json")
    return summary
