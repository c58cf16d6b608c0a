"""Figure builders over the harness CSV schemas.

Each figure id matches one experiment family; rendering is read-only over the
input CSVs and returns a small metadata dict (annotated values, row counts)
so callers can cross-check against harness summaries.
"""

import json
import math
import os
import re
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

FIGURE_IDS = ("fig1", "fig2", "fig3", "fig5", "fig6", "fig7", "fig9", "fig10", "fig11")

SOLITON_SPEED = (1.0 + math.sqrt(5.0)) / 2.0
SOLITON_AMPLITUDE = (3.0 * math.sqrt(5.0) - 3.0) / 2.0
SOLITON_DECAY = (math.sqrt(5.0) - 1.0) / 4.0
SLOPE_FIT_FLOOR = 1e-11


class RenderError(RuntimeError):
    """Missing or schema-mismatched inputs."""


@dataclass
class FigureSpec:
    figure: str
    inputs: list
    output: str
    summary: str = None
    options: dict = field(default_factory=dict)


def _read_csv(path):
    if not os.path.exists(path):
        raise RenderError(f"input CSV not found: {path}")
    data = np.genfromtxt(path, delimiter=",", names=True)
    if data.shape == ():  # single data row
        data = data.reshape(1)
    return data


def _require(data, columns, path):
    names = data.dtype.names or ()
    missing = [c for c in columns if c not in names]
    if missing:
        raise RenderError(f"{path} lacks columns {missing}; wrong CSV for this figure?")


def _label_for(path):
    sidecar = path + ".summary.json"
    if os.path.exists(sidecar):
        with open(sidecar) as fh:
            meta = json.load(fh)
        scheme = meta.get("scheme", "?")
        stages = meta.get("stages", "?")
        return f"{scheme} (s={stages})"
    return os.path.splitext(os.path.basename(path))[0]


def _save(fig, output):
    os.makedirs(os.path.dirname(os.path.abspath(output)), exist_ok=True)
    fig.savefig(output, dpi=150, bbox_inches="tight")
    plt.close(fig)


def _exact_kepler_ellipse():
    # standard orbit: semi-major axis 1, eccentricity 0.6, perihelion on +x
    theta = np.linspace(0.0, 2.0 * np.pi, 400)
    r = (1.0 - 0.6**2) / (1.0 + 0.6 * np.cos(theta))
    return r * np.cos(theta), r * np.sin(theta)


def _render_kepler_trajectories(spec):
    fig, axes = plt.subplots(1, max(len(spec.inputs), 1), figsize=(4 * max(len(spec.inputs), 1), 4),
                             squeeze=False)
    ex, ey = _exact_kepler_ellipse()
    for ax, path in zip(axes[0], spec.inputs):
        data = _read_csv(path)
        if data.size:
            _require(data, ("x1", "x2"), path)
            ax.plot(data["x1"], data["x2"], lw=0.5)
        ax.plot(ex, ey, "k--", lw=1.0, label="exact")
        ax.set_aspect("equal")
        ax.set_title(_label_for(path))
        ax.set_xlabel("x1")
        ax.set_ylabel("x2")
    _save(fig, spec.output)
    return {"panels": len(spec.inputs)}


def _render_kepler_invariants(spec):
    fig, axes = plt.subplots(1, 3, figsize=(13, 3.5))
    titles = ("energy drift", "angular momentum drift", "orbit angle drift")
    for path in spec.inputs:
        data = _read_csv(path)
        label = _label_for(path)
        if not data.size:
            continue
        _require(data, ("t", "H", "L", "A1", "A2"), path)
        axes[0].plot(data["t"], data["H"] - data["H"][0], lw=0.7, label=label)
        axes[1].plot(data["t"], data["L"] - data["L"][0], lw=0.7, label=label)
        angle = np.arctan2(data["A2"], data["A1"])
        axes[2].plot(data["t"], angle - angle[0], lw=0.7, label=label)
    for ax, title in zip(axes, titles):
        ax.set_xlabel("t")
        ax.set_title(title)
        ax.legend(fontsize=7)
    _save(fig, spec.output)
    return {"panels": 3}


def fit_slopes(data):
    """Per-stage least-squares slope of log error vs log dt above the noise floor."""
    slopes = {}
    for s in np.unique(data["s"]).astype(int):
        rows = data[data["s"] == s]
        err = rows["error"]
        keep = np.isfinite(err) & (err > SLOPE_FIT_FLOOR)
        if keep.sum() >= 2:
            slopes[int(s)] = float(np.polyfit(np.log(rows["dt"][keep]), np.log(err[keep]), 1)[0])
    return slopes


def _render_convergence(spec):
    path = spec.inputs[0]
    data = _read_csv(path)
    fig, ax = plt.subplots(figsize=(7, 5))
    slopes = {}
    if data.size:
        _require(data, ("dt", "s", "error"), path)
        summary_path = spec.summary or path + ".summary.json"
        if os.path.exists(summary_path):
            with open(summary_path) as fh:
                extras = json.load(fh).get("extras", {})
            slopes = {int(k.split("_s")[1]): v for k, v in extras.items()
                      if k.startswith("slope_s") and np.isfinite(v)}
        else:
            slopes = fit_slopes(data)
        for s in np.unique(data["s"]).astype(int):
            rows = data[data["s"] == s]
            label = f"s = {s}"
            if s in slopes:
                label += f" (slope {slopes[s]:.2f})"
            ax.loglog(rows["dt"], rows["error"], "o-", label=label)
            # slope triangle anchored at the middle of each curve
            good = rows[np.isfinite(rows["error"]) & (rows["error"] > SLOPE_FIT_FLOOR)]
            if len(good) >= 2 and s in slopes:
                mid = len(good) // 2
                dt0, e0 = good["dt"][mid], good["error"][mid]
                dt1 = dt0 / 2.0
                e1 = e0 * (dt1 / dt0) ** round(slopes[s])
                ax.loglog([dt0, dt1, dt1, dt0], [e0, e0, e1, e0], "k-", lw=0.6)
                ax.annotate(f"{round(slopes[s])}", (dt1 * 0.95, math.sqrt(e0 * e1)),
                            fontsize=7, ha="right")
    ax.set_xlabel("timestep")
    ax.set_ylabel("position error after one period")
    ax.legend()
    _save(fig, spec.output)
    return {"slopes": slopes}


def _render_kovalevskaya(spec):
    fig, ax = plt.subplots(figsize=(7, 3.5))
    for path in spec.inputs:
        data = _read_csv(path)
        if not data.size:
            continue
        _require(data, ("t", "K"), path)
        ax.plot(data["t"], data["K"] - data["K"][0], lw=0.7, label=_label_for(path))
    ax.set_xlabel("t")
    ax.set_ylabel("K - K(0)")
    ax.legend(fontsize=7)
    _save(fig, spec.output)
    return {"curves": len(spec.inputs)}


def _render_engine(spec):
    fig, axes = plt.subplots(1, 3, figsize=(13, 3.5))
    for path in spec.inputs:
        data = _read_csv(path)
        label = _label_for(path)
        if not data.size:
            continue
        _require(data, ("t", "theta", "E", "S"), path)
        axes[0].plot(data["t"], data["theta"], lw=0.8, label=label)
        axes[1].plot(data["t"], data["E"] - data["E"][0], lw=0.8, label=label)
        axes[2].plot(data["t"], data["S"], lw=0.8, label=label)
    for ax, title in zip(axes, ("angle", "energy error", "entropy")):
        ax.set_xlabel("t")
        ax.set_title(title)
        ax.legend(fontsize=7)
    _save(fig, spec.output)
    return {"panels": 3}


def _render_bbm_energy(spec):
    fig, ax = plt.subplots(figsize=(7, 3.5))
    for path in spec.inputs:
        data = _read_csv(path)
        if not data.size:
            continue
        _require(data, ("t", "H"), path)
        ax.plot(data["t"], data["H"], lw=0.8, label=_label_for(path))
    ax.set_xlabel("t")
    ax.set_ylabel("energy")
    ax.legend(fontsize=7)
    _save(fig, spec.output)
    return {"curves": len(spec.inputs)}


def _snapshot_time(path):
    match = re.search(r"_t([0-9.eE+-]+)\.csv$", path)
    if not match:
        raise RenderError(f"cannot infer the snapshot time from {path!r} (expect *_t<time>.csv)")
    return float(match.group(1))


def _exact_soliton(x, t, length=100.0):
    shift = (x - SOLITON_SPEED * t + 0.5 * length) % length - 0.5 * length
    return SOLITON_AMPLITUDE / np.cosh(SOLITON_DECAY * shift) ** 2


def _render_bbm_snapshots(spec):
    times = sorted({_snapshot_time(p) for p in spec.inputs})
    fig, axes = plt.subplots(len(times), 1, figsize=(9, 2.6 * len(times)), squeeze=False)
    index = {t: i for i, t in enumerate(times)}
    drew_exact = set()
    for path in spec.inputs:
        t = _snapshot_time(path)
        ax = axes[index[t], 0]
        data = _read_csv(path)
        if data.size:
            _require(data, ("x", "u"), path)
            ax.plot(data["x"], data["u"], lw=0.8, label=_label_for(path))
            if t not in drew_exact:
                x = np.asarray(data["x"], dtype=float)
                ax.plot(x, _exact_soliton(x, t), "k--", lw=0.8, label="exact")
                drew_exact.add(t)
        ax.set_title(f"t = {t:g}")
        ax.set_xlabel("x")
        ax.set_ylabel("u")
        ax.legend(fontsize=7)
    _save(fig, spec.output)
    return {"times": times}


def _render_bbm_h1(spec):
    fig, ax = plt.subplots(figsize=(7, 3.5))
    for path in spec.inputs:
        data = _read_csv(path)
        if not data.size:
            continue
        _require(data, ("t", "I2"), path)
        ax.plot(data["t"], data["I2"], lw=0.8, label=_label_for(path))
    ax.set_xlabel("t")
    ax.set_ylabel("squared H1 norm")
    ax.legend(fontsize=7)
    _save(fig, spec.output)
    return {"curves": len(spec.inputs)}


_RENDERERS = {
    "fig1": _render_kepler_trajectories,
    "fig2": _render_kepler_invariants,
    "fig3": _render_convergence,
    "fig5": _render_kovalevskaya,
    "fig6": _render_engine,
    "fig7": _render_engine,
    "fig9": _render_bbm_energy,
    "fig10": _render_bbm_snapshots,
    "fig11": _render_bbm_h1,
}


def render(spec: FigureSpec) -> dict:
    """Render one figure; returns metadata (e.g. annotated slopes) for checking."""
    if spec.figure not in _RENDERERS:
        raise RenderError(f"unknown figure id {spec.figure!r}; choose from {FIGURE_IDS}")
    if not spec.inputs:
        raise RenderError("at least one input CSV is required")
    return _RENDERERS[spec.figure](spec)
