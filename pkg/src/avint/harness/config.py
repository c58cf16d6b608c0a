"""Experiment configuration: flat key=value files with flag overrides."""

import os
from dataclasses import dataclass

from ..errors import ParameterError

PROBLEMS = ("kepler", "kovalevskaya", "engine", "bbm")
SCHEMES = ("ours", "im", "gauss", "mvdg")


def _parse_floats(text):
    return tuple(float(v) for v in str(text).split(",") if str(v).strip())


def _parse_ints(text):
    return tuple(int(v) for v in str(text).split(",") if str(v).strip())


def _parse_ranges(text):
    """Ranges like 5:12,5:9 -> ((5, 12), (5, 9))."""
    out = []
    for part in str(text).split(","):
        lo, hi = part.split(":")
        out.append((int(lo), int(hi)))
    return tuple(out)


@dataclass
class ExperimentConfig:
    problem: str = "kepler"
    scheme: str = "ours"
    stages: int = 1
    dt: float = 0.1
    t_final: float = 1.0
    quad: str = "gauss"            # gauss (s-stage rule) | exact
    quad_ref_stages: int = 12
    newton_tol: float = 1e-12
    newton_max_iter: int = 50
    output: str = "run.csv"
    # engine overrides
    engine_cylinders: int = 6
    engine_piston_volume: float = 1.0 + 2.0**-4
    engine_env_temperature: float = 1.0
    engine_heat_capacity: float = 2.5
    engine_omega0: float = 8.0
    # bbm overrides
    bbm_cells: int = 50
    bbm_domain: tuple = (-50.0, 50.0)
    bbm_snapshot_times: tuple = ()
    bbm_snapshot_every: int = 10
    bbm_points_per_cell: int = 8
    # convergence study
    conv_stages: tuple = (1, 2, 3, 4)
    conv_k_ranges: tuple = ((5, 12), (5, 12), (5, 9), (5, 7))
    conv_fit_floor: float = 1e-11

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ParameterError(f"unknown problem {self.problem!r}")
        if self.scheme not in SCHEMES:
            raise ParameterError(f"unknown scheme {self.scheme!r}")
        if self.quad not in ("gauss", "exact"):
            raise ParameterError(f"unknown quadrature kind {self.quad!r}")
        if self.dt <= 0:
            raise ParameterError("dt must be positive")
        if self.t_final < self.dt:
            raise ParameterError("t_final must be at least dt")
        if self.stages < 1:
            raise ParameterError("stages must be >= 1")
        if len(self.bbm_domain) != 2 or self.bbm_domain[1] <= self.bbm_domain[0]:
            raise ParameterError("bbm_domain must be an increasing pair a,b")

    def resolved_output(self):
        """Output path, honouring the AVINT_OUTPUT_DIR override."""
        base = os.environ.get("AVINT_OUTPUT_DIR")
        if base and not os.path.isabs(self.output):
            return os.path.join(base, self.output)
        return self.output


_CONVERTERS = {
    "problem": str,
    "scheme": str,
    "stages": int,
    "dt": float,
    "t_final": float,
    "quad": str,
    "quad_ref_stages": int,
    "newton_tol": float,
    "newton_max_iter": int,
    "output": str,
    "engine_cylinders": int,
    "engine_piston_volume": float,
    "engine_env_temperature": float,
    "engine_heat_capacity": float,
    "engine_omega0": float,
    "bbm_cells": int,
    "bbm_domain": _parse_floats,
    "bbm_snapshot_times": _parse_floats,
    "bbm_snapshot_every": int,
    "bbm_points_per_cell": int,
    "conv_stages": _parse_ints,
    "conv_k_ranges": _parse_ranges,
    "conv_fit_floor": float,
}


def parse_assignments(path):
    """Read key=value lines, ignoring blanks and # comments."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def load_config(path=None, overrides=None) -> ExperimentConfig:
    """Build a config from an optional file plus --key=value overrides (flags win)."""
    values = {}
    if path is not None:
        values.update(parse_assignments(path))
    if overrides:
        values.update(overrides)
    kwargs = {}
    for key, raw in values.items():
        if key not in _CONVERTERS:
            raise ParameterError(f"unknown config key {key!r}")
        try:
            kwargs[key] = _CONVERTERS[key](raw)
        except (TypeError, ValueError) as exc:
            raise ParameterError(f"bad value for {key}: {raw!r} ({exc})") from exc
    return ExperimentConfig(**kwargs)
