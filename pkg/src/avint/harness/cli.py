"""Command-line entry point: run experiments, sweeps, and list shipped configs."""

import argparse
import sys
from importlib import resources

from ..errors import AvintError, ParameterError, StepError
from .config import load_config
from .convergence import convergence_study
from .runner import run

EXIT_OK = 0
EXIT_STEP_FAILURE = 1
EXIT_BAD_CONFIG = 2


def _experiments_dir():
    return resources.files("avint") / "experiments"


def _resolve_config_path(name_or_path):
    import os

    if os.path.exists(name_or_path):
        return name_or_path
    candidate = _experiments_dir() / f"{name_or_path}.cfg"
    if candidate.is_file():
        return str(candidate)
    raise ParameterError(f"no config file or shipped experiment named {name_or_path!r}")


def _split_overrides(pairs):
    overrides = {}
    for item in pairs:
        if not item.startswith("--") or "=" not in item:
            raise ParameterError(f"overrides look like --key=value, got {item!r}")
        key, value = item[2:].split("=", 1)
        overrides[key.replace("-", "_")] = value
    return overrides


def main(argv=None):
    parser = argparse.ArgumentParser(prog="avint",
                                     description="structure-preserving time-integration experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("config", help="config file path or shipped experiment name")
    p_conv = sub.add_parser("convergence", help="run the timestep convergence study")
    p_conv.add_argument("config", help="config file path or shipped experiment name")
    sub.add_parser("list-experiments", help="list shipped experiment configs")

    args, extra = parser.parse_known_args(argv)
    try:
        if args.command == "list-experiments":
            if extra:
                raise ParameterError(f"unexpected arguments: {extra}")
            for entry in sorted(p.name for p in _experiments_dir().iterdir()
                                if p.name.endswith(".cfg")):
                print(entry[:-4])
            return EXIT_OK

        overrides = _split_overrides(extra)
        config = load_config(_resolve_config_path(args.config), overrides)
        if args.command == "run":
            summary = run(config)
        else:
            summary = convergence_study(config)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except StepError as exc:
        step = getattr(exc, "step_index", None)
        where = f" at step {step}" if step is not None else ""
        print(f"step failure{where}: {exc}", file=sys.stderr)
        return EXIT_STEP_FAILURE
    except AvintError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STEP_FAILURE

    print(f"wrote {summary.output} ({summary.rows} rows)")
    for name, value in sorted(summary.max_drifts.items()):
        print(f"  max drift {name}: {value:.3e}")
    for name, value in sorted(summary.extras.items()):
        print(f"  {name}: {value}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
