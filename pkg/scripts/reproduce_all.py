#!/usr/bin/env python3
"""Regenerate every shipped experiment CSV and (if avfigs is installed) the figures.

Usage: python scripts/reproduce_all.py [--out results] [--skip-slow]

The BBM and reference-trajectory runs take a few minutes each; --skip-slow
drops them and keeps the quick Kepler/Kovalevskaya/engine runs.
"""

import argparse
import os
import shutil
import subprocess
import sys

RUNS = [
    # (name, config, overrides, slow)
    ("kepler_ours", "kepler_compare", [], False),
    ("kepler_im", "kepler_compare", ["--scheme=im"], False),
    ("kepler_mvdg", "kepler_compare", ["--scheme=mvdg"], False),
    ("kepler_gauss", "kepler_compare", ["--scheme=gauss"], False),
    ("kovalevskaya_ours", "kovalevskaya", [], False),
    ("kovalevskaya_im", "kovalevskaya", ["--scheme=im"], False),
    ("engine_short_s1", "engine_short", [], False),
    ("engine_short_s2", "engine_short", ["--stages=2"], False),
    ("engine_short_s3", "engine_short", ["--stages=3"], False),
    ("engine_short_gauss_s1", "engine_short", ["--scheme=gauss"], False),
    ("engine_short_gauss_s2", "engine_short", ["--scheme=gauss", "--stages=2"], False),
    ("engine_short_gauss_s3", "engine_short", ["--scheme=gauss", "--stages=3"], False),
    ("engine_long_ours", "engine_long", [], False),
    ("engine_long_im", "engine_long", ["--scheme=im"], False),
    ("engine_reference", "engine_reference", [], True),
    ("bbm_ours", "bbm_long", [], True),
    ("bbm_gauss", "bbm_long", ["--scheme=gauss"], True),
]

FIGURES = [
    ("fig1", ["kepler_im.csv", "kepler_mvdg.csv", "kepler_ours.csv"]),
    ("fig2", ["kepler_im.csv", "kepler_mvdg.csv", "kepler_ours.csv"]),
    ("fig3", ["kepler_convergence.csv"]),
    ("fig5", ["kovalevskaya_im.csv", "kovalevskaya_ours.csv"]),
    ("fig6", ["engine_short_s1.csv", "engine_short_s3.csv",
              "engine_short_gauss_s1.csv", "engine_short_gauss_s3.csv"]),
    ("fig7", ["engine_long_ours.csv", "engine_long_im.csv"]),
    ("fig9", ["bbm_ours.csv", "bbm_gauss.csv"]),
    ("fig10", ["bbm_ours_snapshot_t20000.csv", "bbm_gauss_snapshot_t20000.csv"]),
    ("fig11", ["bbm_ours.csv"]),
]


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="results")
    parser.add_argument("--skip-slow", action="store_true")
    args = parser.parse_args()
    os.makedirs(args.out, exist_ok=True)

    for name, config, overrides, slow in RUNS:
        if slow and args.skip_slow:
            print(f"[skip] {name}")
            continue
        out = os.path.join(args.out, f"{name}.csv")
        cmd = [sys.executable, "-m", "avint.harness.cli", "run", config,
               *overrides, f"--output={out}"]
        print("[run]", " ".join(cmd[3:]))
        subprocess.run(cmd, check=True)

    conv = os.path.join(args.out, "kepler_convergence.csv")
    print("[run] convergence kepler_convergence")
    subprocess.run([sys.executable, "-m", "avint.harness.cli", "convergence",
                    "kepler_convergence", f"--output={conv}"], check=True)

    if shutil.which("avfigs") is None:
        print("avfigs not installed; skipping figure rendering")
        return
    for fid, inputs in FIGURES:
        paths = [os.path.join(args.out, p) for p in inputs]
        if not all(os.path.exists(p) for p in paths):
            print(f"[skip] {fid} (inputs missing)")
            continue
        out = os.path.join(args.out, f"{fid}.png")
        subprocess.run(["avfigs", "render", "--figure", fid, "--in", *paths,
                        "--out", out], check=True)
        print(f"[fig] {out}")


if __name__ == "__main__":
    main()
