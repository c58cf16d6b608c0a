import subprocess
import sys

import pytest


def harness(*args):
    """Drive the primary package through its CLI only."""
    proc = subprocess.run([sys.executable, "-m", "avint.harness.cli", *args],
                          capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(f"avint {' '.join(args)} failed:\n{proc.stderr}")
    return proc.stdout


@pytest.fixture(scope="session")
def csv_dir(tmp_path_factory):
    """Small experiment CSVs produced through the harness CLI."""
    base = tmp_path_factory.mktemp("csvs")
    harness("run", "kepler_compare", "--t_final=5", f"--output={base}/kepler_ours.csv")
    harness("run", "kepler_compare", "--scheme=im", "--t_final=5",
            f"--output={base}/kepler_im.csv")
    harness("convergence", "kepler_convergence", "--conv_stages=1,2",
            "--conv_k_ranges=5:7,5:7", f"--output={base}/conv.csv")
    harness("run", "kovalevskaya", "--t_final=3", f"--output={base}/kova.csv")
    harness("run", "engine_short", "--t_final=2", f"--output={base}/engine_ours.csv")
    harness("run", "engine_short", "--scheme=gauss", "--t_final=2",
            f"--output={base}/engine_gauss.csv")
    harness("run", "bbm_long", "--t_final=8", "--bbm_cells=16", "--bbm_domain=-16,16",
            "--bbm_snapshot_times=0,8", f"--output={base}/bbm_ours.csv")
    harness("run", "bbm_long", "--scheme=gauss", "--t_final=8", "--bbm_cells=16",
            "--bbm_domain=-16,16", "--bbm_snapshot_times=0,8",
            f"--output={base}/bbm_gauss.csv")
    return base
