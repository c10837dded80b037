#!/usr/bin/env python3
"""Run the three benchmark studies end to end.

For each study config this runs the convergence grid (all orders and
step sizes against the adaptive reference) and the observable time
series, writing convergence.csv, slopes.json, and observable.csv under
the results/ directory named in the config.  Reference solutions are
cached on disk, so reruns are fast and byte-reproducible.
"""

from __future__ import annotations

import argparse
import os
import sys

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, os.path.join(REPO_ROOT, "src"))

from lindblad_dilation.experiments.cli import main as cli_main  # noqa: E402

STUDY_CONFIGS = (
    "configs/tfim_T1.json",
    "configs/tfim_driven_T1.json",
    "configs/periodic_T10pi.json",
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--configs",
        nargs="+",
        default=list(STUDY_CONFIGS),
        help="config files to run (default: the three shipped studies)",
    )
    args = parser.parse_args()

    os.chdir(REPO_ROOT)
    status = 0
    for config in args.configs:
        print(f"=== {config} ===")
        status |= cli_main(["run-convergence", "--config", config])
        status |= cli_main(["run-observable", "--config", config])
    return status


if __name__ == "__main__":
    raise SystemExit(main())
