#!/usr/bin/env python3
"""Run the structural/stochastic property suite and print the report.

Checks dilation Hermiticity, agreement between the closed-form and
numerically matched dilations, residual halving ratios, per-step trace
and positivity preservation, Monte-Carlo agreement, and convergence
slopes.  Exits nonzero if any check fails; the machine-readable report
lands in results/verify/verify_report.json.
"""

from __future__ import annotations

import os
import sys

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, os.path.join(REPO_ROOT, "src"))

from lindblad_dilation.experiments.cli import main as cli_main  # noqa: E402


def main() -> int:
    os.chdir(REPO_ROOT)
    return cli_main(["verify", "--config", "configs/damped_qubit_verify.json"])


if __name__ == "__main__":
    raise SystemExit(main())
