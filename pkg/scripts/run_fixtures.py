#!/usr/bin/env python3
"""Run every bundled fixture end to end and print one JSON report per step.

Useful as a smoke test and as a demonstration of the command surface:

    python scripts/run_fixtures.py
"""

import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
FIX = ROOT / "fixtures"

PLANS = {
    "ex_smooth_finite.toml": [
        ("graph", "classify"),
        ("germ", "rates", "--steps", "7", "--nu", "vertex:E0"),
        ("germ", "recursion"),
        ("germ", "fixed"),
        ("germ", "degree"),
        ("germ", "stability"),
    ],
    "ex_smooth_nonfinite.toml": [
        ("germ", "fixed"),
        ("germ", "degree"),
        ("germ", "recursion"),
        ("germ", "stability"),
    ],
    "ex_quotient.toml": [
        ("graph", "discrepancy"),
        ("transport", "rate", "--prime", "E0"),
        ("transport", "push", "--prime", "E0"),
        ("transport", "pull", "--prime", "E0"),
        ("transport", "jacobian"),
        ("germ", "fixed"),
    ],
    "ex_elliptic.toml": [
        ("graph", "discrepancy"),
        ("graph", "classify"),
        ("graph", "skeleton"),
    ],
    "ex_cycle_nonfinite.toml": [
        ("graph", "classify"),
        ("germ", "apply", "--nu", "vertex:E1"),
        ("germ", "fixed"),
        ("germ", "degree"),
        ("germ", "nonexpansion", "--pairs", "25"),
    ],
    "cusp_42.toml": [
        ("cusp", "build"),
        ("cusp", "unit"),
        ("cusp", "validate"),
        ("cusp", "rotation"),
        ("cusp", "example"),
        ("germ", "degree"),
        ("germ", "fixed"),
        ("germ", "stability"),
    ],
}


def main() -> int:
    failures = 0
    for fixture, plan in PLANS.items():
        path = FIX / fixture
        for cmd in plan:
            argv = [sys.executable, "-m", "valdyn.cli", cmd[0], cmd[1], str(path), *cmd[2:]]
            proc = subprocess.run(argv, capture_output=True, text=True)
            label = f"{fixture} {' '.join(cmd)}"
            print(f"$ valdyn {' '.join(cmd[:2])} {fixture} {' '.join(cmd[2:])}")
            print(f"  {proc.stdout.strip()}")
            if proc.returncode != 0:
                failures += 1
                print(f"  exit = {proc.returncode}")
    print(f"\n{'OK' if failures == 0 else f'{failures} command(s) failed'}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
