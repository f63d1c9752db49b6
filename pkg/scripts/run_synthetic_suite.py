#!/usr/bin/env python3
"""Run every synthetic study end to end and drop CSVs under an output dir.

Thin wrapper over the `tccm synth` subcommand so the whole desk-scale
evaluation (2-D toy sets, dimension sweep, attribution accuracy, chi-law
table) is one invocation:

    python3 scripts/run_synthetic_suite.py --out runs/synth --seed 0
"""

from __future__ import annotations

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from tccm.cli import main as tccm_main

STUDIES = ("ring", "moons", "clusters", "mismatch", "interpretability", "theory")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=os.path.join("runs", "synth"))
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    for study in STUDIES:
        print(f"== {study} ==")
        rc = tccm_main(["synth", "--study", study, "--seed", str(args.seed),
                        "--out", os.path.join(args.out, study)])
        if rc != 0:
            return rc
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
