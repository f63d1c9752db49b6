#!/usr/bin/env python3
"""Convert ADBench .npz files to the CSV layout the CLI expects.

ADBench (https://github.com/Minqi824/ADBench) distributes each dataset as a
.npz archive with arrays ``X`` (float features) and ``y`` (0/1 labels). This
repo cannot fetch them at build time, so download the archives yourself and
run e.g.:

    python3 scripts/export_adbench.py ~/Downloads/4_breastw.npz data/adbench/breastw.csv

The output column order is f0..f{d-1},label and floats are written with
%.17g so re-exports are byte-identical.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from tccm.data import Dataset, write_csv


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("npz", help="path to an ADBench .npz archive")
    ap.add_argument("out", help="destination CSV path")
    args = ap.parse_args()

    with np.load(args.npz) as archive:
        x = np.asarray(archive["X"], dtype=np.float64)
        y = np.asarray(archive["y"]).astype(np.int8).ravel()
    names = tuple(f"f{i}" for i in range(x.shape[1]))
    dataset = Dataset(feature_names=names, X=x, y=y,
                      source=os.path.basename(args.npz))
    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    write_csv(dataset, args.out)
    print(f"wrote {args.out}: {dataset.n_rows} rows x {dataset.n_features} features, "
          f"{int(y.sum())} anomalies")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
