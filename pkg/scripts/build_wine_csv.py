#!/usr/bin/env python3
"""Reconstruct the ODDS-style wine benchmark as a committed CSV.

The anomaly-detection variant of UCI Wine keeps classes 1 and 2 as inliers
(119 rows) and downsamples class 0 to its first 10 rows as outliers, giving
129 x 13 with a 7.75% anomaly rate. scikit-learn ships the raw UCI table, so
the file can be rebuilt offline and byte-identically.

Usage: python3 scripts/build_wine_csv.py [--out data/wine.csv]
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from sklearn.datasets import load_wine

from tccm.data import Dataset, write_csv


def build() -> Dataset:
    raw = load_wine()
    inliers = raw.data[raw.target != 0]
    outliers = raw.data[raw.target == 0][:10]
    x = np.vstack([inliers, outliers]).astype(np.float64)
    y = np.concatenate(
        [np.zeros(len(inliers), dtype=np.int8), np.ones(len(outliers), dtype=np.int8)]
    )
    names = tuple(str(n) for n in raw.feature_names)
    return Dataset(feature_names=names, X=x, y=y, source="wine")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=os.path.join("data", "wine.csv"))
    args = ap.parse_args()
    dataset = build()
    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    write_csv(dataset, args.out)
    print(f"wrote {args.out}: {dataset.n_rows} rows x {dataset.n_features} features, "
          f"{int(dataset.y.sum())} anomalies")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
