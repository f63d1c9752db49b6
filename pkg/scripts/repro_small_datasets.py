#!/usr/bin/env python3
"""Small-dataset reproduction: 5-seed mean AUROC/AUPRC on benchmark CSVs.

Runs the semi-supervised protocol (50% of normals train, rest + anomalies
test, z-scores fitted on train) with each dataset's bundled epoch/batch/loss
defaults, averaging metrics over seeds 0..4.

    python3 scripts/repro_small_datasets.py data/wine.csv data/adbench/*.csv
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from tccm.configs import defaults_for
from tccm.data import fit_scaler, load_csv, split_semi_supervised, transform
from tccm.metrics import auprc, auroc
from tccm.model import init_params, score
from tccm.trainer import TrainConfig, train

SEEDS = (0, 1, 2, 3, 4)


def run_dataset(path: str, epochs: int | None) -> tuple[float, float]:
    dataset = load_csv(path)
    stem = os.path.splitext(os.path.basename(path))[0]
    bundled = defaults_for(stem)
    if epochs is None and bundled is None:
        raise SystemExit(f"{stem!r} has no bundled defaults; pass --epochs")
    cfg_epochs = epochs if epochs is not None else bundled.epochs
    batch = bundled.batch_size if bundled is not None else None
    loss_kind = bundled.loss_kind if bundled is not None else "l2"

    rocs, prcs = [], []
    for seed in SEEDS:
        plan = split_semi_supervised(dataset, seed)
        scaler = fit_scaler(dataset, plan.train_indices)
        params = init_params(dataset.n_features, seed=seed)
        params, _ = train(
            transform(scaler, dataset.X[plan.train_indices]), params,
            TrainConfig(epochs=cfg_epochs, batch_size=batch,
                        loss_kind=loss_kind, seed=seed))
        report = score(params, transform(scaler, dataset.X[plan.test_indices]))
        labels = dataset.y[plan.test_indices]
        rocs.append(auroc(report.scores, labels))
        prcs.append(auprc(report.scores, labels))
    return float(np.mean(rocs)), float(np.mean(prcs))


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv", nargs="+", help="benchmark CSVs with a label column")
    ap.add_argument("--epochs", type=int, default=None,
                    help="override the bundled per-dataset epoch count")
    args = ap.parse_args()

    for path in args.csv:
        started = time.time()
        mean_roc, mean_prc = run_dataset(path, args.epochs)
        stem = os.path.splitext(os.path.basename(path))[0]
        print(f"{stem}: auroc={mean_roc:.4f} auprc={mean_prc:.4f} "
              f"seeds={len(SEEDS)} ({time.time() - started:.1f}s)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
