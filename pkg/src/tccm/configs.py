"""Bundled per-dataset training defaults for the benchmark reproductions.

Epoch counts, batch sizes, and the loss variant used by the published
benchmark runs, keyed by dataset name (the CSV file stem, case-insensitive).
`cmd_train` falls back to this table when --epochs is omitted, so reproducing
a benchmark needs no manual lookup. All rows share the same architecture
(2x256 ReLU MLP), 128-dim sinusoidal embedding, Adam(lr=0.005), squared-norm
loss, and seeds 0..4.
"""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class DatasetDefaults:
    epochs: int
    batch_size: int | None = None  # None -> the TrainConfig size rule
    loss_kind: str = "mse"


BENCHMARK_DEFAULTS: dict[str, DatasetDefaults] = {
    # high-dimensional
    "census": DatasetDefaults(5, 1024),
    "backdoor": DatasetDefaults(200, 1024),
    "campaign": DatasetDefaults(50, 1024),
    "mnist": DatasetDefaults(500, 512),
    "speech": DatasetDefaults(500, 512),
    "optdigits": DatasetDefaults(2000, 512),
    "spambase": DatasetDefaults(5000, 512),
    "musk": DatasetDefaults(5, 512),
    "internetads": DatasetDefaults(50, 512),
    # large
    "donors": DatasetDefaults(30, 1024),
    "http": DatasetDefaults(100, 1024),
    "cover": DatasetDefaults(10, 1024),
    "fraud": DatasetDefaults(75, 1024),
    "skin": DatasetDefaults(110, 1024),
    "celeba": DatasetDefaults(2, 1024),
    "smtp": DatasetDefaults(2, 1024),
    "aloi": DatasetDefaults(100, 1024),
    "shuttle": DatasetDefaults(200, 1024),
    "magic.gamma": DatasetDefaults(10, 1024),
    "mammography": DatasetDefaults(20, 1024),
    # medium
    "annthyroid": DatasetDefaults(2000, 512),
    "pendigits": DatasetDefaults(1000, 512),
    "satellite": DatasetDefaults(10, 512),
    "landsat": DatasetDefaults(6, 512),
    "satimage-2": DatasetDefaults(5, 512),
    "pageblocks": DatasetDefaults(1800, 512),
    "wilt": DatasetDefaults(20, 512),
    "thyroid": DatasetDefaults(10, 512),
    "waveform": DatasetDefaults(580, 512),
    "cardiotocography": DatasetDefaults(1, 512),
    "fault": DatasetDefaults(5000, 512),
    "cardio": DatasetDefaults(2000, 512),
    "letter": DatasetDefaults(50, 512),
    "yeast": DatasetDefaults(130, 512),
    "vowels": DatasetDefaults(20, 512),
    # small
    "pima": DatasetDefaults(5, 512),
    "breastw": DatasetDefaults(1, 512),
    "wdbc": DatasetDefaults(2, 512),
    "ionosphere": DatasetDefaults(10, 512),
    "stamps": DatasetDefaults(200, 512),
    "vertebral": DatasetDefaults(25, 512),
    "wbc": DatasetDefaults(1, 512),
    "glass": DatasetDefaults(200, 512),
    "wpbc": DatasetDefaults(6, 512),
    "lymphography": DatasetDefaults(3, 512),
    "wine": DatasetDefaults(20, 512),
    "hepatitis": DatasetDefaults(1, 512),
}


def defaults_for(dataset_name: str) -> DatasetDefaults | None:
    return BENCHMARK_DEFAULTS.get(dataset_name.strip().lower())
