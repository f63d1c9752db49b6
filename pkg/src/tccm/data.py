"""Tabular ingestion, the semi-supervised split, scaling, and contamination.

The on-disk format is a plain UTF-8 CSV: header row, comma separators, one
column literally named "label" holding 0/1, every other column a decimal
float (exponent notation allowed, no quoting). The split protocol is the
one-class one: a seeded half of the normal rows trains, everything else is
test. The scaler is fitted on the train partition only.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np

from . import rng as _rng
from .errors import ConfigError, DataFormatError

LABEL_COLUMN = "label"
_FLOAT_FMT = "%.17g"


@dataclass(frozen=True)
class Dataset:
    feature_names: tuple[str, ...]
    X: np.ndarray  # (N, d) float64
    y: np.ndarray | None  # (N,) int8 in {0, 1}; None when the file had no labels
    source: str = "<memory>"

    @property
    def n_rows(self) -> int:
        return int(self.X.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.X.shape[1])

    @property
    def provenance(self) -> str:
        return f"{self.source} ({self.n_rows} rows)"


@dataclass(frozen=True)
class Scaler:
    mean: np.ndarray
    std: np.ndarray


@dataclass(frozen=True)
class SplitPlan:
    """Row-index partition. ``injectable`` holds anomalies reserved for the
    contamination study: not trained on, not tested on, available to inject."""

    train_indices: np.ndarray
    test_indices: np.ndarray
    seed: int
    contamination_ratio: float = 0.0
    injectable: np.ndarray | None = None


def load_csv(path: str, require_label: bool = True) -> Dataset:
    """Parse a CSV file into a Dataset, rejecting anything malformed."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise DataFormatError(f"{path}: empty file") from None
            header = [h.strip() for h in header]
            rows = list(reader)
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from exc

    if LABEL_COLUMN in header:
        label_idx = header.index(LABEL_COLUMN)
    elif require_label:
        raise DataFormatError(f"{path}: no '{LABEL_COLUMN}' column in header {header}")
    else:
        label_idx = None
    feature_names = tuple(name for i, name in enumerate(header) if i != label_idx)
    if not feature_names:
        raise DataFormatError(f"{path}: no feature columns")

    n = len(rows)
    if n < 2:
        raise DataFormatError(f"{path}: need at least 2 data rows; got {n}")
    X = np.empty((n, len(feature_names)))
    y = np.empty(n, dtype=np.int8) if label_idx is not None else None
    for r, row in enumerate(rows):
        if len(row) != len(header):
            raise DataFormatError(f"{path}: row {r + 2} has {len(row)} cells; expected {len(header)}")
        c_out = 0
        for c, cell in enumerate(row):
            try:
                value = float(cell)
            except ValueError:
                raise DataFormatError(
                    f"{path}: row {r + 2}, column {header[c]!r}: cannot parse {cell!r}"
                ) from None
            if not np.isfinite(value):
                raise DataFormatError(
                    f"{path}: row {r + 2}, column {header[c]!r}: non-finite value {cell!r}"
                )
            if c == label_idx:
                if value not in (0.0, 1.0):
                    raise DataFormatError(
                        f"{path}: row {r + 2}: label must be 0 or 1; got {cell!r}"
                    )
                assert y is not None
                y[r] = int(value)
            else:
                X[r, c_out] = value
                c_out += 1
    return Dataset(feature_names=feature_names, X=X, y=y, source=path)


def write_csv(dataset: Dataset, path: str) -> None:
    """Inverse of load_csv; floats round-trip exactly (17 significant digits)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        header = list(dataset.feature_names)
        if dataset.y is not None:
            header.append(LABEL_COLUMN)
        writer.writerow(header)
        for i in range(dataset.n_rows):
            row = [_FLOAT_FMT % v for v in dataset.X[i]]
            if dataset.y is not None:
                row.append(str(int(dataset.y[i])))
            writer.writerow(row)


def _require_labels(dataset: Dataset) -> np.ndarray:
    if dataset.y is None:
        raise ConfigError(f"{dataset.source}: split protocols require labels")
    return dataset.y


def split_semi_supervised(dataset: Dataset, seed: int) -> SplitPlan:
    """Seeded 50% of normal rows -> train; other normals + all anomalies -> test."""
    y = _require_labels(dataset)
    normals = np.flatnonzero(y == 0)
    if normals.size < 2:
        raise ConfigError(f"need at least 2 normal rows; got {normals.size}")
    perm = _rng.derive(seed, _rng.SPLIT).permutation(normals)
    k = normals.size // 2
    train = np.sort(perm[:k])
    test = np.sort(np.concatenate([perm[k:], np.flatnonzero(y == 1)]))
    return SplitPlan(train_indices=train, test_indices=test, seed=seed)


def split_for_contamination(dataset: Dataset, seed: int) -> SplitPlan:
    """Base plan for the contamination study.

    Normals split in half as usual; anomalies are also split in half: one
    half is reserved for test, the other half forms the injection pool. The
    pool sits outside both partitions until injected.
    """
    y = _require_labels(dataset)
    normals = np.flatnonzero(y == 0)
    anomalies = np.flatnonzero(y == 1)
    if normals.size < 2:
        raise ConfigError(f"need at least 2 normal rows; got {normals.size}")
    gen = _rng.derive(seed, _rng.SPLIT)
    norm_perm = gen.permutation(normals)
    anom_perm = gen.permutation(anomalies)
    k = normals.size // 2
    pool = anom_perm[: anomalies.size // 2]
    reserved = anom_perm[anomalies.size // 2:]
    return SplitPlan(
        train_indices=np.sort(norm_perm[:k]),
        test_indices=np.sort(np.concatenate([norm_perm[k:], reserved])),
        seed=seed,
        injectable=np.sort(pool),
    )


def inject_contamination(plan: SplitPlan, dataset: Dataset, ratio: float, seed: int) -> SplitPlan:
    """Move pool anomalies into train until its anomaly fraction is ~ratio.

    The injected count k is the one minimizing |k/(n+k) - ratio| over the
    available pool (ties toward fewer rows). Test rows never change.
    """
    y = _require_labels(dataset)
    rate = float(np.mean(y == 1))
    if not 0.0 <= ratio <= rate:
        raise ConfigError(f"contamination ratio {ratio} outside [0, anomaly rate {rate:.6g}]")
    if ratio == 0.0:
        return plan
    if plan.injectable is None or plan.injectable.size == 0:
        raise ConfigError("base plan has no injection pool; build it with split_for_contamination")
    pool = plan.injectable
    n = plan.train_indices.size
    max_frac = pool.size / (n + pool.size)
    if ratio > max_frac:
        raise ConfigError(
            f"ratio {ratio} not reachable: pool of {pool.size} anomalies caps the "
            f"train fraction at {max_frac:.6g}"
        )
    best_k, best_err = 0, abs(ratio)
    for k in range(1, pool.size + 1):
        err = abs(k / (n + k) - ratio)
        if err < best_err:
            best_k, best_err = k, err
    if best_k == 0:
        return replace(plan, contamination_ratio=ratio)
    chosen = _rng.derive(seed, _rng.INJECT).permutation(pool)[:best_k]
    remaining = np.setdiff1d(pool, chosen)
    return replace(
        plan,
        train_indices=np.sort(np.concatenate([plan.train_indices, chosen])),
        contamination_ratio=ratio,
        injectable=remaining,
    )


def fit_scaler(dataset_or_x: Dataset | np.ndarray, train_indices: np.ndarray) -> Scaler:
    """Per-column mean/std over the train rows only (population std).

    Columns that are constant on train (std < 1e-12) pass through with std 1.
    """
    x = dataset_or_x.X if isinstance(dataset_or_x, Dataset) else np.asarray(dataset_or_x)
    rows = x[np.asarray(train_indices)]
    if rows.shape[0] == 0:
        raise ConfigError("cannot fit a scaler on an empty train partition")
    mean = rows.mean(axis=0)
    std = np.sqrt(np.mean(np.square(rows - mean), axis=0))
    std = np.where(std < 1e-12, 1.0, std)
    return Scaler(mean=mean, std=std)


def identity_scaler(n_features: int) -> Scaler:
    """The no-normalization bypass: transform becomes the identity map."""
    return Scaler(mean=np.zeros(n_features), std=np.ones(n_features))


def transform(scaler: Scaler, x: np.ndarray) -> np.ndarray:
    return (np.asarray(x, dtype=np.float64) - scaler.mean) / scaler.std
