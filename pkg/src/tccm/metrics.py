"""Ranking metrics and the label-free contrast-score-margin epoch selector.

AUROC is the Mann-Whitney statistic (ties get half credit). AUPRC is average
precision with step interpolation; ties are broken by original index so the
value is exactly reproducible. CSM needs no labels: it contrasts the top-k
scores against the rest, T = (mu_top - mu_rest) / sqrt(var_top + var_rest),
and the epoch whose snapshot maximizes T wins.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, MetricError


def _check_scores_labels(scores: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    labels = np.asarray(labels).reshape(-1)
    if scores.shape != labels.shape:
        raise MetricError(f"{scores.size} scores vs {labels.size} labels")
    if not np.all((labels == 0) | (labels == 1)):
        raise MetricError("labels must be 0/1")
    return scores, labels.astype(np.int64)


def auroc(scores: np.ndarray, labels: np.ndarray) -> float:
    """P(random anomaly scores above random normal), ties counting 1/2."""
    scores, labels = _check_scores_labels(scores, labels)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise MetricError("auroc needs both classes present")
    order = np.argsort(scores, kind="mergesort")
    sorted_scores = scores[order]
    # average rank within each tie group (1-based ranks)
    boundaries = np.r_[True, sorted_scores[1:] != sorted_scores[:-1]]
    group = np.cumsum(boundaries) - 1
    counts = np.bincount(group)
    ends = np.cumsum(counts)
    starts = ends - counts
    avg_rank = (starts + 1 + ends) / 2.0
    ranks = np.empty(scores.size)
    ranks[order] = avg_rank[group]
    u = ranks[labels == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def auprc(scores: np.ndarray, labels: np.ndarray) -> float:
    """Average precision over the descending-score ranking (step interpolation)."""
    scores, labels = _check_scores_labels(scores, labels)
    n_pos = int(labels.sum())
    if n_pos == 0:
        raise MetricError("auprc needs at least one positive")
    order = np.argsort(-scores, kind="mergesort")  # stable: ties by original index
    hits = labels[order] == 1
    ranks = np.arange(1, scores.size + 1)
    cum_hits = np.cumsum(hits)
    precision_at_hit = cum_hits[hits] / ranks[hits]
    return float(precision_at_hit.sum() / n_pos)


@dataclass(frozen=True)
class CsmReport:
    k: int
    mu_o: float
    sigma_o: float  # population std of the top-k scores
    mu_i: float
    sigma_i: float  # population std of the remaining scores
    t: float
    degenerate: bool = False  # both variances zero -> t is the +inf sentinel


def csm(scores: np.ndarray, k: int) -> CsmReport:
    """Contrast score margin of the top-k scores against the remaining n-k."""
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    n = scores.size
    if not 1 <= k < n:
        raise ConfigError(f"csm needs 1 <= k < n; got k={k}, n={n}")
    ordered = np.sort(scores)[::-1]
    top, rest = ordered[:k], ordered[k:]
    mu_o, mu_i = float(top.mean()), float(rest.mean())
    var_o, var_i = float(top.var()), float(rest.var())
    denom = math.sqrt(var_o + var_i)
    if denom == 0.0:
        return CsmReport(k, mu_o, 0.0, mu_i, 0.0, math.inf, degenerate=True)
    return CsmReport(k, mu_o, math.sqrt(var_o), mu_i, math.sqrt(var_i), (mu_o - mu_i) / denom)


def select_epochs(
    x_train: np.ndarray,
    cfg,
    candidate_epochs: list[int],
    assumed_rate: float = 0.05,
    embed_cfg=None,
    t_fixed: float = 1.0,
    table: list | None = None,
) -> int:
    """Label-free epoch choice: train once to max(candidates), snapshot at each
    candidate, score the training pool, return the candidate maximizing T.

    k = round(assumed_rate * n), clamped to [1, n-1]. Ties break toward fewer
    epochs. ``table``, if given, collects (epoch, CsmReport) rows for display.
    """
    from . import trainer as _trainer
    from .model import init_params, score

    if not candidate_epochs:
        raise ConfigError("candidate_epochs must be nonempty")
    candidates = sorted(set(int(c) for c in candidate_epochs))
    if candidates[0] < 1:
        raise ConfigError(f"candidate epochs must be >= 1; got {candidates[0]}")
    x_train = np.asarray(x_train, dtype=np.float64)
    n = x_train.shape[0]
    k = int(math.floor(assumed_rate * n + 0.5))
    k = max(1, min(k, n - 1))

    run_cfg = _trainer.TrainConfig(
        epochs=candidates[-1],
        batch_size=cfg.batch_size,
        learning_rate=cfg.learning_rate,
        loss_kind=cfg.loss_kind,
        noise_injection=cfg.noise_injection,
        time_interpolation=cfg.time_interpolation,
        seed=cfg.seed,
        adam_beta1=cfg.adam_beta1,
        adam_beta2=cfg.adam_beta2,
        adam_eps=cfg.adam_eps,
    )
    params = init_params(x_train.shape[1], embed_cfg, seed=cfg.seed)
    wanted = set(candidates)
    best_epoch, best_t = None, -math.inf

    def snapshot(epoch: int, live_params) -> None:
        nonlocal best_epoch, best_t
        if epoch not in wanted:
            return
        report = csm(score(live_params, x_train, t_fixed=t_fixed).scores, k)
        if table is not None:
            table.append((epoch, report))
        if report.t > best_t:
            best_epoch, best_t = epoch, report.t

    _trainer.train(x_train, params, run_cfg, epoch_callback=snapshot)
    assert best_epoch is not None
    return best_epoch
