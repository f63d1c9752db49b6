"""Synthetic generators and closed-form oracles for the theory checks.

Three families live here:

* 2-D illustrative datasets (ring / moons / clusters) for qualitative checks
  and the t-sensitivity sweep;
* Gaussian-mixture setups for the mismatch and robustness studies (normals
  from three modes at {-3, 0, +3}*1_d, anomalies from two modes at +-9*1_d,
  unit covariance everywhere);
* the interpretability benchmark: standard-normal rows with 1/2/3 features
  shifted by U(15, 20), ground-truth feature sets recorded per anomaly.

Scores of well-trained models on normal rows behave like sigma_f * chi_d;
anomalous rows shift the law to a non-central chi. chi_mean gives the exact
central expectation, noncentral_chi_mean_mc estimates the shifted one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng as _rng
from .data import Dataset, fit_scaler, transform
from .errors import ConfigError, MetricError
from .metrics import auprc, auroc

ROLE_NORMAL = "normal"
ROLE_ANOMALY = "anomaly"


@dataclass(frozen=True)
class GmmSpec:
    """Mixture of isotropic gaussians: components are (weight, mean, sigma)."""

    components: tuple[tuple[float, np.ndarray, float], ...]
    dim: int
    role: str = ROLE_NORMAL

    def __post_init__(self) -> None:
        total = sum(w for w, _, _ in self.components)
        if abs(total - 1.0) > 1e-12:
            raise ConfigError(f"component weights sum to {total}, not 1")
        for _, mean, sigma in self.components:
            if np.asarray(mean).shape != (self.dim,):
                raise ConfigError("component mean has wrong dimension")
            if not sigma > 0:
                raise ConfigError(f"sigma must be positive; got {sigma}")


def sample_gmm(spec: GmmSpec, n: int, seed: int) -> np.ndarray:
    """n seeded draws: component by weight, then mean + sigma * N(0, I)."""
    if n < 1:
        raise ConfigError(f"n must be >= 1; got {n}")
    gen = _rng.derive(seed, _rng.GMM)
    weights = np.array([w for w, _, _ in spec.components])
    means = np.stack([np.asarray(m, dtype=np.float64) for _, m, _ in spec.components])
    sigmas = np.array([s for _, _, s in spec.components])
    cum = np.cumsum(weights)
    which = np.searchsorted(cum, gen.random(n), side="right")
    which = np.minimum(which, len(weights) - 1)
    noise = _rng.box_muller(gen, (n, spec.dim))
    return means[which] + sigmas[which][:, None] * noise


def shift_normal_spec(d: int) -> GmmSpec:
    """Normal mixture of the GMM-to-GMM shift setup: 3 modes on the diagonal."""
    one = np.ones(d)
    return GmmSpec(
        components=(
            (1.0 / 3.0, -3.0 * one, 1.0),
            (1.0 / 3.0, 0.0 * one, 1.0),
            (1.0 / 3.0, 3.0 * one, 1.0),
        ),
        dim=d,
        role=ROLE_NORMAL,
    )


def shift_anomaly_spec(d: int) -> GmmSpec:
    """Anomaly mixture: 2 modes far outside the normal support."""
    one = np.ones(d)
    return GmmSpec(
        components=((0.5, -9.0 * one, 1.0), (0.5, 9.0 * one, 1.0)),
        dim=d,
        role=ROLE_ANOMALY,
    )


RING, MOONS, CLUSTERS = "ring", "moons", "clusters"


def make_figure1_dataset(kind: str, n_normal: int, n_anomaly: int, seed: int) -> Dataset:
    """The 2-D illustrative datasets.

    ring: normals on the unit circle with radial noise 0.05, anomalies from
    N(0, 0.1*I) clustered at the center. moons: normals on the upper moon,
    anomalies on the lower. clusters: two well-separated gaussian blobs.
    """
    if n_normal < 1 or n_anomaly < 1:
        raise ConfigError("counts must be >= 1")
    gen = _rng.derive(seed, _rng.GMM)
    if kind == RING:
        theta = gen.random(n_normal) * 2.0 * np.pi
        radius = 1.0 + 0.05 * _rng.box_muller(gen, (n_normal,))
        normals = np.column_stack([radius * np.cos(theta), radius * np.sin(theta)])
        anomalies = math.sqrt(0.1) * _rng.box_muller(gen, (n_anomaly, 2))
    elif kind == MOONS:
        theta = gen.random(n_normal) * np.pi
        normals = np.column_stack([np.cos(theta), np.sin(theta)])
        normals += 0.05 * _rng.box_muller(gen, (n_normal, 2))
        theta = gen.random(n_anomaly) * np.pi
        anomalies = np.column_stack([1.0 - np.cos(theta), 0.5 - np.sin(theta)])
        anomalies += 0.05 * _rng.box_muller(gen, (n_anomaly, 2))
    elif kind == CLUSTERS:
        normals = -2.0 + 0.5 * _rng.box_muller(gen, (n_normal, 2))
        anomalies = 2.0 + 0.5 * _rng.box_muller(gen, (n_anomaly, 2))
    else:
        raise ConfigError(f"unknown kind {kind!r}; expected ring, moons, or clusters")
    X = np.vstack([normals, anomalies])
    y = np.concatenate([np.zeros(n_normal, dtype=np.int8), np.ones(n_anomaly, dtype=np.int8)])
    return Dataset(feature_names=("x1", "x2"), X=X, y=y, source=f"synthetic:{kind}")


def make_interpretability_dataset(
    d: int,
    seed: int,
    n_normal: int = 2000,
    n_per_component: int = 100,
) -> tuple[Dataset, list[frozenset[int]]]:
    """Normals N(0, I_d); anomalies shift 1, 2, or 3 features by U(15, 20).

    Returns the dataset (normals first) and the shifted-index set per anomaly
    row, aligned with the anomaly rows' order.
    """
    if d < 3:
        raise ConfigError(f"interpretability study needs d >= 3; got {d}")
    gen = _rng.derive(seed, _rng.GMM)
    normals = _rng.box_muller(gen, (n_normal, d))
    anomalies = []
    truth: list[frozenset[int]] = []
    for n_shifted in (1, 2, 3):
        for _ in range(n_per_component):
            row = _rng.box_muller(gen, (d,))
            idx = gen.permutation(d)[:n_shifted]
            row[idx] += 15.0 + 5.0 * gen.random(n_shifted)
            anomalies.append(row)
            truth.append(frozenset(int(i) for i in idx))
    X = np.vstack([normals, np.stack(anomalies)])
    y = np.concatenate([
        np.zeros(n_normal, dtype=np.int8),
        np.ones(len(anomalies), dtype=np.int8),
    ])
    names = tuple(f"f{i}" for i in range(d))
    return Dataset(feature_names=names, X=X, y=y, source=f"synthetic:interp{d}"), truth


def explanation_metrics(
    predicted: list[frozenset[int]] | list[set[int]],
    truth: list[frozenset[int]] | list[set[int]],
) -> tuple[float, float]:
    """(exact-match rate, mean Jaccard) over per-anomaly feature sets."""
    if len(predicted) != len(truth):
        raise MetricError(f"{len(predicted)} predictions vs {len(truth)} truth sets")
    if not truth:
        raise MetricError("empty truth list")
    exact, jaccard = 0.0, 0.0
    for p, t in zip(predicted, truth):
        if not t:
            raise MetricError("empty truth set")
        p, t = set(p), set(t)
        exact += 1.0 if p == t else 0.0
        jaccard += len(p & t) / len(p | t)
    return exact / len(truth), jaccard / len(truth)


def chi_mean(d: int, sigma_f: float = 1.0) -> float:
    """E[sigma_f * chi_d] = sigma_f * sqrt(2) * Gamma((d+1)/2) / Gamma(d/2)."""
    if d < 1:
        raise ConfigError(f"d must be >= 1; got {d}")
    return sigma_f * math.sqrt(2.0) * math.exp(math.lgamma((d + 1) / 2.0) - math.lgamma(d / 2.0))


def noncentral_chi_mean_mc(d: int, lam: float, n: int, seed: int) -> tuple[float, float]:
    """Monte-Carlo E[||delta + eps||] with ||delta||^2 = lam and eps ~ N(0, I_d).

    Returns (estimate, standard error).
    """
    if d < 1 or n < 1 or lam < 0:
        raise ConfigError(f"bad arguments d={d}, lam={lam}, n={n}")
    gen = _rng.derive(seed, _rng.MC)
    delta = np.zeros(d)
    delta[0] = math.sqrt(lam)
    draws = _rng.box_muller(gen, (n, d)) + delta
    norms = np.sqrt(np.einsum("ij,ij->i", draws, draws))
    return float(norms.mean()), float(norms.std() / math.sqrt(n))


@dataclass(frozen=True)
class MismatchResult:
    dim: int
    auroc: float
    auprc: float
    normal_mean: float
    normal_median: float
    anomaly_mean: float
    anomaly_median: float
    sigma_f_hat: float
    chi_pred: float  # chi_mean(d, sigma_f_hat), fitted on half the normals
    holdout_mean: float  # empirical mean on the other half
    holdout_stderr: float  # combined standard error of the comparison


def mismatch_study(
    dims: list[int],
    seed: int,
    n_train: int = 2000,
    n_test_normal: int = 1000,
    n_test_anomaly: int = 500,
    epochs: int = 120,
    learning_rate: float = 0.005,
) -> list[MismatchResult]:
    """Train on mixture normals per dimension; check anomalies score higher.

    The chi-law columns split the held-out normals in half: sigma_f is fitted
    on one half (mean score / chi_mean(d, 1)) and chi_mean(d, sigma_f_hat) is
    compared against the other half's empirical mean.
    """
    from .model import init_params, score
    from .trainer import TrainConfig, train

    if not dims:
        raise ConfigError("dims must be nonempty")
    results = []
    for d in dims:
        local_seed = _rng.mix(seed, d)
        train_x = sample_gmm(shift_normal_spec(d), n_train, local_seed)
        test_normal = sample_gmm(shift_normal_spec(d), n_test_normal, _rng.mix(local_seed, 1))
        test_anomaly = sample_gmm(shift_anomaly_spec(d), n_test_anomaly, _rng.mix(local_seed, 2))

        scaler = fit_scaler(train_x, np.arange(n_train))
        params = init_params(d, seed=local_seed)
        cfg = TrainConfig(epochs=epochs, learning_rate=learning_rate, seed=local_seed,
                          loss_kind="mse")
        train(transform(scaler, train_x), params, cfg)

        s_normal = score(params, transform(scaler, test_normal)).scores
        s_anomaly = score(params, transform(scaler, test_anomaly)).scores
        scores = np.concatenate([s_normal, s_anomaly])
        labels = np.concatenate([np.zeros(n_test_normal), np.ones(n_test_anomaly)])

        half = n_test_normal // 2
        fit_half, holdout = s_normal[:half], s_normal[half:]
        sigma_f_hat = float(fit_half.mean() / chi_mean(d, 1.0))
        # chi_pred equals mean(fit_half) by construction, so its standard
        # error is the fit half's; combine with the holdout half's.
        se_fit = fit_half.std() / math.sqrt(half)
        se_holdout = holdout.std() / math.sqrt(holdout.size)
        results.append(MismatchResult(
            dim=d,
            auroc=auroc(scores, labels),
            auprc=auprc(scores, labels),
            normal_mean=float(s_normal.mean()),
            normal_median=float(np.median(s_normal)),
            anomaly_mean=float(s_anomaly.mean()),
            anomaly_median=float(np.median(s_anomaly)),
            sigma_f_hat=sigma_f_hat,
            chi_pred=chi_mean(d, sigma_f_hat),
            holdout_mean=float(holdout.mean()),
            holdout_stderr=float(math.sqrt(se_fit**2 + se_holdout**2)),
        ))
    return results
