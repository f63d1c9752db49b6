"""PGD adversarial evaluation of the score, plus the Lipschitz certificate.

The attack is the standard signed-gradient L-infinity PGD: start at the clean
(already standardized) row, step by step_size * sign(grad S), project back
into the epsilon box after every step, run ceil(200 * eps) iterations, and
keep the best iterate seen (lowest score for false-negative attacks on
anomalies, highest for false-positive attacks on normals). No random start,
so a zero budget reproduces the clean evaluation exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, MetricError, NumericalError
from .metrics import auprc, auroc
from .model import ModelParams, lipschitz_upper_bound, score, score_with_input_grad

FALSE_NEGATIVE = "fn"  # descend scores of anomalies
FALSE_POSITIVE = "fp"  # ascend scores of normals
_MODES = (FALSE_NEGATIVE, FALSE_POSITIVE)

DEFAULT_EPSILONS = tuple(round(0.1 * i, 1) for i in range(1, 31))


@dataclass(frozen=True)
class AttackConfig:
    epsilons: tuple[float, ...] = DEFAULT_EPSILONS
    step_size: float = 0.01
    mode: str = FALSE_NEGATIVE
    seed: int = 0  # reserved; the attack itself is deterministic (no random start)

    def __post_init__(self) -> None:
        if not self.step_size > 0:
            raise ConfigError(f"step_size must be > 0; got {self.step_size}")
        if any(e <= 0 for e in self.epsilons):
            raise ConfigError("every epsilon must be > 0")
        if self.mode not in _MODES:
            raise ConfigError(f"mode must be one of {_MODES}; got {self.mode!r}")


def max_iters(epsilon: float) -> int:
    """ceil(200 * eps), guarded against float dust (0.1 * 200 must give 20)."""
    return int(math.ceil(round(200.0 * epsilon, 9)))


def pgd_attack(
    params: ModelParams,
    rows: np.ndarray,
    epsilon: float,
    cfg: AttackConfig,
    t_fixed: float = 1.0,
) -> np.ndarray:
    """Attack every row independently; returns the best iterate per row.

    Rows must already be standardized with the training scaler; the model is
    frozen throughout.
    """
    if epsilon <= 0:
        raise ConfigError(f"epsilon must be > 0; got {epsilon}")
    origin = np.asarray(rows, dtype=np.float64)
    descend = cfg.mode == FALSE_NEGATIVE
    clean = score(params, origin, t_fixed=t_fixed).scores
    best_rows = origin.copy()
    best_scores = clean.copy()
    current = origin.copy()
    for _ in range(max_iters(epsilon)):
        scores, grads = score_with_input_grad(params, current, t_fixed=t_fixed)
        bad = ~np.all(np.isfinite(grads), axis=1)
        if bad.any():
            raise NumericalError(f"non-finite attack gradient at row {int(np.flatnonzero(bad)[0])}")
        step = cfg.step_size * np.sign(grads)
        current = current - step if descend else current + step
        # project back into the L-inf ball around the clean rows
        current = origin + np.clip(current - origin, -epsilon, epsilon)
        scores = score(params, current, t_fixed=t_fixed).scores
        improved = scores < best_scores if descend else scores > best_scores
        best_rows[improved] = current[improved]
        best_scores[improved] = scores[improved]
    return best_rows


@dataclass(frozen=True)
class AttackCurvePoint:
    epsilon: float
    mode: str
    auroc: float
    auprc: float
    mean_targeted_score: float


def attack_curve(
    params: ModelParams,
    x_test: np.ndarray,
    y_test: np.ndarray,
    cfg: AttackConfig,
    t_fixed: float = 1.0,
) -> list[AttackCurvePoint]:
    """Metrics under attack for each budget; the eps=0 row is the clean run."""
    x_test = np.asarray(x_test, dtype=np.float64)
    y_test = np.asarray(y_test).reshape(-1)
    target_label = 1 if cfg.mode == FALSE_NEGATIVE else 0
    targeted = np.flatnonzero(y_test == target_label)
    if targeted.size == 0 or targeted.size == y_test.size:
        raise MetricError("attack_curve needs both classes in the test split")

    clean_scores = score(params, x_test, t_fixed=t_fixed).scores
    points = [AttackCurvePoint(
        epsilon=0.0,
        mode=cfg.mode,
        auroc=auroc(clean_scores, y_test),
        auprc=auprc(clean_scores, y_test),
        mean_targeted_score=float(clean_scores[targeted].mean()),
    )]
    for eps in cfg.epsilons:
        attacked = pgd_attack(params, x_test[targeted], eps, cfg, t_fixed=t_fixed)
        scores = clean_scores.copy()
        scores[targeted] = score(params, attacked, t_fixed=t_fixed).scores
        points.append(AttackCurvePoint(
            epsilon=float(eps),
            mode=cfg.mode,
            auroc=auroc(scores, y_test),
            auprc=auprc(scores, y_test),
            mean_targeted_score=float(scores[targeted].mean()),
        ))
    return points


def certified_margin(
    params: ModelParams,
    z: np.ndarray,
    epsilon: float,
    t_fixed: float = 1.0,
    lhat: float | None = None,
) -> tuple[float, float]:
    """Score bounds under any L-inf perturbation of size epsilon.

    |S(z + delta) - S(z)| <= (L+1) ||delta||_2 <= (L+1) * eps * sqrt(d), with
    L bounded by the spectral-norm product.
    """
    if epsilon < 0:
        raise ConfigError(f"epsilon must be >= 0; got {epsilon}")
    if lhat is None:
        lhat = lipschitz_upper_bound(params)
    z = np.asarray(z, dtype=np.float64)
    s = float(score(params, z, t_fixed=t_fixed).scores[0])
    slack = (lhat + 1.0) * epsilon * math.sqrt(params.input_dim)
    return s - slack, s + slack
