import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tccm.embedding import TimeEmbeddingConfig
from tccm.errors import ConfigError, MetricError, NumericalError
from tccm.model import init_params, lipschitz_upper_bound, score
from tccm.robustness import (
    AttackConfig,
    attack_curve,
    certified_margin,
    max_iters,
    pgd_attack,
)

from test_model import small_params, zero_params


# ---------------------------------------------------------------- iteration budget


def test_max_iters_oracles():
    # 200 * 0.1 is 20.000000000000004 in floats; the round guard must absorb it
    assert max_iters(0.1) == 20
    assert max_iters(0.3) == 60
    assert max_iters(1.0) == 200
    assert max_iters(3.0) == 600
    assert max_iters(0.001) == 1


# ---------------------------------------------------------------- config validation


def test_attack_config_validation():
    with pytest.raises(ConfigError, match="step_size"):
        AttackConfig(step_size=0.0)
    with pytest.raises(ConfigError, match="epsilon"):
        AttackConfig(epsilons=(0.5, -1.0))
    with pytest.raises(ConfigError, match="mode"):
        AttackConfig(mode="both")


def test_pgd_rejects_nonpositive_epsilon():
    p = zero_params(2)
    with pytest.raises(ConfigError, match="epsilon"):
        pgd_attack(p, np.zeros((1, 2)), 0.0, AttackConfig())


# ---------------------------------------------------------------- zero-weight oracle

# With all weights zero the score is exactly ||z|| and its input gradient is
# z/||z||, so signed-gradient PGD moves every coordinate of a positive row by
# -step (fn) or +step (fp) per iteration until the box boundary.


def test_pgd_zero_weight_fn_moves_toward_origin():
    p = zero_params(2)
    out = pgd_attack(p, np.array([[3.0, 4.0]]), 1.0, AttackConfig(mode="fn"))
    assert np.array_equal(out, np.array([[2.0, 3.0]]))
    assert score(p, out).scores[0] == pytest.approx(math.sqrt(13.0), abs=1e-12)


def test_pgd_zero_weight_fp_moves_away():
    p = zero_params(2)
    out = pgd_attack(p, np.array([[3.0, 4.0]]), 1.0, AttackConfig(mode="fp"))
    assert np.array_equal(out, np.array([[4.0, 5.0]]))
    assert score(p, out).scores[0] == pytest.approx(math.sqrt(41.0), abs=1e-12)


# ---------------------------------------------------------------- invariants


@settings(max_examples=25, deadline=None)
@given(
    st.integers(0, 100),
    st.floats(0.05, 2.0, allow_nan=False),
    st.sampled_from(["fn", "fp"]),
)
def test_pgd_stays_inside_the_ball(seed, epsilon, mode):
    p = small_params(3, seed=seed % 5)
    rows = np.random.default_rng(seed).normal(size=(4, 3))
    out = pgd_attack(p, rows, epsilon, AttackConfig(mode=mode))
    assert np.max(np.abs(out - rows)) <= epsilon + 1e-12


def test_pgd_best_iterate_never_worse_than_clean():
    p = small_params(4, seed=3)
    rows = np.random.default_rng(5).normal(size=(8, 4))
    clean = score(p, rows).scores
    fn = score(p, pgd_attack(p, rows, 0.5, AttackConfig(mode="fn"))).scores
    fp = score(p, pgd_attack(p, rows, 0.5, AttackConfig(mode="fp"))).scores
    assert np.all(fn <= clean)
    assert np.all(fp >= clean)


def test_pgd_is_deterministic():
    p = small_params(3, seed=1)
    rows = np.random.default_rng(2).normal(size=(5, 3))
    a = pgd_attack(p, rows, 0.4, AttackConfig())
    b = pgd_attack(p, rows, 0.4, AttackConfig())
    assert np.array_equal(a, b)


def test_pgd_reports_non_finite_gradient():
    p = small_params(2, seed=0)
    p.W1[0, 0] = np.nan
    with pytest.raises(NumericalError, match="non-finite attack gradient at row 0"):
        pgd_attack(p, np.ones((2, 2)), 0.1, AttackConfig())


# ---------------------------------------------------------------- curves


def _toy_split(seed: int = 0):
    rng = np.random.default_rng(seed)
    x = np.vstack([rng.normal(0, 0.3, size=(30, 2)), rng.normal(4, 0.3, size=(10, 2))])
    y = np.array([0] * 30 + [1] * 10)
    return x, y


def test_attack_curve_clean_row_comes_first():
    p = small_params(2, seed=2)
    x, y = _toy_split()
    points = attack_curve(p, x, y, AttackConfig(epsilons=(0.1, 0.2), mode="fn"))
    assert [pt.epsilon for pt in points] == [0.0, 0.1, 0.2]
    assert all(pt.mode == "fn" for pt in points)
    from tccm.metrics import auprc, auroc

    clean = score(p, x).scores
    assert points[0].auroc == auroc(clean, y)
    assert points[0].auprc == auprc(clean, y)
    assert points[0].mean_targeted_score == pytest.approx(clean[y == 1].mean())


def test_attack_curve_targets_the_right_class():
    p = small_params(2, seed=2)
    x, y = _toy_split()
    fn = attack_curve(p, x, y, AttackConfig(epsilons=(0.3,), mode="fn"))
    fp = attack_curve(p, x, y, AttackConfig(epsilons=(0.3,), mode="fp"))
    # fn drives anomaly scores down, fp drives normal scores up
    assert fn[1].mean_targeted_score <= fn[0].mean_targeted_score
    assert fp[1].mean_targeted_score >= fp[0].mean_targeted_score
    assert fn[1].auroc <= fn[0].auroc + 1e-12
    assert fp[1].auroc <= fp[0].auroc + 1e-12


def test_attack_curve_needs_both_classes():
    p = small_params(2, seed=0)
    x = np.zeros((4, 2))
    with pytest.raises(MetricError, match="both classes"):
        attack_curve(p, x, np.zeros(4, dtype=int), AttackConfig())


# ---------------------------------------------------------------- certificate


def test_certified_margin_zero_epsilon_is_tight():
    p = small_params(3, seed=4)
    z = np.array([0.3, -0.2, 0.9])
    s = float(score(p, z[None, :]).scores[0])
    lo, hi = certified_margin(p, z, 0.0)
    assert lo == s
    assert hi == s


def test_certified_margin_zero_weights_d1():
    p = zero_params(1)
    lo, hi = certified_margin(p, np.array([2.0]), 0.5)
    # score is |z| = 2, Lhat = 0, slack = 1 * 0.5 * sqrt(1)
    assert lo == pytest.approx(1.5, abs=1e-12)
    assert hi == pytest.approx(2.5, abs=1e-12)


def test_certified_margin_rejects_negative_epsilon():
    with pytest.raises(ConfigError, match="epsilon must be >= 0"):
        certified_margin(zero_params(1), np.array([1.0]), -0.1)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 50), st.floats(0.05, 0.8, allow_nan=False))
def test_pgd_scores_respect_the_certificate(seed, epsilon):
    p = small_params(2, seed=seed % 4)
    lhat = lipschitz_upper_bound(p)
    row = np.random.default_rng(seed).normal(size=(1, 2))
    lo, hi = certified_margin(p, row[0], epsilon, lhat=lhat)
    for mode in ("fn", "fp"):
        attacked = pgd_attack(p, row, epsilon, AttackConfig(mode=mode))
        s = float(score(p, attacked).scores[0])
        assert lo - 1e-9 <= s <= hi + 1e-9
