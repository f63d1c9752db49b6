"""Acceptance suite: the ten headline guarantees, one test per criterion.

Each test measures first, prints a single `criterion-NN: PASS/FAIL — detail`
line (mirrored into the terminal summary by conftest), and only then asserts,
so a red criterion still leaves its measured numbers in the log.

Criterion 1 evaluates every benchmark CSV present under data/; only wine.csv
is redistributable (rebuilt from sklearn's copy of the UCI data, see
scripts/build_wine_csv.py). The ADBench-hosted datasets are evaluated too
once exported locally with scripts/export_adbench.py.
"""
import math
import os
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from tccm.cli import main
from tccm.configs import defaults_for
from tccm.data import (
    Dataset,
    fit_scaler,
    load_csv,
    split_semi_supervised,
    transform,
    write_csv,
)
from tccm.embedding import TimeEmbeddingConfig
from tccm.errors import TccmError
from tccm.metrics import auprc, auroc
from tccm.model import (
    flatten_params,
    init_params,
    lipschitz_upper_bound,
    param_leaves,
    score,
    unflatten_params,
)
from tccm.rng import mix
from tccm.robustness import AttackConfig, attack_curve
from tccm.synthetic import (
    chi_mean,
    explanation_metrics,
    make_interpretability_dataset,
    mismatch_study,
    noncentral_chi_mean_mc,
    sample_gmm,
    shift_anomaly_spec,
    shift_normal_spec,
)
from tccm.tape import Tape, grad_check
from tccm.trainer import TrainConfig, _loss_node, train

from test_metrics import brute_auprc, brute_auroc

DATA_DIR = os.path.join(os.path.dirname(__file__), "..", "data")


def _verdict(num: int, ok: bool, detail: str) -> str:
    line = f"criterion-{num:02d}: {'PASS' if ok else 'FAIL'} — {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return line


# ------------------------------------------------------------- 1: benchmarks

# (reference mean AUROC, reference mean AUPRC or None, CSV path)
BENCHMARKS = {
    "breastw": (0.990, 0.987, os.path.join(DATA_DIR, "adbench", "breastw.csv")),
    "ionosphere": (0.976, 0.983, os.path.join(DATA_DIR, "adbench", "ionosphere.csv")),
    "wbc": (0.986, None, os.path.join(DATA_DIR, "adbench", "wbc.csv")),
    "wine": (0.976, None, os.path.join(DATA_DIR, "wine.csv")),
    "pima": (0.735, None, os.path.join(DATA_DIR, "adbench", "pima.csv")),
}


def _five_seed_means(path: str) -> tuple[float, float]:
    dataset = load_csv(path)
    stem = os.path.splitext(os.path.basename(path))[0]
    bundled = defaults_for(stem)
    rocs, prcs = [], []
    for seed in range(5):
        plan = split_semi_supervised(dataset, seed)
        scaler = fit_scaler(dataset, plan.train_indices)
        params = init_params(dataset.n_features, seed=seed)
        params, _ = train(
            transform(scaler, dataset.X[plan.train_indices]), params,
            TrainConfig(epochs=bundled.epochs, batch_size=bundled.batch_size,
                        loss_kind=bundled.loss_kind, seed=seed))
        report = score(params, transform(scaler, dataset.X[plan.test_indices]))
        labels = dataset.y[plan.test_indices]
        rocs.append(auroc(report.scores, labels))
        prcs.append(auprc(report.scores, labels))
    return float(np.mean(rocs)), float(np.mean(prcs))


def test_criterion_01_small_dataset_benchmarks():
    started = time.perf_counter()
    measured, missing, ok = [], [], True
    for name, (ref_roc, ref_prc, path) in BENCHMARKS.items():
        if not os.path.exists(path):
            missing.append(name)
            continue
        mean_roc, mean_prc = _five_seed_means(path)
        within = abs(mean_roc - ref_roc) <= 0.03
        if ref_prc is not None:
            within = within and abs(mean_prc - ref_prc) <= 0.05
        ok = ok and within
        measured.append(f"{name} auroc={mean_roc:.4f} (ref {ref_roc}) auprc={mean_prc:.4f}")
    elapsed = time.perf_counter() - started
    detail = "; ".join(measured)
    if missing:
        detail += (f"; partial — skipped {', '.join(missing)}: CSVs not bundled, "
                   f"export with scripts/export_adbench.py")
    line = _verdict(1, ok and bool(measured), f"{detail} [{elapsed:.1f}s]")
    assert ok and measured, line
    assert elapsed < 300.0, line


# ------------------------------------------------------------- 2: mismatch


def test_criterion_02_mismatch_scores_separate():
    started = time.perf_counter()
    cells, ok = [], True
    for seed in (0, 1):
        for r in mismatch_study([2, 5, 10, 15, 20], seed=seed):
            good = r.auroc > 0.9 and r.anomaly_median > r.normal_median
            ok = ok and good
            cells.append(f"s{seed}/d{r.dim}={r.auroc:.3f}")
    elapsed = time.perf_counter() - started
    line = _verdict(2, ok, f"auroc per seed/dim {' '.join(cells)} [{elapsed:.1f}s]")
    assert ok, line
    assert elapsed < 180.0, line


# ------------------------------------------------------------- 3: attributions


def test_criterion_03_attribution_quality():
    started = time.perf_counter()
    rows, ok = [], True
    for d in (5, 10, 15, 20, 25):
        dataset, truth = make_interpretability_dataset(d, seed=0)
        plan = split_semi_supervised(dataset, seed=0)
        scaler = fit_scaler(dataset, plan.train_indices)
        params = init_params(d, seed=0)
        params, _ = train(transform(scaler, dataset.X[plan.train_indices]), params,
                          TrainConfig(epochs=100, seed=0, loss_kind="mse"))
        x_test = transform(scaler, dataset.X[plan.test_indices])
        y_test = dataset.y[plan.test_indices]
        report = score(params, x_test, with_attributions=True)
        anomaly_rows = np.flatnonzero(y_test == 1)
        anomaly_ids = plan.test_indices[anomaly_rows] - (dataset.n_rows - len(truth))
        predicted = []
        for row, aid in zip(anomaly_rows, anomaly_ids):
            k = len(truth[aid])
            top = np.argsort(-report.attributions[row], kind="stable")[:k]
            predicted.append(frozenset(int(i) for i in top))
        exact, jaccard = explanation_metrics(predicted, [truth[i] for i in anomaly_ids])
        a, p = auroc(report.scores, y_test), auprc(report.scores, y_test)
        floor = 0.99 if d <= 15 else 0.98
        good = (exact >= floor and (d > 15 or jaccard >= 0.99)
                and abs(a - 1.0) <= 1e-6 and abs(p - 1.0) <= 1e-6)
        ok = ok and good
        rows.append(f"d{d} exact={exact:.3f} jac={jaccard:.3f} auroc={a:.4f}")
    elapsed = time.perf_counter() - started
    line = _verdict(3, ok, f"{'; '.join(rows)} [{elapsed:.1f}s]")
    assert ok, line
    assert elapsed < 180.0, line


# ------------------------------------------------------------- 4: PGD attacks


def test_criterion_04_pgd_attack_resilience():
    started = time.perf_counter()
    d, seed = 2, 0
    train_x = sample_gmm(shift_normal_spec(d), 5000, mix(seed, 10))
    test_normal = sample_gmm(shift_normal_spec(d), 4000, mix(seed, 11))
    test_anomaly = sample_gmm(shift_anomaly_spec(d), 1000, mix(seed, 12))
    scaler = fit_scaler(train_x, np.arange(5000))
    params = init_params(d, seed=seed)
    params, _ = train(transform(scaler, train_x), params,
                      TrainConfig(epochs=100, seed=seed, loss_kind="mse"))
    x_test = np.vstack([transform(scaler, test_normal), transform(scaler, test_anomaly)])
    y_test = np.array([0] * 4000 + [1] * 1000)

    fn_eps = tuple(round(0.1 * i, 1) for i in range(1, 31))
    fn_points = attack_curve(params, x_test, y_test, AttackConfig(epsilons=fn_eps, mode="fn"))
    fp_eps = tuple(round(0.1 * i, 1) for i in range(1, 11))
    fp_points = attack_curve(params, x_test, y_test, AttackConfig(epsilons=fp_eps, mode="fp"))

    for p in fn_points:
        print(f"fn eps={p.epsilon:.1f} auroc={p.auroc:.6f} auprc={p.auprc:.6f} "
              f"mean_anomaly_score={p.mean_targeted_score:.4f}")
    for p in fp_points:
        print(f"fp eps={p.epsilon:.1f} auroc={p.auroc:.6f} auprc={p.auprc:.6f} "
              f"mean_normal_score={p.mean_targeted_score:.4f}")

    fn_ok = all(p.auroc >= 1.0 - 1e-9 and p.auprc >= 1.0 - 1e-9 for p in fn_points)
    fp_ok = all(p.auroc > 0.9 for p in fp_points)
    elapsed = time.perf_counter() - started
    worst_fn = min(fn_points, key=lambda p: p.auroc)
    worst_fp = min(fp_points, key=lambda p: p.auroc)
    line = _verdict(
        4, fn_ok and fp_ok,
        f"fn worst auroc={worst_fn.auroc:.4f} at eps={worst_fn.epsilon:.1f} "
        f"(need 1.0 for all eps<=3.0); fp worst auroc={worst_fp.auroc:.4f} at "
        f"eps={worst_fp.epsilon:.1f} (need >0.9 for eps<=1.0) [{elapsed:.1f}s]")
    assert elapsed < 300.0, line
    assert fn_ok and fp_ok, line


# ------------------------------------------------------------- 5: score laws


def test_criterion_05_chi_law_oracles():
    err1 = abs(chi_mean(1) - math.sqrt(2.0 / math.pi))
    err2 = abs(chi_mean(2) - math.sqrt(math.pi / 2.0))
    mean, stderr = noncentral_chi_mean_mc(5, lam=9.0, n=1_000_000, seed=0)
    excess_se = (mean - chi_mean(5)) / stderr
    ok = err1 < 1e-9 and err2 < 1e-9 and excess_se > 5.0
    line = _verdict(5, ok, f"closed-form errs {err1:.2e}/{err2:.2e}; "
                           f"noncentral excess={excess_se:.0f} stderr")
    assert ok, line


# ------------------------------------------------------------- 6: gradients


def _loss_grad_fn(template, batch, t, cfg):
    names = [name for name, _ in template.named_arrays()]

    def fn(flat):
        p = unflatten_params(template, flat)
        tape = Tape()
        nodes = param_leaves(tape, p)
        root = _loss_node(tape, p, nodes, batch, t, cfg, noise=None)
        tape.backward(root)
        grads = [
            nodes[n].grad.ravel() if nodes[n].grad is not None
            else np.zeros(nodes[n].value.size)
            for n in names
        ]
        return float(root.value), np.concatenate(grads)

    return fn


def test_criterion_06_training_gradients_match_finite_differences():
    worst = 0.0
    for i in range(20):
        rng = np.random.default_rng(1000 + i)
        d = 1 + i % 5
        params = init_params(d, TimeEmbeddingConfig(dim=4), seed=i, hidden=(5, 4))
        # check at a fully random point: the freshly initialized parameters
        # have exactly-zero biases, which can park a ReLU on its kink where
        # the subgradient convention and central differences legally disagree
        theta = rng.normal(scale=0.4, size=flatten_params(params).size)
        batch = rng.normal(size=(3 + i % 5, d))
        t = rng.uniform(0.05, 1.0, size=batch.shape[0])
        cfg = TrainConfig(epochs=1, seed=i,
                          loss_kind="l2" if i % 2 == 0 else "mse",
                          time_interpolation=(i % 3 == 0))
        err = grad_check(_loss_grad_fn(params, batch, t, cfg), theta)
        worst = max(worst, err)
    ok = worst < 1e-4
    line = _verdict(6, ok, f"max rel err {worst:.2e} over 20 random (theta, batch) instances")
    assert ok, line


# ------------------------------------------------------------- 7: score Lipschitz bound


def test_criterion_07_score_difference_bound():
    violations, worst_ratio = 0, 0.0
    for i in range(10):
        d = 2 + i % 3
        params = init_params(d, TimeEmbeddingConfig(dim=8), seed=i, hidden=(16, 16))
        lhat = lipschitz_upper_bound(params)
        rng = np.random.default_rng(i)
        x1 = rng.normal(scale=3.0, size=(10_000, d))
        x2 = rng.normal(scale=3.0, size=(10_000, d))
        diff = np.abs(score(params, x1).scores - score(params, x2).scores)
        bound = (lhat + 1.0) * np.linalg.norm(x1 - x2, axis=1)
        violations += int(np.sum(diff > bound + 1e-9 * np.maximum(1.0, bound)))
        worst_ratio = max(worst_ratio, float(np.max(diff / bound)))
    ok = violations == 0
    line = _verdict(7, ok, f"{violations} violations over 10 models x 10,000 pairs; "
                           f"tightest diff/bound ratio {worst_ratio:.3f}")
    assert ok, line


# ------------------------------------------------------------- 8: t-insensitivity


def test_criterion_08_fixed_time_choice_is_uncritical(ring):
    aurocs = [
        auroc(score(ring.params, ring.x_test, t_fixed=round(0.1 * i, 1)).scores,
              ring.y_test)
        for i in range(1, 11)
    ]
    spread = max(aurocs) - min(aurocs)
    ok = spread <= 0.05
    line = _verdict(8, ok, f"ring auroc range over t in 0.1..1.0 = {spread:.4f} "
                           f"(min {min(aurocs):.4f}, max {max(aurocs):.4f})")
    assert ok, line


# ------------------------------------------------------------- 9: determinism


def test_criterion_09_reruns_are_byte_identical(tmp_path):
    rng = np.random.default_rng(0)
    x = np.vstack([rng.normal(0, 0.4, size=(80, 3)), rng.normal(4, 0.4, size=(16, 3))])
    ds = Dataset(X=x, y=np.array([0] * 80 + [1] * 16),
                 feature_names=("a", "b", "c"), source="toy")
    data = tmp_path / "toy.csv"
    write_csv(ds, str(data))

    outs = []
    for tag in ("one", "two"):
        ckpt = tmp_path / f"{tag}.json"
        scores = tmp_path / f"{tag}_scores.csv"
        assert main(["train", "--data", str(data), "--epochs", "8", "--seed", "3",
                     "--out", str(ckpt)]) == 0
        assert main(["score", "--model", str(ckpt), "--data", str(data),
                     "--out", str(scores)]) == 0
        outs.append((ckpt.read_bytes(), scores.read_bytes()))
    same_runs = outs[0] == outs[1]

    # save -> load -> save must reproduce the checkpoint byte for byte
    from tccm.checkpoint import load_checkpoint, save_checkpoint

    params, scaler, t_fixed, prov = load_checkpoint(str(tmp_path / "one.json"))
    resaved = tmp_path / "resaved.json"
    save_checkpoint(str(resaved), params, scaler, t_fixed=t_fixed, provenance=prov)
    same_ckpt = resaved.read_bytes() == outs[0][0]

    ok = same_runs and same_ckpt
    line = _verdict(9, ok, f"identical reruns={same_runs}, "
                           f"save/load/save byte-identical={same_ckpt}")
    assert ok, line


# ------------------------------------------------------------- 10: metric oracles


def test_criterion_10_ranking_metrics_match_enumeration():
    rng = np.random.default_rng(42)
    worst = 0.0
    for i in range(100):
        n = int(rng.integers(2, 31))
        if i % 2 == 0:
            scores = rng.integers(0, 5, size=n).astype(float)  # heavy ties
        else:
            scores = rng.normal(size=n)
        labels = rng.integers(0, 2, size=n)
        if labels.sum() == 0:
            labels[int(rng.integers(0, n))] = 1
        if labels.sum() == n:
            labels[int(rng.integers(0, n))] = 0
        worst = max(worst,
                    abs(auroc(scores, labels) - brute_auroc(scores, labels)),
                    abs(auprc(scores, labels) - brute_auprc(scores, labels)))
    ok = worst < 1e-12
    line = _verdict(10, ok, f"max |fast - enumerated| = {worst:.2e} over 100 instances")
    assert ok, line
