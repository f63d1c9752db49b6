"""Command-line interface.

Subcommands: train, score, explain, eval, synth, attack, epoch-select.
Exit codes: 0 success, 2 configuration error, 3 data-format/shape/metric
error, 4 numerical abort. Thread count of the underlying BLAS is controlled
by the standard OMP_NUM_THREADS environment variable; set it to 1 for
bit-stable runs across machines with different core counts.
"""
from __future__ import annotations

import argparse
import hashlib
import os
import sys

import numpy as np

from . import __version__
from .checkpoint import canonical_json, load_checkpoint, save_checkpoint
from .configs import defaults_for
from .data import (
    Dataset,
    fit_scaler,
    identity_scaler,
    inject_contamination,
    load_csv,
    split_for_contamination,
    split_semi_supervised,
    transform,
    write_csv,
)
from .embedding import SINUSOIDAL, TimeEmbeddingConfig
from .errors import (
    ConfigError,
    DataFormatError,
    DimensionError,
    MetricError,
    NumericalError,
    TccmError,
)
from .metrics import auprc, auroc, select_epochs
from .model import init_params, score
from .robustness import AttackConfig, attack_curve
from .synthetic import (
    chi_mean,
    explanation_metrics,
    make_figure1_dataset,
    make_interpretability_dataset,
    mismatch_study,
)
from .trainer import TrainConfig, train

_FLOAT = "%.17g"


def _fmt(x: float) -> str:
    return _FLOAT % float(x)


def _config_hash(payload: dict) -> str:
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()[:16]


# ---------------------------------------------------------------- subcommands


def _resolve_train_defaults(args) -> tuple[int, int | None, str]:
    """(epochs, batch_size, loss_kind), falling back to the bundled table."""
    stem = os.path.splitext(os.path.basename(args.data))[0]
    bundled = defaults_for(stem)
    epochs = args.epochs
    if epochs is None:
        if bundled is None:
            raise ConfigError(
                f"--epochs is required ({stem!r} has no bundled default)"
            )
        epochs = bundled.epochs
    batch = args.batch_size
    if batch is None and bundled is not None and args.epochs is None:
        batch = bundled.batch_size
    loss_kind = args.loss
    if loss_kind is None:
        loss_kind = bundled.loss_kind if bundled is not None and args.epochs is None else "l2"
    return epochs, batch, loss_kind


def cmd_train(args) -> int:
    dataset = load_csv(args.data)
    epochs, batch_size, loss_kind = _resolve_train_defaults(args)
    if args.contamination > 0:
        plan = split_for_contamination(dataset, args.seed)
        plan = inject_contamination(plan, dataset, args.contamination, args.seed)
    else:
        plan = split_semi_supervised(dataset, args.seed)
    scaler = (
        identity_scaler(dataset.n_features)
        if args.no_normalize
        else fit_scaler(dataset, plan.train_indices)
    )
    x_train = transform(scaler, dataset.X[plan.train_indices])
    cfg = TrainConfig(
        epochs=epochs,
        batch_size=batch_size,
        learning_rate=args.lr,
        loss_kind=loss_kind,
        noise_injection=args.noise_injection,
        time_interpolation=args.interpolate_time,
        seed=args.seed,
    )
    embed_cfg = TimeEmbeddingConfig(kind=args.embed_kind, dim=args.embed_dim)
    params = init_params(dataset.n_features, embed_cfg, seed=args.seed)
    train(x_train, params, cfg, log=print)
    save_checkpoint(
        args.out,
        params,
        scaler,
        t_fixed=1.0,
        provenance={
            "seed": args.seed,
            "epochs": epochs,
            "dataset": args.data,
            "config_hash": _config_hash({
                "epochs": epochs,
                "batch_size": 0 if batch_size is None else batch_size,
                "lr": args.lr,
                "loss": loss_kind,
                "noise_injection": args.noise_injection,
                "interpolate_time": args.interpolate_time,
                "no_normalize": args.no_normalize,
                "contamination": args.contamination,
                "embed_kind": args.embed_kind,
                "embed_dim": args.embed_dim,
                "seed": args.seed,
            }),
        },
    )
    print(f"checkpoint written to {args.out}")
    return 0


def _load_for_scoring(args) -> tuple:
    params, scaler, t_default, _ = load_checkpoint(args.model)
    dataset = load_csv(args.data, require_label=False)
    if dataset.n_features != params.input_dim:
        raise DimensionError(
            f"{args.data} has {dataset.n_features} features; "
            f"checkpoint expects {params.input_dim}"
        )
    t_fixed = t_default if args.t_fixed is None else args.t_fixed
    return params, scaler, dataset, t_fixed


def _write_scores_csv(
    path: str,
    dataset: Dataset,
    scores: np.ndarray,
    attributions: np.ndarray | None,
) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        header = ["row_index", "score"]
        if dataset.y is not None:
            header.append("label")
        if attributions is not None:
            header.extend(f"attr_{name}" for name in dataset.feature_names)
        fh.write(",".join(header) + "\n")
        for i in range(dataset.n_rows):
            row = [str(i), _fmt(scores[i])]
            if dataset.y is not None:
                row.append(str(int(dataset.y[i])))
            if attributions is not None:
                row.extend(_fmt(v) for v in attributions[i])
            fh.write(",".join(row) + "\n")


def cmd_score(args, explain: bool = False) -> int:
    params, scaler, dataset, t_fixed = _load_for_scoring(args)
    report = score(params, transform(scaler, dataset.X), t_fixed=t_fixed,
                   with_attributions=explain)
    _write_scores_csv(args.out, dataset, report.scores, report.attributions)
    print(f"scores written to {args.out}")
    return 0


def cmd_eval(args) -> int:
    if args.scores is not None:
        table = load_csv(args.scores, require_label=True)
        if "score" not in table.feature_names:
            raise DataFormatError(f"{args.scores}: no 'score' column")
        scores = table.X[:, table.feature_names.index("score")]
        labels = table.y
    else:
        if args.model is None or args.data is None:
            raise ConfigError("eval needs either --scores or both --model and --data")
        params, scaler, dataset, t_fixed = _load_for_scoring(args)
        if dataset.y is None:
            raise MetricError(f"{args.data}: labels required for evaluation")
        scores = score(params, transform(scaler, dataset.X), t_fixed=t_fixed).scores
        labels = dataset.y
    print(f"auroc={_fmt(auroc(scores, labels))} auprc={_fmt(auprc(scores, labels))}")
    return 0


def cmd_attack(args) -> int:
    params, scaler, dataset, t_fixed = _load_for_scoring(args)
    if dataset.y is None:
        raise MetricError(f"{args.data}: labels required for attack evaluation")
    epsilons = tuple(float(e) for e in args.epsilons.split(",")) if args.epsilons else None
    cfg = AttackConfig(mode=args.mode, **({"epsilons": epsilons} if epsilons else {}))
    points = attack_curve(params, transform(scaler, dataset.X), dataset.y, cfg,
                          t_fixed=t_fixed)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("epsilon,mode,auroc,auprc,mean_targeted_score\n")
        for p in points:
            line = (f"{_fmt(p.epsilon)},{p.mode},{_fmt(p.auroc)},"
                    f"{_fmt(p.auprc)},{_fmt(p.mean_targeted_score)}")
            fh.write(line + "\n")
            print(line)
    return 0


def cmd_epoch_select(args) -> int:
    dataset = load_csv(args.data)
    plan = split_semi_supervised(dataset, args.seed)
    scaler = fit_scaler(dataset, plan.train_indices)
    x_train = transform(scaler, dataset.X[plan.train_indices])
    candidates = [int(c) for c in args.candidates.split(",")]
    cfg = TrainConfig(epochs=max(candidates), learning_rate=args.lr,
                      loss_kind=args.loss or "l2", seed=args.seed)
    table: list = []
    best = select_epochs(x_train, cfg, candidates, assumed_rate=args.assumed_rate,
                         table=table)
    for epoch, report in table:
        t_str = "inf" if report.degenerate else _fmt(report.t)
        print(f"epochs={epoch} T={t_str} mu_top={_fmt(report.mu_o)} mu_rest={_fmt(report.mu_i)}")
    print(f"selected_epochs={best}")
    return 0


def _write_table(path: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row) + "\n")


def cmd_synth(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    study = args.study
    if study in ("ring", "moons", "clusters"):
        dataset = make_figure1_dataset(study, 1000, 200, args.seed)
        data_path = os.path.join(args.out, f"{study}.csv")
        write_csv(dataset, data_path)
        plan = split_semi_supervised(dataset, args.seed)
        scaler = fit_scaler(dataset, plan.train_indices)
        params = init_params(2, seed=args.seed)
        train(transform(scaler, dataset.X[plan.train_indices]), params,
              TrainConfig(epochs=150, seed=args.seed, loss_kind="mse"))
        x_test = transform(scaler, dataset.X[plan.test_indices])
        y_test = dataset.y[plan.test_indices]
        scores = score(params, x_test).scores
        a, p = auroc(scores, y_test), auprc(scores, y_test)
        _write_table(os.path.join(args.out, f"{study}_result.csv"),
                     ["kind", "auroc", "auprc"], [[study, a, p]])
        print(f"{study}: auroc={_fmt(a)} auprc={_fmt(p)} (data in {data_path})")
    elif study == "mismatch":
        results = mismatch_study([2, 5, 10, 15, 20], args.seed)
        rows = [[r.dim, r.auroc, r.auprc, r.normal_mean, r.normal_median,
                 r.anomaly_mean, r.anomaly_median, r.sigma_f_hat, r.chi_pred,
                 r.holdout_mean] for r in results]
        _write_table(os.path.join(args.out, "mismatch.csv"),
                     ["dim", "auroc", "auprc", "normal_mean", "normal_median",
                      "anomaly_mean", "anomaly_median", "sigma_f_hat", "chi_pred",
                      "holdout_mean"], rows)
        for r in results:
            print(f"d={r.dim} auroc={_fmt(r.auroc)} "
                  f"normal_median={_fmt(r.normal_median)} anomaly_median={_fmt(r.anomaly_median)}")
    elif study == "interpretability":
        rows = []
        for d in (5, 10, 15, 20, 25):
            dataset, truth = make_interpretability_dataset(d, args.seed)
            plan = split_semi_supervised(dataset, args.seed)
            scaler = fit_scaler(dataset, plan.train_indices)
            params = init_params(d, seed=args.seed)
            train(transform(scaler, dataset.X[plan.train_indices]), params,
                  TrainConfig(epochs=100, seed=args.seed, loss_kind="mse"))
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
            a = auroc(report.scores, y_test)
            p = auprc(report.scores, y_test)
            rows.append([d, exact, jaccard, a, p])
            print(f"d={d} exact_match={_fmt(exact)} jaccard={_fmt(jaccard)} "
                  f"auroc={_fmt(a)} auprc={_fmt(p)}")
        _write_table(os.path.join(args.out, "interpretability.csv"),
                     ["dim", "exact_match", "jaccard", "auroc", "auprc"], rows)
    elif study == "theory":
        rows = [[d, chi_mean(d, 1.0)] for d in range(1, 21)]
        _write_table(os.path.join(args.out, "theory.csv"), ["dim", "chi_mean"], rows)
        for d, value in rows[:5]:
            print(f"d={d} chi_mean={_fmt(value)}")
    else:
        raise ConfigError(f"unknown study {study!r}")
    return 0


# ------------------------------------------------------------------- parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tccm",
        description="Time-conditioned contraction matching for tabular anomaly detection.",
        epilog="Set OMP_NUM_THREADS to pin the BLAS thread count (1 = bit-stable).",
    )
    parser.add_argument("--version", action="version", version=f"tccm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model on the normal half of a CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--epochs", type=int, default=None,
                   help="defaults to the bundled per-dataset table when the file stem matches")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--lr", type=float, default=0.005)
    p.add_argument("--embed-dim", type=int, default=128)
    p.add_argument("--embed-kind", default=SINUSOIDAL,
                   choices=["sinusoidal", "linear_sin", "sinusoidal_mlp"])
    p.add_argument("--loss", choices=["l2", "mse"], default=None)
    p.add_argument("--noise-injection", action="store_true")
    p.add_argument("--interpolate-time", action="store_true")
    p.add_argument("--no-normalize", action="store_true")
    p.add_argument("--contamination", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_train)

    for name, explain in (("score", False), ("explain", True)):
        p = sub.add_parser(name, help=f"write per-row scores{' and attributions' if explain else ''}")
        p.add_argument("--model", required=True)
        p.add_argument("--data", required=True)
        p.add_argument("--t-fixed", type=float, default=None)
        p.add_argument("--out", required=True)
        p.set_defaults(fn=lambda a, e=explain: cmd_score(a, explain=e))

    p = sub.add_parser("eval", help="print auroc/auprc for scores or a model+data pair")
    p.add_argument("--scores", default=None)
    p.add_argument("--model", default=None)
    p.add_argument("--data", default=None)
    p.add_argument("--t-fixed", type=float, default=None)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("synth", help="run a synthetic study and write its tables")
    p.add_argument("--study", required=True,
                   choices=["ring", "moons", "clusters", "mismatch", "interpretability", "theory"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("attack", help="PGD attack curve against a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--mode", required=True, choices=["fn", "fp"])
    p.add_argument("--epsilons", default=None, help="comma-separated budgets")
    p.add_argument("--t-fixed", type=float, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_attack)

    p = sub.add_parser("epoch-select", help="label-free epoch choice via contrast score margin")
    p.add_argument("--data", required=True)
    p.add_argument("--candidates", required=True, help="comma-separated epoch counts")
    p.add_argument("--assumed-rate", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lr", type=float, default=0.005)
    p.add_argument("--loss", choices=["l2", "mse"], default=None)
    p.set_defaults(fn=cmd_epoch_select)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:  # includes DomainError
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DataFormatError, DimensionError, MetricError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except TccmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
