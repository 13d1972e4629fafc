"""Command-line surface.

Subcommands: gen-data, inspect, train, predict, cv, sweep, compare.
Every command takes --seed (default 42) and produces byte-identical
primary output files when re-run with identical arguments. Report-style
commands render matplotlib figures next to their CSV outputs unless
--no-figures is given.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
Errors go to stderr with a machine-parsable prefix, e.g. "error:data: ...".
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import eval as evaluation
from .data import (
    GeneratorConfig,
    PatientRecord,
    class_summaries,
    correlation_to_csv,
    generate_synthetic,
    load_csv,
    pearson_correlation,
    save_csv,
    summaries_to_csv,
    train_test_split,
)
from .errors import DataError, NumericError
from .models import (
    MODEL_KINDS,
    MlpModel,
    VotingModel,
    fit_pipeline,
    make_model,
    sweep_family,
)
from .persist import load_model, save_model


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we want exit 1
        raise UsageError(message)


def _hyper_pairs(values: list[str] | None) -> dict:
    """Parse repeated --hyper key=value flags; values become int/float
    where possible."""
    out = {}
    for item in values or []:
        if "=" not in item:
            raise UsageError(f"--hyper expects key=value, got {item!r}")
        key, _, raw = item.partition("=")
        for cast in (int, float):
            try:
                out[key] = cast(raw)
                break
            except ValueError:
                continue
        else:
            out[key] = raw
    return out


def _float_list(text: str, flag: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"{flag} expects a comma-separated list of numbers") from None


def _write_text(path: str | Path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def _print_metrics(report: evaluation.MetricsReport) -> None:
    for name in ("accuracy", "precision", "recall", "f1"):
        print(f"{name}={getattr(report, name):.4f}")
    cm = report.confusion
    print(f"confusion tp={cm.tp} fp={cm.fp} fn={cm.fn} tn={cm.tn}")


def build_parser() -> _Parser:
    parser = _Parser(prog="sympred", description=__doc__.strip().split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a calibrated synthetic dataset")
    p.add_argument("--n", type=int, default=4000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--class-balance", type=float, default=0.5)
    p.add_argument("--out", required=True)
    p.add_argument("--bayes-out", help="also write the exact per-record posterior")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("inspect", help="correlation matrix and per-class summaries")
    p.add_argument("--data", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("train", help="train one model, report test metrics, save it")
    p.add_argument("--model", required=True, choices=MODEL_KINDS)
    p.add_argument("--data", required=True)
    p.add_argument("--test-ratio", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.add_argument("--trace-out", help="write the mlp per-epoch training trace CSV")
    p.add_argument("--hyper", action="append", metavar="KEY=VALUE")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="score one patient with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--age", type=float, required=True)
    p.add_argument("--temp", type=float, required=True)
    for name in ("fatigue", "cough", "body-pain", "sore-throat", "breathing-difficulty"):
        p.add_argument(f"--{name}", type=int, required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("cv", help="k-fold cross-validation of one model kind")
    p.add_argument("--model", required=True, choices=MODEL_KINDS)
    p.add_argument("--data", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", help="write per-fold metrics CSV")
    p.add_argument("--hyper", action="append", metavar="KEY=VALUE")
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("sweep", help="train/validation surface over the regularization grid")
    p.add_argument("--model", required=True, choices=[k for k in MODEL_KINDS if k != "voting"])
    p.add_argument("--data", required=True)
    p.add_argument("--val-ratio", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.add_argument("--learning-rates", default="0.01,0.05,0.1,0.3")
    p.add_argument("--min-child-weights", default="1,5,10,20")
    p.add_argument("--hyper", action="append", metavar="KEY=VALUE")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="train and score every model kind")
    p.add_argument("--data", required=True)
    p.add_argument("--test-ratio", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_compare)

    return parser


def cmd_gen_data(args) -> None:
    config = GeneratorConfig(n=args.n, class_balance=args.class_balance, seed=args.seed)
    dataset, bayes = generate_synthetic(config)
    save_csv(dataset, args.out)
    if args.bayes_out:
        _write_text(
            args.bayes_out,
            "bayes_probability\n" + "".join(f"{p!r}\n" for p in bayes),
        )
    rate = float(dataset.labels.mean()) if len(dataset) else float("nan")
    print(f"wrote {len(dataset)} records to {args.out} (infected rate {rate:.4f})")


def cmd_inspect(args) -> None:
    dataset = load_csv(args.data)
    if not dataset.labeled:
        raise DataError("inspect requires a labeled dataset")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    corr = pearson_correlation(dataset)
    _write_text(out_dir / "correlation.csv", correlation_to_csv(corr))
    rows = class_summaries(dataset)
    _write_text(out_dir / "class_summary.csv", summaries_to_csv(rows))
    if not args.no_figures:
        from . import report

        report.save_correlation_heatmap(corr, out_dir / "correlation.png")
        report.save_class_distributions(dataset, out_dir / "distributions.png")
    print(f"records={len(dataset)} infected_rate={dataset.labels.mean():.4f}")
    print(f"correlation(age, infected)={corr[0, 7]:.4f}")
    print(f"wrote correlation.csv and class_summary.csv to {out_dir}")


def cmd_train(args) -> None:
    dataset = load_csv(args.data)
    train, test = train_test_split(dataset, args.test_ratio, args.seed)
    print(f"train_size={len(train)} test_size={len(test)}")
    overrides = _hyper_pairs(args.hyper)
    trained = fit_pipeline(args.model, train, args.seed, overrides, validation=test)
    report_metrics = evaluation.compute_metrics(
        test.labels, (np.asarray(trained.predict_proba(test.features)) >= 0.5).astype(int)
    )
    print(f"model={args.model}")
    _print_metrics(report_metrics)
    save_model(trained, args.out)
    print(f"wrote model to {args.out}")
    if args.trace_out:
        model = trained.model
        if not isinstance(model, MlpModel):
            raise UsageError("--trace-out is only meaningful for --model mlp")
        _write_text(args.trace_out, model.trace.to_csv())
        print(f"wrote training trace to {args.trace_out}")
        if not args.no_figures:
            from . import report

            figure = Path(args.trace_out).with_suffix(".png")
            report.save_training_curves(model.trace, figure)
            print(f"wrote figure to {figure}")


def cmd_predict(args) -> None:
    trained = load_model(args.model)
    record = PatientRecord(
        age=args.age,
        body_temperature=args.temp,
        fatigue=args.fatigue,
        cough=args.cough,
        body_pain=args.body_pain,
        sore_throat=args.sore_throat,
        breathing_difficulty=args.breathing_difficulty,
    )
    proba = float(np.asarray(trained.predict_proba(record.features()[None, :]))[0])
    print(f"probability={proba:.4f} class={int(proba >= 0.5)}")


def cmd_cv(args) -> None:
    dataset = load_csv(args.data)
    overrides = _hyper_pairs(args.hyper)
    report = evaluation.cross_validate(
        lambda seed: make_model(args.model, seed, **overrides), dataset, args.k, args.seed
    )
    print(f"model={args.model} k={args.k}")
    for i, fold in enumerate(report.folds):
        print(
            f"fold={i} accuracy={fold.accuracy:.4f} precision={fold.precision:.4f} "
            f"recall={fold.recall:.4f} f1={fold.f1:.4f} n={fold.confusion.total}"
        )
    for name in ("accuracy", "precision", "recall", "f1"):
        print(f"{name} mean={report.means[name]:.4f} std={report.stds[name]:.4f}")
    if args.out:
        _write_text(args.out, evaluation.cv_to_csv(report))
        print(f"wrote cv report to {args.out}")


def cmd_sweep(args) -> None:
    dataset = load_csv(args.data)
    train, validation = train_test_split(dataset, args.val_ratio, args.seed)
    grid = evaluation.SweepGrid(
        learning_rates=_float_list(args.learning_rates, "--learning-rates"),
        min_child_weights=_float_list(args.min_child_weights, "--min-child-weights"),
    )
    family = sweep_family(args.model, **_hyper_pairs(args.hyper))
    result = evaluation.overfit_sweep(family, train, validation, grid, args.seed)
    _write_text(args.out, evaluation.sweep_to_csv(result))
    if result.flat_axes:
        print(f"note: axes with no effect for {args.model}: {', '.join(sorted(result.flat_axes))}")
    for cell in result.cells:
        print(
            f"lr={cell.learning_rate:g} mcw={cell.min_child_weight:g} "
            f"train_acc={cell.train_acc:.4f} val_acc={cell.val_acc:.4f} "
            f"gap={cell.gap:.4f}"
        )
    print(f"wrote sweep to {args.out}")
    if not args.no_figures:
        from . import report

        figure = Path(args.out).with_suffix(".png")
        report.save_sweep_curves(result, figure)
        print(f"wrote figure to {figure}")


def _compare_specs() -> list[evaluation.CompareSpec]:
    specs = [
        evaluation.CompareSpec(kind, factory=lambda seed, k=kind: make_model(k, seed))
        for kind in MODEL_KINDS
        if kind != "voting"
    ]
    specs.append(
        evaluation.CompareSpec(
            "voting", from_members=lambda members: VotingModel(members=list(members))
        )
    )
    return specs


def cmd_compare(args) -> None:
    dataset = load_csv(args.data)
    train, test = train_test_split(dataset, args.test_ratio, args.seed)
    print(f"train_size={len(train)} test_size={len(test)}")
    table = evaluation.compare_models(_compare_specs(), train, test, args.seed)
    _write_text(args.out, evaluation.comparison_to_csv(table))
    for row in table.rows:
        if row.metrics is None:
            print(f"model={row.name} FAILED: {row.error}", file=sys.stderr)
        else:
            m = row.metrics
            print(
                f"model={row.name} accuracy={m.accuracy:.4f} "
                f"precision={m.precision:.4f} recall={m.recall:.4f} f1={m.f1:.4f}"
            )
    print(f"wrote comparison to {args.out}")
    if not args.no_figures:
        from . import report

        figure = Path(args.out).with_suffix(".png")
        report.save_comparison_chart(table, figure)
        print(f"wrote figure to {figure}")


def run_cli(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error:usage: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        args.func(args)
    except UsageError as exc:
        print(f"error:usage: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:  # includes ModelFormatError
        print(f"error:data: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error:data: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"error:numeric: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:  # bad option combinations reaching the library
        print(f"error:usage: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run_cli())
