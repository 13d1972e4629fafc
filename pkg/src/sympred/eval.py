"""Evaluation harness: metrics, cross-validation, overfit sweeps, comparison.

Conventions, documented once and used everywhere:
  - the positive class is infected (1); precision/recall/F1 are for it
  - any 0/0 metric denominator yields 0
  - classification threshold is probability >= 0.5
  - log-loss clips probabilities at 1e-15 (tree leaves can emit exact 0/1)
  - cross-validation aggregates are the arithmetic mean of per-fold
    metrics (not pooled counts), with population stddev

Sweep cells and CV folds are independent; this implementation runs them
sequentially and assembles results in grid/fold order, which is also the
deterministic order any concurrent runner would have to produce.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .data import Dataset, fit_standardizer, make_folds
from .linear import log_loss
from .models import Model, SweepFamily
from .rng import derive_seed

METRIC_NAMES = ("accuracy", "precision", "recall", "f1")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    confusion: ConfusionMatrix

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in METRIC_NAMES}


def _ratio(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def compute_metrics(y_true: np.ndarray, y_pred: np.ndarray) -> MetricsReport:
    """Accuracy, precision, recall, F1 for the positive class."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape:
        raise ValueError("y_true and y_pred must have equal length")
    if y_true.size == 0:
        raise ValueError("cannot compute metrics on empty input")
    t, p = y_true == 1, y_pred == 1
    cm = ConfusionMatrix(
        tp=int(np.sum(t & p)),
        fp=int(np.sum(~t & p)),
        fn=int(np.sum(t & ~p)),
        tn=int(np.sum(~t & ~p)),
    )
    precision = _ratio(cm.tp, cm.tp + cm.fp)
    recall = _ratio(cm.tp, cm.tp + cm.fn)
    return MetricsReport(
        accuracy=_ratio(cm.tp + cm.tn, cm.total),
        precision=precision,
        recall=recall,
        f1=_ratio(2.0 * precision * recall, precision + recall),
        confusion=cm,
    )


def evaluate_model(model: Model, x: np.ndarray, y: np.ndarray) -> MetricsReport:
    return compute_metrics(y, model.predict(x))


# ---------------------------------------------------------------------------
# Cross-validation
# ---------------------------------------------------------------------------


@dataclass
class CvReport:
    k: int
    folds: list[MetricsReport]
    means: dict[str, float]
    stds: dict[str, float]


def cross_validate(
    model_factory: Callable[[int], Model], dataset: Dataset, k: int, seed: int
) -> CvReport:
    """Stratified k-fold: fit standardizer and model on k-1 folds, score
    the held-out fold; every record is evaluated exactly once."""
    assignment = make_folds(dataset, k, seed)
    reports = []
    for i in range(k):
        train = dataset.subset(assignment.train_indices(i))
        val = dataset.subset(assignment.validation_indices(i))
        standardizer = fit_standardizer(train)
        model = model_factory(derive_seed(seed, "cv-fold", i))
        model.fit(standardizer.apply(train), train.labels.astype(np.float64))
        reports.append(evaluate_model(model, standardizer.apply(val), val.labels))
    means = {
        name: float(np.mean([getattr(r, name) for r in reports])) for name in METRIC_NAMES
    }
    stds = {
        name: float(np.std([getattr(r, name) for r in reports])) for name in METRIC_NAMES
    }
    return CvReport(k=k, folds=reports, means=means, stds=stds)


def cv_to_csv(report: CvReport) -> str:
    lines = ["fold,accuracy,precision,recall,f1"]
    for i, r in enumerate(report.folds):
        lines.append(f"{i},{r.accuracy!r},{r.precision!r},{r.recall!r},{r.f1!r}")
    lines.append(
        "mean," + ",".join(repr(report.means[name]) for name in METRIC_NAMES)
    )
    lines.append(
        "stddev," + ",".join(repr(report.stds[name]) for name in METRIC_NAMES)
    )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Overfit sweep
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepGrid:
    learning_rates: tuple[float, ...] = (0.01, 0.05, 0.1, 0.3)
    min_child_weights: tuple[float, ...] = (1.0, 5.0, 10.0, 20.0)

    def validate(self) -> None:
        if not self.learning_rates or not self.min_child_weights:
            raise ValueError("sweep grid must be nonempty")


@dataclass(frozen=True)
class SweepCell:
    learning_rate: float
    min_child_weight: float
    train_acc: float
    val_acc: float
    train_logloss: float
    val_logloss: float

    @property
    def gap(self) -> float:
        return self.train_acc - self.val_acc


@dataclass
class SweepResult:
    family: str
    grid: SweepGrid
    cells: list[SweepCell]  # row-major: learning_rate outer, mcw inner
    flat_axes: frozenset[str]

    def cell(self, learning_rate: float, min_child_weight: float) -> SweepCell:
        for c in self.cells:
            if c.learning_rate == learning_rate and c.min_child_weight == min_child_weight:
                return c
        raise KeyError((learning_rate, min_child_weight))


def overfit_sweep(
    family: SweepFamily,
    train: Dataset,
    validation: Dataset,
    grid: SweepGrid = SweepGrid(),
    seed: int = 42,
) -> SweepResult:
    """One full train/eval per grid cell on identical data and seed."""
    grid.validate()
    standardizer = fit_standardizer(train)
    x, y = standardizer.apply(train), train.labels.astype(np.float64)
    xv, yv = standardizer.apply(validation), validation.labels
    cell_seed = derive_seed(seed, "sweep", family.name)
    cells = []
    for lr in grid.learning_rates:
        for mcw in grid.min_child_weights:
            model = family.make(lr, mcw, cell_seed)
            model.fit(x, y)
            p_train = np.asarray(model.predict_proba(x))
            p_val = np.asarray(model.predict_proba(xv))
            cells.append(
                SweepCell(
                    learning_rate=lr,
                    min_child_weight=mcw,
                    train_acc=float(np.mean((p_train >= 0.5) == (y == 1.0))),
                    val_acc=float(np.mean((p_val >= 0.5) == (yv == 1))),
                    train_logloss=log_loss(y, p_train),
                    val_logloss=log_loss(yv, p_val),
                )
            )
    return SweepResult(family=family.name, grid=grid, cells=cells, flat_axes=family.flat_axes)


def sweep_to_csv(result: SweepResult) -> str:
    lines = ["learning_rate,min_child_weight,train_acc,val_acc,train_logloss,val_logloss"]
    for c in result.cells:
        lines.append(
            f"{c.learning_rate!r},{c.min_child_weight!r},{c.train_acc!r},"
            f"{c.val_acc!r},{c.train_logloss!r},{c.val_logloss!r}"
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Model comparison
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CompareSpec:
    """A named entry in the comparison: either a plain factory or a model
    composed from the previously trained members (the voting ensemble)."""

    name: str
    factory: Callable[[int], Model] | None = None
    from_members: Callable[[list[Model]], Model] | None = None


@dataclass
class ComparisonRow:
    name: str
    metrics: MetricsReport | None
    error: str | None = None


@dataclass
class ComparisonTable:
    rows: list[ComparisonRow]  # sorted by accuracy, failures last

    def row(self, name: str) -> ComparisonRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)


def compare_models(
    specs: Sequence[CompareSpec], train: Dataset, test: Dataset, seed: int
) -> ComparisonTable:
    """Train every spec on identical data; a failing model is reported as a
    failed row, never dropped."""
    standardizer = fit_standardizer(train)
    x, y = standardizer.apply(train), train.labels.astype(np.float64)
    xt, yt = standardizer.apply(test), test.labels
    rows: list[ComparisonRow] = []
    trained: list[Model] = []
    for spec in specs:
        try:
            if spec.factory is not None:
                model = spec.factory(derive_seed(seed, "compare", spec.name))
                model.fit(x, y)
                trained.append(model)
            elif spec.from_members is not None:
                model = spec.from_members(list(trained))
            else:
                raise ValueError(f"spec {spec.name!r} has no factory")
            rows.append(ComparisonRow(spec.name, evaluate_model(model, xt, yt)))
        except Exception as exc:  # a broken model must not hide the rest
            rows.append(ComparisonRow(spec.name, None, error=f"{type(exc).__name__}: {exc}"))
    rows.sort(key=lambda r: (-(r.metrics.accuracy if r.metrics else -np.inf), r.name))
    return ComparisonTable(rows=rows)


def comparison_to_csv(table: ComparisonTable) -> str:
    lines = ["model,accuracy,precision,recall,f1"]
    for r in table.rows:
        if r.metrics is None:
            lines.append(f"{r.name},,,,")
        else:
            m = r.metrics
            lines.append(f"{r.name},{m.accuracy!r},{m.precision!r},{m.recall!r},{m.f1!r}")
    return "\n".join(lines) + "\n"


def voting_predict(member_models: Sequence, x: np.ndarray) -> np.ndarray | float:
    """Soft vote: unweighted mean of member probabilities."""
    if not member_models:
        raise ValueError("need at least one member model")
    stacked = np.stack([np.asarray(m.predict_proba(x)) for m in member_models])
    mean = stacked.mean(axis=0)
    return float(mean) if mean.ndim == 0 else mean
