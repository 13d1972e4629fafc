"""Figure rendering for the CLI report paths.

Every figure here accompanies a delimited text artifact written next to
it; the CSVs are the primary outputs and the PNGs are the human view of
the same numbers.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .data import CORRELATION_NAMES, FEATURE_NAMES, Dataset
from .eval import ComparisonTable, SweepResult
from .neural import TrainingTrace

_DPI = 150


def _save(fig, path: str | Path) -> None:
    fig.savefig(Path(path), dpi=_DPI, bbox_inches="tight")
    plt.close(fig)


def save_correlation_heatmap(matrix: np.ndarray, path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(7.5, 6.5))
    im = ax.imshow(matrix, vmin=-1.0, vmax=1.0, cmap="RdBu_r")
    ax.set_xticks(range(len(CORRELATION_NAMES)))
    ax.set_yticks(range(len(CORRELATION_NAMES)))
    ax.set_xticklabels(CORRELATION_NAMES, rotation=45, ha="right")
    ax.set_yticklabels(CORRELATION_NAMES)
    for i in range(matrix.shape[0]):
        for j in range(matrix.shape[1]):
            ax.text(
                j, i, f"{matrix[i, j]:.2f}",
                ha="center", va="center", fontsize=7,
                color="white" if abs(matrix[i, j]) > 0.6 else "black",
            )
    ax.set_title("Feature and label correlation")
    fig.colorbar(im, ax=ax, shrink=0.8)
    _save(fig, path)


def save_class_distributions(dataset: Dataset, path: str | Path) -> None:
    """Violin plots of every feature, split by label."""
    fig, axes = plt.subplots(2, 4, figsize=(13, 6))
    labels = dataset.labels
    for ax, (j, name) in zip(axes.ravel(), enumerate(FEATURE_NAMES)):
        groups = [dataset.features[labels == k, j] for k in (0, 1)]
        parts = ax.violinplot(groups, positions=[0, 1], showmedians=True, widths=0.8)
        for body, color in zip(parts["bodies"], ("tab:blue", "tab:red")):
            body.set_facecolor(color)
            body.set_alpha(0.6)
        ax.set_title(name, fontsize=9)
        ax.set_xticks([0, 1])
        ax.set_xticklabels(["healthy", "infected"], fontsize=8)
    axes.ravel()[-1].axis("off")
    fig.suptitle("Feature distributions by infection status")
    fig.tight_layout()
    _save(fig, path)


def save_training_curves(trace: TrainingTrace, path: str | Path) -> None:
    epochs = [e.epoch for e in trace.entries]
    fig, (ax_loss, ax_acc) = plt.subplots(1, 2, figsize=(10, 4))
    ax_loss.plot(epochs, [e.train_loss for e in trace.entries], label="train")
    ax_acc.plot(epochs, [e.train_acc for e in trace.entries], label="train")
    if not np.isnan(trace.entries[0].val_loss):
        ax_loss.plot(epochs, [e.val_loss for e in trace.entries], label="validation")
        ax_acc.plot(epochs, [e.val_acc for e in trace.entries], label="validation")
    ax_loss.set_xlabel("epoch")
    ax_loss.set_ylabel("log-loss")
    ax_acc.set_xlabel("epoch")
    ax_acc.set_ylabel("accuracy")
    ax_loss.legend()
    ax_acc.legend()
    fig.suptitle("Training vs validation")
    fig.tight_layout()
    _save(fig, path)


def save_sweep_curves(result: SweepResult, path: str | Path) -> None:
    """Accuracy curves per learning rate plus a train-validation gap map."""
    mcws = list(result.grid.min_child_weights)
    fig, (ax_acc, ax_gap) = plt.subplots(1, 2, figsize=(11, 4.2))
    for lr in result.grid.learning_rates:
        cells = [result.cell(lr, m) for m in mcws]
        (line,) = ax_acc.plot(mcws, [c.train_acc for c in cells], marker="o",
                              label=f"train lr={lr:g}")
        ax_acc.plot(mcws, [c.val_acc for c in cells], marker="s",
                    linestyle="--", color=line.get_color(), label=f"val lr={lr:g}")
    ax_acc.set_xlabel("min_child_weight")
    ax_acc.set_ylabel("accuracy")
    ax_acc.legend(fontsize=7)
    gap = np.array(
        [[result.cell(lr, m).gap for m in mcws] for lr in result.grid.learning_rates]
    )
    im = ax_gap.imshow(gap, aspect="auto", cmap="viridis")
    ax_gap.set_xticks(range(len(mcws)))
    ax_gap.set_xticklabels([f"{m:g}" for m in mcws])
    ax_gap.set_yticks(range(len(result.grid.learning_rates)))
    ax_gap.set_yticklabels([f"{lr:g}" for lr in result.grid.learning_rates])
    ax_gap.set_xlabel("min_child_weight")
    ax_gap.set_ylabel("learning_rate")
    ax_gap.set_title("train - validation accuracy gap")
    fig.colorbar(im, ax=ax_gap, shrink=0.9)
    flat = ", ".join(sorted(result.flat_axes)) if result.flat_axes else "none"
    fig.suptitle(f"Overfit sweep: {result.family} (no-op axes: {flat})")
    fig.tight_layout()
    _save(fig, path)


def save_comparison_chart(table: ComparisonTable, path: str | Path) -> None:
    rows = [r for r in table.rows if r.metrics is not None]
    names = [r.name for r in rows]
    metric_names = ("accuracy", "precision", "recall", "f1")
    y = np.arange(len(rows))
    height = 0.2
    fig, ax = plt.subplots(figsize=(9, 0.65 * len(rows) + 2))
    for i, metric in enumerate(metric_names):
        values = [getattr(r.metrics, metric) for r in rows]
        ax.barh(y + (i - 1.5) * height, values, height=height, label=metric)
    ax.set_yticks(y)
    ax.set_yticklabels(names)
    ax.invert_yaxis()
    ax.set_xlim(0, 1)
    ax.set_xlabel("score")
    ax.legend(loc="lower right", fontsize=8)
    ax.set_title("Model comparison on the held-out test set")
    fig.tight_layout()
    _save(fig, path)
