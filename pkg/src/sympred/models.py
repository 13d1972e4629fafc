"""Uniform model interface over every implemented family.

Eleven model kinds share fit(X, y)/predict_proba(X) so the evaluation
harness, CLI, and persistence can treat them interchangeably. X is always
the standardized feature matrix; standardization itself travels separately
(see TrainedModel) so persisted models can score raw records.

The overfit-sweep axis mapping lives here too: the paper-style
(learning_rate x min_child_weight) grid is applied to every family, with
min_child_weight translated to min_samples_leaf = ceil(c) for models
without hessians and either axis becoming a no-op (flagged flat) where a
family has no matching knob:

    gbt-depthwise / gbt-leafwise / catboost  native eta, native mcw
    logistic / svm / mlp                     eta = GD step; mcw no-op
    tree / forest / adaboost                 eta no-op; mcw -> leaf size
    knn                                      both no-op
"""

from __future__ import annotations

import abc
import hashlib
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import boosting, linear, neighbors, neural, trees
from .data import Dataset, Standardizer, fit_standardizer
from .rng import derive_seed

SYMPTOM_COLUMNS = (2, 3, 4, 5, 6)

MODEL_KINDS = (
    "logistic",
    "svm",
    "tree",
    "forest",
    "gbt-depthwise",
    "gbt-leafwise",
    "adaboost",
    "catboost",
    "knn",
    "mlp",
    "voting",
)


class Model(abc.ABC):
    """Anything trainable on (X, y) that emits a probability per row."""

    kind: str

    @abc.abstractmethod
    def fit(self, x: np.ndarray, y: np.ndarray) -> "Model":
        ...

    @abc.abstractmethod
    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        ...

    def predict(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(self.predict_proba(x)) >= 0.5).astype(np.int64)


class LogisticModel(Model):
    kind = "logistic"

    def __init__(self, config: linear.GdConfig = linear.GdConfig()):
        self.config = config
        self.params: linear.LinearModelParams | None = None

    def fit(self, x, y):
        self.params = linear.train_logistic(x, y, self.config)
        return self

    def predict_proba(self, x):
        return linear.logistic_predict_proba(self.params, x)


class SvmModel(Model):
    kind = "svm"

    def __init__(self, config: linear.GdConfig = linear.GdConfig()):
        self.config = config
        self.params: linear.LinearModelParams | None = None

    def fit(self, x, y):
        self.params = linear.train_linear_svm(x, y, self.config)
        return self

    def predict_proba(self, x):
        return linear.svm_predict_proba(self.params, x)


class DecisionTreeModel(Model):
    kind = "tree"

    def __init__(self, config: trees.TreeConfig = trees.TreeConfig()):
        self.config = config
        self.root: trees.TreeNode | None = None

    def fit(self, x, y):
        self.root = trees.train_decision_tree(x, y, self.config)
        return self

    def predict_proba(self, x):
        return trees.predict_tree(self.root, x)


class RandomForestModel(Model):
    kind = "forest"

    def __init__(self, config: trees.ForestConfig = trees.ForestConfig()):
        self.config = config
        self.forest: trees.RandomForest | None = None

    def fit(self, x, y):
        self.forest = trees.train_random_forest(x, y, self.config)
        return self

    def predict_proba(self, x):
        return trees.predict_forest(self.forest, x)


class GbtModel(Model):
    def __init__(self, config: boosting.GbtConfig = boosting.GbtConfig()):
        self.config = config
        self.kind = "gbt-depthwise" if config.growth == "depth_wise" else "gbt-leafwise"
        self.ensemble: boosting.GbtEnsemble | None = None

    def fit(self, x, y):
        self.ensemble = boosting.train_gbt(x, y, self.config)
        return self

    def predict_proba(self, x):
        return boosting.gbt_predict_proba(self.ensemble, x)


class AdaBoostModel(Model):
    kind = "adaboost"

    def __init__(self, n_rounds: int = 100, min_samples_leaf: int = 1, seed: int = 42):
        self.n_rounds = n_rounds
        self.min_samples_leaf = min_samples_leaf
        self.seed = seed
        self.ensemble: boosting.AdaBoostEnsemble | None = None

    def fit(self, x, y):
        self.ensemble = boosting.train_adaboost(
            x, y, n_rounds=self.n_rounds, seed=self.seed,
            min_samples_leaf=self.min_samples_leaf,
        )
        return self

    def predict_proba(self, x):
        return boosting.adaboost_predict(self.ensemble, x)


class CatBoostModel(Model):
    """Ordered target statistics over the symptom columns, then GBT.

    The binary symptoms stand in for categorical features to exercise the
    leakage-free encoder; age and temperature pass through untouched.
    """

    kind = "catboost"

    def __init__(
        self,
        config: boosting.GbtConfig = boosting.GbtConfig(),
        prior_weight: float = 1.0,
        columns: tuple[int, ...] = SYMPTOM_COLUMNS,
    ):
        self.config = config
        self.prior_weight = prior_weight
        self.columns = tuple(columns)
        self.encoder: boosting.OrderedEncoder | None = None
        self.ensemble: boosting.GbtEnsemble | None = None

    def fit(self, x, y):
        self.encoder = boosting.OrderedEncoder(
            self.columns, prior_weight=self.prior_weight, seed=self.config.seed
        )
        encoded = self.encoder.fit_transform(x, y)
        self.ensemble = boosting.train_gbt(encoded, y, self.config)
        return self

    def predict_proba(self, x):
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        encoded = self.encoder.transform(x[None, :] if single else x)
        p = boosting.gbt_predict_proba(self.ensemble, encoded)
        return float(np.asarray(p)[0]) if single else p


class KnnClassifier(Model):
    kind = "knn"

    def __init__(self, k: int = 5):
        self.k = k
        self.model: neighbors.KnnModel | None = None

    def fit(self, x, y):
        self.model = neighbors.fit_knn(x, y, k=self.k)
        return self

    def predict_proba(self, x):
        return neighbors.knn_predict_proba(self.model, x)


class MlpModel(Model):
    kind = "mlp"

    def __init__(
        self,
        architecture: neural.MlpArchitecture = neural.MlpArchitecture(),
        config: neural.MlpTrainConfig = neural.MlpTrainConfig(),
        validation: tuple[np.ndarray, np.ndarray] | None = None,
    ):
        self.architecture = architecture
        self.config = config
        self.validation = validation  # standardized features + labels, trace only
        self.params: neural.MlpParams | None = None
        self.trace: neural.TrainingTrace | None = None

    def fit(self, x, y):
        x_val, y_val = self.validation if self.validation is not None else (None, None)
        self.params, self.trace = neural.train_mlp(
            x, y, self.architecture, self.config, x_val=x_val, y_val=y_val
        )
        return self

    def predict_proba(self, x):
        return neural.mlp_predict_proba(self.params, x)


class VotingModel(Model):
    """Unweighted soft vote over member models."""

    kind = "voting"

    def __init__(
        self,
        members: list[Model] | None = None,
        member_factories: list[Callable[[], Model]] | None = None,
    ):
        self.members = members
        self.member_factories = member_factories

    def fit(self, x, y):
        if self.members is None:
            if not self.member_factories:
                raise ValueError("voting model needs members or member factories")
            self.members = [factory().fit(x, y) for factory in self.member_factories]
        return self

    def predict_proba(self, x):
        if not self.members:
            raise ValueError("voting model has no members")
        stacked = np.stack([np.asarray(m.predict_proba(x)) for m in self.members])
        return stacked.mean(axis=0)


def _voting_member_factories(seed: int) -> list[Callable[[], Model]]:
    kinds = [k for k in MODEL_KINDS if k != "voting"]
    return [
        (lambda k=k: make_model(k, derive_seed(seed, "voting-member", k)))
        for k in kinds
    ]


def make_model(kind: str, seed: int, **overrides) -> Model:
    """Build a model of the given kind with default hyperparameters.

    Keyword overrides patch the kind's config dataclass (for example
    n_rounds=300 for boosting kinds, k=9 for knn, epochs=50 for mlp).
    """
    if kind == "logistic":
        return LogisticModel(replace(linear.GdConfig(seed=seed), **overrides))
    if kind == "svm":
        return SvmModel(replace(linear.GdConfig(seed=seed), **overrides))
    if kind == "tree":
        return DecisionTreeModel(replace(trees.TreeConfig(), **overrides))
    if kind == "forest":
        tree_overrides = {
            k: overrides.pop(k)
            for k in ("max_depth", "min_samples_leaf", "min_samples_split")
            if k in overrides
        }
        cfg = replace(trees.ForestConfig(seed=seed), **overrides)
        if tree_overrides:
            cfg = replace(cfg, tree=replace(cfg.tree, **tree_overrides))
        return RandomForestModel(cfg)
    if kind == "gbt-depthwise":
        return GbtModel(replace(boosting.GbtConfig(growth="depth_wise", seed=seed), **overrides))
    if kind == "gbt-leafwise":
        return GbtModel(replace(boosting.GbtConfig(growth="leaf_wise", seed=seed), **overrides))
    if kind == "adaboost":
        return AdaBoostModel(seed=seed, **overrides)
    if kind == "catboost":
        prior_weight = overrides.pop("prior_weight", 1.0)
        return CatBoostModel(
            replace(boosting.GbtConfig(growth="depth_wise", seed=seed), **overrides),
            prior_weight=prior_weight,
        )
    if kind == "knn":
        return KnnClassifier(**overrides)
    if kind == "mlp":
        return MlpModel(config=replace(neural.MlpTrainConfig(seed=seed), **overrides))
    if kind == "voting":
        return VotingModel(member_factories=_voting_member_factories(seed))
    raise ValueError(f"unknown model kind {kind!r}; choose from {MODEL_KINDS}")


# ---------------------------------------------------------------------------
# Sweep-axis mapping
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepFamily:
    """How one model family consumes the (learning_rate, mcw) sweep grid."""

    name: str
    flat_axes: frozenset[str]
    make: Callable[[float, float, int], Model]


def sweep_family(kind: str, **base_overrides) -> SweepFamily:
    def leafy(mcw: float) -> int:
        return max(1, math.ceil(mcw))

    if kind in ("gbt-depthwise", "gbt-leafwise", "catboost"):
        return SweepFamily(
            kind,
            frozenset(),
            lambda lr, mcw, seed: make_model(
                kind, seed, learning_rate=lr, min_child_weight=mcw, **base_overrides
            ),
        )
    if kind in ("logistic", "svm", "mlp"):
        return SweepFamily(
            kind,
            frozenset({"min_child_weight"}),
            lambda lr, mcw, seed: make_model(kind, seed, learning_rate=lr, **base_overrides),
        )
    if kind in ("tree", "forest"):
        return SweepFamily(
            kind,
            frozenset({"learning_rate"}),
            lambda lr, mcw, seed: make_model(
                kind,
                seed,
                min_samples_leaf=leafy(mcw),
                min_samples_split=max(10, 2 * leafy(mcw)),
                **base_overrides,
            ),
        )
    if kind == "adaboost":
        return SweepFamily(
            kind,
            frozenset({"learning_rate"}),
            lambda lr, mcw, seed: make_model(
                kind, seed, min_samples_leaf=leafy(mcw), **base_overrides
            ),
        )
    if kind == "knn":
        return SweepFamily(
            kind,
            frozenset({"learning_rate", "min_child_weight"}),
            lambda lr, mcw, seed: make_model(kind, seed, **base_overrides),
        )
    raise ValueError(f"no sweep mapping for model kind {kind!r}")


# ---------------------------------------------------------------------------
# Trained pipeline: standardizer + model + provenance
# ---------------------------------------------------------------------------


def dataset_fingerprint(dataset: Dataset) -> dict:
    """Row count plus a content hash of the canonical CSV-like text."""
    lines = []
    for r in dataset.records:
        fields = [repr(float(v)) for v in r.features()]
        fields.append(str(r.infected))
        lines.append(",".join(fields))
    digest = hashlib.sha256("\n".join(lines).encode("utf-8")).hexdigest()
    return {"n_rows": len(dataset), "sha256": digest}


@dataclass
class TrainedModel:
    """A fitted model plus the standardizer and provenance it needs."""

    kind: str
    standardizer: Standardizer
    model: Model
    seed: int
    fingerprint: dict

    def predict_proba(self, features: np.ndarray) -> np.ndarray | float:
        """Scores raw (unstandardized) feature rows."""
        return self.model.predict_proba(self.standardizer.apply(features))


def fit_pipeline(
    kind: str,
    train: Dataset,
    seed: int,
    overrides: dict | None = None,
    validation: Dataset | None = None,
) -> TrainedModel:
    """Standardize on the training set, fit one model kind, bundle both."""
    standardizer = fit_standardizer(train)
    model = make_model(kind, derive_seed(seed, "fit", kind), **(overrides or {}))
    if isinstance(model, MlpModel) and validation is not None:
        model.validation = (
            standardizer.apply(validation),
            validation.labels.astype(np.float64),
        )
    model.fit(standardizer.apply(train), train.labels.astype(np.float64))
    return TrainedModel(
        kind=model.kind,
        standardizer=standardizer,
        model=model,
        seed=seed,
        fingerprint=dataset_fingerprint(train),
    )
