"""Model persistence: one self-describing JSON document per model.

Layout:

    {
      "format_version": 1,
      "checksum": "<sha256 of the canonical payload JSON>",
      "payload": {
        "model_kind": ..., "seed": ...,
        "standardizer": {"mean": [...], "std": [...]},
        "training_data": {"n_rows": ..., "sha256": ...},
        "hyperparameters": {...},
        "parameters": {...}
      }
    }

Floats are written with Python's shortest round-trip representation, so a
loaded model predicts bit-identically to the saved one. Unknown format
versions are rejected, and the checksum guards against corruption.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from pathlib import Path

import numpy as np

from . import boosting, linear, models, neighbors, neural, trees
from .data import Standardizer
from .errors import ModelFormatError

FORMAT_VERSION = 1


def _floats(values) -> list[float]:
    return [float(v) for v in np.asarray(values).ravel()]


def _matrix_doc(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=np.float64)
    return {"shape": [int(s) for s in m.shape], "data": _floats(m)}


def _matrix_from(doc: dict) -> np.ndarray:
    return np.array(doc["data"], dtype=np.float64).reshape(doc["shape"])


def _tree_doc(node: trees.TreeNode) -> dict:
    if node.is_leaf:
        if node.value is not None:
            return {"value": float(node.value)}
        return {
            "class_counts": [int(c) for c in node.class_counts],
            "probability": float(node.probability),
        }
    return {
        "feature_index": int(node.feature_index),
        "threshold": float(node.threshold),
        "left": _tree_doc(node.left),
        "right": _tree_doc(node.right),
    }


def _tree_from(doc: dict) -> trees.TreeNode:
    if "feature_index" in doc:
        return trees.TreeNode(
            feature_index=doc["feature_index"],
            threshold=doc["threshold"],
            left=_tree_from(doc["left"]),
            right=_tree_from(doc["right"]),
        )
    if "value" in doc:
        return trees.TreeNode(value=doc["value"])
    return trees.TreeNode(
        class_counts=tuple(doc["class_counts"]), probability=doc["probability"]
    )


def _gbt_docs(model) -> tuple[dict, dict]:
    hyper = dataclasses.asdict(model.config)
    params = {
        "base_score": float(model.ensemble.base_score),
        "trees": [_tree_doc(t) for t in model.ensemble.trees],
    }
    return hyper, params


def _gbt_restore(config: boosting.GbtConfig, params: dict) -> boosting.GbtEnsemble:
    return boosting.GbtEnsemble(
        base_score=params["base_score"],
        trees=[_tree_from(t) for t in params["trees"]],
        learning_rate=config.learning_rate,
    )


def _model_docs(model: models.Model) -> tuple[dict, dict]:
    """(hyperparameters, learned parameters) for one fitted model."""
    if isinstance(model, (models.LogisticModel, models.SvmModel)):
        p = model.params
        return dataclasses.asdict(model.config), {
            "weights": _floats(p.weights),
            "bias": float(p.bias),
            "platt": None if p.platt is None else [float(p.platt[0]), float(p.platt[1])],
        }
    if isinstance(model, models.DecisionTreeModel):
        return dataclasses.asdict(model.config), {"root": _tree_doc(model.root)}
    if isinstance(model, models.RandomForestModel):
        return dataclasses.asdict(model.config), {
            "trees": [_tree_doc(t) for t in model.forest.trees]
        }
    if isinstance(model, models.CatBoostModel):
        hyper, params = _gbt_docs(model)
        hyper["prior_weight"] = float(model.prior_weight)
        hyper["columns"] = list(model.columns)
        enc = model.encoder
        params["encoder"] = {
            "permutation": [int(i) for i in enc.permutation],
            "prior": float(enc.prior),
            "stats": {
                str(col): [
                    [float(v), int(c), float(pos)] for v, (c, pos) in sorted(stats.items())
                ]
                for col, stats in enc.stats.items()
            },
        }
        return hyper, params
    if isinstance(model, models.GbtModel):
        return _gbt_docs(model)
    if isinstance(model, models.AdaBoostModel):
        hyper = {
            "n_rounds": model.n_rounds,
            "min_samples_leaf": model.min_samples_leaf,
            "seed": model.seed,
        }
        return hyper, {
            "stumps": [_tree_doc(s) for s in model.ensemble.stumps],
            "alphas": _floats(model.ensemble.alphas),
        }
    if isinstance(model, models.KnnClassifier):
        return {"k": model.k}, {
            "x": _matrix_doc(model.model.x),
            "y": _floats(model.model.y),
        }
    if isinstance(model, models.MlpModel):
        hyper = {
            "architecture": dataclasses.asdict(model.architecture),
            "config": dataclasses.asdict(model.config),
        }
        return hyper, {
            "weights": [_matrix_doc(w) for w in model.params.weights],
            "biases": [_floats(b) for b in model.params.biases],
        }
    if isinstance(model, models.VotingModel):
        members = []
        for m in model.members:
            m_hyper, m_params = _model_docs(m)
            members.append(
                {"model_kind": m.kind, "hyperparameters": m_hyper, "parameters": m_params}
            )
        return {}, {"members": members}
    raise ModelFormatError(f"cannot serialize model kind {type(model).__name__}")


def _model_from_docs(kind: str, hyper: dict, params: dict) -> models.Model:
    if kind in ("logistic", "svm"):
        cls = models.LogisticModel if kind == "logistic" else models.SvmModel
        model = cls(linear.GdConfig(**hyper))
        model.params = linear.LinearModelParams(
            weights=np.array(params["weights"]),
            bias=params["bias"],
            kind=kind,
            platt=None if params["platt"] is None else tuple(params["platt"]),
        )
        return model
    if kind == "tree":
        model = models.DecisionTreeModel(trees.TreeConfig(**hyper))
        model.root = _tree_from(params["root"])
        return model
    if kind == "forest":
        cfg = trees.ForestConfig(**{**hyper, "tree": trees.TreeConfig(**hyper["tree"])})
        model = models.RandomForestModel(cfg)
        model.forest = trees.RandomForest(
            trees=[_tree_from(t) for t in params["trees"]], config=cfg
        )
        return model
    if kind in ("gbt-depthwise", "gbt-leafwise"):
        cfg = boosting.GbtConfig(**hyper)
        model = models.GbtModel(cfg)
        model.ensemble = _gbt_restore(cfg, params)
        return model
    if kind == "catboost":
        hyper = dict(hyper)
        prior_weight = hyper.pop("prior_weight")
        columns = tuple(hyper.pop("columns"))
        cfg = boosting.GbtConfig(**hyper)
        model = models.CatBoostModel(cfg, prior_weight=prior_weight, columns=columns)
        model.ensemble = _gbt_restore(cfg, params)
        enc_doc = params["encoder"]
        encoder = boosting.OrderedEncoder(columns, prior_weight=prior_weight, seed=cfg.seed)
        encoder.permutation = np.array(enc_doc["permutation"], dtype=np.int64)
        encoder.prior = enc_doc["prior"]
        encoder.stats = {
            int(col): {v: (c, pos) for v, c, pos in triples}
            for col, triples in enc_doc["stats"].items()
        }
        model.encoder = encoder
        return model
    if kind == "adaboost":
        model = models.AdaBoostModel(**hyper)
        model.ensemble = boosting.AdaBoostEnsemble(
            stumps=[_tree_from(s) for s in params["stumps"]],
            alphas=np.array(params["alphas"]),
        )
        return model
    if kind == "knn":
        model = models.KnnClassifier(k=hyper["k"])
        model.model = neighbors.KnnModel(
            x=_matrix_from(params["x"]), y=np.array(params["y"]), k=hyper["k"]
        )
        return model
    if kind == "mlp":
        arch = neural.MlpArchitecture(
            layer_sizes=tuple(hyper["architecture"]["layer_sizes"]),
            hidden_activation=hyper["architecture"]["hidden_activation"],
            output_activation=hyper["architecture"]["output_activation"],
        )
        model = models.MlpModel(arch, neural.MlpTrainConfig(**hyper["config"]))
        model.params = neural.MlpParams(
            weights=[_matrix_from(w) for w in params["weights"]],
            biases=[np.array(b) for b in params["biases"]],
        )
        return model
    if kind == "voting":
        members = [
            _model_from_docs(m["model_kind"], m["hyperparameters"], m["parameters"])
            for m in params["members"]
        ]
        return models.VotingModel(members=members)
    raise ModelFormatError(f"unknown model kind {kind!r} in model file")


def _canonical(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False)


def save_model(trained: models.TrainedModel, path: str | Path) -> None:
    hyper, params = _model_docs(trained.model)
    payload = {
        "model_kind": trained.kind,
        "seed": int(trained.seed),
        "standardizer": {
            "mean": _floats(trained.standardizer.mean),
            "std": _floats(trained.standardizer.std),
        },
        "training_data": trained.fingerprint,
        "hyperparameters": hyper,
        "parameters": params,
    }
    doc = {
        "format_version": FORMAT_VERSION,
        "checksum": hashlib.sha256(_canonical(payload).encode("utf-8")).hexdigest(),
        "payload": payload,
    }
    Path(path).write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n"
    )


def load_model(path: str | Path) -> models.TrainedModel:
    path = Path(path)
    if not path.exists():
        raise ModelFormatError(f"no such model file: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: not valid JSON: {exc}") from None
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(
            f"{path}: unsupported format_version {version!r} (expected {FORMAT_VERSION})"
        )
    payload = doc.get("payload")
    if payload is None or "checksum" not in doc:
        raise ModelFormatError(f"{path}: missing payload or checksum")
    digest = hashlib.sha256(_canonical(payload).encode("utf-8")).hexdigest()
    if digest != doc["checksum"]:
        raise ModelFormatError(f"{path}: checksum mismatch, file is corrupted")
    model = _model_from_docs(
        payload["model_kind"], payload["hyperparameters"], payload["parameters"]
    )
    standardizer = Standardizer(
        mean=np.array(payload["standardizer"]["mean"]),
        std=np.array(payload["standardizer"]["std"]),
    )
    return models.TrainedModel(
        kind=payload["model_kind"],
        standardizer=standardizer,
        model=model,
        seed=payload["seed"],
        fingerprint=payload["training_data"],
    )
