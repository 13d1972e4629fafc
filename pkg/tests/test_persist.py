import json

import numpy as np
import pytest

from sympred.data import GeneratorConfig, generate_synthetic, train_test_split
from sympred.errors import ModelFormatError
from sympred.models import MODEL_KINDS, fit_pipeline
from sympred.persist import load_model, save_model

FAST_OVERRIDES = {
    "forest": {"n_trees": 10},
    "gbt-depthwise": {"n_rounds": 15},
    "gbt-leafwise": {"n_rounds": 15},
    "catboost": {"n_rounds": 15},
    "adaboost": {"n_rounds": 15},
    "mlp": {"epochs": 10},
}


@pytest.fixture(scope="module")
def data():
    ds, _ = generate_synthetic(GeneratorConfig(n=400, seed=21))
    train, test = train_test_split(ds, 0.25, 21)
    return train, test


@pytest.mark.parametrize("kind", MODEL_KINDS)
def test_round_trip_bit_identical(kind, data, tmp_path):
    train, test = data
    overrides = FAST_OVERRIDES.get(kind)
    if kind == "voting":
        overrides = None  # voting trains its members with their own defaults
    trained = fit_pipeline(kind, train, seed=3, overrides=overrides)
    path = tmp_path / f"{kind}.model"
    save_model(trained, path)
    loaded = load_model(path)
    assert loaded.kind == trained.kind
    assert loaded.fingerprint == trained.fingerprint
    before = np.asarray(trained.predict_proba(test.features))
    after = np.asarray(loaded.predict_proba(test.features))
    np.testing.assert_array_equal(before, after)


def test_saved_twice_identical_bytes(data, tmp_path):
    train, _ = data
    trained = fit_pipeline("tree", train, seed=3)
    p1, p2 = tmp_path / "a.model", tmp_path / "b.model"
    save_model(trained, p1)
    save_model(trained, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_version_bump_rejected(data, tmp_path):
    train, _ = data
    trained = fit_pipeline("knn", train, seed=3)
    path = tmp_path / "m.model"
    save_model(trained, path)
    doc = json.loads(path.read_text())
    doc["format_version"] = 2
    path.write_text(json.dumps(doc))
    with pytest.raises(ModelFormatError, match="format_version"):
        load_model(path)


def test_corruption_detected(data, tmp_path):
    train, _ = data
    trained = fit_pipeline("logistic", train, seed=3)
    path = tmp_path / "m.model"
    save_model(trained, path)
    doc = json.loads(path.read_text())
    doc["payload"]["parameters"]["bias"] += 1e-9
    path.write_text(json.dumps(doc))
    with pytest.raises(ModelFormatError, match="checksum"):
        load_model(path)


def test_knn_file_contains_training_matrix(data, tmp_path):
    train, _ = data
    trained = fit_pipeline("knn", train, seed=3)
    path = tmp_path / "m.model"
    save_model(trained, path)
    doc = json.loads(path.read_text())
    assert doc["payload"]["parameters"]["x"]["shape"] == [len(train), 7]


def test_missing_file(tmp_path):
    with pytest.raises(ModelFormatError):
        load_model(tmp_path / "nope.model")


def test_garbage_file(tmp_path):
    path = tmp_path / "junk.model"
    path.write_text("not json at all")
    with pytest.raises(ModelFormatError):
        load_model(path)
