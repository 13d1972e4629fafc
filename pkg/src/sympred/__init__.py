"""From-scratch tabular classifiers and a benchmark harness for
symptom-based infection risk scoring."""

from .data import (
    Dataset,
    FoldAssignment,
    GeneratorConfig,
    PatientRecord,
    Standardizer,
    bayes_posterior,
    class_summaries,
    fit_standardizer,
    generate_synthetic,
    load_csv,
    make_folds,
    pearson_correlation,
    save_csv,
    train_test_split,
)
from .eval import (
    CompareSpec,
    ComparisonTable,
    ConfusionMatrix,
    CvReport,
    MetricsReport,
    SweepGrid,
    SweepResult,
    compare_models,
    compute_metrics,
    cross_validate,
    overfit_sweep,
    voting_predict,
)
from .models import (
    MODEL_KINDS,
    Model,
    TrainedModel,
    fit_pipeline,
    make_model,
    sweep_family,
)
from .persist import load_model, save_model

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "FoldAssignment",
    "GeneratorConfig",
    "PatientRecord",
    "Standardizer",
    "bayes_posterior",
    "class_summaries",
    "fit_standardizer",
    "generate_synthetic",
    "load_csv",
    "make_folds",
    "pearson_correlation",
    "save_csv",
    "train_test_split",
    "CompareSpec",
    "ComparisonTable",
    "ConfusionMatrix",
    "CvReport",
    "MetricsReport",
    "SweepGrid",
    "SweepResult",
    "compare_models",
    "compute_metrics",
    "cross_validate",
    "overfit_sweep",
    "voting_predict",
    "MODEL_KINDS",
    "Model",
    "TrainedModel",
    "fit_pipeline",
    "make_model",
    "sweep_family",
    "load_model",
    "save_model",
    "__version__",
]
