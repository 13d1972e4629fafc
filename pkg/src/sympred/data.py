"""Dataset handling: records, CSV ingestion, synthetic generation, splits.

The feature layout is fixed everywhere in the package: two continuous
columns (age in years, body temperature in degrees Fahrenheit) followed by
five binary symptom indicators. The optional label column ``infected`` is
0/1.

The synthetic generator replaces an unavailable clinical dataset. It plants
a known class-conditional model (truncated normals for age/temperature,
independent Bernoulli symptoms given the label), which makes the exact
posterior P(infected | features) available in closed form as an oracle for
everything trained downstream.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import DataError
from .rng import substream

FEATURE_NAMES: tuple[str, ...] = (
    "age",
    "body_temperature",
    "fatigue",
    "cough",
    "body_pain",
    "sore_throat",
    "breathing_difficulty",
)
SYMPTOM_NAMES: tuple[str, ...] = FEATURE_NAMES[2:]
LABEL_NAME = "infected"
N_FEATURES = len(FEATURE_NAMES)

AGE_RANGE = (0.0, 120.0)
TEMPERATURE_RANGE = (90.0, 110.0)


def _check_binary(name: str, value: int) -> int:
    if value not in (0, 1):
        raise DataError(f"{name} must be 0 or 1, got {value!r}")
    return value


@dataclass(frozen=True)
class PatientRecord:
    """One row: age, temperature, five symptom indicators, optional label."""

    age: float
    body_temperature: float
    fatigue: int
    cough: int
    body_pain: int
    sore_throat: int
    breathing_difficulty: int
    infected: int | None = None

    def __post_init__(self):
        if not AGE_RANGE[0] <= self.age <= AGE_RANGE[1]:
            raise DataError(f"age out of range {AGE_RANGE}: {self.age!r}")
        if not TEMPERATURE_RANGE[0] <= self.body_temperature <= TEMPERATURE_RANGE[1]:
            raise DataError(
                f"body_temperature out of range {TEMPERATURE_RANGE}: "
                f"{self.body_temperature!r}"
            )
        for name in SYMPTOM_NAMES:
            _check_binary(name, getattr(self, name))
        if self.infected is not None:
            _check_binary(LABEL_NAME, self.infected)

    def features(self) -> np.ndarray:
        return np.array(
            [getattr(self, name) for name in FEATURE_NAMES], dtype=np.float64
        )


class Dataset:
    """Immutable ordered collection of records with a fixed feature order."""

    def __init__(self, records: Sequence[PatientRecord]):
        self._records = tuple(records)
        labeled = [r.infected is not None for r in self._records]
        if any(labeled) and not all(labeled):
            raise DataError("dataset mixes labeled and unlabeled records")
        self._labeled = bool(self._records) and all(labeled)
        x = np.array(
            [[getattr(r, name) for name in FEATURE_NAMES] for r in self._records],
            dtype=np.float64,
        ).reshape(len(self._records), N_FEATURES)
        x.flags.writeable = False
        self._x = x
        if self._labeled:
            y = np.array([r.infected for r in self._records], dtype=np.int64)
            y.flags.writeable = False
            self._y = y
        else:
            self._y = None

    @property
    def feature_names(self) -> tuple[str, ...]:
        return FEATURE_NAMES

    @property
    def records(self) -> tuple[PatientRecord, ...]:
        return self._records

    @property
    def labeled(self) -> bool:
        return self._labeled

    def __len__(self) -> int:
        return len(self._records)

    @property
    def features(self) -> np.ndarray:
        """(n, 7) read-only feature matrix in FEATURE_NAMES order."""
        return self._x

    @property
    def labels(self) -> np.ndarray:
        """(n,) read-only 0/1 label vector; raises on unlabeled data."""
        if self._y is None:
            raise DataError("dataset is unlabeled")
        return self._y

    def subset(self, indices: Iterable[int]) -> "Dataset":
        return Dataset([self._records[i] for i in indices])

    @staticmethod
    def from_arrays(features: np.ndarray, labels: np.ndarray | None = None) -> "Dataset":
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 2 or features.shape[1] != N_FEATURES:
            raise DataError(f"feature matrix must be (n, {N_FEATURES})")
        records = []
        for i in range(features.shape[0]):
            row = features[i]
            records.append(
                PatientRecord(
                    age=float(row[0]),
                    body_temperature=float(row[1]),
                    fatigue=int(row[2]),
                    cough=int(row[3]),
                    body_pain=int(row[4]),
                    sore_throat=int(row[5]),
                    breathing_difficulty=int(row[6]),
                    infected=None if labels is None else int(labels[i]),
                )
            )
        return Dataset(records)


# ---------------------------------------------------------------------------
# CSV I/O
#
# Header (exact): age,body_temperature,fatigue,cough,body_pain,sore_throat,
# breathing_difficulty,infected -- the label column may be absent for
# prediction inputs. UTF-8, LF line endings, decimal point '.'.
# ---------------------------------------------------------------------------

CSV_HEADER_LABELED = FEATURE_NAMES + (LABEL_NAME,)
CSV_HEADER_UNLABELED = FEATURE_NAMES


def load_csv(path: str | Path) -> Dataset:
    """Read a dataset; row errors are reported with 1-based line numbers."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise DataError(f"{path}: empty file, expected a header row") from None
        if header == CSV_HEADER_LABELED:
            has_label = True
        elif header == CSV_HEADER_UNLABELED:
            has_label = False
        else:
            raise DataError(
                f"{path}: unknown header {','.join(header)!r}; expected "
                f"{','.join(CSV_HEADER_LABELED)!r} (label column optional)"
            )
        n_cols = len(header)
        records = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != n_cols:
                raise DataError(
                    f"{path}: line {lineno}: expected {n_cols} fields, got {len(row)}"
                )
            try:
                age = float(row[0])
                temp = float(row[1])
                symptoms = [int(v) for v in row[2:7]]
                label = int(row[7]) if has_label else None
            except ValueError as exc:
                raise DataError(f"{path}: line {lineno}: {exc}") from None
            try:
                records.append(
                    PatientRecord(age, temp, *symptoms, infected=label)
                )
            except DataError as exc:
                raise DataError(f"{path}: line {lineno}: {exc}") from None
    return Dataset(records)


def save_csv(dataset: Dataset, path: str | Path) -> None:
    """Write a dataset; floats use shortest round-trip representation."""
    lines = [",".join(CSV_HEADER_LABELED if dataset.labeled else CSV_HEADER_UNLABELED)]
    for r in dataset.records:
        fields = [repr(float(r.age)), repr(float(r.body_temperature))]
        fields += [str(getattr(r, name)) for name in SYMPTOM_NAMES]
        if dataset.labeled:
            fields.append(str(r.infected))
        lines.append(",".join(fields))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


# ---------------------------------------------------------------------------
# Synthetic generation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GeneratorConfig:
    """Class-conditional generative model with a known posterior.

    Defaults are calibrated so that on a default-sized sample the
    age/label Pearson correlation is 0.36 and the accuracy of thresholding
    the exact posterior at 0.5 is 0.90. Age and temperature are truncated
    normals (truncated to the record validity ranges); symptoms are
    independent Bernoulli given the label.
    """

    n: int = 4000
    class_balance: float = 0.5
    age_mean_healthy: float = 41.0
    age_mean_infected: float = 51.8
    age_stddev_healthy: float = 14.0
    age_stddev_infected: float = 14.0
    temp_mean_healthy: float = 98.8
    temp_mean_infected: float = 100.7
    temp_stddev_healthy: float = 0.9
    temp_stddev_infected: float = 1.3
    # order matches SYMPTOM_NAMES
    symptom_prob_healthy: tuple[float, ...] = (0.30, 0.25, 0.20, 0.25, 0.10)
    symptom_prob_infected: tuple[float, ...] = (0.70, 0.60, 0.55, 0.50, 0.40)
    seed: int = 42

    def validate(self) -> None:
        if self.n < 0:
            raise DataError(f"n must be >= 0, got {self.n}")
        if not 0.0 <= self.class_balance <= 1.0:
            raise DataError(f"class_balance must be in [0, 1], got {self.class_balance}")
        for name in (
            "age_stddev_healthy",
            "age_stddev_infected",
            "temp_stddev_healthy",
            "temp_stddev_infected",
        ):
            if getattr(self, name) <= 0.0:
                raise DataError(f"{name} must be > 0, got {getattr(self, name)}")
        for name in ("symptom_prob_healthy", "symptom_prob_infected"):
            probs = getattr(self, name)
            if len(probs) != len(SYMPTOM_NAMES):
                raise DataError(f"{name} must have {len(SYMPTOM_NAMES)} entries")
            if any(not 0.0 <= p <= 1.0 for p in probs):
                raise DataError(f"{name} entries must be in [0, 1]")

    def age_params(self, label: int) -> tuple[float, float]:
        if label == 1:
            return self.age_mean_infected, self.age_stddev_infected
        return self.age_mean_healthy, self.age_stddev_healthy

    def temp_params(self, label: int) -> tuple[float, float]:
        if label == 1:
            return self.temp_mean_infected, self.temp_stddev_infected
        return self.temp_mean_healthy, self.temp_stddev_healthy

    def symptom_probs(self, label: int) -> tuple[float, ...]:
        return self.symptom_prob_infected if label == 1 else self.symptom_prob_healthy


def _truncnorm_ppf(u: np.ndarray, mean: float, std: float, lo: float, hi: float) -> np.ndarray:
    # inverse-CDF sampling of a normal truncated to [lo, hi]
    a = ndtr((lo - mean) / std)
    b = ndtr((hi - mean) / std)
    return mean + std * ndtri(a + u * (b - a))


def _truncnorm_logpdf(x: np.ndarray, mean: float, std: float, lo: float, hi: float) -> np.ndarray:
    z = (x - mean) / std
    mass = ndtr((hi - mean) / std) - ndtr((lo - mean) / std)
    return -0.5 * z * z - math.log(std) - 0.5 * math.log(2.0 * math.pi) - math.log(mass)


def _class_log_likelihood(x: np.ndarray, config: GeneratorConfig, label: int) -> np.ndarray:
    """log f(features | class) under the generative model, per row."""
    mean, std = config.age_params(label)
    ll = _truncnorm_logpdf(x[:, 0], mean, std, *AGE_RANGE)
    mean, std = config.temp_params(label)
    ll = ll + _truncnorm_logpdf(x[:, 1], mean, std, *TEMPERATURE_RANGE)
    for j, p in enumerate(config.symptom_probs(label)):
        s = x[:, 2 + j]
        # guard the log for degenerate p in {0, 1}: impossible outcomes get -inf
        with np.errstate(divide="ignore"):
            ll = ll + np.where(s == 1.0, np.log(p), np.log1p(-p))
    return ll


def bayes_posterior(x: np.ndarray | Dataset, config: GeneratorConfig) -> np.ndarray:
    """Exact P(infected | features) under the generative model."""
    if isinstance(x, Dataset):
        x = x.features
    x = np.asarray(x, dtype=np.float64)
    pi = config.class_balance
    if pi == 0.0:
        return np.zeros(x.shape[0])
    if pi == 1.0:
        return np.ones(x.shape[0])
    llr = (
        _class_log_likelihood(x, config, 1)
        - _class_log_likelihood(x, config, 0)
        + math.log(pi)
        - math.log1p(-pi)
    )
    # sigma(llr), stable for large |llr|
    out = np.empty_like(llr)
    pos = llr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-llr[pos]))
    ez = np.exp(llr[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def generate_synthetic(config: GeneratorConfig) -> tuple[Dataset, np.ndarray]:
    """Draw a labeled dataset and its per-record exact posterior.

    Labels come first (Bernoulli class_balance), then each column is drawn
    from its class-conditional distribution via a dedicated substream, so
    the draw for one column never depends on another column's randomness.
    """
    config.validate()
    n = config.n
    seed = config.seed
    y = (substream(seed, "gen-labels").random(n) < config.class_balance).astype(np.int64)

    u_age = substream(seed, "gen-age").random(n)
    u_temp = substream(seed, "gen-temperature").random(n)
    cols = [np.empty(n), np.empty(n)]
    for label in (0, 1):
        mask = y == label
        mean, std = config.age_params(label)
        cols[0][mask] = _truncnorm_ppf(u_age[mask], mean, std, *AGE_RANGE)
        mean, std = config.temp_params(label)
        cols[1][mask] = _truncnorm_ppf(u_temp[mask], mean, std, *TEMPERATURE_RANGE)
    for j, name in enumerate(SYMPTOM_NAMES):
        u = substream(seed, "gen-symptom", j).random(n)
        p = np.where(y == 1, config.symptom_prob_infected[j], config.symptom_prob_healthy[j])
        cols.append((u < p).astype(np.float64))

    x = np.column_stack(cols) if n else np.empty((0, N_FEATURES))
    dataset = Dataset.from_arrays(x, y)
    return dataset, bayes_posterior(x, config)


# ---------------------------------------------------------------------------
# Splitting and folds
# ---------------------------------------------------------------------------


def _per_class_indices(y: np.ndarray) -> list[np.ndarray]:
    return [np.flatnonzero(y == label) for label in (0, 1)]


def _largest_remainder_quotas(counts: Sequence[int], fraction: float, total: int) -> list[int]:
    """Apportion `total` across classes proportionally to `counts`."""
    exact = [c * fraction for c in counts]
    quotas = [math.floor(q) for q in exact]
    remainders = [q - f for q, f in zip(exact, quotas)]
    short = total - sum(quotas)
    for k in sorted(range(len(counts)), key=lambda k: (-remainders[k], k))[:short]:
        quotas[k] += 1
    return quotas


def train_test_split(
    dataset: Dataset, test_fraction: float, seed: int
) -> tuple[Dataset, Dataset]:
    """Stratified, seeded, exact partition into train and test."""
    if not dataset.labeled:
        raise DataError("train_test_split requires a labeled dataset")
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    n = len(dataset)
    test_size = int(round(test_fraction * n))
    if not 0 < test_size < n:
        raise ValueError(
            f"test_fraction {test_fraction} leaves an empty split for n={n}"
        )
    class_indices = _per_class_indices(dataset.labels)
    quotas = _largest_remainder_quotas([len(ix) for ix in class_indices], test_fraction, test_size)
    test_mask = np.zeros(n, dtype=bool)
    for label, (indices, quota) in enumerate(zip(class_indices, quotas)):
        shuffled = substream(seed, "split", label).permutation(indices)
        test_mask[shuffled[:quota]] = True
    test_idx = np.flatnonzero(test_mask)
    train_idx = np.flatnonzero(~test_mask)
    return dataset.subset(train_idx), dataset.subset(test_idx)


@dataclass(frozen=True)
class FoldAssignment:
    """Per-record fold ids for k-fold cross-validation."""

    k: int
    fold_index: np.ndarray

    def validation_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_index == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_index != fold)


def make_folds(dataset: Dataset, k: int, seed: int) -> FoldAssignment:
    """Stratified fold assignment; every record lands in exactly one fold.

    Each class is shuffled and dealt round-robin, with the dealing position
    carried over between classes so overall fold sizes differ by at most 1.
    """
    if not dataset.labeled:
        raise DataError("make_folds requires a labeled dataset")
    n = len(dataset)
    if not 2 <= k <= n:
        raise ValueError(f"k must be in [2, {n}], got {k}")
    fold_index = np.empty(n, dtype=np.int64)
    start = 0
    for label, indices in enumerate(_per_class_indices(dataset.labels)):
        shuffled = substream(seed, "folds", label).permutation(indices)
        for j, record in enumerate(shuffled):
            fold_index[record] = (start + j) % k
        start = (start + len(shuffled)) % k
    return FoldAssignment(k=k, fold_index=fold_index)


# ---------------------------------------------------------------------------
# Descriptive statistics
# ---------------------------------------------------------------------------


def pearson_correlation(dataset: Dataset) -> np.ndarray:
    """8x8 Pearson matrix over the 7 features plus the label.

    Degenerate (constant) columns get correlation 0 against everything;
    the diagonal is exactly 1. Population stddev convention.
    """
    if not dataset.labeled:
        raise DataError("pearson_correlation requires a labeled dataset")
    if len(dataset) < 2:
        raise ValueError("need at least 2 records")
    cols = np.column_stack([dataset.features, dataset.labels.astype(np.float64)])
    centered = cols - cols.mean(axis=0)
    std = cols.std(axis=0)
    m = cols.shape[1]
    out = np.eye(m)
    for i in range(m):
        for j in range(i + 1, m):
            if std[i] == 0.0 or std[j] == 0.0:
                r = 0.0
            else:
                r = float(np.mean(centered[:, i] * centered[:, j]) / (std[i] * std[j]))
            out[i, j] = out[j, i] = r
    return out


CORRELATION_NAMES: tuple[str, ...] = FEATURE_NAMES + (LABEL_NAME,)


def correlation_to_csv(matrix: np.ndarray) -> str:
    lines = ["," + ",".join(CORRELATION_NAMES)]
    for name, row in zip(CORRELATION_NAMES, matrix):
        lines.append(name + "," + ",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Standardizer:
    """Per-feature centering/scaling fit on training data only."""

    mean: np.ndarray
    std: np.ndarray

    def apply(self, x: np.ndarray | Dataset) -> np.ndarray:
        if isinstance(x, Dataset):
            x = x.features
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.mean.shape[0]:
            raise ValueError(
                f"expected {self.mean.shape[0]} features, got {x.shape[-1]}"
            )
        return (x - self.mean) / self.std


def fit_standardizer(train: Dataset | np.ndarray) -> Standardizer:
    """Population-stddev standardizer; constant columns get stddev 1."""
    x = train.features if isinstance(train, Dataset) else np.asarray(train, dtype=np.float64)
    if x.size == 0:
        raise ValueError("cannot fit a standardizer on empty data")
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std = np.where(std == 0.0, 1.0, std)
    return Standardizer(mean=mean, std=std)


@dataclass(frozen=True)
class ClassSummary:
    """Distribution summary of one feature within one label group."""

    feature: str
    infected: int
    count: int
    mean: float
    stddev: float
    minimum: float
    q25: float
    median: float
    q75: float
    maximum: float


def summaries_to_csv(rows: list["ClassSummary"]) -> str:
    lines = ["feature,infected,count,mean,stddev,min,q25,median,q75,max"]
    for r in rows:
        lines.append(
            f"{r.feature},{r.infected},{r.count},{r.mean!r},{r.stddev!r},"
            f"{r.minimum!r},{r.q25!r},{r.median!r},{r.q75!r},{r.maximum!r}"
        )
    return "\n".join(lines) + "\n"


def class_summaries(dataset: Dataset) -> list[ClassSummary]:
    """Per-class distribution summaries for every feature."""
    if not dataset.labeled:
        raise DataError("class_summaries requires a labeled dataset")
    rows = []
    for label in (0, 1):
        mask = dataset.labels == label
        for j, name in enumerate(FEATURE_NAMES):
            col = dataset.features[mask, j]
            if col.size == 0:
                continue
            q25, median, q75 = np.quantile(col, [0.25, 0.5, 0.75])
            rows.append(
                ClassSummary(
                    feature=name,
                    infected=label,
                    count=int(col.size),
                    mean=float(col.mean()),
                    stddev=float(col.std()),
                    minimum=float(col.min()),
                    q25=float(q25),
                    median=float(median),
                    q75=float(q75),
                    maximum=float(col.max()),
                )
            )
    return rows
