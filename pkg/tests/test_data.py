import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sympred.data import (
    CORRELATION_NAMES,
    FEATURE_NAMES,
    Dataset,
    GeneratorConfig,
    PatientRecord,
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
from sympred.errors import DataError


HEADER = "age,body_temperature,fatigue,cough,body_pain,sore_throat,breathing_difficulty,infected"


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


class TestRecords:
    def test_symptom_must_be_binary(self):
        with pytest.raises(DataError):
            PatientRecord(40.0, 98.6, 2, 0, 0, 0, 0, infected=0)

    def test_age_range(self):
        with pytest.raises(DataError):
            PatientRecord(-1.0, 98.6, 0, 0, 0, 0, 0)

    def test_mixed_labeling_rejected(self):
        a = PatientRecord(40.0, 98.6, 0, 0, 0, 0, 0, infected=0)
        b = PatientRecord(41.0, 98.6, 0, 0, 0, 0, 0)
        with pytest.raises(DataError):
            Dataset([a, b])


class TestCsv:
    def test_round_trip(self, tmp_path):
        ds, _ = generate_synthetic(GeneratorConfig(n=50))
        p = tmp_path / "out.csv"
        save_csv(ds, p)
        back = load_csv(p)
        assert len(back) == 50
        np.testing.assert_array_equal(back.features, ds.features)
        np.testing.assert_array_equal(back.labels, ds.labels)

    def test_empty_body_with_header(self, tmp_path):
        ds = load_csv(write(tmp_path, HEADER + "\n"))
        assert len(ds) == 0

    def test_unlabeled_header_accepted(self, tmp_path):
        text = HEADER.rsplit(",", 1)[0] + "\n42.0,98.6,0,1,0,0,0\n"
        ds = load_csv(write(tmp_path, text))
        assert len(ds) == 1 and not ds.labeled

    def test_out_of_range_symptom_names_line(self, tmp_path):
        text = HEADER + "\n42.0,98.6,0,0,0,0,0,1\n42.0,98.6,2,0,0,0,0,1\n"
        with pytest.raises(DataError, match="line 3"):
            load_csv(write(tmp_path, text))

    def test_malformed_row_names_line(self, tmp_path):
        text = HEADER + "\n42.0,not_a_number,0,0,0,0,0,1\n"
        with pytest.raises(DataError, match="line 2"):
            load_csv(write(tmp_path, text))

    def test_unknown_header(self, tmp_path):
        with pytest.raises(DataError, match="header"):
            load_csv(write(tmp_path, "a,b,c\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            load_csv(tmp_path / "nope.csv")


class TestGenerator:
    def test_default_size_and_labels(self):
        ds, bayes = generate_synthetic(GeneratorConfig())
        assert len(ds) == 4000 and ds.labeled
        assert bayes.shape == (4000,)
        assert np.all((bayes >= 0.0) & (bayes <= 1.0))

    def test_age_correlation_matches_point_biserial_target(self):
        # r = (dmu/2) / sqrt(sigma^2 + dmu^2/4) = 0.3599 for the defaults
        cfg = GeneratorConfig()
        dmu = cfg.age_mean_infected - cfg.age_mean_healthy
        r_theory = (dmu / 2) / math.sqrt(cfg.age_stddev_healthy**2 + dmu**2 / 4)
        assert r_theory == pytest.approx(0.36, abs=0.01)
        ds, _ = generate_synthetic(cfg)
        corr = pearson_correlation(ds)
        assert corr[0, 7] == pytest.approx(0.36, abs=0.02)

    def test_bayes_accuracy_on_default_sample(self):
        ds, bayes = generate_synthetic(GeneratorConfig())
        acc = ((bayes >= 0.5).astype(int) == ds.labels).mean()
        assert acc == pytest.approx(0.90, abs=0.01)

    def test_degenerate_all_infected(self):
        ds, bayes = generate_synthetic(GeneratorConfig(n=200, class_balance=1.0))
        assert np.all(ds.labels == 1)
        assert np.all(bayes == 1.0)

    def test_fixed_seed_bit_reproducible(self):
        a, pa = generate_synthetic(GeneratorConfig(n=300, seed=9))
        b, pb = generate_synthetic(GeneratorConfig(n=300, seed=9))
        np.testing.assert_array_equal(a.features, b.features)
        np.testing.assert_array_equal(a.labels, b.labels)
        np.testing.assert_array_equal(pa, pb)

    def test_values_respect_record_ranges(self):
        ds, _ = generate_synthetic(GeneratorConfig(n=2000, seed=3))
        age, temp = ds.features[:, 0], ds.features[:, 1]
        assert age.min() >= 0.0 and age.max() <= 120.0
        assert temp.min() >= 90.0 and temp.max() <= 110.0

    def test_bayes_beats_every_threshold_on_age(self):
        # posterior thresholding is optimal; crude single-feature rules cannot win
        ds, bayes = generate_synthetic(GeneratorConfig(seed=5))
        bayes_acc = ((bayes >= 0.5).astype(int) == ds.labels).mean()
        ages = ds.features[:, 0]
        for cut in np.quantile(ages, [0.3, 0.5, 0.7]):
            rule_acc = ((ages >= cut).astype(int) == ds.labels).mean()
            assert bayes_acc > rule_acc

    def test_invalid_config(self):
        with pytest.raises(DataError):
            generate_synthetic(GeneratorConfig(class_balance=1.5))
        with pytest.raises(DataError):
            generate_synthetic(GeneratorConfig(age_stddev_healthy=0.0))

    def test_posterior_for_arbitrary_points(self):
        cfg = GeneratorConfig()
        x = np.array([[80.0, 104.0, 1, 1, 1, 1, 1], [20.0, 97.0, 0, 0, 0, 0, 0]])
        p = bayes_posterior(x, cfg)
        assert p[0] > 0.99 and p[1] < 0.05


class TestSplit:
    def test_sizes_3200_800(self):
        ds, _ = generate_synthetic(GeneratorConfig())
        train, test = train_test_split(ds, 0.2, 42)
        assert len(train) == 3200 and len(test) == 800

    def test_stratified_within_one(self):
        ds, _ = generate_synthetic(GeneratorConfig(seed=11))
        _, test = train_test_split(ds, 0.2, 42)
        for label in (0, 1):
            want = (ds.labels == label).sum() / len(ds) * len(test)
            got = (test.labels == label).sum()
            assert abs(got - want) <= 1

    def test_partition_exact(self):
        ds, _ = generate_synthetic(GeneratorConfig(n=517, seed=2))
        train, test = train_test_split(ds, 0.3, 7)
        all_rows = sorted(
            tuple(r.features()) + (r.infected,) for r in ds.records
        )
        split_rows = sorted(
            tuple(r.features()) + (r.infected,)
            for r in list(train.records) + list(test.records)
        )
        assert all_rows == split_rows

    def test_same_seed_identical(self):
        ds, _ = generate_synthetic(GeneratorConfig(n=200, seed=1))
        a = train_test_split(ds, 0.25, 99)
        b = train_test_split(ds, 0.25, 99)
        np.testing.assert_array_equal(a[1].features, b[1].features)

    def test_bad_fraction(self):
        ds, _ = generate_synthetic(GeneratorConfig(n=50))
        with pytest.raises(ValueError):
            train_test_split(ds, 1.0, 42)

    def test_unlabeled_rejected(self):
        ds = Dataset.from_arrays(np.array([[40.0, 98.6, 0, 0, 0, 0, 0]] * 4))
        with pytest.raises(DataError):
            train_test_split(ds, 0.5, 42)


class TestFolds:
    def test_5_folds_of_800(self):
        ds, _ = generate_synthetic(GeneratorConfig())
        fa = make_folds(ds, 5, 42)
        assert sorted(np.bincount(fa.fold_index, minlength=5)) == [800] * 5

    def test_validation_folds_partition(self):
        ds, _ = generate_synthetic(GeneratorConfig(n=123, seed=4))
        fa = make_folds(ds, 4, 42)
        seen = np.concatenate([fa.validation_indices(i) for i in range(4)])
        assert sorted(seen) == list(range(123))

    def test_n7_k5_fold_sizes(self):
        x = np.tile([[40.0, 98.6, 0, 0, 0, 0, 0]], (7, 1))
        y = np.array([0, 0, 0, 0, 1, 1, 1])
        ds = Dataset.from_arrays(x, y)
        fa = make_folds(ds, 5, 42)
        sizes = sorted(np.bincount(fa.fold_index, minlength=5), reverse=True)
        assert sizes == [2, 2, 1, 1, 1]

    def test_per_class_fold_balance(self):
        ds, _ = generate_synthetic(GeneratorConfig(n=997, seed=6))
        fa = make_folds(ds, 5, 3)
        for label in (0, 1):
            counts = np.bincount(fa.fold_index[ds.labels == label], minlength=5)
            assert counts.max() - counts.min() <= 1

    def test_k_out_of_range(self):
        ds, _ = generate_synthetic(GeneratorConfig(n=10))
        with pytest.raises(ValueError):
            make_folds(ds, 1, 42)
        with pytest.raises(ValueError):
            make_folds(ds, 11, 42)


class TestCorrelation:
    def test_diagonal_and_symmetry(self):
        ds, _ = generate_synthetic(GeneratorConfig(n=500, seed=8))
        corr = pearson_correlation(ds)
        assert corr.shape == (8, 8) == (len(CORRELATION_NAMES), len(CORRELATION_NAMES))
        np.testing.assert_array_equal(np.diag(corr), np.ones(8))
        np.testing.assert_array_equal(corr, corr.T)
        assert np.all(np.abs(corr) <= 1.0 + 1e-12)

    def test_exact_anticorrelation(self):
        x = np.tile([[40.0, 98.6, 0, 0, 0, 0, 0]], (3, 1)).copy()
        x[:, 0] = [1.0, 2.0, 3.0]
        x[:, 1] = [99.0, 98.0, 97.0]  # -(age) trend
        ds = Dataset.from_arrays(x, np.array([0, 1, 0]))
        corr = pearson_correlation(ds)
        assert corr[0, 1] == pytest.approx(-1.0, abs=1e-12)

    def test_degenerate_column_reports_zero(self):
        x = np.tile([[40.0, 98.6, 1, 0, 0, 0, 0]], (5, 1)).copy()
        x[:, 0] = [30, 40, 50, 60, 70]
        ds = Dataset.from_arrays(x, np.array([0, 0, 1, 1, 1]))
        corr = pearson_correlation(ds)
        assert corr[2, 0] == 0.0 and corr[2, 2] == 1.0


@st.composite
def small_datasets(draw):
    n = draw(st.integers(min_value=4, max_value=40))
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    x = np.column_stack(
        [
            rng.uniform(0, 120, n),
            rng.uniform(90, 110, n),
            *[rng.integers(0, 2, n) for _ in range(5)],
        ]
    ).astype(float)
    y = rng.integers(0, 2, n)
    if y.min() == y.max():  # force both classes
        y[0], y[1] = 0, 1
    return Dataset.from_arrays(x, y)


@given(small_datasets(), st.integers(min_value=2, max_value=5), st.integers(0, 1000))
@settings(max_examples=30, deadline=None)
def test_fold_partition_property(ds, k, seed):
    k = min(k, len(ds))
    fa = make_folds(ds, k, seed)
    assert fa.fold_index.min() >= 0 and fa.fold_index.max() < k
    sizes = np.bincount(fa.fold_index, minlength=k)
    assert sizes.sum() == len(ds)
    assert sizes.max() - sizes.min() <= 1


class TestStandardizer:
    def test_zero_mean_unit_std_on_fit_data(self):
        ds, _ = generate_synthetic(GeneratorConfig(n=400, seed=10))
        s = fit_standardizer(ds)
        z = s.apply(ds)
        np.testing.assert_allclose(z.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(z.std(axis=0), 1.0, atol=1e-12)

    def test_population_convention_pair(self):
        x = np.zeros((2, 7))
        x[:, 0] = [0.0, 2.0]
        s = fit_standardizer(x)
        z = s.apply(x)
        np.testing.assert_allclose(z[:, 0], [-1.0, 1.0], atol=1e-15)

    def test_constant_column_maps_to_zero(self):
        x = np.ones((4, 7)) * 3.0
        s = fit_standardizer(x)
        z = s.apply(x)
        np.testing.assert_array_equal(z, np.zeros_like(z))

    def test_refit_on_transformed_is_identity(self):
        ds, _ = generate_synthetic(GeneratorConfig(n=100, seed=12))
        z = fit_standardizer(ds).apply(ds)
        z2 = fit_standardizer(z).apply(z)
        np.testing.assert_allclose(z2, z, atol=1e-12)

    def test_test_data_uses_train_statistics(self):
        ds, _ = generate_synthetic(GeneratorConfig(n=200, seed=13))
        train, test = train_test_split(ds, 0.5, 1)
        s = fit_standardizer(train)
        z = s.apply(test)
        # not exactly standardized: statistics came from train only
        assert not np.allclose(z.mean(axis=0), 0.0, atol=1e-6)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            fit_standardizer(np.empty((0, 7)))


class TestSummaries:
    def test_rows_cover_features_and_classes(self):
        ds, _ = generate_synthetic(GeneratorConfig(n=300, seed=14))
        rows = class_summaries(ds)
        assert len(rows) == 2 * len(FEATURE_NAMES)
        infected_age = next(r for r in rows if r.feature == "age" and r.infected == 1)
        healthy_age = next(r for r in rows if r.feature == "age" and r.infected == 0)
        assert infected_age.mean > healthy_age.mean
