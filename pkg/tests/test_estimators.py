import numpy as np
import pytest

from influence.core import InfluenceError, build_dataset, build_space, full_dataset
from influence.estimators import EstimatorConfig, hoeffding_half_width, sample_chi, sample_chi_distance
from influence.measures import chi, chi_distance
from influence.pipeline import normalize_counts, synthetic_counts


def test_config_validation():
    with pytest.raises(InfluenceError):
        EstimatorConfig(0)
    with pytest.raises(InfluenceError):
        EstimatorConfig(10, confidence=1.0)


def test_hoeffding_formula():
    assert hoeffding_half_width(100, 1.0, 0.95) == pytest.approx(np.sqrt(np.log(40) / 200))
    assert hoeffding_half_width(400, 2.0, 0.95) == pytest.approx(hoeffding_half_width(100, 1.0, 0.95))


def test_dummy_estimates_zero(bits2):
    ds = full_dataset(bits2, lambda a: a[1])
    for seed in range(5):
        est = sample_chi(ds, 0, EstimatorConfig(1000, seed))
        assert est.value == 0 and est.half_width > 0


@pytest.mark.parametrize("seed", range(5))
def test_and_within_band(and_ds, seed):
    est = sample_chi(and_ds, 0, EstimatorConfig(100_000, seed))
    assert est.covers(2)


def test_xor_mean_over_seeds(bits2):
    xor = full_dataset(bits2, lambda a: a[0] ^ a[1])
    assert chi(xor, 0) == 4
    mean = np.mean([sample_chi(xor, 0, EstimatorConfig(10_000, s)).value for s in range(100)])
    assert abs(mean - 4) <= 0.04


def test_discrete_distance_same_draws(and_ds):
    cfg = EstimatorConfig(20_000, 7)
    assert sample_chi_distance(and_ds, "discrete", 0, cfg).value == sample_chi(and_ds, 0, cfg).value


def test_zero_distance_estimate(and_ds):
    assert sample_chi_distance(and_ds, "zero", 0, EstimatorConfig(5000, 3)).value == 0


def test_deterministic_and_block_independent(and_ds):
    a = sample_chi(and_ds, 1, EstimatorConfig(200_000, 11))
    b = sample_chi(and_ds, 1, EstimatorConfig(200_000, 11))
    c = sample_chi(and_ds, 1, EstimatorConfig(200_000, 11, workers=4))
    assert a == b == c
    assert sample_chi(and_ds, 1, EstimatorConfig(200_000, 12)) != a


def test_partial_dataset_unbiased(rng):
    space = build_space([("a", list("xyz")), ("b", list("pq"))])
    ds = build_dataset(space, [((0, 0), 1), ((1, 0), 0), ((2, 0), 1), ((0, 1), 0)])
    truth = chi(ds, 0)
    vals = [sample_chi(ds, 0, EstimatorConfig(5000, s)).value for s in range(40)]
    se = np.std(vals) / np.sqrt(len(vals))
    assert abs(np.mean(vals) - truth) < 4 * se + 1e-9


def test_cosine_pipeline_coverage():
    values = normalize_counts(synthetic_counts(seed=3, n_items=10))
    ds = values.vector_dataset()
    truth = chi_distance(ds, "cosine", 2)
    hits = sum(sample_chi_distance(ds, "cosine", 2, EstimatorConfig(20_000, s)).covers(truth) for s in range(100))
    assert hits >= 99


def test_rejects_non_binary(bits2):
    ds = build_dataset(bits2, [((0, 0), 0.5)])
    with pytest.raises(InfluenceError):
        sample_chi(ds, 0, EstimatorConfig(10))
