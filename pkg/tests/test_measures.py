import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from influence.core import build_dataset, build_space, full_dataset, singleton_dataset
from influence.games import random_binary_dataset
from influence.measures import (
    MissingWeight,
    NotBinary,
    PartialDataset,
    WeightFunction,
    chi,
    chi_by_groups,
    chi_distance,
    chi_normalized,
    chi_state,
    chi_weighted,
    chi_weighted_conditional,
    chi_weighted_product_form,
    chi_win_loss_form,
    influence_report,
    pair_count,
    stats_report,
    zeta_state,
)
from oracles import all_profiles, brute_chi, brute_weighted, brute_zeta_raw


def _space(sizes):
    return build_space([(f"f{j}", [str(s) for s in range(k)]) for j, k in enumerate(sizes)])


def test_chi_and(and_ds):
    assert chi(and_ds, 0) == 2
    assert chi(and_ds, "a2") == 2
    assert chi_normalized(and_ds, 0) == 0.5
    assert chi_win_loss_form(and_ds, 0) == 2


def test_chi_singleton_is_twice_states_minus_one():
    space = _space([3, 2, 4])
    for anchor in all_profiles(space.sizes):
        ds = singleton_dataset(space, anchor)
        for i, k in enumerate(space.sizes):
            assert chi(ds, i) == 2 * (k - 1)
            assert chi_win_loss_form(ds, i) == 2 * (k - 1)


def test_chi_dummy_is_zero(bits2):
    ds = full_dataset(bits2, lambda a: a[1])
    assert chi(ds, 0) == 0 and chi_normalized(ds, 0) == 0


def test_chi_single_point(bits2):
    ds = build_dataset(bits2, [((1, 0), 1)])
    assert chi(ds, 0) == 0 and chi(ds, 1) == 0


def test_all_winning(bits2):
    ds = full_dataset(bits2, lambda a: 1)
    assert chi_win_loss_form(ds, 0) == 0


def test_chi_rejects_scalar(bits2):
    ds = build_dataset(bits2, [((0, 0), 0.5)])
    with pytest.raises(NotBinary):
        chi(ds, 0)


def test_chi_by_groups_sums(and_ds):
    parts = chi_by_groups(and_ds, 0)
    assert sum(v for _, v in parts) == chi(and_ds, 0)


def test_chi_matches_brute_force_exhaustive():
    """Every binary labeling of every partial dataset over small spaces."""
    for sizes in [(2, 2), (3, 2), (2, 2, 2)]:
        space = _space(sizes)
        profiles = all_profiles(sizes)
        rng = np.random.default_rng(len(profiles))
        for _ in range(200):
            mask = rng.random(len(profiles)) < 0.7
            if not mask.any():
                continue
            pts = {p: int(rng.integers(2)) for p, m in zip(profiles, mask) if m}
            ds = build_dataset(space, pts.items())
            for i in range(space.n):
                truth = brute_chi(pts, sizes, i)
                assert chi(ds, i) == truth
                assert chi_win_loss_form(ds, i) == truth
                assert chi_distance(ds, "discrete", i) == truth
                assert chi_weighted(ds, WeightFunction.uniform(ds), i) == truth


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_identities_random(seed):
    ds = random_binary_dataset(np.random.default_rng(seed), max_profiles=256)
    for i in range(ds.space.n):
        c = chi(ds, i)
        assert c == chi_win_loss_form(ds, i)
        assert c == chi_distance(ds, "discrete", i)


def test_zeta_singleton_raw():
    space = _space([3, 2])
    for anchor in all_profiles(space.sizes):
        ds = singleton_dataset(space, anchor)
        for i, k in enumerate(space.sizes):
            for b in range(k):
                expected = k - 1 if b == anchor[i] else -1
                assert zeta_state(ds, i, b, raw=True) == expected
                assert zeta_state(ds, i, b) == pytest.approx(expected / ds.size)


def test_zeta_matches_brute_and_sums_to_zero(rng):
    for sizes in [(2, 2), (3, 3), (2, 3, 2)]:
        space = _space(sizes)
        for _ in range(30):
            ds = full_dataset(space, lambda p: int(rng.random() < 0.5))
            pts = ds.points
            for i, k in enumerate(sizes):
                raws = [zeta_state(ds, i, b, raw=True) for b in range(k)]
                assert raws == [brute_zeta_raw(pts, sizes, i, b) for b in range(k)]
                assert sum(raws) == 0


def test_zeta_needs_full_space(bits2):
    ds = build_dataset(bits2, [((0, 0), 1), ((1, 1), 0)])
    with pytest.raises(PartialDataset):
        zeta_state(ds, 0, 0)


def test_chi_state_laws(rng):
    space = _space([3, 2])
    for anchor in all_profiles(space.sizes):
        ds = singleton_dataset(space, anchor)
        assert chi_state(ds, 0, anchor[0]) == space.sizes[0] - 1
    const = full_dataset(space, lambda p: 0)
    assert all(chi_state(const, i, b) == 0 for i in range(2) for b in range(space.sizes[i]))
    for _ in range(50):
        ds = full_dataset(space, lambda p: int(rng.random() < 0.5))
        for i, k in enumerate(space.sizes):
            assert sum(chi_state(ds, i, b) for b in range(k)) == chi(ds, i)


def test_chi_state_accepts_labels(and_ds):
    assert chi_state(and_ds, "a1", "1") == chi_state(and_ds, 0, 1) == 1


def test_weighted_examples(and_ds):
    w = WeightFunction.from_mapping(and_ds.space, {(0, 0): 1, (0, 1): 3, (1, 0): 1, (1, 1): 1})
    assert chi_weighted(and_ds, w, 0) == 4
    assert chi_weighted(and_ds, WeightFunction.uniform(and_ds), 0) == chi(and_ds, 0)
    assert chi_weighted(and_ds, WeightFunction.uniform(and_ds, 0.0), 0) == 0


def test_weighted_matches_brute(rng):
    space = _space([3, 2, 2])
    for _ in range(40):
        ds = random_binary_dataset(rng, space)
        w = WeightFunction(space, ds.profiles, rng.uniform(0, 2, ds.size))
        wm = w.as_mapping()
        for i in range(space.n):
            truth = sum(
                wm[a] * abs(ds.points[a[:i] + (b,) + a[i + 1:]] - v)
                for a, v in ds.points.items()
                for b in range(space.sizes[i])
                if a[:i] + (b,) + a[i + 1:] in ds.points
            )
            assert chi_weighted(ds, w, i) == pytest.approx(truth, rel=1e-12, abs=1e-12)


def test_missing_weight(and_ds):
    w = WeightFunction.from_mapping(and_ds.space, {(0, 0): 1.0})
    with pytest.raises(MissingWeight):
        chi_weighted(and_ds, w, 0)


@pytest.mark.parametrize("p", [0.1, 0.3, 0.5, 0.9])
@pytest.mark.parametrize("conditional", [False, True])
def test_weighted_p_two_state(p, conditional):
    space = build_space([("x", ["0", "1"])])
    ds = build_dataset(space, [((0,), 1), ((1,), 0)])
    w = WeightFunction(space, [[0], [1]], [p, 1 - p])
    assert chi_weighted_conditional(ds, w, 0, conditional) == pytest.approx(2 * p * (1 - p))
    assert chi_weighted_product_form(ds, w, 0, conditional) == pytest.approx(2 * p * (1 - p))


def test_weighted_p_uniform_prior_proportional_to_chi(rng):
    space = _space([3, 2, 2])
    for _ in range(20):
        ds = full_dataset(space, lambda p: int(rng.random() < 0.5))
        n = ds.size
        w = WeightFunction.uniform(ds, 1.0 / n)
        for i, k in enumerate(space.sizes):
            assert chi_weighted_conditional(ds, w, i) == pytest.approx(chi(ds, i) / n**2)
            # conditional mode: w(a) * w(b|a_-i) = (1/|A|)(1/|A_i|)
            assert chi_weighted_conditional(ds, w, i, True) == pytest.approx(chi(ds, i) / (n * k))


@pytest.mark.parametrize("conditional", [False, True])
def test_weighted_p_matches_brute_and_product(rng, conditional):
    space = _space([3, 2, 3])
    for _ in range(40):
        ds = full_dataset(space, lambda p: int(rng.random() < 0.5))
        w = WeightFunction(space, ds.profiles, rng.uniform(0, 1, ds.size))
        wm = w.as_mapping()
        for i in range(space.n):
            if conditional:
                def cond(sub, i=i):
                    ctx = sum(wm[sub[:i] + (c,) + sub[i + 1:]] for c in range(space.sizes[i]))
                    return wm[sub] / ctx
            else:
                cond = None
            truth = brute_weighted(ds.points, wm, space.sizes, i, cond)
            got = chi_weighted_conditional(ds, w, i, conditional)
            assert got == pytest.approx(truth, rel=1e-12, abs=1e-15)
            assert chi_weighted_product_form(ds, w, i, conditional) == pytest.approx(got, rel=1e-9, abs=1e-15)


def test_weighted_p_dummy_zero(bits2, rng):
    ds = full_dataset(bits2, lambda a: a[1])
    w = WeightFunction(bits2, ds.profiles, rng.uniform(0, 1, 4))
    assert chi_weighted_conditional(ds, w, 0) == 0
    assert chi_weighted_product_form(ds, w, 0, True) == 0


def test_weighted_p_needs_full(bits2):
    ds = build_dataset(bits2, [((0, 0), 1)])
    with pytest.raises(PartialDataset):
        chi_weighted_conditional(ds, WeightFunction.uniform(ds), 0)


def test_distance_examples(and_ds):
    space = build_space([("x", ["0", "1"])])
    ds = build_dataset(space, [((0,), 0.2), ((1,), 0.7)])
    assert chi_distance(ds, "abs", 0) == pytest.approx(1.0)
    assert chi_distance(ds, "zero", 0) == 0
    assert chi_distance(and_ds, "discrete", 0) == chi(and_ds, 0)
    assert pair_count(ds, 0) == 2


def test_distance_vector_cosine():
    space = build_space([("x", ["0", "1"])])
    ds = build_dataset(space, [((0,), [1.0, 0.0]), ((1,), [0.0, 1.0])])
    assert chi_distance(ds, "cosine", 0) == pytest.approx(2.0)


def test_distance_matches_brute(rng):
    space = _space([3, 3])
    for _ in range(20):
        vals = {p: float(rng.normal()) for p in all_profiles(space.sizes) if rng.random() < 0.8}
        if not vals:
            continue
        ds = build_dataset(space, vals.items(), kind="scalar")
        for i in range(2):
            assert chi_distance(ds, "abs", i) == pytest.approx(brute_chi(vals, space.sizes, i))


def test_stats_report():
    s = stats_report([1, 2, 3])
    assert s == {"max": 3, "min": 1, "mean": 2, "median": 2, "stddev": pytest.approx(math.sqrt(2 / 3))}
    s = stats_report([0.7])
    assert s["max"] == s["min"] == s["mean"] == s["median"] == 0.7 and s["stddev"] == 0
    assert stats_report([1, 2, 3, 10])["median"] == 2.5
    with pytest.raises(ValueError):
        stats_report([])


def test_influence_report(and_ds):
    rep = influence_report(and_ds, "chi")
    assert [f.raw for f in rep.per_feature] == [2, 2]
    assert [f.normalized for f in rep.per_feature] == [0.5, 0.5]
    assert rep.stats["max"] == 0.5


def test_invariance_under_relabeling(rng):
    from influence.core import permute_feature_states, permute_features

    space = _space([3, 2, 4])
    for _ in range(30):
        ds = random_binary_dataset(rng, space)
        before = [chi(ds, i) for i in range(3)]
        tau = rng.permutation(4).tolist()
        assert [chi(permute_feature_states(ds, 2, tau), i) for i in range(3)] == before
        sigma = rng.permutation(3).tolist()
        moved = permute_features(ds, sigma)
        assert [chi(moved, sigma[j]) for j in range(3)] == before


def test_weights_scale_linearly(rng):
    space = _space([2, 3])
    ds = random_binary_dataset(rng, space, keep=1.0)
    w = WeightFunction(space, ds.profiles, rng.uniform(0, 1, ds.size))
    for i in range(2):
        assert chi_weighted(ds, w.scaled(3.0), i) == pytest.approx(3 * chi_weighted(ds, w, i))
        assert chi_weighted_conditional(ds, w.scaled(2.0), i) == pytest.approx(4 * chi_weighted_conditional(ds, w, i))
