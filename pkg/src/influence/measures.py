"""Exact influence measures: chi and its state, weighted and distance variants.

All measures sweep the substitute state b of the measured feature and look
up (a_-i, b) in B exactly, so partial datasets are handled by the
"(a_-i, b) in B" guard without special cases.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

import numpy as np

from .core import (
    FeatureSpace,
    InfluenceError,
    LabeledDataset,
    _check_bijection,
    neighbor_groups,
)
from .distances import PseudoDistance, get_distance


class NotBinary(InfluenceError):
    pass


class PartialDataset(InfluenceError):
    pass


class MissingWeight(InfluenceError):
    pass


def _require_binary(dataset: LabeledDataset, what: str) -> None:
    if dataset.kind != "binary":
        raise NotBinary(f"{what} is defined for binary datasets, got {dataset.kind} values")


def _require_full(dataset: LabeledDataset, what: str) -> None:
    if not dataset.is_full:
        raise PartialDataset(
            f"{what} needs the full profile space ({dataset.space.profile_count} profiles), "
            f"dataset observes {dataset.size}"
        )


def _state(dataset: LabeledDataset, feature: int, state) -> int:
    if isinstance(state, str):
        return dataset.space.state_index(feature, state)
    if not 0 <= state < dataset.space.sizes[feature]:
        raise InfluenceError(f"state {state} out of range for feature {dataset.space.names[feature]!r}")
    return int(state)


def substitution_pairs(dataset: LabeledDataset, feature: int, states: Sequence[int] | None = None,
                       skip_identity: bool = True) -> Iterator[tuple[int, np.ndarray, np.ndarray]]:
    """Yield ``(b, rows_a, rows_sub)`` where row ``rows_sub[k]`` holds (a_-i, b) for a = ``rows_a[k]``.

    The b = a_i term contributes nothing to any measure here and is skipped
    unless ``skip_identity`` is False.
    """
    own = dataset.profiles[:, feature]
    if states is None:
        states = range(dataset.space.sizes[feature])
    for b in states:
        pos = dataset.lookup(dataset.substitute_codes(feature, b))
        mask = pos >= 0
        if skip_identity:
            mask &= own != b
        rows_a = np.flatnonzero(mask)
        yield b, rows_a, pos[rows_a]


def pair_count(dataset: LabeledDataset, feature: int | str) -> int:
    """Number of ordered pairs (a, b) with b != a_i and (a_-i, b) in B."""
    i = dataset.space.feature_index(feature)
    return sum(len(rows) for _, rows, _ in substitution_pairs(dataset, i))


def chi(dataset: LabeledDataset, feature: int | str) -> int:
    """Number of ordered (a, b) substitutions in B that flip the binary outcome."""
    _require_binary(dataset, "chi")
    i = dataset.space.feature_index(feature)
    v = dataset.values
    total = 0
    for _, rows_a, rows_s in substitution_pairs(dataset, i):
        total += int(np.abs(v[rows_s] - v[rows_a]).sum())
    return total


def chi_normalized(dataset: LabeledDataset, feature: int | str) -> float:
    return chi(dataset, feature) / dataset.size


def chi_win_loss_form(dataset: LabeledDataset, feature: int | str) -> int:
    """2 * sum over neighbor groups of wins * losses."""
    _require_binary(dataset, "chi_win_loss_form")
    i = dataset.space.feature_index(feature)
    _, inverse = np.unique(dataset.context_codes(i), return_inverse=True)
    wins = np.bincount(inverse, weights=dataset.values).astype(np.int64)
    sizes = np.bincount(inverse).astype(np.int64)
    return 2 * int((wins * (sizes - wins)).sum())


def chi_by_groups(dataset: LabeledDataset, feature: int | str) -> list[tuple[tuple, int]]:
    """chi restricted to each neighbor group, keyed by context."""
    _require_binary(dataset, "chi_by_groups")
    out = []
    for g in neighbor_groups(dataset, feature):
        vals = [v for _, v in g.members]
        out.append((g.context, sum(abs(x - y) for x in vals for y in vals)))
    return out


def zeta_state(dataset: LabeledDataset, feature: int | str, state, raw: bool = False) -> float:
    """Signed influence of forcing feature i into state b, averaged over A.

    ``raw=True`` drops the 1/|A| factor and returns an integer.
    """
    _require_binary(dataset, "zeta")
    _require_full(dataset, "zeta")
    i = dataset.space.feature_index(feature)
    b = _state(dataset, i, state)
    v = dataset.values
    pos = dataset.lookup(dataset.substitute_codes(i, b))
    total = int(v[pos].sum() - v.sum())
    return total if raw else total / dataset.size


def chi_state(dataset: LabeledDataset, feature: int | str, state) -> int:
    """Disagreements between v(a) and v(a_-i, b) for one substitute state b."""
    _require_binary(dataset, "chi_state")
    i = dataset.space.feature_index(feature)
    b = _state(dataset, i, state)
    v = dataset.values
    total = 0
    for _, rows_a, rows_s in substitution_pairs(dataset, i, states=[b]):
        total += int(np.abs(v[rows_s] - v[rows_a]).sum())
    return total


class WeightFunction:
    """Nonnegative weights on profiles, stored by profile code."""

    def __init__(self, space: FeatureSpace, profiles, weights):
        prof = space.validate_profiles(np.asarray(profiles).reshape(-1, space.n))
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (len(prof),):
            raise InfluenceError("one weight per profile expected")
        if not np.isfinite(w).all():
            raise InfluenceError("weights must be finite")
        if (w < 0).any():
            raise InfluenceError("weights must be nonnegative")
        codes = space.codes(prof)
        order = np.argsort(codes, kind="stable")
        codes, prof, w = codes[order], prof[order], w[order]
        if (codes[1:] == codes[:-1]).any():
            raise InfluenceError("a profile received more than one weight")
        self.space = space
        self.profiles = prof
        self.codes = codes
        self.weights = w

    @classmethod
    def from_mapping(cls, space: FeatureSpace, mapping: Mapping[Sequence[int], float]) -> "WeightFunction":
        items = list(mapping.items())
        return cls(space, [list(p) for p, _ in items], [w for _, w in items])

    @classmethod
    def uniform(cls, dataset: LabeledDataset, value: float = 1.0) -> "WeightFunction":
        return cls(dataset.space, dataset.profiles, np.full(dataset.size, float(value)))

    def as_mapping(self) -> dict[tuple[int, ...], float]:
        return {tuple(int(x) for x in p): float(w) for p, w in zip(self.profiles, self.weights)}

    def aligned(self, dataset: LabeledDataset) -> np.ndarray:
        """Weights in the row order of ``dataset``; every observed profile must be covered."""
        if dataset.space.sizes != self.space.sizes:
            raise InfluenceError("weights and dataset live on different spaces")
        pos = np.searchsorted(self.codes, dataset.codes)
        pos = np.minimum(pos, len(self.codes) - 1)
        hit = self.codes[pos] == dataset.codes
        if not hit.all():
            row = int(np.flatnonzero(~hit)[0])
            raise MissingWeight(f"no weight for observed profile {tuple(int(x) for x in dataset.profiles[row])}")
        return self.weights[pos]

    def scaled(self, alpha: float) -> "WeightFunction":
        return WeightFunction(self.space, self.profiles, self.weights * alpha)

    def permute_feature_states(self, feature: int, tau: Sequence[int]) -> "WeightFunction":
        tau_arr = _check_bijection(tau, self.space.sizes[feature], "state map")
        prof = self.profiles.copy()
        prof[:, feature] = tau_arr[prof[:, feature]]
        return WeightFunction(self.space, prof, self.weights)

    def permute_features(self, sigma: Sequence[int]) -> "WeightFunction":
        sig = _check_bijection(sigma, self.space.n, "feature map")
        feats = [None] * self.space.n
        for j, f in enumerate(self.space.features):
            feats[sig[j]] = f
        prof = np.empty_like(self.profiles)
        prof[:, sig] = self.profiles
        return WeightFunction(FeatureSpace(tuple(feats)), prof, self.weights)


def chi_weighted(dataset: LabeledDataset, weights: WeightFunction, feature: int | str) -> float:
    """sum_a w(a) sum_b |v(a_-i, b) - v(a)| over observed substitutions."""
    _require_binary(dataset, "chi_weighted")
    i = dataset.space.feature_index(feature)
    w = weights.aligned(dataset)
    v = dataset.values
    parts = [
        float(np.sum(w[rows_a] * np.abs(v[rows_s] - v[rows_a])))
        for _, rows_a, rows_s in substitution_pairs(dataset, i)
    ]
    return math.fsum(parts)


def _context_masses(dataset: LabeledDataset, feature: int, w: np.ndarray):
    _, inverse = np.unique(dataset.context_codes(feature), return_inverse=True)
    mass = np.bincount(inverse, weights=w)
    return inverse, mass


def _substitute_weights(dataset, feature, w, conditional):
    """w(b | a_-i) for the profile in each row."""
    if not conditional:
        return w
    inverse, mass = _context_masses(dataset, feature, w)
    ctx = mass[inverse]
    out = np.zeros_like(w)
    nz = ctx > 0
    out[nz] = w[nz] / ctx[nz]
    return out


def chi_weighted_conditional(dataset: LabeledDataset, weights: WeightFunction, feature: int | str,
                             conditional: bool = False) -> float:
    """The prior-weighted measure sum_a w(a) sum_b w(b | a_-i) |v(a_-i, b) - v(a)| on a full space.

    With ``conditional=False`` w(b | a_-i) is the weight of the point
    (a_-i, b); with ``conditional=True`` it is that weight divided by the
    context mass w(a_-i) (zero when the context has no mass).
    """
    _require_binary(dataset, "chi_weighted_conditional")
    _require_full(dataset, "chi_weighted_conditional")
    i = dataset.space.feature_index(feature)
    w = weights.aligned(dataset)
    c = _substitute_weights(dataset, i, w, conditional)
    v = dataset.values
    parts = [
        float(np.sum(w[rows_a] * c[rows_s] * np.abs(v[rows_s] - v[rows_a])))
        for _, rows_a, rows_s in substitution_pairs(dataset, i)
    ]
    return math.fsum(parts)


def chi_weighted_product_form(dataset: LabeledDataset, weights: WeightFunction, feature: int | str,
                              conditional: bool = False) -> float:
    """2 * sum over contexts of w(a_-i) * w(W_{a_-i}) * w(L_{a_-i}).

    Winning and losing masses are sums of w(b | a_-i) under the same
    convention as :func:`chi_weighted_conditional`. The context factor
    w(a_-i) is the marginal mass in conditional mode and 1 in point mode,
    which is the pairing under which the identity holds for each convention.
    """
    _require_binary(dataset, "chi_weighted_product_form")
    _require_full(dataset, "chi_weighted_product_form")
    i = dataset.space.feature_index(feature)
    w = weights.aligned(dataset)
    c = _substitute_weights(dataset, i, w, conditional)
    inverse, mass = _context_masses(dataset, i, w)
    win = np.bincount(inverse, weights=c * dataset.values, minlength=len(mass))
    loss = np.bincount(inverse, weights=c * (1 - dataset.values), minlength=len(mass))
    factor = mass if conditional else np.ones_like(mass)
    return 2.0 * math.fsum((factor * win * loss).tolist())


def chi_distance(dataset: LabeledDataset, distance: PseudoDistance | str, feature: int | str) -> float:
    """sum over observed substitutions of d(v(a_-i, b), v(a))."""
    dist = get_distance(distance)
    dist.check_kind(dataset.kind)
    i = dataset.space.feature_index(feature)
    v = dataset.values
    parts = []
    for _, rows_a, rows_s in substitution_pairs(dataset, i):
        if len(rows_a):
            parts.append(float(np.sum(dist.pairwise(v[rows_s], v[rows_a]))))
    return math.fsum(parts)


# -- reports -------------------------------------------------------------

STAT_NAMES = ("max", "min", "mean", "median", "stddev")


def stats_report(values: Sequence[float]) -> dict[str, float]:
    """Max, min, mean, median and population standard deviation."""
    vals = [float(x) for x in values]
    if not vals:
        raise InfluenceError("cannot summarize an empty list of values")
    return {
        "max": max(vals),
        "min": min(vals),
        "mean": statistics.fmean(vals),
        "median": float(statistics.median(vals)),
        "stddev": statistics.pstdev(vals),
    }


@dataclass(frozen=True)
class FeatureInfluence:
    name: str
    raw: float
    normalized: float


@dataclass(frozen=True)
class StateInfluence:
    feature: str
    state: str
    value: float


@dataclass(frozen=True)
class InfluenceReport:
    measure: str
    per_feature: tuple[FeatureInfluence, ...]
    per_state: tuple[StateInfluence, ...] = ()
    stats: dict = field(default_factory=dict)


MEASURES = ("chi", "chi-norm", "win-loss", "weighted", "weighted-p", "distance")


def feature_measure(dataset: LabeledDataset, measure: str, feature: int, *, weights=None, distance=None,
                    conditional: bool = False) -> float:
    if measure in ("chi", "chi-norm"):
        return chi(dataset, feature)
    if measure == "win-loss":
        return chi_win_loss_form(dataset, feature)
    if measure == "weighted":
        if weights is None:
            raise InfluenceError("weighted measure needs weights")
        return chi_weighted(dataset, weights, feature)
    if measure == "weighted-p":
        if weights is None:
            raise InfluenceError("weighted measure needs weights")
        return chi_weighted_conditional(dataset, weights, feature, conditional=conditional)
    if measure == "distance":
        return chi_distance(dataset, distance or "discrete", feature)
    raise InfluenceError(f"unknown measure {measure!r}; choose from {list(MEASURES)}")


def influence_report(dataset: LabeledDataset, measure: str = "chi", features: Sequence[int | str] | None = None,
                     *, weights: WeightFunction | None = None, distance=None, conditional: bool = False,
                     states: bool = False) -> InfluenceReport:
    """Per-feature influence with |B|-normalized values and summary statistics.

    ``states=True`` adds chi_{i,b} for every state of the selected features.
    """
    idx = [dataset.space.feature_index(f) for f in (features if features is not None else range(dataset.space.n))]
    rows = []
    for i in idx:
        raw = feature_measure(dataset, measure, i, weights=weights, distance=distance, conditional=conditional)
        rows.append(FeatureInfluence(dataset.space.names[i], raw, raw / dataset.size))
    per_state = []
    if states:
        for i in idx:
            for b, label in enumerate(dataset.space.features[i].states):
                per_state.append(StateInfluence(dataset.space.names[i], label, chi_state(dataset, i, b)))
    stats = stats_report([r.normalized for r in rows])
    return InfluenceReport(measure, tuple(rows), tuple(per_state), stats)
