"""Influence of features of a linear classifier on the unit cube.

chi_i(w; q) = int_0^1 int_[0,1]^n |v(x_-i, b) - v(x)| dx db, where
v(x) = 1 iff x . w >= q. Monte Carlo, grid and closed-form routes all report
this same normalization, so they can be compared directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .core import Feature, FeatureSpace, InfluenceError, LabeledDataset, check_cap
from .estimators import Estimate, block_generator, hoeffding_half_width, BLOCK_SIZE
from .measures import chi


class UnsupportedSignPattern(InfluenceError):
    pass


@dataclass(frozen=True)
class LinearClassifier:
    weights: tuple[float, ...]
    threshold: float

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        if not w:
            raise InfluenceError("a linear classifier needs at least one weight")
        if any(x == 0 for x in w) or not all(np.isfinite(w)):
            raise InfluenceError("every weight must be finite and nonzero")
        if not np.isfinite(self.threshold):
            raise InfluenceError("threshold must be finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "threshold", float(self.threshold))

    @property
    def n(self) -> int:
        return len(self.weights)

    def scaled(self, alpha: float) -> "LinearClassifier":
        return LinearClassifier(tuple(alpha * w for w in self.weights), alpha * self.threshold)


def classify(clf: LinearClassifier, x):
    """1 iff x . w >= q; accepts one point or a (k, n) array of points."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.shape[-1] != clf.n or arr.ndim > 2:
        raise InfluenceError(f"expected points of dimension {clf.n}, got shape {arr.shape}")
    out = (arr @ np.asarray(clf.weights) >= clf.threshold).astype(np.int64)
    return int(out) if arr.ndim == 1 else out


@dataclass(frozen=True)
class PivotalAccount:
    piv_volume: float  # loss -> win under substitution
    anti_piv_volume: float  # win -> loss
    half_width: float

    @property
    def chi(self) -> float:
        return self.piv_volume + self.anti_piv_volume


@dataclass(frozen=True)
class LinearEstimate(Estimate):
    pivotal: PivotalAccount


def chi_linear_mc(clf: LinearClassifier, feature: int, sample_count: int, seed: int = 0,
                  confidence: float = 0.95, block_size: int = BLOCK_SIZE) -> LinearEstimate:
    """Monte Carlo estimate of chi_i over uniform (x, b) in [0,1]^(n+1)."""
    if sample_count < 1:
        raise InfluenceError("sample_count must be at least 1")
    if not 0 <= feature < clf.n:
        raise InfluenceError(f"feature {feature} out of range")
    w = np.asarray(clf.weights)
    piv = anti = 0
    full, rest = divmod(sample_count, block_size)
    sizes = [block_size] * full + ([rest] if rest else [])
    for k, size in enumerate(sizes):
        rng = block_generator(seed, feature, k)
        u = rng.random((size, clf.n + 1))
        x = u[:, : clf.n]
        before = x @ w >= clf.threshold
        after = (x @ w + (u[:, clf.n] - x[:, feature]) * w[feature]) >= clf.threshold
        piv += int(np.count_nonzero(after & ~before))
        anti += int(np.count_nonzero(before & ~after))
    n = sample_count
    h = hoeffding_half_width(n, 1.0, confidence)
    account = PivotalAccount(piv / n, anti / n, h)
    return LinearEstimate((piv + anti) / n, h, n, account)


def chi_linear_1d_closed(w: float, q: float) -> float:
    """2 (1 - q/w)(q/w) for a single feature with weight w > 0; 0 when v is constant."""
    if w <= 0:
        raise UnsupportedSignPattern("closed form needs w > 0; mirror negative weights first")
    if q <= 0 or q >= w:
        return 0.0
    r = q / w
    return 2.0 * (1.0 - r) * r


def case_branch_2d(w1: float, w2: float, q: float) -> str:
    if not (w1 > 0 and w2 < 0):
        raise UnsupportedSignPattern(f"closed form covers w1 > 0 > w2, got ({w1}, {w2})")
    if q >= 0:
        if w1 < q:
            return "constant"
        return "q>=0,q>=w1+w2" if q >= w1 + w2 else "q>=0,q<w1+w2"
    if w2 >= q:
        return "constant"
    return "q<0,q>=w1+w2" if q >= w1 + w2 else "q<0,q<w1+w2"


def pivotal_volumes_2d(w1: float, w2: float, q: float) -> tuple[float, float]:
    """Pivotal volumes int p(1 - p) of both features for w1 > 0 > w2."""
    case = case_branch_2d(w1, w2, q)
    if case == "constant":
        return 0.0, 0.0
    if case == "q>=0,q>=w1+w2":
        p1 = (w1 - q) ** 2 * (2 * q + w1) / (6 * (-w2) * w1**2)
        p2 = (w1 - q) ** 2 * (2 * q - 2 * w1 - 3 * w2) / (6 * w2**2 * w1)
    elif case == "q>=0,q<w1+w2":
        p1 = (6 * q * (w1 + w2) - 6 * q**2 - w2 * (3 * w1 + 2 * w2)) / (6 * w1**2)
        p2 = -w2 / (6 * w1)
    elif case == "q<0,q>=w1+w2":
        p1 = w1 / (-6 * w2)
        p2 = -(6 * q**2 - 6 * q * (w1 + w2) + w1 * (3 * w2 + 2 * w1)) / (6 * w2**2)
    else:
        p1 = (q - w2) ** 2 * (2 * q - 2 * w2 - 3 * w1) / (6 * w2 * w1**2)
        p2 = -((q - w2) ** 2) * (2 * q + w2) / (6 * w2**2 * w1)
    return p1, p2


def chi_linear_2d_closed(w1: float, w2: float, q: float) -> tuple[float, float]:
    """Exact (chi_1, chi_2) for two features with w1 > 0 > w2.

    chi counts both directions of a flip, so it is twice the pivotal volume.
    """
    p1, p2 = pivotal_volumes_2d(w1, w2, q)
    return 2.0 * p1, 2.0 * p2


def chi_linear_2d_any_signs(w1: float, w2: float, q: float) -> tuple[float, float]:
    """Exact (chi_1, chi_2) for any nonzero w1, w2.

    x_j -> 1 - x_j maps (w_j, q) to (-w_j, q - w_j) and leaves every chi
    unchanged, so each sign pattern reduces to w1 > 0 > w2 (swapping the
    features if needed).
    """
    if w1 == 0 or w2 == 0:
        raise UnsupportedSignPattern("weights must be nonzero")
    if w1 > 0 and w2 < 0:
        return chi_linear_2d_closed(w1, w2, q)
    if w1 < 0 and w2 > 0:
        c2, c1 = chi_linear_2d_closed(w2, w1, q)
        return c1, c2
    if w1 > 0:  # both positive: reflect the second feature
        return chi_linear_2d_closed(w1, -w2, q - w2)
    return chi_linear_2d_closed(-w1, w2, q - w1)  # both negative: reflect the first


def grid_dataset(clf: LinearClassifier, resolution: int) -> LabeledDataset:
    """Cell-center grid of [0,1]^n with m points per axis, labeled by the classifier."""
    m = int(resolution)
    if m < 2:
        raise InfluenceError("grid resolution must be at least 2")
    check_cap(m**clf.n, "grid")
    labels = tuple(str(k) for k in range(m))
    space = FeatureSpace(tuple(Feature(f"x{j}", labels) for j in range(clf.n)))
    profiles = space.all_profiles()
    centers = (profiles + 0.5) / m
    return LabeledDataset.from_arrays(space, profiles, classify(clf, centers), "binary")


def chi_linear_grid(clf: LinearClassifier, feature: int, resolution: int,
                    dataset: LabeledDataset | None = None) -> float:
    """Discretized chi_i: grid chi divided by m^(n+1)."""
    ds = dataset if dataset is not None else grid_dataset(clf, resolution)
    return chi(ds, feature) / float(resolution) ** (clf.n + 1)


@dataclass(frozen=True)
class PairVerdict:
    i: int
    j: int
    chi_i: float
    chi_j: float
    margin: float
    verdict: str  # "confirmed", "inconclusive" or "violation"


@dataclass(frozen=True)
class MonotonicityReport:
    chis: tuple[float, ...]
    half_widths: tuple[float, ...]
    pairs: tuple[PairVerdict, ...]

    def count(self, verdict: str) -> int:
        return sum(p.verdict == verdict for p in self.pairs)

    @property
    def violations(self) -> list[PairVerdict]:
        return [p for p in self.pairs if p.verdict == "violation"]


def feature_influences(clf: LinearClassifier, method: str = "mc", sample_count: int = 200_000, seed: int = 0,
                       resolution: int = 100, confidence: float = 0.95) -> tuple[list[float], list[float]]:
    """chi for every feature plus an error scale per value."""
    if method == "mc":
        ests = [chi_linear_mc(clf, i, sample_count, seed, confidence) for i in range(clf.n)]
        return [e.value for e in ests], [e.half_width for e in ests]
    if method == "grid":
        ds = grid_dataset(clf, resolution)
        return [chi_linear_grid(clf, i, resolution, ds) for i in range(clf.n)], [1.0 / resolution] * clf.n
    if method == "closed":
        if clf.n == 1:
            w, = clf.weights
            if w < 0:
                # x -> 1 - x maps (w, q) to (-w, q - w)
                return [chi_linear_1d_closed(-w, clf.threshold - w)], [0.0]
            return [chi_linear_1d_closed(w, clf.threshold)], [0.0]
        if clf.n == 2:
            return list(chi_linear_2d_any_signs(*clf.weights, clf.threshold)), [0.0, 0.0]
        raise UnsupportedSignPattern("closed forms exist for one or two features only")
    raise InfluenceError(f"unknown method {method!r}")


def check_weight_monotonicity(clf: LinearClassifier, tolerance: float = 0.0, sample_count: int = 200_000,
                              seed: int = 0, method: str = "mc", resolution: int = 100,
                              noise_multiplier: float = 4.0, confidence: float = 0.95) -> MonotonicityReport:
    """Compare the chi ranking with the |w| ranking for every feature pair.

    A pair is a violation only when the chi gap points the wrong way by more
    than ``tolerance + noise_multiplier * (h_i + h_j)``; gaps inside that
    margin are inconclusive. Equal |w| pairs are confirmed when their chi
    values agree within the margin.
    """
    chis, hws = feature_influences(clf, method, sample_count, seed, resolution, confidence)
    absw = [abs(w) for w in clf.weights]
    pairs = []
    for i, j in combinations(range(clf.n), 2):
        margin = tolerance + noise_multiplier * (hws[i] + hws[j])
        gap = chis[i] - chis[j]
        if absw[i] == absw[j]:
            verdict = "confirmed" if abs(gap) <= margin else "violation"
        else:
            signed = gap if absw[i] > absw[j] else -gap
            if signed > margin:
                verdict = "confirmed"
            elif signed < -margin:
                verdict = "violation"
            else:
                verdict = "inconclusive"
        pairs.append(PairVerdict(i, j, chis[i], chis[j], margin, verdict))
    return MonotonicityReport(tuple(chis), tuple(hws), tuple(pairs))
