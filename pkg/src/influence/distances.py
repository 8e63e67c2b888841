"""Pseudo-distances between dataset values.

Every distance exposes a row-wise ``pairwise(x, y)`` over aligned value arrays
so the measures can evaluate a whole substitution sweep in one call.
"""

from __future__ import annotations

import itertools

import numpy as np

from .core import InfluenceError


class ZeroVectorError(InfluenceError):
    pass


class DistanceKindError(InfluenceError):
    pass


def cosine_distance(x, y) -> float:
    """1 minus the cosine similarity of two nonzero vectors."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise DistanceKindError(f"cosine distance needs equal-length vectors, got {x.shape} and {y.shape}")
    return float(CosineDistance().pairwise(x[None, :], y[None, :])[0])


class PseudoDistance:
    name = "abstract"
    kinds: tuple[str, ...] = ()

    def pairwise(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x, y) -> float:
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        return float(self.pairwise(x[None, ...], y[None, ...])[0])

    def check_kind(self, kind: str) -> None:
        if kind not in self.kinds:
            raise DistanceKindError(f"{self.name} distance does not apply to {kind} values")

    def __repr__(self):
        return f"{type(self).__name__}()"


class DiscreteDistance(PseudoDistance):
    """0 when the values are equal, 1 otherwise."""

    name = "discrete"
    kinds = ("binary", "scalar", "vector")

    def pairwise(self, x, y):
        diff = x != y
        if diff.ndim == 2:
            diff = diff.any(axis=1)
        return diff.astype(np.float64)


class AbsoluteDifference(PseudoDistance):
    name = "abs"
    kinds = ("binary", "scalar")

    def pairwise(self, x, y):
        return np.abs(np.asarray(x, dtype=np.float64) - np.asarray(y, dtype=np.float64))


class CosineDistance(PseudoDistance):
    name = "cosine"
    kinds = ("vector",)

    def pairwise(self, x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if x.shape != y.shape or x.ndim != 2:
            raise DistanceKindError(f"cosine distance needs aligned (k, d) arrays, got {x.shape} and {y.shape}")
        nx = np.linalg.norm(x, axis=1)
        ny = np.linalg.norm(y, axis=1)
        if (nx == 0).any() or (ny == 0).any():
            raise ZeroVectorError("cosine distance is undefined for a zero vector")
        sim = np.einsum("ij,ij->i", x, y) / (nx * ny)
        out = np.clip(1.0 - sim, 0.0, 2.0)
        # identical rows are exactly 0, not 1e-16
        out[(x == y).all(axis=1)] = 0.0
        return out


class ZeroDistance(PseudoDistance):
    name = "zero"
    kinds = ("binary", "scalar", "vector")

    def pairwise(self, x, y):
        return np.zeros(len(x))


class TableDistance(PseudoDistance):
    """Distance given as a symmetric matrix over a finite set of scalar values."""

    name = "table"
    kinds = ("binary", "scalar")

    def __init__(self, labels, matrix, check: bool = True, samples: int = 2000, seed: int = 0):
        self.labels = np.asarray(labels, dtype=np.float64)
        self.matrix = np.asarray(matrix, dtype=np.float64)
        k = len(self.labels)
        if self.matrix.shape != (k, k):
            raise InfluenceError(f"distance table must be {k}x{k}, got {self.matrix.shape}")
        if len(np.unique(self.labels)) != k:
            raise InfluenceError("distance table labels must be distinct")
        self._order = np.argsort(self.labels)
        if check:
            self.validate(samples=samples, seed=seed)

    def validate(self, samples: int = 2000, seed: int = 0) -> None:
        m = self.matrix
        if not np.isfinite(m).all() or (m < 0).any():
            raise InfluenceError("distance table entries must be finite and nonnegative")
        if not np.array_equal(m, m.T):
            raise InfluenceError("distance table is not symmetric")
        if (np.diag(m) != 0).any():
            raise InfluenceError("distance table has a nonzero diagonal")
        k = len(m)
        if k**3 <= samples:
            triples = np.array(list(itertools.product(range(k), repeat=3))).reshape(-1, 3)
        else:
            triples = np.random.default_rng(seed).integers(0, k, size=(samples, 3))
        a, b, c = triples.T
        if (m[a, c] > m[a, b] + m[b, c] + 1e-12 * (1 + m.max())).any():
            raise InfluenceError("distance table violates the triangle inequality")

    def _index(self, x):
        x = np.asarray(x, dtype=np.float64)
        pos = np.searchsorted(self.labels[self._order], x)
        pos = np.minimum(pos, len(self.labels) - 1)
        idx = self._order[pos]
        if (self.labels[idx] != x).any():
            raise InfluenceError("value not covered by the distance table")
        return idx

    def pairwise(self, x, y):
        return self.matrix[self._index(x), self._index(y)]


_NAMED = {
    "discrete": DiscreteDistance,
    "abs": AbsoluteDifference,
    "absolute": AbsoluteDifference,
    "cosine": CosineDistance,
    "zero": ZeroDistance,
}


def get_distance(name: str | PseudoDistance) -> PseudoDistance:
    if isinstance(name, PseudoDistance):
        return name
    try:
        return _NAMED[name]()
    except KeyError:
        raise DistanceKindError(f"unknown distance {name!r}; choose from {sorted(_NAMED)}") from None
