"""Monte Carlo estimation of chi and chi^d for spaces too large to enumerate.

Sampling design: pairs (a, b) drawn i.i.d. and uniformly from B x A_i. A pair
contributes |v(a_-i, b) - v(a)| (or the distance) when (a_-i, b) is observed
and 0 otherwise, so ``|B| * |A_i| * mean`` is unbiased for the exact sum.

Random streams: each block of ``block_size`` samples draws from a Philox
generator keyed by ``SeedSequence(seed, spawn_key=(feature, block))``. The
estimate is therefore the same whether blocks run in order, in parallel or
in any other schedule. Stream stability follows numpy's ``Generator``
guarantees for ``Philox`` + ``integers``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import InfluenceError, LabeledDataset
from .distances import PseudoDistance, get_distance

BLOCK_SIZE = 1 << 16


@dataclass(frozen=True)
class EstimatorConfig:
    sample_count: int
    seed: int = 0
    confidence: float = 0.95
    block_size: int = BLOCK_SIZE
    workers: int = 1

    def __post_init__(self):
        if self.sample_count < 1:
            raise InfluenceError("sample_count must be at least 1")
        if not 0 < self.confidence < 1:
            raise InfluenceError("confidence must lie in (0, 1)")
        if self.block_size < 1:
            raise InfluenceError("block_size must be at least 1")


@dataclass(frozen=True)
class Estimate:
    value: float
    half_width: float
    samples_used: int

    @property
    def interval(self) -> tuple[float, float]:
        return self.value - self.half_width, self.value + self.half_width

    def covers(self, truth: float) -> bool:
        lo, hi = self.interval
        return lo <= truth <= hi


def hoeffding_half_width(n: int, value_range: float, confidence: float) -> float:
    """Two-sided Hoeffding half width for the mean of n samples in an interval of width ``value_range``."""
    if n < 1:
        raise InfluenceError("need at least one sample")
    return value_range * math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * n))


def block_generator(seed: int, feature: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=(int(feature), int(block)))
    return np.random.Generator(np.random.Philox(ss))


def _blocks(config: EstimatorConfig):
    full, rest = divmod(config.sample_count, config.block_size)
    sizes = [config.block_size] * full + ([rest] if rest else [])
    return list(enumerate(sizes))


def _run_blocks(fn, config: EstimatorConfig):
    blocks = _blocks(config)
    if config.workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            return list(pool.map(lambda blk: fn(*blk), blocks))
    return [fn(k, size) for k, size in blocks]


def _draw_pairs(dataset: LabeledDataset, feature: int, config: EstimatorConfig, block: int, size: int):
    rng = block_generator(config.seed, feature, block)
    rows = rng.integers(0, dataset.size, size=size)
    states = rng.integers(0, dataset.space.sizes[feature], size=size)
    codes = dataset.codes[rows] + (states - dataset.profiles[rows, feature]) * dataset.space.strides[feature]
    return rows, dataset.lookup(codes)


def sample_chi(dataset: LabeledDataset, feature: int | str, config: EstimatorConfig) -> Estimate:
    """Unbiased estimate of chi with a Hoeffding confidence half width."""
    if dataset.kind != "binary":
        raise InfluenceError("sample_chi needs a binary dataset")
    i = dataset.space.feature_index(feature)
    v = dataset.values

    def block(k, size):
        rows, pos = _draw_pairs(dataset, i, config, k, size)
        hit = pos >= 0
        return int(np.abs(v[pos[hit]] - v[rows[hit]]).sum())

    hits = sum(_run_blocks(block, config))
    scale = dataset.size * dataset.space.sizes[i]
    n = config.sample_count
    return Estimate(scale * hits / n, scale * hoeffding_half_width(n, 1.0, config.confidence), n)


def sample_chi_distance(dataset: LabeledDataset, distance: PseudoDistance | str, feature: int | str,
                        config: EstimatorConfig) -> Estimate:
    """Unbiased estimate of chi^d.

    The Hoeffding range is the largest distance seen among the samples, so
    the half width is a heuristic when the distance is unbounded.
    """
    dist = get_distance(distance)
    dist.check_kind(dataset.kind)
    i = dataset.space.feature_index(feature)
    v = dataset.values

    def block(k, size):
        rows, pos = _draw_pairs(dataset, i, config, k, size)
        hit = pos >= 0
        if not hit.any():
            return 0.0, 0.0
        d = dist.pairwise(v[pos[hit]], v[rows[hit]])
        return float(np.sum(d)), float(np.max(d))

    results = _run_blocks(block, config)
    total = math.fsum(r[0] for r in results)
    observed_max = max(r[1] for r in results)
    scale = dataset.size * dataset.space.sizes[i]
    n = config.sample_count
    return Estimate(scale * total / n, scale * hoeffding_half_width(n, observed_max, config.confidence), n)
