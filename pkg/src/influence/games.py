"""TU cooperative games, Banzhaf and Shapley values, and axiom checkers.

Players are 0-based; coalitions are bitmasks with bit ``i`` set when player
``i`` is present.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass, field
from itertools import permutations
from typing import Callable, Iterable

import numpy as np

from .core import (
    InfluenceError,
    LabeledDataset,
    build_space,
    is_dummy,
    permute_feature_states,
    permute_features,
)

EXACT_PLAYER_CAP = 20
SHAPLEY_PLAYER_CAP = 10

Measure = Callable[[LabeledDataset, int], float]


@dataclass(frozen=True, eq=False)
class TUGame:
    n: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not 1 <= self.n <= EXACT_PLAYER_CAP:
            raise InfluenceError(f"exact engine supports 1..{EXACT_PLAYER_CAP} players, got {self.n}")
        vals = np.asarray(self.values)
        if vals.shape != (1 << self.n,):
            raise InfluenceError(f"characteristic needs {1 << self.n} entries, got {vals.shape}")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, n: int, fn: Callable[[frozenset], float]) -> "TUGame":
        vals = [fn(frozenset(j for j in range(n) if mask >> j & 1)) for mask in range(1 << n)]
        return cls(n, np.asarray(vals))

    def __eq__(self, other):
        if not isinstance(other, TUGame):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.values, other.values)

    __hash__ = None

    def __call__(self, coalition) -> float:
        return self.values[_mask(coalition, self.n)].item()

    @property
    def is_binary(self) -> bool:
        return bool(np.isin(self.values, (0, 1)).all())

    def is_monotone(self) -> bool:
        for i in range(self.n):
            masks = np.arange(1 << self.n)
            without = masks[(masks >> i & 1) == 0]
            if (self.values[without | (1 << i)] < self.values[without]).any():
                return False
        return True


def majority_game(n: int) -> TUGame:
    return TUGame.from_function(n, lambda s: int(2 * len(s) > n))


def unanimity_game(n: int, carrier: Iterable[int] | None = None) -> TUGame:
    need = frozenset(range(n) if carrier is None else carrier)
    return TUGame.from_function(n, lambda s: int(need <= s))


def dictator_game(n: int, dictator: int = 0) -> TUGame:
    return TUGame.from_function(n, lambda s: int(dictator in s))


def additive_game(contributions) -> TUGame:
    c = list(contributions)
    return TUGame.from_function(len(c), lambda s: sum(c[j] for j in s))


def _mask(coalition, n: int) -> int:
    if isinstance(coalition, (int, np.integer)):
        mask = int(coalition)
    else:
        mask = 0
        for j in coalition:
            if not 0 <= j < n:
                raise InfluenceError(f"player {j} out of range")
            mask |= 1 << j
    if not 0 <= mask < 1 << n:
        raise InfluenceError(f"coalition mask {mask} out of range")
    return mask


def _player(game: TUGame, i: int) -> int:
    if not 0 <= i < game.n:
        raise InfluenceError(f"player {i} out of range for {game.n} players")
    return i


def marginal(game: TUGame, i: int, coalition) -> float:
    """v(S u {i}) - v(S)."""
    i = _player(game, i)
    s = _mask(coalition, game.n)
    return (game.values[s | (1 << i)] - game.values[s]).item()


def _marginals(game: TUGame, i: int) -> np.ndarray:
    masks = np.arange(1 << game.n)
    return game.values[masks | (1 << i)] - game.values[masks]


def banzhaf(game: TUGame, i: int, raw: bool = False):
    """Sum of marginal contributions over all S subset of N, divided by 2^n unless ``raw``.

    Coalitions that already contain i contribute 0.
    """
    total = _marginals(game, _player(game, i)).sum().item()
    return total if raw else total / (1 << game.n)


def swing_count(game: TUGame, i: int):
    """sum over S of |m_i(S)|; equals the raw Banzhaf index for monotone games."""
    return np.abs(_marginals(game, _player(game, i))).sum().item()


def shapley(game: TUGame, i: int) -> float:
    """Average predecessor marginal over all n! orderings."""
    i = _player(game, i)
    if game.n > SHAPLEY_PLAYER_CAP:
        raise InfluenceError(f"Shapley enumeration is capped at {SHAPLEY_PLAYER_CAP} players")
    vals = game.values.tolist()
    total = 0
    for order in permutations(range(game.n)):
        pred = 0
        for j in order:
            if j == i:
                break
            pred |= 1 << j
        total += vals[pred | (1 << i)] - vals[pred]
    return total / math.factorial(game.n)


def game_to_dataset(game: TUGame) -> LabeledDataset:
    """Each player becomes a two-state feature (0 absent, 1 present) over the full space."""
    space = build_space([(f"p{j}", ["0", "1"]) for j in range(game.n)])
    profiles = space.all_profiles()
    # feature j is bit j of the coalition
    masks = (profiles << np.arange(game.n)).sum(axis=1)
    vals = game.values[masks]
    kind = "binary" if game.is_binary else "scalar"
    return LabeledDataset.from_arrays(space, profiles, vals, kind)


def dataset_to_game(dataset: LabeledDataset) -> TUGame:
    if dataset.space.sizes != (2,) * dataset.space.n or not dataset.is_full:
        raise InfluenceError("only full datasets over two-state features map to games")
    if dataset.kind == "vector":
        raise InfluenceError("vector-valued datasets do not map to TU games")
    masks = (dataset.profiles << np.arange(dataset.space.n)).sum(axis=1)
    vals = np.empty(1 << dataset.space.n, dtype=dataset.values.dtype)
    vals[masks] = dataset.values
    return TUGame(dataset.space.n, vals)


# -- axiom checkers --------------------------------------------------------


@dataclass
class AxiomVerdict:
    axiom: str
    passed: bool
    trials: int
    witnesses: list = field(default_factory=list)

    def __str__(self):
        state = "pass" if self.passed else f"FAIL ({len(self.witnesses)} witness(es))"
        return f"{self.axiom}: {state} over {self.trials} trials"


def _agree(x, y) -> bool:
    if isinstance(x, numbers.Integral) and isinstance(y, numbers.Integral):
        return x == y
    return math.isclose(float(x), float(y), rel_tol=1e-9, abs_tol=1e-12)


def random_space(rng: np.random.Generator, max_features: int = 3, max_states: int = 4, max_profiles: int = 64):
    while True:
        n = int(rng.integers(1, max_features + 1))
        sizes = [int(rng.integers(1, max_states + 1)) for _ in range(n)]
        if math.prod(sizes) <= max_profiles and max(sizes) > 1:
            return build_space([(f"f{j}", [str(s) for s in range(k)]) for j, k in enumerate(sizes)])


def random_binary_dataset(rng: np.random.Generator, space=None, keep: float | None = None,
                          **space_kw) -> LabeledDataset:
    """Random binary labels on a random subset of a (random) space."""
    space = space or random_space(rng, **space_kw)
    profiles = space.all_profiles()
    if keep is None:
        keep = 1.0 if rng.random() < 0.4 else float(rng.uniform(0.3, 1.0))
    mask = rng.random(len(profiles)) < keep
    if not mask.any():
        mask[rng.integers(len(profiles))] = True
    p = rng.uniform(0.1, 0.9)
    values = (rng.random(int(mask.sum())) < p).astype(np.int64)
    return LabeledDataset.from_arrays(space, profiles[mask], values, "binary")


def _dummy_dataset(rng: np.random.Generator) -> tuple[LabeledDataset, int]:
    space = random_space(rng)
    i = int(rng.integers(space.n))
    profiles = space.all_profiles()
    ctx = profiles.copy()
    ctx[:, i] = 0
    ctx_codes = space.codes(ctx)
    uniq, inverse = np.unique(ctx_codes, return_inverse=True)
    labels = (rng.random(len(uniq)) < 0.5).astype(np.int64)
    mask = rng.random(len(profiles)) < float(rng.uniform(0.3, 1.0))
    if not mask.any():
        mask[0] = True
    ds = LabeledDataset.from_arrays(space, profiles[mask], labels[inverse][mask], "binary")
    return ds, i


def _call(measure: Measure, ds: LabeledDataset, i: int):
    return measure(ds, i)


def check_axiom_dummy(measure: Measure, trials: int = 500, seed: int = 0) -> AxiomVerdict:
    rng = np.random.default_rng([seed, 1])
    verdict = AxiomVerdict("dummy", True, trials)
    for t in range(trials):
        ds, i = _dummy_dataset(rng)
        assert is_dummy(ds, i)
        val = _call(measure, ds, i)
        if not _agree(val, 0):
            verdict.passed = False
            verdict.witnesses.append({"trial": t, "dataset": ds.records(), "feature": i, "value": val})
    return verdict


def check_axiom_symmetry(measure: Measure, trials: int = 500, seed: int = 0) -> AxiomVerdict:
    """State symmetry (all features invariant under a state relabeling) and feature symmetry."""
    rng = np.random.default_rng([seed, 2])
    verdict = AxiomVerdict("symmetry", True, trials)
    for t in range(trials):
        ds = random_binary_dataset(rng)
        n = ds.space.n
        i = int(rng.integers(n))
        tau = rng.permutation(ds.space.sizes[i]).tolist()
        relabeled = permute_feature_states(ds, i, tau)
        for j in range(n):
            a, b = _call(measure, ds, j), _call(measure, relabeled, j)
            if not _agree(a, b):
                verdict.passed = False
                verdict.witnesses.append({"trial": t, "kind": "state", "feature": i, "tau": tau,
                                          "measured": j, "before": a, "after": b, "dataset": ds.records()})
        sigma = rng.permutation(n).tolist()
        moved = permute_features(ds, sigma)
        for j in range(n):
            a, b = _call(measure, ds, j), _call(measure, moved, sigma[j])
            if not _agree(a, b):
                verdict.passed = False
                verdict.witnesses.append({"trial": t, "kind": "feature", "sigma": sigma,
                                          "measured": j, "before": a, "after": b, "dataset": ds.records()})
    return verdict


def _win_loss_dataset(space, profiles, winners, losers) -> LabeledDataset:
    rows = np.r_[winners, losers]
    vals = np.r_[np.ones(len(winners), dtype=np.int64), np.zeros(len(losers), dtype=np.int64)]
    return LabeledDataset.from_arrays(space, profiles[rows], vals, "binary")


def check_axiom_disjoint_union(measure: Measure, trials: int = 500, seed: int = 0) -> AxiomVerdict:
    """phi(Q, R) + phi(Q, R') = phi(Q, R u R') with Q winning, and the mirrored statement."""
    rng = np.random.default_rng([seed, 3])
    verdict = AxiomVerdict("disjoint-union", True, trials)
    done = 0
    while done < trials:
        space = random_space(rng)
        profiles = space.all_profiles()
        if len(profiles) < 3:
            continue
        # 0 = Q, 1 = R, 2 = R', 3 = unobserved
        part = rng.integers(0, 4, size=len(profiles))
        q, r, r2 = (np.flatnonzero(part == k) for k in range(3))
        if not (len(q) and len(r) and len(r2)):
            continue
        for side in ("losing", "winning"):
            def ds(other):
                if side == "losing":
                    return _win_loss_dataset(space, profiles, q, other)
                return _win_loss_dataset(space, profiles, other, q)

            for i in range(space.n):
                lhs = _call(measure, ds(r), i) + _call(measure, ds(r2), i)
                rhs = _call(measure, ds(np.r_[r, r2]), i)
                if not _agree(lhs, rhs):
                    verdict.passed = False
                    verdict.witnesses.append({"trial": done, "side": side, "feature": i, "sum": lhs, "union": rhs})
        done += 1
    return verdict


def check_axiom_additivity(measure: Measure, trials: int = 500, seed: int = 0) -> AxiomVerdict:
    """phi(G1 + G2) = phi(G1) + phi(G2) on a shared B, with winners kept disjoint so the sum stays binary."""
    rng = np.random.default_rng([seed, 4])
    verdict = AxiomVerdict("additivity", True, trials)
    for t in range(trials):
        base = random_binary_dataset(rng)
        k = base.size
        label = rng.integers(0, 3, size=k)  # 0: loses in both, 1: wins in G1, 2: wins in G2
        v1 = (label == 1).astype(np.int64)
        v2 = (label == 2).astype(np.int64)
        g1 = LabeledDataset.from_arrays(base.space, base.profiles, v1, "binary")
        g2 = LabeledDataset.from_arrays(base.space, base.profiles, v2, "binary")
        g = LabeledDataset.from_arrays(base.space, base.profiles, v1 + v2, "binary")
        for i in range(base.space.n):
            lhs = _call(measure, g, i)
            rhs = _call(measure, g1, i) + _call(measure, g2, i)
            if not _agree(lhs, rhs):
                verdict.passed = False
                verdict.witnesses.append({"trial": t, "feature": i, "combined": lhs, "sum": rhs,
                                          "g1": g1.records(), "g2": g2.records()})
    return verdict


AXIOM_CHECKERS = {
    "dummy": check_axiom_dummy,
    "symmetry": check_axiom_symmetry,
    "disjoint-union": check_axiom_disjoint_union,
    "additivity": check_axiom_additivity,
}


def check_all_axioms(measure: Measure, trials: int = 500, seed: int = 0) -> list[AxiomVerdict]:
    return [fn(measure, trials, seed) for fn in AXIOM_CHECKERS.values()]
