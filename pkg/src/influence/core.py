"""Feature spaces, labeled datasets and the relabeling primitives built on them.

Profiles are stored as dense integer state indices; every profile also has a
mixed-radix code (first feature most significant) that is used for exact
membership lookups.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

DEFAULT_MAX_ENUM = 10**7
VALUE_KINDS = ("binary", "scalar", "vector")


class InfluenceError(ValueError):
    """Base class for input errors raised by this package."""


class InvalidSpace(InfluenceError):
    pass


class InvalidProfile(InfluenceError):
    pass


class UnknownState(InfluenceError):
    pass


class ConflictingLabel(InfluenceError):
    pass


class MixedValueKinds(InfluenceError):
    pass


class NotABijection(InfluenceError):
    pass


class EnumerationCapExceeded(InfluenceError):
    pass


class DuplicateRecordWarning(UserWarning):
    pass


def enumeration_cap() -> int:
    """Largest profile count the exact engine will enumerate.

    ``INFLUENCE_MAX_ENUM`` overrides the default of 10**7.
    """
    raw = os.environ.get("INFLUENCE_MAX_ENUM")
    if raw is None or not raw.strip():
        return DEFAULT_MAX_ENUM
    try:
        cap = int(raw)
    except ValueError:
        raise InfluenceError(f"INFLUENCE_MAX_ENUM must be an integer, got {raw!r}") from None
    if cap < 1:
        raise InfluenceError("INFLUENCE_MAX_ENUM must be positive")
    return cap


def check_cap(count: int, what: str = "profile space") -> None:
    cap = enumeration_cap()
    if count > cap:
        raise EnumerationCapExceeded(f"{what} has {count} profiles, above the enumeration cap {cap}")


@dataclass(frozen=True)
class Feature:
    name: str
    states: tuple[str, ...]

    @property
    def size(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class FeatureSpace:
    features: tuple[Feature, ...]

    def __post_init__(self):
        if not self.features:
            raise InvalidSpace("a feature space needs at least one feature")
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise InvalidSpace(f"duplicate feature names in {names}")
        for f in self.features:
            if not f.states:
                raise InvalidSpace(f"feature {f.name!r} has an empty state list")
            if len(set(f.states)) != len(f.states):
                raise InvalidSpace(f"duplicate state labels in feature {f.name!r}")
        if math.prod(self.sizes) >= 2**62:
            raise InvalidSpace("profile space too large to index with 64-bit codes")

    @property
    def n(self) -> int:
        return len(self.features)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(f.size for f in self.features)

    @property
    def profile_count(self) -> int:
        """|A|, as an exact Python integer."""
        return math.prod(self.sizes)

    @cached_property
    def strides(self) -> np.ndarray:
        sizes = self.sizes
        strides = [1] * len(sizes)
        for j in range(len(sizes) - 2, -1, -1):
            strides[j] = strides[j + 1] * sizes[j + 1]
        return np.asarray(strides, dtype=np.int64)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise InfluenceError(f"unknown feature {name!r}; known: {list(self.names)}") from None

    def feature_index(self, feature: int | str) -> int:
        if isinstance(feature, str):
            return self.index(feature)
        if not 0 <= feature < self.n:
            raise InfluenceError(f"feature index {feature} out of range for {self.n} features")
        return int(feature)

    def state_index(self, feature: int, label: str) -> int:
        states = self.features[feature].states
        try:
            return states.index(label)
        except ValueError:
            raise UnknownState(
                f"unknown state {label!r} for feature {self.features[feature].name!r}; "
                f"known: {list(states)}"
            ) from None

    def encode(self, labels: Sequence[str]) -> tuple[int, ...]:
        """Translate a profile given as state labels into state indices."""
        if len(labels) != self.n:
            raise InvalidProfile(f"expected {self.n} states, got {len(labels)}")
        return tuple(self.state_index(j, lab) for j, lab in enumerate(labels))

    def decode(self, profile: Sequence[int]) -> tuple[str, ...]:
        return tuple(self.features[j].states[s] for j, s in enumerate(profile))

    def codes(self, profiles: np.ndarray) -> np.ndarray:
        return np.asarray(profiles, dtype=np.int64) @ self.strides

    def validate_profiles(self, profiles: np.ndarray) -> np.ndarray:
        arr = np.asarray(profiles)
        if arr.ndim != 2 or arr.shape[1] != self.n:
            raise InvalidProfile(f"profiles must have shape (k, {self.n}), got {arr.shape}")
        if arr.size and not np.issubdtype(arr.dtype, np.integer):
            raise InvalidProfile("profile entries must be integer state indices")
        arr = arr.astype(np.int64, copy=False)
        bad = (arr < 0) | (arr >= np.asarray(self.sizes, dtype=np.int64))
        if bad.any():
            row = int(np.argwhere(bad)[0][0])
            raise InvalidProfile(f"profile {tuple(arr[row])} has a state index out of range")
        return arr

    def all_profiles(self) -> np.ndarray:
        """Every profile of A in code order."""
        check_cap(self.profile_count)
        grids = np.indices(self.sizes, dtype=np.int64)
        return grids.reshape(self.n, -1).T.copy()


def build_space(layout: Sequence[tuple[str, Sequence]]) -> FeatureSpace:
    """Build a FeatureSpace from ``[(name, [state, ...]), ...]`` in the given order."""
    if not layout:
        raise InvalidSpace("empty feature specification")
    return FeatureSpace(tuple(Feature(str(name), tuple(str(s) for s in states)) for name, states in layout))


def _infer_kind(values: list) -> str:
    kinds = set()
    for v in values:
        if isinstance(v, (bool, np.bool_)):
            kinds.add("binary")
        elif isinstance(v, (int, np.integer)):
            kinds.add("binary" if v in (0, 1) else "scalar")
        elif isinstance(v, (float, np.floating)):
            kinds.add("scalar")
        elif isinstance(v, (Sequence, np.ndarray)) and not isinstance(v, str):
            kinds.add("vector")
        else:
            raise MixedValueKinds(f"unsupported value {v!r}")
    if "vector" in kinds and len(kinds) > 1:
        raise MixedValueKinds("vector values mixed with scalar values")
    if kinds == {"binary", "scalar"}:
        return "scalar"
    return kinds.pop()


class LabeledDataset:
    """Observed profiles B with their values v.

    Instances are immutable; profiles are kept sorted by code so that two
    datasets with the same points compare equal.
    """

    def __init__(self, space: FeatureSpace, profiles: np.ndarray, values: np.ndarray, kind: str, codes: np.ndarray):
        self.space = space
        self.profiles = profiles
        self.values = values
        self.kind = kind
        self.codes = codes
        for arr in (profiles, values, codes):
            arr.flags.writeable = False

    @classmethod
    def from_arrays(cls, space: FeatureSpace, profiles, values, kind: str | None = None) -> "LabeledDataset":
        """Validated construction from a (k, n) profile array and aligned values."""
        prof = space.validate_profiles(profiles)
        if len(prof) == 0:
            raise InfluenceError("a dataset needs at least one observed profile")
        vals = np.asarray(values)
        if kind is None:
            if vals.ndim == 2:
                kind = "vector"
            elif np.issubdtype(vals.dtype, np.bool_) or (
                np.issubdtype(vals.dtype, np.integer) and np.isin(vals, (0, 1)).all()
            ):
                kind = "binary"
            else:
                kind = "scalar"
        if kind not in VALUE_KINDS:
            raise InfluenceError(f"unknown value kind {kind!r}")
        if kind == "binary":
            if vals.ndim != 1 or not np.isin(vals, (0, 1)).all():
                raise MixedValueKinds("binary datasets take values in {0, 1}")
            vals = vals.astype(np.int64)
        elif kind == "scalar":
            if vals.ndim != 1:
                raise MixedValueKinds("scalar datasets take one number per profile")
            vals = vals.astype(np.float64)
        else:
            if vals.ndim != 2 or vals.shape[1] == 0:
                raise MixedValueKinds("vector datasets need a fixed, nonzero dimension")
            vals = vals.astype(np.float64)
        if len(vals) != len(prof):
            raise InfluenceError(f"{len(prof)} profiles but {len(vals)} values")
        if kind != "binary" and not np.isfinite(vals).all():
            raise InfluenceError("values must be finite")

        codes = space.codes(prof)
        order = np.argsort(codes, kind="stable")
        codes, prof, vals = codes[order], prof[order], vals[order]
        dup = np.flatnonzero(codes[1:] == codes[:-1]) + 1
        if dup.size:
            prev = vals[dup - 1]
            cur = vals[dup]
            same = (prev == cur) if vals.ndim == 1 else (prev == cur).all(axis=1)
            if not same.all():
                row = int(dup[np.flatnonzero(~same)[0]])
                raise ConflictingLabel(f"profile {tuple(int(x) for x in prof[row])} has conflicting values")
            warnings.warn(f"dropped {dup.size} duplicate record(s) with equal values", DuplicateRecordWarning, stacklevel=3)
            keep = np.ones(len(codes), dtype=bool)
            keep[dup] = False
            codes, prof, vals = codes[keep], prof[keep], vals[keep]
        return cls(space, np.ascontiguousarray(prof), np.ascontiguousarray(vals), kind, codes)

    # -- basic accessors -------------------------------------------------

    def __len__(self) -> int:
        return len(self.codes)

    @property
    def size(self) -> int:
        return len(self.codes)

    @property
    def dim(self) -> int:
        return self.values.shape[1] if self.kind == "vector" else 1

    @property
    def is_full(self) -> bool:
        return len(self.codes) == self.space.profile_count

    def value_of(self, i: int):
        v = self.values[i]
        if self.kind == "binary":
            return int(v)
        if self.kind == "scalar":
            return float(v)
        return tuple(float(x) for x in v)

    @property
    def points(self) -> dict[tuple[int, ...], object]:
        return {tuple(int(x) for x in p): self.value_of(k) for k, p in enumerate(self.profiles)}

    def records(self) -> list[tuple[tuple[int, ...], object]]:
        return list(self.points.items())

    def __eq__(self, other) -> bool:
        if not isinstance(other, LabeledDataset):
            return NotImplemented
        return (
            self.space == other.space
            and self.kind == other.kind
            and np.array_equal(self.codes, other.codes)
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"LabeledDataset(features={list(self.space.names)}, |B|={self.size}, kind={self.kind!r})"

    # -- lookups ---------------------------------------------------------

    @cached_property
    def _dense_index(self) -> np.ndarray | None:
        total = self.space.profile_count
        if total > enumeration_cap():
            return None
        table = np.full(total, -1, dtype=np.int64)
        table[self.codes] = np.arange(len(self.codes), dtype=np.int64)
        return table

    def lookup(self, codes: np.ndarray) -> np.ndarray:
        """Row position of each code in B, or -1 where the profile is unobserved."""
        codes = np.asarray(codes, dtype=np.int64)
        dense = self._dense_index
        if dense is not None:
            return dense[codes]
        pos = np.searchsorted(self.codes, codes)
        pos = np.minimum(pos, len(self.codes) - 1)
        return np.where(self.codes[pos] == codes, pos, -1)

    def substitute_codes(self, feature: int, state) -> np.ndarray:
        """Codes of (a_-i, b) for every a in B."""
        stride = self.space.strides[feature]
        return self.codes + (np.asarray(state, dtype=np.int64) - self.profiles[:, feature]) * stride

    def context_codes(self, feature: int) -> np.ndarray:
        """Codes of a with feature i zeroed out; equal codes share a context a_-i."""
        return self.codes - self.profiles[:, feature] * self.space.strides[feature]


def build_dataset(space: FeatureSpace, records: Iterable[tuple[Sequence[int], object]], kind: str | None = None) -> LabeledDataset:
    """Build a dataset from ``(profile, value)`` records.

    Duplicate profiles with equal values are merged (with a warning);
    duplicates with different values raise :class:`ConflictingLabel`.
    """
    records = list(records)
    if not records:
        raise InfluenceError("no records")
    profiles = []
    for prof, _ in records:
        if len(prof) != space.n:
            raise InvalidProfile(f"profile {tuple(prof)} has {len(prof)} entries, expected {space.n}")
        profiles.append([int(x) for x in prof])
    raw_values = [v for _, v in records]
    if kind is None:
        kind = _infer_kind(raw_values)
    if kind == "vector":
        dims = {len(v) for v in raw_values}
        if len(dims) != 1:
            raise MixedValueKinds(f"vector values have inconsistent dimensions {sorted(dims)}")
    values = np.asarray(raw_values, dtype=np.float64 if kind != "binary" else np.int64)
    return LabeledDataset.from_arrays(space, np.asarray(profiles, dtype=np.int64), values, kind)


def full_dataset(space: FeatureSpace, fn, kind: str | None = None) -> LabeledDataset:
    """Dataset over all of A with value ``fn(profile_tuple)``."""
    profiles = space.all_profiles()
    values = [fn(tuple(int(x) for x in p)) for p in profiles]
    if kind is None:
        kind = _infer_kind(values)
    return LabeledDataset.from_arrays(space, profiles, np.asarray(values), kind)


def singleton_dataset(space: FeatureSpace, anchor: Sequence[int]) -> LabeledDataset:
    """The full-space binary dataset that is 1 exactly at ``anchor``."""
    anchor_arr = space.validate_profiles(np.asarray([anchor]))
    profiles = space.all_profiles()
    values = (space.codes(profiles) == space.codes(anchor_arr)[0]).astype(np.int64)
    return LabeledDataset.from_arrays(space, profiles, values, "binary")


def _check_bijection(perm: Sequence[int], size: int, what: str) -> np.ndarray:
    arr = np.asarray(perm, dtype=np.int64)
    if arr.shape != (size,) or sorted(arr.tolist()) != list(range(size)):
        raise NotABijection(f"{what} {list(perm)} is not a bijection on {size} elements")
    return arr


def permute_feature_states(dataset: LabeledDataset, feature: int, tau: Sequence[int]) -> LabeledDataset:
    """Relabel the states of one feature: state ``s`` becomes ``tau[s]``."""
    i = dataset.space.feature_index(feature)
    tau_arr = _check_bijection(tau, dataset.space.sizes[i], "state map")
    profiles = dataset.profiles.copy()
    profiles[:, i] = tau_arr[profiles[:, i]]
    return LabeledDataset.from_arrays(dataset.space, profiles, dataset.values, dataset.kind)


def permute_features(dataset: LabeledDataset, sigma: Sequence[int]) -> LabeledDataset:
    """Move feature ``j`` to position ``sigma[j]``; state domains travel with their features."""
    space = dataset.space
    sig = _check_bijection(sigma, space.n, "feature map")
    feats = [None] * space.n
    for j, f in enumerate(space.features):
        feats[sig[j]] = f
    new_space = FeatureSpace(tuple(feats))
    profiles = np.empty_like(dataset.profiles)
    profiles[:, sig] = dataset.profiles
    return LabeledDataset.from_arrays(new_space, profiles, dataset.values, dataset.kind)


def inverse_permutation(perm: Sequence[int]) -> list[int]:
    inv = [0] * len(perm)
    for k, p in enumerate(perm):
        inv[p] = k
    return inv


@dataclass(frozen=True)
class NeighborGroup:
    feature: int
    context: tuple[int | None, ...]  # the profile with feature i blanked out
    members: tuple[tuple[int, object], ...]  # (state of i, value)
    win_count: int | None
    loss_count: int | None


def _group_bounds(dataset: LabeledDataset, feature: int):
    ctx = dataset.context_codes(feature)
    order = np.lexsort((dataset.profiles[:, feature], ctx))
    sorted_ctx = ctx[order]
    starts = np.flatnonzero(np.r_[True, sorted_ctx[1:] != sorted_ctx[:-1]])
    ends = np.r_[starts[1:], len(order)]
    return order, starts, ends


def neighbor_groups(dataset: LabeledDataset, feature: int | str) -> list[NeighborGroup]:
    """Partition B by context a_-i."""
    i = dataset.space.feature_index(feature)
    order, starts, ends = _group_bounds(dataset, i)
    groups = []
    for s, e in zip(starts, ends):
        rows = order[s:e]
        ctx = tuple(None if j == i else int(x) for j, x in enumerate(dataset.profiles[rows[0]]))
        members = tuple((int(dataset.profiles[r, i]), dataset.value_of(r)) for r in rows)
        if dataset.kind == "binary":
            wins = int(dataset.values[rows].sum())
            groups.append(NeighborGroup(i, ctx, members, wins, len(rows) - wins))
        else:
            groups.append(NeighborGroup(i, ctx, members, None, None))
    return groups


def is_dummy(dataset: LabeledDataset, feature: int | str) -> bool:
    """True iff every neighbor group of the feature has a single observed value."""
    i = dataset.space.feature_index(feature)
    order, starts, _ = _group_bounds(dataset, i)
    vals = dataset.values[order]
    same_as_prev = vals[1:] == vals[:-1]
    if vals.ndim == 2:
        same_as_prev = same_as_prev.all(axis=1)
    new_group = np.zeros(len(order), dtype=bool)
    new_group[starts] = True
    return bool(np.all(same_as_prev | new_group[1:]))
