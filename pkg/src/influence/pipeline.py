"""Ingestion of labeled and count CSVs and the frequency-vector analysis.

CSV dialect: comma separated, UTF-8, first row is the header. Spaces right
after a delimiter are skipped; anything else in a cell is kept verbatim, so a
state written as ``"EN "`` does not match ``EN``.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import (
    FeatureSpace,
    InfluenceError,
    LabeledDataset,
    build_space,
)
from .distances import ZeroVectorError
from .measures import chi_distance, pair_count, stats_report

NORMALIZATIONS = ("per-pair", "per-point", "raw")
AD_AUDIT_SPACE = [
    ("gender", ["male", "female"]),
    ("age", ["18-24", "35-44", "55-64"]),
    ("language", ["EN", "ES"]),
]


class EmptyInput(InfluenceError):
    pass


class MalformedRow(InfluenceError):
    pass


class NonNumericValue(InfluenceError):
    pass


class NothingToAnalyze(InfluenceError):
    pass


class UnknownItem(InfluenceError):
    pass


def _label_key(label: str):
    try:
        return (0, float(label), label)
    except ValueError:
        return (1, 0.0, label)


def _read_rows(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh, skipinitialspace=True) if r and any(c.strip() for c in r)]
    if not rows:
        raise EmptyInput(f"{path}: no header row")
    header, body = rows[0], rows[1:]
    if not body:
        raise EmptyInput(f"{path}: no data rows")
    for lineno, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise MalformedRow(f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}")
    return header, body


def _infer_space(names: Sequence[str], columns: Sequence[Sequence[str]]) -> FeatureSpace:
    return build_space([(name, sorted(set(col), key=_label_key)) for name, col in zip(names, columns)])


def _encode(space: FeatureSpace, cells: list[list[str]]) -> np.ndarray:
    lookup = [{s: k for k, s in enumerate(f.states)} for f in space.features]
    out = np.empty((len(cells), space.n), dtype=np.int64)
    for r, row in enumerate(cells):
        for j, cell in enumerate(row):
            try:
                out[r, j] = lookup[j][cell]
            except KeyError:
                space.state_index(j, cell)  # raises UnknownState with context
    return out


def _check_header(space: FeatureSpace, names: Sequence[str], path) -> None:
    if tuple(names) != space.names:
        raise MalformedRow(f"{path}: feature columns {list(names)} do not match space {list(space.names)}")


def _to_float(cell: str, where: str) -> float:
    try:
        x = float(cell)
    except ValueError:
        raise NonNumericValue(f"{where}: value {cell!r} is not a number") from None
    if not math.isfinite(x):
        raise NonNumericValue(f"{where}: value {cell!r} is not finite")
    return x


def ingest_labeled_csv(path, value_columns: int | Sequence[str] = 1, space: FeatureSpace | None = None,
                       kind: str | None = None) -> LabeledDataset:
    """Read ``f1,...,fn,value[,value2,...]`` rows into a dataset.

    With one value column the dataset is binary when every value is 0 or 1
    and scalar otherwise; several value columns give a vector dataset. When
    ``space`` is omitted, states are the distinct labels of each column in
    natural order.
    """
    header, body = _read_rows(path)
    if isinstance(value_columns, int):
        nv = value_columns
        if not 1 <= nv < len(header):
            raise MalformedRow(f"{path}: cannot take {nv} value column(s) from {len(header)} columns")
    else:
        nv = len(value_columns)
        if list(header[-nv:]) != list(value_columns):
            raise MalformedRow(f"{path}: value columns {list(value_columns)} must be the trailing columns")
    feat_names = header[:-nv]
    feat_cells = [row[:-nv] for row in body]
    if space is None:
        space = _infer_space(feat_names, list(zip(*feat_cells)))
    else:
        _check_header(space, feat_names, path)
    profiles = _encode(space, feat_cells)
    raw = [row[-nv:] for row in body]
    values = np.array([[_to_float(c, f"{path}:{k + 2}") for c in r] for k, r in enumerate(raw)])
    if kind is None:
        if nv > 1:
            kind = "vector"
        elif all(r[0] in ("0", "1") for r in raw):
            kind = "binary"
        else:
            kind = "scalar"
    if kind != "vector":
        values = values[:, 0]
    if kind == "binary":
        values = values.astype(np.int64)
    return LabeledDataset.from_arrays(space, profiles, values, kind)


def write_labeled_csv(dataset: LabeledDataset, path, value_names: Sequence[str] | None = None) -> None:
    if value_names is None:
        value_names = ["value"] if dataset.kind != "vector" else [f"value{k + 1}" for k in range(dataset.dim)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*dataset.space.names, *value_names])
        for k, prof in enumerate(dataset.profiles):
            labels = dataset.space.decode(prof)
            v = dataset.values[k]
            cells = [str(int(v))] if dataset.kind == "binary" else [repr(float(x)) for x in np.atleast_1d(v)]
            w.writerow([*labels, *cells])


@dataclass(frozen=True)
class FrequencyTable:
    """Display counts per (profile, item); rows are the observed profiles."""

    space: FeatureSpace
    items: tuple[str, ...]
    profiles: np.ndarray = field(repr=False)
    counts: np.ndarray = field(repr=False)

    def count(self, profile: Sequence[int], item: str) -> int:
        code = int(self.space.codes(np.asarray([profile]))[0])
        rows = np.flatnonzero(self.space.codes(self.profiles) == code)
        if item not in self.items:
            raise UnknownItem(f"unknown item {item!r}")
        return int(self.counts[rows[0], self.items.index(item)]) if rows.size else 0

    def totals(self) -> dict[str, int]:
        return dict(zip(self.items, self.counts.sum(axis=0).tolist()))


def frequency_table(space: FeatureSpace, records: Sequence[tuple[Sequence[int], str, int]]) -> FrequencyTable:
    """Aggregate ``(profile, item, count)`` triples; repeated pairs are summed."""
    if not records:
        raise EmptyInput("no count records")
    items = tuple(sorted({str(r[1]) for r in records}, key=_label_key))
    item_pos = {it: k for k, it in enumerate(items)}
    prof = space.validate_profiles(np.asarray([list(r[0]) for r in records]))
    codes = space.codes(prof)
    uniq, first, inverse = np.unique(codes, return_index=True, return_inverse=True)
    counts = np.zeros((len(uniq), len(items)), dtype=np.int64)
    for row, (_, item, c) in zip(inverse, records):
        if c < 0:
            raise InfluenceError(f"negative count {c} for item {item!r}")
        counts[row, item_pos[str(item)]] += int(c)
    return FrequencyTable(space, items, prof[first], counts)


def ingest_counts_csv(path, space: FeatureSpace | None = None) -> FrequencyTable:
    """Read ``f1,...,fn,item,count`` rows."""
    header, body = _read_rows(path)
    if len(header) < 3:
        raise MalformedRow(f"{path}: need at least one feature column plus item and count")
    feat_names = header[:-2]
    feat_cells = [row[:-2] for row in body]
    if space is None:
        space = _infer_space(feat_names, list(zip(*feat_cells)))
    else:
        _check_header(space, feat_names, path)
    profiles = _encode(space, feat_cells)
    records = []
    for lineno, (prof, row) in enumerate(zip(profiles, body), start=2):
        item, raw = row[-2], row[-1]
        try:
            c = int(raw)
        except ValueError:
            raise MalformedRow(f"{path}:{lineno}: count {raw!r} is not an integer") from None
        if c < 0:
            raise MalformedRow(f"{path}:{lineno}: negative count {c}")
        if not item:
            raise MalformedRow(f"{path}:{lineno}: empty item id")
        records.append((prof, item, c))
    return frequency_table(space, records)


def write_counts_csv(table: FrequencyTable, path, item_column: str = "item", count_column: str = "count") -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*table.space.names, item_column, count_column])
        for prof, row in zip(table.profiles, table.counts):
            labels = table.space.decode(prof)
            for item, c in zip(table.items, row):
                if c:
                    w.writerow([*labels, item, int(c)])


@dataclass(frozen=True)
class NormalizedValues:
    """Per item, the share of its displays that went to each profile."""

    space: FeatureSpace
    items: tuple[str, ...]
    profiles: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)  # (profiles, items), columns sum to 1
    dropped: tuple[str, ...] = ()

    def item_dataset(self, item: str) -> LabeledDataset:
        if item not in self.items:
            raise UnknownItem(f"item {item!r} is not among the retained items")
        k = self.items.index(item)
        return LabeledDataset.from_arrays(self.space, self.profiles, self.values[:, k], "scalar")

    def vector_dataset(self) -> LabeledDataset:
        return LabeledDataset.from_arrays(self.space, self.profiles, self.values, "vector")


def normalize_counts(table: FrequencyTable, min_total: int = 100) -> NormalizedValues:
    """Divide each item's counts by its total; items with total below ``min_total`` are dropped."""
    totals = table.counts.sum(axis=0)
    keep = totals >= max(min_total, 1)
    zero = [it for it, t in zip(table.items, totals) if t == 0]
    if zero:
        warnings.warn(f"dropping {len(zero)} item(s) that were never displayed", stacklevel=2)
    if not keep.any():
        raise NothingToAnalyze(f"no item reaches the minimum total of {min_total}")
    kept = np.flatnonzero(keep)
    values = table.counts[:, kept] / totals[kept]
    items = tuple(table.items[k] for k in kept)
    dropped = tuple(it for it, k in zip(table.items, keep) if not k)
    return NormalizedValues(table.space, items, table.profiles, values, dropped)


def _normalize(total: float, dataset: LabeledDataset, feature: int, mode: str) -> float:
    if mode == "raw":
        return total
    if mode == "per-point":
        return total / dataset.size
    if mode == "per-pair":
        pairs = pair_count(dataset, feature)
        return total / pairs if pairs else 0.0
    raise InfluenceError(f"unknown normalization {mode!r}; choose from {list(NORMALIZATIONS)}")


def per_item_influence(values: NormalizedValues, item: str, feature: int | str, normalization: str = "per-pair") -> float:
    """Absolute-difference chi^d of one item's normalized display shares."""
    ds = values.item_dataset(item)
    i = ds.space.feature_index(feature)
    return _normalize(chi_distance(ds, "abs", i), ds, i, normalization)


def vector_influence(values: NormalizedValues, feature: int | str, normalization: str = "per-pair") -> float:
    """Cosine-distance chi^d over the stacked per-profile item vectors."""
    norms = np.linalg.norm(values.values, axis=1)
    if (norms == 0).any():
        row = int(np.flatnonzero(norms == 0)[0])
        raise ZeroVectorError(f"profile {values.space.decode(values.profiles[row])} has no retained displays")
    ds = values.vector_dataset()
    i = ds.space.feature_index(feature)
    return _normalize(chi_distance(ds, "cosine", i), ds, i, normalization)


@dataclass(frozen=True)
class PipelineResult:
    features: tuple[str, ...]
    vector_raw: dict
    vector: dict  # feature -> normalized vector influence
    per_item: dict  # item -> {feature: influence}
    stats: dict  # feature -> summary statistics over items
    items: tuple[str, ...]
    dropped: tuple[str, ...]


def analyze(values: NormalizedValues, features: Sequence[str] | None = None,
            normalization: str = "per-pair") -> PipelineResult:
    names = tuple(features) if features else values.space.names
    for name in names:
        values.space.index(name)
    vector_ds = values.vector_dataset()
    vec_raw, vec = {}, {}
    for name in names:
        i = values.space.index(name)
        vec[name] = vector_influence(values, name, normalization)
        vec_raw[name] = chi_distance(vector_ds, "cosine", i)
    per_item = {item: {name: per_item_influence(values, item, name, normalization) for name in names}
                for item in values.items}
    stats = {name: stats_report([per_item[item][name] for item in values.items]) for name in names}
    return PipelineResult(names, vec_raw, vec, per_item, stats, values.items, values.dropped)


def synthetic_counts(seed: int = 0, n_items: int = 40, rate: float = 30.0, spanish_rate: float = 40.0,
                     spanish_item: str = "ad-es") -> FrequencyTable:
    """Counts over the gender x age x language space with one item shown only to ES profiles.

    Background items get a random base rate and mild per-profile noise;
    ``spanish_item`` is displayed only when language is ES.
    """
    space = build_space(AD_AUDIT_SPACE)
    rng = np.random.default_rng(seed)
    profiles = space.all_profiles()
    lang = space.index("language")
    es = space.state_index(lang, "ES")
    records = []
    for k in range(n_items):
        base = rate * rng.uniform(0.5, 1.5)
        noise = rng.lognormal(0.0, 0.25, size=len(profiles))
        counts = rng.poisson(base * noise)
        for prof, c in zip(profiles, counts):
            records.append((prof, f"ad-{k:03d}", int(c)))
    for prof in profiles:
        c = int(rng.poisson(spanish_rate)) if prof[lang] == es else 0
        records.append((prof, spanish_item, c))
    return frequency_table(space, records)


def load_space(path) -> FeatureSpace:
    """Read a space from JSON: ``[{"name": ..., "states": [...]}, ...]`` or ``{"features": [...]}``."""
    import json

    data = json.loads(Path(path).read_text(encoding="utf-8"))
    feats = data["features"] if isinstance(data, dict) else data
    return build_space([(f["name"], f["states"]) for f in feats])
