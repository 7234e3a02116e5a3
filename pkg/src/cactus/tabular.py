"""Typed tabular datasets with first-class missing cells.

A :class:`Dataset` is an immutable column store: each feature column is
either continuous (float64 payload) or categorical (string payload) and
carries an explicit boolean missing mask, so missingness is never conflated
with NaN payloads. The binary target is stored densely and may not contain
missing values.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyDataset,
    InfeasibleSplit,
    MissingTarget,
    NonBinaryTarget,
    NotCategorical,
    RaggedRow,
    SchemaViolation,
    UnknownColumn,
)

CONTINUOUS = "continuous"
CATEGORICAL = "categorical"

#: Cell tokens (case-insensitive) that are read as missing values.
MISSING_TOKENS = frozenset({"", "na", "nan"})


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


def normalize_seed(seed: int) -> int:
    """Map any Python int onto the unsigned 64-bit seed space."""
    return int(seed) & 0xFFFFFFFFFFFFFFFF


def derive_seed(*parts: int) -> int:
    """Derive a stable child seed from an ordered tuple of integers."""
    ss = np.random.SeedSequence([normalize_seed(p) for p in parts])
    return int(ss.generate_state(2, np.uint64)[0])


@dataclass(frozen=True)
class FeatureColumn:
    """One feature: payload values plus an explicit missing mask.

    Continuous payloads are float64 with NaN at masked positions;
    categorical payloads are object arrays of strings with "" at masked
    positions. Non-missing continuous cells must be finite.
    """

    name: str
    kind: str
    values: np.ndarray
    missing: np.ndarray
    levels: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in (CONTINUOUS, CATEGORICAL):
            raise ValueError(f"unknown column kind {self.kind!r}")
        dtype = np.float64 if self.kind == CONTINUOUS else object
        object.__setattr__(self, "values", np.asarray(self.values, dtype=dtype))
        object.__setattr__(self, "missing", np.asarray(self.missing, dtype=bool))
        object.__setattr__(self, "levels", tuple(self.levels))
        if len(self.values) != len(self.missing):
            raise ValueError(f"column {self.name!r}: values/mask length mismatch")
        observed = ~self.missing
        if self.kind == CONTINUOUS:
            if not np.all(np.isfinite(self.values[observed])):
                raise ValueError(f"column {self.name!r}: non-finite observed cell")
        else:
            level_set = set(self.levels)
            for v in self.values[observed]:
                if v not in level_set:
                    raise ValueError(
                        f"column {self.name!r}: cell {v!r} outside recorded levels"
                    )
        _freeze(self.values)
        _freeze(self.missing)

    def __len__(self) -> int:
        return len(self.values)


def continuous_column(name: str, cells) -> FeatureColumn:
    """Build a continuous column from a sequence of floats and Nones/NaNs."""
    values = np.array(
        [np.nan if c is None else float(c) for c in cells], dtype=np.float64
    )
    missing = np.isnan(values)
    return FeatureColumn(name, CONTINUOUS, values, missing)


def categorical_column(name: str, cells, levels=None) -> FeatureColumn:
    """Build a categorical column from strings; None marks a missing cell."""
    missing = np.array([c is None for c in cells], dtype=bool)
    values = np.array(["" if c is None else str(c) for c in cells], dtype=object)
    if levels is None:
        levels = tuple(sorted({str(c) for c in cells if c is not None}))
    return FeatureColumn(name, CATEGORICAL, values, missing, tuple(levels))


@dataclass(frozen=True)
class Dataset:
    """Immutable table of feature columns plus a binary 0/1 target."""

    name: str
    columns: tuple[FeatureColumn, ...]
    target: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        raw_target = np.asarray(self.target)
        if not np.isin(raw_target, (0, 1)).all():
            raise ValueError("target outside {0,1}")
        object.__setattr__(self, "target", _freeze(raw_target.astype(np.int8)))
        n = len(self.target)
        seen = set()
        for col in self.columns:
            if not col.name:
                raise ValueError("empty feature name")
            if col.name in seen:
                raise ValueError(f"duplicate feature name {col.name!r}")
            seen.add(col.name)
            if len(col) != n:
                raise ValueError(f"column {col.name!r} has {len(col)} rows, target has {n}")

    @property
    def row_count(self) -> int:
        return len(self.target)

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def column(self, name: str) -> FeatureColumn:
        for col in self.columns:
            if col.name == name:
                return col
        raise UnknownColumn(f"no column named {name!r}")

    def class_counts(self) -> tuple[int, int]:
        pos = int(self.target.sum())
        return len(self.target) - pos, pos


def datasets_equal(a: Dataset, b: Dataset) -> bool:
    """Cell-for-cell equality (masks, observed payloads, kinds, target)."""
    if a.feature_names != b.feature_names or len(a.target) != len(b.target):
        return False
    if not np.array_equal(a.target, b.target):
        return False
    for ca, cb in zip(a.columns, b.columns):
        if ca.kind != cb.kind or not np.array_equal(ca.missing, cb.missing):
            return False
        obs = ~ca.missing
        if ca.kind == CONTINUOUS:
            if not np.array_equal(ca.values[obs], cb.values[obs]):
                return False
        else:
            if not all(x == y for x, y in zip(ca.values[obs], cb.values[obs])):
                return False
    return True


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float
    seed: int
    stratified: bool = True

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise InfeasibleSplit(f"test_fraction {self.test_fraction} outside (0,1)")


def _is_missing_token(cell: str) -> bool:
    return cell.strip().lower() in MISSING_TOKENS


def _parse_finite(cell: str) -> float | None:
    try:
        v = float(cell)
    except ValueError:
        return None
    return v if np.isfinite(v) else None


def load_csv(path, target_name: str, schema_hints=None, name: str | None = None) -> Dataset:
    """Load an RFC-4180 CSV with a header row into a Dataset.

    Empty cells and the tokens "NA"/"NaN" (case-insensitive) become missing.
    Columns not covered by ``schema_hints`` are inferred continuous when every
    non-missing cell parses as a finite number, categorical otherwise.
    """
    schema_hints = dict(schema_hints or {})
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDataset(f"{path}: no header row")
        rows = []
        for i, row in enumerate(reader):
            if len(row) != len(header):
                raise RaggedRow(f"{path}: row {i + 2} has {len(row)} cells, header has {len(header)}")
            rows.append(row)
    if not rows:
        raise EmptyDataset(f"{path}: no data rows")
    if target_name not in header:
        raise MissingTarget(f"{path}: target column {target_name!r} not found")

    t_idx = header.index(target_name)
    target = np.empty(len(rows), dtype=np.int8)
    for i, row in enumerate(rows):
        cell = row[t_idx]
        v = None if _is_missing_token(cell) else _parse_finite(cell)
        if v not in (0.0, 1.0):
            raise NonBinaryTarget(f"{path}: row {i + 2} target cell {cell!r} outside {{0,1}}")
        target[i] = int(v)

    columns = []
    for j, col_name in enumerate(header):
        if j == t_idx:
            continue
        raw = [row[j] for row in rows]
        tokens = [None if _is_missing_token(c) else c for c in raw]
        kind = schema_hints.get(col_name)
        if kind is None:
            numeric = [None if t is None else _parse_finite(t) for t in tokens]
            if all(t is None or v is not None for t, v in zip(tokens, numeric)):
                kind = CONTINUOUS
            else:
                kind = CATEGORICAL
        if kind == CONTINUOUS:
            parsed = []
            for i, t in enumerate(tokens):
                if t is None:
                    parsed.append(None)
                    continue
                v = _parse_finite(t)
                if v is None:
                    raise SchemaViolation(
                        f"{path}: column {col_name!r} hinted continuous but row "
                        f"{i + 2} cell {t!r} is not a finite number"
                    )
                parsed.append(v)
            columns.append(continuous_column(col_name, parsed))
        elif kind == CATEGORICAL:
            columns.append(categorical_column(col_name, tokens))
        else:
            raise SchemaViolation(f"schema hint for {col_name!r} must be continuous/categorical")

    from pathlib import Path

    return Dataset(name or Path(path).stem, tuple(columns), target)


def write_csv(d: Dataset, path, target_name: str = "target") -> None:
    """Write a Dataset to CSV such that load_csv round-trips it exactly.

    Continuous cells use repr() so float payloads survive bit-exactly;
    missing cells are written as empty strings.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(d.feature_names) + [target_name])
        for i in range(d.row_count):
            row = []
            for col in d.columns:
                if col.missing[i]:
                    row.append("")
                elif col.kind == CONTINUOUS:
                    row.append(repr(float(col.values[i])))
                else:
                    row.append(col.values[i])
            row.append(int(d.target[i]))
            writer.writerow(row)


def take_rows(d: Dataset, idx: np.ndarray, name: str | None = None) -> Dataset:
    """New Dataset holding the given rows (in the given order)."""
    cols = tuple(
        FeatureColumn(c.name, c.kind, c.values[idx].copy(), c.missing[idx].copy(), c.levels)
        for c in d.columns
    )
    return Dataset(name or d.name, cols, d.target[idx].copy())


def stratify_subset(d: Dataset, column: str, level: str) -> Dataset:
    """Rows where the categorical column equals ``level``, column dropped.

    Rows where the stratification column is missing are excluded.
    """
    col = d.column(column)
    if col.kind != CATEGORICAL:
        raise NotCategorical(f"column {column!r} is {col.kind}, not categorical")
    keep = np.array(
        [not m and v == level for v, m in zip(col.values, col.missing)], dtype=bool
    )
    if not keep.any():
        raise EmptyDataset(f"no rows with {column}={level!r}")
    idx = np.flatnonzero(keep)
    sub = take_rows(d, idx, name=f"{d.name}[{column}={level}]")
    cols = tuple(c for c in sub.columns if c.name != column)
    return Dataset(sub.name, cols, sub.target)


def split(d: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Deterministic (train, test) partition; optionally class-stratified."""
    n = d.row_count
    if n == 0:
        raise EmptyDataset("cannot split an empty dataset")
    rng = np.random.default_rng(normalize_seed(spec.seed))
    if spec.stratified:
        test_parts = []
        for cls in (0, 1):
            cls_idx = np.flatnonzero(d.target == cls)
            n_test = int(np.floor(spec.test_fraction * len(cls_idx)))
            if n_test < 1 or n_test >= len(cls_idx):
                raise InfeasibleSplit(
                    f"class {cls}: {len(cls_idx)} rows cannot yield a "
                    f"{spec.test_fraction} stratified split"
                )
            test_parts.append(rng.permutation(cls_idx)[:n_test])
        test_idx = np.sort(np.concatenate(test_parts))
    else:
        n_test = int(np.floor(spec.test_fraction * n))
        if n_test < 1 or n_test >= n:
            raise InfeasibleSplit(f"{n} rows cannot yield a {spec.test_fraction} split")
        test_idx = np.sort(rng.permutation(n)[:n_test])
    mask = np.zeros(n, dtype=bool)
    mask[test_idx] = True
    train_idx = np.flatnonzero(~mask)
    return take_rows(d, train_idx), take_rows(d, test_idx)
