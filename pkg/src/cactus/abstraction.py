"""Per-feature Up/Down abstraction driven by ROC threshold search.

Each continuous feature gets the threshold that maximizes the Youden
statistic |TPR - FPR| over the observed training cells; candidate
thresholds sit at midpoints between consecutive distinct values, with
-inf/+inf sentinels, and ties resolve to the smallest threshold. "Up" is
always the class-1-enriched side. Categorical features assign a level to
Up when its observed class-1 rate exceeds the feature's overall class-1
rate, which is exactly the partition maximizing |TPR - FPR| over all
2-partitions of the levels.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFeature, SingleClassTraining, UnknownFeature
from .tabular import CATEGORICAL, CONTINUOUS, Dataset, _freeze

HIGH_IS_UP = "high_is_up"
LOW_IS_UP = "low_is_up"


@dataclass(frozen=True)
class FeatureAbstraction:
    """Fitted Up/Down rule for one feature."""

    feature: str
    kind: str
    direction: str
    separation: float
    threshold: float | None = None
    up_levels: frozenset | None = None
    fit_levels: frozenset | None = None
    degenerate: bool = False


@dataclass(frozen=True)
class AbstractionModel:
    features: dict
    fitted_on_name: str = ""
    fitted_on_rows: int = 0

    def __getitem__(self, feature: str) -> FeatureAbstraction:
        try:
            return self.features[feature]
        except KeyError:
            raise UnknownFeature(f"feature {feature!r} not in abstraction model")

    def __contains__(self, feature: str) -> bool:
        return feature in self.features


@dataclass(frozen=True)
class AbstractedDataset:
    """Cells reduced to Up/Down/Missing; same shape as the source table."""

    name: str
    features: tuple[str, ...]
    up: np.ndarray
    missing: np.ndarray
    target: np.ndarray

    def __post_init__(self):
        _freeze(np.asarray(self.up))
        _freeze(np.asarray(self.missing))

    @property
    def row_count(self) -> int:
        return len(self.target)

    def row(self, i: int) -> dict:
        """Row ``i`` as {feature: True (Up) | False (Down) | None (Missing)}."""
        return {
            f: None if self.missing[i, j] else bool(self.up[i, j])
            for j, f in enumerate(self.features)
        }


def roc_threshold(values, labels, feature: str = "") -> FeatureAbstraction:
    """Best Up/Down threshold for one continuous feature.

    ``values`` may contain None/NaN for missing cells; those rows are
    ignored. Raises DegenerateFeature when a class has no observed value.
    A constant feature is returned with separation 0, not raised.
    """
    v = np.asarray(values)
    if v.dtype == object:
        v = np.array([np.nan if x is None else float(x) for x in v], dtype=np.float64)
    else:
        v = v.astype(np.float64, copy=False)
    y = np.asarray(labels, dtype=np.int64)
    obs = ~np.isnan(v)
    v, y = v[obs], y[obs]
    n1 = int(y.sum())
    n0 = y.size - n1
    if n1 == 0 or n0 == 0:
        raise DegenerateFeature(f"feature {feature!r}: a class has no observed values")

    order = np.argsort(v, kind="stable")
    xs, ys = v[order], y[order]
    distinct = np.flatnonzero(xs[:-1] < xs[1:])
    if distinct.size == 0:
        return FeatureAbstraction(feature, CONTINUOUS, HIGH_IS_UP, 0.0, threshold=float(xs[0]))

    cum1 = np.cumsum(ys)
    c1 = cum1[distinct]
    c0 = (distinct + 1) - c1
    tpr = (n1 - c1) / n1
    fpr = (n0 - c0) / n0
    j_mid = tpr - fpr

    thresholds = np.concatenate(([-np.inf], (xs[distinct] + xs[distinct + 1]) / 2, [np.inf]))
    j = np.concatenate(([0.0], j_mid, [0.0]))
    best = int(np.argmax(np.abs(j)))  # first max = smallest threshold
    direction = LOW_IS_UP if j[best] < 0 else HIGH_IS_UP
    return FeatureAbstraction(
        feature, CONTINUOUS, direction, float(abs(j[best])), threshold=float(thresholds[best])
    )


def abstract_categorical(values, labels, feature: str = "") -> FeatureAbstraction:
    """Up/Down level assignment for one categorical feature.

    A level goes Up when its observed class-1 rate strictly exceeds the
    feature's overall class-1 rate; separation is |TPR - FPR| of the
    induced binary partition over observed cells.
    """
    y = np.asarray(labels, dtype=np.int64)
    pairs = [(x, int(t)) for x, t in zip(values, y) if x is not None]
    n1 = sum(t for _, t in pairs)
    n0 = len(pairs) - n1
    if n1 == 0 or n0 == 0:
        raise DegenerateFeature(f"feature {feature!r}: a class has no observed values")

    counts: dict = {}
    for x, t in pairs:
        c = counts.setdefault(x, [0, 0])
        c[t] += 1
    overall = n1 / (n1 + n0)
    up = frozenset(
        lvl for lvl, (c0, c1) in counts.items() if c1 / (c0 + c1) > overall
    )
    tpr = sum(counts[lvl][1] for lvl in up) / n1
    fpr = sum(counts[lvl][0] for lvl in up) / n0
    return FeatureAbstraction(
        feature,
        CATEGORICAL,
        HIGH_IS_UP,
        max(tpr - fpr, 0.0),
        up_levels=up,
        fit_levels=frozenset(counts),
    )


def fit_abstraction(train: Dataset) -> AbstractionModel:
    """Fit one FeatureAbstraction per column of the training data.

    Features where a class has no observed values are recorded as
    degenerate (separation 0) and carry no information downstream.
    """
    n0, n1 = train.class_counts()
    if n0 == 0 or n1 == 0:
        raise SingleClassTraining(f"training data {train.name!r} has a single class")
    feats: dict = {}
    for col in train.columns:
        try:
            if col.kind == CONTINUOUS:
                feats[col.name] = roc_threshold(col.values, train.target, col.name)
            else:
                cells = [None if m else v for v, m in zip(col.values, col.missing)]
                feats[col.name] = abstract_categorical(cells, train.target, col.name)
        except DegenerateFeature:
            feats[col.name] = FeatureAbstraction(
                col.name, col.kind, HIGH_IS_UP, 0.0, degenerate=True
            )
    return AbstractionModel(feats, train.name, train.row_count)


def apply_abstraction(model: AbstractionModel, d: Dataset) -> AbstractedDataset:
    """Map every cell of ``d`` to Up/Down/Missing under the fitted model.

    Missing cells pass through; unseen categorical levels and all cells of
    degenerate features become Missing (they carry no evidence).
    """
    n = d.row_count
    k = len(d.columns)
    up = np.zeros((n, k), dtype=bool)
    missing = np.zeros((n, k), dtype=bool)
    for j, col in enumerate(d.columns):
        fa = model[col.name]
        if fa.degenerate:
            missing[:, j] = True
            continue
        if fa.kind == CONTINUOUS:
            obs = ~col.missing
            vals = col.values
            if fa.direction == HIGH_IS_UP:
                up[:, j] = obs & (vals > fa.threshold)
            else:
                up[:, j] = obs & (vals <= fa.threshold)
            missing[:, j] = col.missing
        else:
            for i in range(n):
                if col.missing[i] or col.values[i] not in fa.fit_levels:
                    missing[i, j] = True
                elif col.values[i] in fa.up_levels:
                    up[i, j] = True
    return AbstractedDataset(d.name, d.feature_names, up, missing, d.target)


def model_to_json(model: AbstractionModel) -> list:
    """JSON-ready form: one {feature, kind, ...} object per feature."""
    out = []
    for fa in model.features.values():
        entry: dict = {"feature": fa.feature, "kind": fa.kind}
        if fa.degenerate:
            entry["degenerate"] = True
        elif fa.kind == CONTINUOUS:
            entry["threshold"] = fa.threshold
        else:
            entry["level_map"] = {
                lvl: ("up" if lvl in fa.up_levels else "down")
                for lvl in sorted(fa.fit_levels)
            }
        entry["direction"] = fa.direction
        entry["separation"] = fa.separation
        out.append(entry)
    return out


def model_from_json(doc: list) -> AbstractionModel:
    feats: dict = {}
    for entry in doc:
        name = entry["feature"]
        kind = entry["kind"]
        if entry.get("degenerate"):
            feats[name] = FeatureAbstraction(
                name, kind, entry["direction"], float(entry["separation"]), degenerate=True
            )
        elif kind == CONTINUOUS:
            feats[name] = FeatureAbstraction(
                name, kind, entry["direction"], float(entry["separation"]),
                threshold=float(entry["threshold"]),
            )
        else:
            level_map = entry["level_map"]
            feats[name] = FeatureAbstraction(
                name, kind, entry["direction"], float(entry["separation"]),
                up_levels=frozenset(l for l, s in level_map.items() if s == "up"),
                fit_levels=frozenset(level_map),
            )
    return AbstractionModel(feats)


def write_model(model: AbstractionModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_json(model), fh, indent=2)
        fh.write("\n")


def read_model(path) -> AbstractionModel:
    with open(path, encoding="utf-8") as fh:
        return model_from_json(json.load(fh))
