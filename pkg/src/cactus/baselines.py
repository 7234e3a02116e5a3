"""In-repo comparison model: a seeded random forest with Gini importance,
plus mean/mode imputation for baselines that cannot handle missing cells.

The forest trains each tree on a bootstrap sample (per-tree seeds derived
from the master seed by tree index), searches a random feature subset at
every node, and routes rows with a missing split value down the branch
that received the majority of the node's observed rows. Importance is the
per-feature sum of realized Gini decreases, normalized to sum to one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import AllMissingFeature, SingleClassTraining, UnknownFeature
from .reports import ImportanceReport
from .tabular import CATEGORICAL, CONTINUOUS, Dataset, FeatureColumn, derive_seed


def mean_impute(d: Dataset) -> Dataset:
    """Fill missing cells with the feature mean (continuous) or modal level
    (categorical, ties to the lexicographically smallest level)."""
    if not any(c.missing.any() for c in d.columns):
        return d
    columns = []
    for col in d.columns:
        if not col.missing.any():
            columns.append(col)
            continue
        obs = ~col.missing
        if not obs.any():
            raise AllMissingFeature(f"feature {col.name!r} has no observed values")
        values = col.values.copy()
        if col.kind == CONTINUOUS:
            values[col.missing] = float(np.mean(col.values[obs]))
        else:
            observed = [v for v, m in zip(col.values, col.missing) if not m]
            counts: dict = {}
            for v in observed:
                counts[v] = counts.get(v, 0) + 1
            mode = min(counts, key=lambda lvl: (-counts[lvl], lvl))
            values[col.missing] = mode
        missing = np.zeros(len(col), dtype=bool)
        columns.append(FeatureColumn(col.name, col.kind, values, missing, col.levels))
    return Dataset(d.name, tuple(columns), d.target)


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: int = 8
    min_leaf: int = 2
    features_per_split: int | None = None  # None: round(sqrt(feature count))
    seed: int = 0

    def __post_init__(self):
        for field in ("n_trees", "max_depth", "min_leaf"):
            if getattr(self, field) < 1:
                raise ValueError(f"{field} must be a positive integer")
        if self.features_per_split is not None and self.features_per_split < 1:
            raise ValueError("features_per_split must be a positive integer")


class _Node:
    __slots__ = (
        "counts", "prediction", "feature", "is_cat", "threshold",
        "missing_left", "gain", "left", "right",
    )

    def __init__(self, counts):
        self.counts = counts  # (n_class0, n_class1) of the node's sample
        self.prediction = 1 if counts[1] > counts[0] else 0
        self.feature = -1  # leaf unless a split is attached
        self.left = self.right = None
        self.gain = 0.0

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0


@dataclass(frozen=True)
class Forest:
    trees: tuple
    feature_names: tuple[str, ...]
    feature_kinds: tuple[str, ...]
    level_codes: tuple  # per feature: {level: code} or None
    raw_importance: np.ndarray
    params: ForestParams
    dataset_name: str = ""


def _encode(d: Dataset, feature_names, feature_kinds, level_codes) -> np.ndarray:
    """Dataset -> float matrix; categorical cells become level codes and
    missing/unseen cells become NaN."""
    n = d.row_count
    X = np.empty((n, len(feature_names)))
    for j, (name, kind) in enumerate(zip(feature_names, feature_kinds)):
        if name not in d.feature_names:
            raise UnknownFeature(f"feature {name!r} absent from dataset {d.name!r}")
        col = d.column(name)
        if col.kind != kind:
            raise UnknownFeature(f"feature {name!r} is {col.kind}, forest expects {kind}")
        if kind == CONTINUOUS:
            x = col.values.copy()
            x[col.missing] = np.nan
        else:
            codes = level_codes[j]
            x = np.array(
                [
                    np.nan if m else codes.get(v, np.nan)
                    for v, m in zip(col.values, col.missing)
                ]
            )
        X[:, j] = x
    return X


def _gini_gain_terms(n_l, c0l, c1l, n_r, c0r, c1r):
    """Sum of child (count * gini) terms; infeasible children give NaN."""
    with np.errstate(divide="ignore", invalid="ignore"):
        left = n_l - (c0l * c0l + c1l * c1l) / n_l
        right = n_r - (c0r * c0r + c1r * c1r) / n_r
    return left + right


def _best_continuous_splits(Xn, y, min_leaf):
    """Best threshold per column of a node's continuous submatrix.

    Returns (gains, thresholds, missing_left) arrays, one entry per column;
    gain is -inf where no feasible split exists. Missing rows are routed to
    the branch holding the majority of the observed rows (ties go left), and
    feasibility/gain are evaluated on the realized children.
    """
    n, m = Xn.shape
    total1 = int(y.sum())
    total0 = n - total1

    order = np.argsort(Xn, axis=0, kind="stable")  # NaN sort last
    xs = np.take_along_axis(Xn, order, axis=0)
    ys = y[order]
    cum1 = np.cumsum(ys, axis=0)
    obs = (~np.isnan(Xn)).sum(axis=0)

    boundary = np.zeros((n, m), dtype=bool)
    if n >= 2:
        boundary[:-1] = xs[:-1] < xs[1:]

    cols = np.arange(m)
    c1_obs = np.where(obs > 0, cum1[np.maximum(obs, 1) - 1, cols], 0)
    c0_obs = obs - c1_obs
    miss1 = total1 - c1_obs
    miss0 = total0 - c0_obs
    n_miss = miss0 + miss1

    nl_obs = np.arange(1, n + 1)[:, None]
    c1l = cum1
    c0l = nl_obs - c1l
    route_left = nl_obs >= (obs[None, :] - nl_obs)
    n_l = nl_obs + np.where(route_left, n_miss[None, :], 0)
    c1L = c1l + np.where(route_left, miss1[None, :], 0)
    c0L = c0l + np.where(route_left, miss0[None, :], 0)
    n_r = n - n_l
    c1R = total1 - c1L
    c0R = total0 - c0L

    child = _gini_gain_terms(n_l, c0L, c1L, n_r, c0R, c1R)
    parent = n - (total0 * total0 + total1 * total1) / n
    gains = parent - child
    feasible = boundary & (n_l >= min_leaf) & (n_r >= min_leaf)
    gains = np.where(feasible, gains, -np.inf)

    best_rows = np.argmax(gains, axis=0)  # first max: smallest threshold
    best_gain = gains[best_rows, cols]
    upper = np.minimum(best_rows + 1, n - 1)
    thresholds = (xs[best_rows, cols] + xs[upper, cols]) / 2
    missing_left = route_left[best_rows, cols]
    return best_gain, thresholds, missing_left


def _best_categorical_split(x, y, min_leaf):
    """Best single-level equality split for one encoded categorical column."""
    n = x.size
    total1 = int(y.sum())
    total0 = n - total1
    obs_mask = ~np.isnan(x)
    n_obs = int(obs_mask.sum())
    best = (-np.inf, 0.0, True)
    parent = n - (total0 * total0 + total1 * total1) / n
    for code in np.unique(x[obs_mask]):
        in_level = x == code
        nl_obs = int(in_level.sum())
        route_left = nl_obs >= (n_obs - nl_obs)
        left = in_level | (~obs_mask if route_left else np.zeros(n, dtype=bool))
        n_l = int(left.sum())
        n_r = n - n_l
        if n_l < min_leaf or n_r < min_leaf:
            continue
        c1L = int(y[left].sum())
        c0L = n_l - c1L
        gain = parent - float(
            _gini_gain_terms(n_l, c0L, c1L, n_r, total0 - c0L, total1 - c1L)
        )
        if gain > best[0]:
            best = (gain, float(code), route_left)
    return best


def _grow(X, y, idx, depth, rng, params, is_cat, m_feats, n_root, raw_importance):
    y_node = y[idx]
    n1 = int(y_node.sum())
    node = _Node((idx.size - n1, n1))
    if n1 == 0 or n1 == idx.size or depth >= params.max_depth or idx.size < 2 * params.min_leaf:
        return node

    k = X.shape[1]
    feats = np.sort(rng.choice(k, size=m_feats, replace=False))
    cont = feats[~is_cat[feats]]
    cats = feats[is_cat[feats]]

    best_gain = 0.0
    best = None  # (feature, threshold, missing_left, categorical)
    if cont.size:
        Xn = X[np.ix_(idx, cont)]
        gains, thresholds, missing_left = _best_continuous_splits(Xn, y_node, params.min_leaf)
        for pos, f in enumerate(cont):
            if gains[pos] > best_gain:
                best_gain = float(gains[pos])
                best = (int(f), float(thresholds[pos]), bool(missing_left[pos]), False)
    for f in cats:
        gain, code, route_left = _best_categorical_split(X[idx, f], y_node, params.min_leaf)
        if gain > best_gain:
            best_gain = float(gain)
            best = (int(f), code, route_left, True)

    if best is None:
        return node
    feature, threshold, missing_left, categorical = best
    x = X[idx, feature]
    obs_mask = ~np.isnan(x)
    left = (x == threshold) if categorical else (obs_mask & (x <= threshold))
    if missing_left:
        left = left | ~obs_mask

    node.feature = feature
    node.is_cat = categorical
    node.threshold = threshold
    node.missing_left = missing_left
    node.gain = best_gain
    raw_importance[feature] += best_gain / n_root
    node.left = _grow(X, y, idx[left], depth + 1, rng, params, is_cat, m_feats, n_root, raw_importance)
    node.right = _grow(X, y, idx[~left], depth + 1, rng, params, is_cat, m_feats, n_root, raw_importance)
    return node


def fit_forest(d: Dataset, params: ForestParams = ForestParams()) -> Forest:
    """Train a seeded bootstrap ensemble; deterministic per (Dataset, params)."""
    n0, n1 = d.class_counts()
    if n0 == 0 or n1 == 0:
        raise SingleClassTraining(f"training data {d.name!r} has a single class")
    feature_names = d.feature_names
    feature_kinds = tuple(c.kind for c in d.columns)
    level_codes = tuple(
        {lvl: float(i) for i, lvl in enumerate(c.levels)} if c.kind == CATEGORICAL else None
        for c in d.columns
    )
    X = _encode(d, feature_names, feature_kinds, level_codes)
    y = d.target.astype(np.int64)
    n, k = X.shape
    m_feats = params.features_per_split or max(1, round(np.sqrt(k)))
    if m_feats > k:
        raise ValueError(f"features_per_split {m_feats} exceeds feature count {k}")
    is_cat = np.array([kind == CATEGORICAL for kind in feature_kinds])

    raw_importance = np.zeros(k)
    trees = []
    for t in range(params.n_trees):
        rng = np.random.default_rng(derive_seed(params.seed, t))
        boot = rng.integers(0, n, size=n)
        trees.append(
            _grow(X, y, boot, 0, rng, params, is_cat, m_feats, n, raw_importance)
        )
    return Forest(
        tuple(trees), feature_names, feature_kinds, level_codes,
        raw_importance, params, d.name,
    )


def _route(node: _Node, X, rows, out):
    if node.is_leaf:
        out[rows] = node.prediction
        return
    x = X[rows, node.feature]
    obs_mask = ~np.isnan(x)
    left = (x == node.threshold) if node.is_cat else (obs_mask & (x <= node.threshold))
    if node.missing_left:
        left = left | ~obs_mask
    _route(node.left, X, rows[left], out)
    _route(node.right, X, rows[~left], out)


class ForestPrediction(NamedTuple):
    labels: np.ndarray
    ties: np.ndarray


def forest_predict_detail(f: Forest, d: Dataset) -> ForestPrediction:
    """Majority vote over trees; vote ties resolve to label 0 and are flagged."""
    X = _encode(d, f.feature_names, f.feature_kinds, f.level_codes)
    votes = np.zeros(d.row_count, dtype=np.int64)
    rows = np.arange(d.row_count)
    out = np.empty(d.row_count, dtype=np.int64)
    for tree in f.trees:
        _route(tree, X, rows, out)
        votes += out
    n_trees = len(f.trees)
    labels = (2 * votes > n_trees).astype(np.int8)
    ties = 2 * votes == n_trees
    return ForestPrediction(labels, ties)


def forest_predict(f: Forest, d: Dataset) -> np.ndarray:
    return forest_predict_detail(f, d).labels


def forest_importance(f: Forest, dataset_tag: str | None = None) -> ImportanceReport:
    """Accumulated Gini decreases per feature, normalized to sum to one."""
    total = float(f.raw_importance.sum())
    scaled = f.raw_importance / total if total > 0 else f.raw_importance
    return ImportanceReport.from_pairs(
        "forest",
        dataset_tag if dataset_tag is not None else f.dataset_name,
        zip(f.feature_names, scaled),
    )
