"""Classification metrics, the feature-stability metric, top-k overlap, and
the repeated-injection experiment harness.

Stability of a model is the average relative change of its complete-data
top-k feature importances as missingness grows: for each top-k feature f,
delta_f(m) = |I_m(f) - I_0(f)| / I_0(f), averaged first over the level grid
and then over the k features; the spread over the k features is reported as
a population standard deviation. A feature that drops out of a level's
report counts as importance 0 (maximal instability), not as missing data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .abstraction import apply_abstraction, fit_abstraction
from .baselines import Forest, ForestParams, fit_forest, forest_importance, forest_predict
from .classifier import classify_rows, fit_profiles, significance
from .errors import EmptyDataset, KTooLarge, LengthMismatch, ZeroBaselineImportance
from .missingness import InjectionPlan, inject_mcar
from .reports import ImportanceReport, top_k
from .tabular import Dataset, SplitSpec, derive_seed, split

METRIC_NAMES = ("balanced_accuracy", "recall", "precision", "f1", "accuracy")

# purpose codes for derived seeds
_SPLIT, _INJECT, _FOREST = 0, 1, 2


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion(pred, truth) -> ConfusionMatrix:
    """Standard counts with class 1 as the positive class."""
    p = np.asarray(pred)
    t = np.asarray(truth)
    if p.shape != t.shape:
        raise LengthMismatch(f"{p.shape} predictions vs {t.shape} truths")
    if p.size == 0:
        raise EmptyDataset("cannot evaluate zero predictions")
    return ConfusionMatrix(
        tp=int(((p == 1) & (t == 1)).sum()),
        fp=int(((p == 1) & (t == 0)).sum()),
        tn=int(((p == 0) & (t == 0)).sum()),
        fn=int(((p == 0) & (t == 1)).sum()),
    )


@dataclass(frozen=True)
class MetricSet:
    """Closed-form metrics; None marks an undefined ratio (zero denominator),
    which is deliberately never reported as 0."""

    balanced_accuracy: float | None
    recall: float | None
    precision: float | None
    f1: float | None
    accuracy: float | None

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in METRIC_NAMES}


def metrics(cm: ConfusionMatrix) -> MetricSet:
    recall = cm.tp / (cm.tp + cm.fn) if cm.tp + cm.fn > 0 else None
    precision = cm.tp / (cm.tp + cm.fp) if cm.tp + cm.fp > 0 else None
    specificity = cm.tn / (cm.tn + cm.fp) if cm.tn + cm.fp > 0 else None
    balanced = (recall + specificity) / 2 if recall is not None and specificity is not None else None
    if precision is None or recall is None or precision + recall == 0:
        f1 = None
    else:
        f1 = 2 * precision * recall / (precision + recall)
    accuracy = (cm.tp + cm.tn) / cm.total
    return MetricSet(balanced, recall, precision, f1, accuracy)


@dataclass(frozen=True)
class FeatureStability:
    feature: str
    by_level: dict  # level -> relative change
    mean_change: float


@dataclass(frozen=True)
class StabilityReport:
    model_name: str
    k: int
    levels: tuple
    per_feature: tuple  # FeatureStability, in complete-data rank order
    aggregate_mean: float
    aggregate_std: float


def relative_change(complete: ImportanceReport, by_level, k: int) -> StabilityReport:
    """Average relative change of the complete-data top-k importances.

    ``by_level`` maps each missingness level to that level's report. With an
    empty level map the metric degenerates to 0 (nothing moved).
    """
    anchor = top_k(complete, k)
    levels = tuple(sorted(by_level))
    per_feature = []
    means = []
    for feature, base in anchor.entries:
        if base == 0.0:
            raise ZeroBaselineImportance(
                f"top-{k} feature {feature!r} has zero complete-data importance"
            )
        deltas = {
            m: abs(by_level[m].importance_of(feature) - base) / base for m in levels
        }
        mean = sum(deltas.values()) / len(levels) if levels else 0.0
        per_feature.append(FeatureStability(feature, deltas, mean))
        means.append(mean)
    arr = np.array(means)
    return StabilityReport(
        complete.model_name, k, levels, tuple(per_feature),
        float(arr.mean()), float(arr.std()),
    )


@dataclass(frozen=True)
class OverlapCurve:
    model_name: str
    k: int
    points: tuple  # ((level, overlap percentage), ...) incl. the (0, 100) anchor


def overlap_curve(complete: ImportanceReport, by_level, k: int) -> OverlapCurve:
    """Percentage of the complete-data top-k recurring in each level's top-k."""
    anchor = top_k(complete, k).feature_set()
    points = [(0.0, 100.0)]
    for m in sorted(by_level):
        shared = len(anchor & top_k(by_level[m], k).feature_set())
        points.append((float(m), 100.0 * shared / k))
    return OverlapCurve(complete.model_name, k, tuple(points))


@dataclass(frozen=True)
class MetricStats:
    mean: float | None
    std: float | None


@dataclass(frozen=True)
class ModelEvaluation:
    model_name: str
    metrics: dict  # level -> {metric name -> MetricStats}
    stability: StabilityReport
    overlap: OverlapCurve
    mean_reports: dict  # level -> ImportanceReport of repeat-averaged importances


CACTUS = "cactus"
FOREST = "forest"


def _tag(name: str, level: float) -> str:
    return f"{name}+{round(level * 100):g}%"


def _fit_score(model, train, test, alpha, forest_params, seed):
    """Fit one model on train, return (test labels, training ImportanceReport)."""
    if model == CACTUS:
        abstraction = fit_abstraction(train)
        abstracted_train = apply_abstraction(abstraction, train)
        profiles = fit_profiles(abstracted_train, alpha)
        labels, _, _, _ = classify_rows(profiles, apply_abstraction(abstraction, test))
        return labels, significance(abstracted_train, dataset_tag=train.name)
    if model == FOREST:
        params = ForestParams(
            n_trees=forest_params.n_trees,
            max_depth=forest_params.max_depth,
            min_leaf=forest_params.min_leaf,
            features_per_split=forest_params.features_per_split,
            seed=seed,
        )
        forest = fit_forest(train, params)
        return forest_predict(forest, test), forest_importance(forest)
    raise ValueError(f"unknown model {model!r}")


def _aggregate_metric(values) -> MetricStats:
    # one undefined repeat makes the aggregate undefined; averaging around it
    # would silently change the denominator
    if any(v is None for v in values):
        return MetricStats(None, None)
    arr = np.array(values, dtype=float)
    return MetricStats(float(arr.mean()), float(arr.std()))


def run_experiment(
    d: Dataset,
    levels=(0.10, 0.20, 0.30),
    repeats: int = 10,
    master_seed: int = 0,
    *,
    test_fraction: float = 0.25,
    alpha: float = 1.0,
    k: int = 10,
    models=(CACTUS, FOREST),
    forest_params: ForestParams = ForestParams(),
) -> dict:
    """Repeated-injection evaluation; a pure function of its arguments.

    Per repeat, MCAR cells are injected into the whole dataset at each level
    (independently, from the complete data), the injected dataset is split
    with the repeat's seed, models are fitted on the train partition and
    scored on test, and training-data importance reports are collected.
    Metrics aggregate as mean/std over repeats; stability and overlap are
    computed from the repeat-averaged importances per level against the
    complete-data (level 0) ranking.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    grid = tuple(sorted(set(float(m) for m in levels) | {0.0}))
    metric_values: dict = {mod: {m: {n: [] for n in METRIC_NAMES} for m in grid} for mod in models}
    importance_sums: dict = {mod: {m: {} for m in grid} for mod in models}

    for r in range(repeats):
        split_seed = derive_seed(master_seed, r, _SPLIT)
        for li, m in enumerate(grid):
            injected = inject_mcar(d, InjectionPlan(m, derive_seed(master_seed, r, li, _INJECT)))
            train, test = split(injected, SplitSpec(test_fraction, split_seed))
            for model in models:
                labels, report = _fit_score(
                    model, train, test, alpha, forest_params,
                    derive_seed(master_seed, r, li, _FOREST),
                )
                ms = metrics(confusion(labels, test.target))
                for name, value in ms.as_dict().items():
                    metric_values[model][m][name].append(value)
                sums = importance_sums[model][m]
                for feature, imp in report.entries:
                    sums[feature] = sums.get(feature, 0.0) + imp

    out = {}
    for model in models:
        mean_reports = {
            m: ImportanceReport.from_pairs(
                model, _tag(d.name, m),
                [(f, s / repeats) for f, s in importance_sums[model][m].items()],
            )
            for m in grid
        }
        nonzero = {m: rep for m, rep in mean_reports.items() if m > 0.0}
        out[model] = ModelEvaluation(
            model_name=model,
            metrics={
                m: {n: _aggregate_metric(v) for n, v in metric_values[model][m].items()}
                for m in grid
            },
            stability=relative_change(mean_reports[0.0], nonzero, k),
            overlap=overlap_curve(mean_reports[0.0], nonzero, k),
            mean_reports=mean_reports,
        )
    return out


# --- serialization helpers (consumed by the CLI and by plotting tools) ---


def metrics_json(results: dict) -> list:
    out = []
    for model, ev in results.items():
        for level in sorted(ev.metrics):
            entry = {"model": model, "level": level}
            for name, stats in ev.metrics[level].items():
                entry[name] = {"mean": stats.mean, "std": stats.std}
            out.append(entry)
    return out


def metrics_csv_rows(results: dict) -> list:
    rows = [["model", "level", "metric", "mean", "std"]]
    for model, ev in results.items():
        for level in sorted(ev.metrics):
            for name in METRIC_NAMES:
                stats = ev.metrics[level][name]
                rows.append([
                    model, repr(level), name,
                    "" if stats.mean is None else repr(stats.mean),
                    "" if stats.std is None else repr(stats.std),
                ])
    return rows


def stability_json(ev: ModelEvaluation) -> dict:
    return {
        "model": ev.model_name,
        "k": ev.stability.k,
        "aggregate_mean": ev.stability.aggregate_mean,
        "aggregate_std": ev.stability.aggregate_std,
        "per_feature": [
            {
                "feature": fs.feature,
                "mean_change": fs.mean_change,
                "by_level": {repr(m): fs.by_level[m] for m in ev.stability.levels},
            }
            for fs in ev.stability.per_feature
        ],
    }


def stability_csv_rows(results: dict) -> list:
    rows = [["model", "scope", "feature", "level", "value"]]
    for model, ev in results.items():
        st = ev.stability
        for fs in st.per_feature:
            for m in st.levels:
                rows.append([model, "per_feature", fs.feature, repr(m), repr(fs.by_level[m])])
            rows.append([model, "per_feature_mean", fs.feature, "", repr(fs.mean_change)])
        rows.append([model, "aggregate_mean", "", "", repr(st.aggregate_mean)])
        rows.append([model, "aggregate_std", "", "", repr(st.aggregate_std)])
    return rows


def overlap_json(results: dict) -> list:
    return [
        {"model": model, "k": ev.overlap.k, "points": [list(p) for p in ev.overlap.points]}
        for model, ev in results.items()
    ]


def overlap_csv_rows(results: dict) -> list:
    rows = [["model", "level", "overlap_pct"]]
    for model, ev in results.items():
        for level, pct in ev.overlap.points:
            rows.append([model, repr(level), repr(pct)])
    return rows
