import numpy as np
import pytest

from oracles import relative_change_oracle

from cactus.errors import EmptyDataset, KTooLarge, LengthMismatch, ZeroBaselineImportance
from cactus.evaluation import (
    ConfusionMatrix,
    confusion,
    metrics,
    overlap_curve,
    relative_change,
    run_experiment,
)
from cactus.reports import ImportanceReport
from cactus.synthetic import make_cohort


def test_confusion_counts():
    truth = [1, 1, 1, 1, 1, 1, 0, 0, 0, 0]
    cm = confusion(truth, truth)
    assert (cm.tp, cm.tn, cm.fp, cm.fn) == (6, 4, 0, 0)
    inverted = confusion([1 - t for t in truth], truth)
    assert (inverted.tp, inverted.tn) == (0, 0)
    assert (inverted.fp, inverted.fn) == (4, 6)


def test_confusion_hand_tally():
    pred = [1, 0, 1, 1, 0, 0, 1, 0]
    truth = [1, 1, 0, 1, 0, 1, 1, 0]
    cm = confusion(pred, truth)
    assert (cm.tp, cm.fp, cm.tn, cm.fn) == (3, 1, 2, 2)


def test_confusion_errors():
    with pytest.raises(LengthMismatch):
        confusion([1, 0], [1])
    with pytest.raises(EmptyDataset):
        confusion([], [])


def test_metrics_closed_forms():
    perfect = metrics(ConfusionMatrix(tp=7, fp=0, tn=3, fn=0))
    assert all(v == 1.0 for v in perfect.as_dict().values())
    ms = metrics(ConfusionMatrix(tp=50, fn=50, tn=100, fp=0))
    assert ms.recall == 0.5
    assert ms.balanced_accuracy == 0.75
    assert ms.precision == 1.0


def test_metrics_undefined_is_explicit():
    ms = metrics(ConfusionMatrix(tp=0, fp=0, tn=5, fn=3))
    assert ms.precision is None
    assert ms.recall == 0.0
    assert ms.f1 is None
    no_positives = metrics(ConfusionMatrix(tp=0, fp=0, tn=5, fn=0))
    assert no_positives.recall is None
    assert no_positives.balanced_accuracy is None


def test_metric_identities_exhaustive():
    # every confusion matrix with total <= 50
    for total in range(1, 51):
        for tp in range(total + 1):
            for fp in range(total - tp + 1):
                for tn in range(total - tp - fp + 1):
                    fn = total - tp - fp - tn
                    ms = metrics(ConfusionMatrix(tp, fp, tn, fn))
                    assert (ms.recall is None) == (tp + fn == 0)
                    assert (ms.precision is None) == (tp + fp == 0)
                    if ms.recall is not None:
                        assert abs(ms.recall - tp / (tp + fn)) < 1e-12
                    if ms.balanced_accuracy is not None:
                        assert abs(ms.balanced_accuracy - (tp / (tp + fn) + tn / (tn + fp)) / 2) < 1e-12
                    assert abs(ms.accuracy - (tp + tn) / total) < 1e-12


def _rep(pairs, model="m", tag="t"):
    return ImportanceReport.from_pairs(model, tag, pairs)


def test_relative_change_identity():
    rep = _rep([(f"f{i}", 1.0 - i / 10) for i in range(10)])
    st = relative_change(rep, {0.1: rep, 0.2: rep, 0.3: rep}, k=10)
    assert st.aggregate_mean == 0.0 and st.aggregate_std == 0.0


def test_relative_change_hand_case():
    complete = _rep([("f", 0.2)])
    by_level = {
        0.1: _rep([("f", 0.25)]),
        0.2: _rep([("f", 0.15)]),
        0.3: _rep([("f", 0.2)]),
    }
    st = relative_change(complete, by_level, k=1)
    assert st.aggregate_mean == pytest.approx((0.25 + 0.25 + 0.0) / 3, abs=1e-12)
    assert st.aggregate_std == 0.0
    oracle_mean, oracle_std = relative_change_oracle(
        [("f", 0.2)], {m: list(r.entries) for m, r in by_level.items()}, k=1
    )
    assert st.aggregate_mean == pytest.approx(oracle_mean, abs=1e-15)


def test_absent_feature_counts_as_total_change():
    complete = _rep([("gone", 0.4), ("kept", 0.3)])
    level = _rep([("kept", 0.3), ("new", 0.2)])
    st = relative_change(complete, {0.1: level}, k=2)
    per = {fs.feature: fs.mean_change for fs in st.per_feature}
    assert per["gone"] == 1.0
    assert per["kept"] == 0.0


def test_relative_change_random_matches_oracle():
    rng = np.random.default_rng(31)
    features = [f"f{i}" for i in range(12)]
    complete = _rep([(f, float(v)) for f, v in zip(features, rng.uniform(0.1, 1, 12))])
    by_level = {
        m: _rep([(f, float(v)) for f, v in zip(features, rng.uniform(0, 1, 12))])
        for m in (0.1, 0.2, 0.3)
    }
    st = relative_change(complete, by_level, k=10)
    mean, std = relative_change_oracle(
        list(complete.entries), {m: list(r.entries) for m, r in by_level.items()}, 10
    )
    assert st.aggregate_mean == pytest.approx(mean, rel=1e-12)
    assert st.aggregate_std == pytest.approx(std, rel=1e-12)


def test_relative_change_errors():
    short = _rep([("a", 1.0)])
    with pytest.raises(KTooLarge):
        relative_change(short, {}, k=2)
    zero = _rep([("a", 0.0)])
    with pytest.raises(ZeroBaselineImportance):
        relative_change(zero, {0.1: zero}, k=1)


def test_relative_change_scale_invariance():
    rng = np.random.default_rng(5)
    features = [f"f{i}" for i in range(10)]
    base = {f: float(v) for f, v in zip(features, rng.uniform(0.1, 1, 10))}
    lvl = {f: float(v) for f, v in zip(features, rng.uniform(0.05, 1, 10))}
    plain = relative_change(
        _rep(list(base.items())), {0.1: _rep(list(lvl.items()))}, k=5
    )
    scaled = relative_change(
        _rep([(f, 37.5 * v) for f, v in base.items()]),
        {0.1: _rep([(f, 37.5 * v) for f, v in lvl.items()])},
        k=5,
    )
    assert scaled.aggregate_mean == pytest.approx(plain.aggregate_mean, rel=1e-12)


def test_overlap_values():
    complete = _rep([(f"f{i}", 10.0 - i) for i in range(10)])
    same = overlap_curve(complete, {0.1: complete}, k=10)
    assert same.points == ((0.0, 100.0), (0.1, 100.0))
    disjoint = _rep([(f"g{i}", 10.0 - i) for i in range(10)])
    assert overlap_curve(complete, {0.3: disjoint}, k=10).points[1] == (0.3, 0.0)
    seven = _rep(
        [(f"f{i}", 20.0 - i) for i in range(7)] + [(f"g{i}", 5.0 - i) for i in range(3)]
    )
    assert overlap_curve(complete, {0.2: seven}, k=10).points[1] == (0.2, 70.0)


def test_overlap_invariant_to_order_preserving_transform():
    rng = np.random.default_rng(41)
    features = [f"f{i}" for i in range(15)]
    vals = {f: float(v) for f, v in zip(features, rng.uniform(0.1, 1, 15))}
    lvl = {f: float(v) for f, v in zip(features, rng.uniform(0.1, 1, 15))}
    a = overlap_curve(_rep(list(vals.items())), {0.1: _rep(list(lvl.items()))}, k=5)
    squash = lambda d: [(f, v**3 + 1.0) for f, v in d.items()]
    b = overlap_curve(_rep(squash(vals)), {0.1: _rep(squash(lvl))}, k=5)
    assert a.points == b.points


def test_run_experiment_degenerate_grid():
    d = make_cohort(rows=120, n_informative=3, n_noise=3, seed=7)
    res = run_experiment(d, levels=(), repeats=1, master_seed=5, models=("cactus",), k=3)
    ev = res["cactus"]
    assert list(ev.metrics) == [0.0]
    assert ev.stability.aggregate_mean == 0.0
    assert ev.overlap.points == ((0.0, 100.0),)


def test_run_experiment_deterministic():
    d = make_cohort(rows=150, n_informative=4, n_noise=4, seed=2)
    kwargs = dict(levels=(0.1,), repeats=2, master_seed=9, models=("cactus",), k=4)
    a = run_experiment(d, **kwargs)
    b = run_experiment(d, **kwargs)
    assert a["cactus"].metrics == b["cactus"].metrics
    assert a["cactus"].mean_reports == b["cactus"].mean_reports
    assert a["cactus"].stability == b["cactus"].stability


def test_run_experiment_separable_data_scores_high():
    d = make_cohort(rows=300, seed=21)
    res = run_experiment(d, levels=(0.1,), repeats=3, master_seed=1, models=("cactus",))
    ba = res["cactus"].metrics[0.0]["balanced_accuracy"]
    assert ba.mean >= 0.95
    tags = {m: r.dataset_tag for m, r in res["cactus"].mean_reports.items()}
    assert tags[0.0].endswith("+0%") and tags[0.1].endswith("+10%")
