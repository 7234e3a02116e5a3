import numpy as np
import pytest

from cactus.errors import ConfigInvalid, InfeasibleFraction
from cactus.missingness import CANONICAL_LEVELS, InjectionPlan, inject_mcar, missing_fraction
from cactus.synthetic import make_cohort
from cactus.tabular import Dataset, continuous_column, datasets_equal


def _table(rows, cols, seed=0):
    return make_cohort(rows=rows, n_informative=cols, n_noise=0, seed=seed)


def test_canonical_grid():
    assert CANONICAL_LEVELS == (0.0, 0.10, 0.20, 0.30)


def test_exact_injected_count():
    d = _table(1000, 10)
    out = inject_mcar(d, InjectionPlan(0.30, seed=1))
    assert sum(int(c.missing.sum()) for c in out.columns) == 3000


def test_zero_fraction_is_identity():
    d = _table(50, 4)
    assert inject_mcar(d, InjectionPlan(0.0, seed=1)) is d


def test_infeasible_fraction():
    # 100x5 = 500 cells with 400 already missing: a 0.3 budget (150) cannot fit
    base = _table(100, 5)
    holed = inject_mcar(base, InjectionPlan(0.8, seed=3))
    assert sum(int(c.missing.sum()) for c in holed.columns) == 400
    with pytest.raises(InfeasibleFraction):
        inject_mcar(holed, InjectionPlan(0.3, seed=4))


def test_injection_adds_on_top_of_existing():
    base = inject_mcar(_table(200, 5), InjectionPlan(0.1, seed=7))
    out = inject_mcar(base, InjectionPlan(0.2, seed=8))
    # budget is 20% of all cells, added beyond the existing 10%
    assert sum(int(c.missing.sum()) for c in out.columns) == 100 + 200
    for before, after in zip(base.columns, out.columns):
        assert bool(np.all(after.missing[before.missing]))


def test_target_untouched_and_input_unmodified():
    d = _table(300, 8)
    out = inject_mcar(d, InjectionPlan(0.25, seed=2))
    assert np.array_equal(out.target, d.target)
    assert not any(c.missing.any() for c in d.columns)


def test_determinism():
    d = _table(120, 6, seed=3)
    a = inject_mcar(d, InjectionPlan(0.2, seed=99))
    b = inject_mcar(d, InjectionPlan(0.2, seed=99))
    c = inject_mcar(d, InjectionPlan(0.2, seed=100))
    assert datasets_equal(a, b)
    assert not datasets_equal(a, c)


def test_missing_fraction_values():
    d = _table(100, 4)
    assert missing_fraction(d) == 0.0
    out = inject_mcar(d, InjectionPlan(0.2, seed=5))
    assert missing_fraction(out) == pytest.approx(0.2, abs=1 / 400)
    two = Dataset(
        "t",
        (continuous_column("a", [1.0, None]), continuous_column("b", [2.0, 3.0])),
        np.array([0, 1]),
    )
    assert missing_fraction(two) == 0.25


def test_unprotected_target_rejected():
    with pytest.raises(ConfigInvalid):
        InjectionPlan(0.1, seed=0, protect_target=False)


def test_per_column_uniformity_chi_square():
    from scipy import stats

    d = _table(200, 10)
    counts = np.zeros(10)
    for seed in range(200):
        out = inject_mcar(d, InjectionPlan(0.1, seed=seed))
        counts += [int(c.missing.sum()) for c in out.columns]
    assert stats.chisquare(counts).pvalue > 0.01
