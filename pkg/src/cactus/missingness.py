"""Seeded MCAR injection at exact cell-count rates.

Injection removes exactly ``floor(fraction * total_feature_cells)`` cells,
drawn uniformly without replacement from the currently observed feature
cells. The target column is never touched. Each level is injected
independently from the same source dataset, so a 20% variant is not a
superset of the 10% one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigInvalid, InfeasibleFraction
from .tabular import CATEGORICAL, Dataset, FeatureColumn, normalize_seed

#: The canonical experiment grid of added-missingness fractions.
CANONICAL_LEVELS = (0.0, 0.10, 0.20, 0.30)


@dataclass(frozen=True)
class InjectionPlan:
    level: float
    seed: int
    protect_target: bool = True

    def __post_init__(self):
        if not 0.0 <= self.level < 1.0:
            raise ConfigInvalid(f"missingness level {self.level} outside [0,1)")
        if not self.protect_target:
            # A Dataset cannot represent missing targets, so an unprotected
            # plan is unsatisfiable rather than silently ignored.
            raise ConfigInvalid("injection into the target column is not supported")


def inject_mcar(d: Dataset, plan: InjectionPlan) -> Dataset:
    """Return a copy of ``d`` with additional MCAR missing feature cells."""
    n_rows = d.row_count
    n_cols = len(d.columns)
    total_cells = n_rows * n_cols
    budget = int(np.floor(plan.level * total_cells))
    if budget == 0:
        return d

    observed = np.concatenate([~c.missing for c in d.columns])  # column-major
    pool = np.flatnonzero(observed)
    if budget > pool.size:
        raise InfeasibleFraction(
            f"need {budget} additional missing cells but only {pool.size} observed cells remain"
        )
    rng = np.random.default_rng(normalize_seed(plan.seed))
    chosen = rng.choice(pool, size=budget, replace=False)

    hit = np.zeros(total_cells, dtype=bool)
    hit[chosen] = True
    columns = []
    for j, col in enumerate(d.columns):
        col_hit = hit[j * n_rows : (j + 1) * n_rows]
        if not col_hit.any():
            columns.append(col)
            continue
        missing = col.missing | col_hit
        values = col.values.copy()
        values[col_hit] = "" if col.kind == CATEGORICAL else np.nan
        columns.append(FeatureColumn(col.name, col.kind, values, missing, col.levels))
    return Dataset(d.name, tuple(columns), d.target)


def missing_fraction(d: Dataset) -> float:
    """Fraction of feature cells that are missing; 0.0 for no features."""
    total = d.row_count * len(d.columns)
    if total == 0:
        return 0.0
    return sum(int(c.missing.sum()) for c in d.columns) / total
