"""Seeded synthetic cohorts for demos and verification.

Informative features are class-conditional location shifts on unit-variance
Gaussians, so the effect size is the shift itself. Noise features are
identically distributed in both classes.
"""

from __future__ import annotations

import numpy as np

from .tabular import Dataset, categorical_column, continuous_column, normalize_seed


def make_cohort(
    rows: int = 600,
    n_informative: int = 10,
    n_noise: int = 20,
    effect: float = 2.0,
    positive_rate: float = 0.35,
    seed: int = 0,
    name: str = "synthetic",
) -> Dataset:
    """Unit-variance Gaussian features; informative ones shift by ``effect``
    for class-1 rows. Class balance is exact (round(rate * rows) positives).

    ``effect`` may be a scalar or a per-feature sequence of length
    ``n_informative``. Informative features are named inf_XX, noise ones
    noise_XX.
    """
    rng = np.random.default_rng(normalize_seed(seed))
    n_pos = int(round(positive_rate * rows))
    target = np.zeros(rows, dtype=np.int8)
    target[rng.permutation(rows)[:n_pos]] = 1

    effects = np.broadcast_to(np.asarray(effect, dtype=float), (n_informative,))
    columns = []
    for i in range(n_informative):
        x = rng.normal(0.0, 1.0, rows) + effects[i] * target
        columns.append(continuous_column(f"inf_{i + 1:02d}", x))
    for i in range(n_noise):
        columns.append(continuous_column(f"noise_{i + 1:02d}", rng.normal(0.0, 1.0, rows)))
    return Dataset(name, tuple(columns), target)


def informative_features(d: Dataset) -> tuple[str, ...]:
    return tuple(n for n in d.feature_names if n.startswith("inf_"))


def make_clinical_cohort(seed: int = 0, name: str = "cohort") -> Dataset:
    """A cohort-shaped table: 568 rows, 89 features (88 biomarker-like
    continuous columns plus a categorical sex column), 201 positives, and
    130 female / 438 male rows. Informative effects are moderate so the
    top significance values land in a clinically plausible band.
    """
    rows, positives, females = 568, 201, 130
    rng = np.random.default_rng(normalize_seed(seed))
    target = np.zeros(rows, dtype=np.int8)
    target[rng.permutation(rows)[:positives]] = 1

    effects = np.linspace(0.6, 1.1, 10)
    columns = []
    for i, eff in enumerate(effects):
        x = rng.normal(0.0, 1.0, rows) + eff * target
        columns.append(continuous_column(f"marker_{i + 1:02d}", x))
    for i in range(78):
        columns.append(continuous_column(f"assay_{i + 1:02d}", rng.normal(0.0, 1.0, rows)))
    sex = np.array(["male"] * rows, dtype=object)
    sex[rng.permutation(rows)[:females]] = "female"
    columns.append(categorical_column("sex", sex))
    return Dataset(name, tuple(columns), target)
