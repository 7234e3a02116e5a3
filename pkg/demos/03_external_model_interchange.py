"""Bring a third-party model into the stability comparison via files.

Any tool that can rank features can participate: it exports one
(rank, feature, importance) report per missingness level, and `compare`
computes the same stability and overlap analytics for it as for in-repo
models. Here we fabricate a gradient-boosting-style external model whose
importances drift as cells go missing, pit it against the in-repo forest,
and rank both.
"""

import tempfile
from pathlib import Path

import numpy as np

from cactus import ForestParams, fit_forest, forest_importance, make_cohort
from cactus.cli import cmd_compare
from cactus.missingness import InjectionPlan, inject_mcar
from cactus.reports import ImportanceReport, write_report_json

workdir = Path(tempfile.mkdtemp(prefix="interchange_demo_"))
cohort = make_cohort(rows=400, n_informative=6, n_noise=6, seed=5)
levels = (0.10, 0.20, 0.30)
paths = []

# in-repo forest: one report per level, tagged <name>+<pct>%
for m in (0.0,) + levels:
    data = inject_mcar(cohort, InjectionPlan(m, seed=int(m * 100)))
    forest = fit_forest(data, ForestParams(n_trees=60, max_depth=6, seed=9))
    report = forest_importance(forest, dataset_tag=f"demo+{round(m * 100)}%")
    path = workdir / f"forest_{round(m * 100)}.json"
    write_report_json(report, path)
    paths.append(path)

# "external" model: plausible gain-style importances that wobble with m
rng = np.random.default_rng(3)
base = {f: float(v) for f, v in zip(cohort.feature_names, rng.uniform(50, 400, 12))}
for m in (0.0,) + levels:
    wobble = {f: v * float(rng.uniform(1 - 2.5 * m, 1 + 2.5 * m)) for f, v in base.items()}
    report = ImportanceReport.from_pairs("xgb-like", f"demo+{round(m * 100)}%", wobble.items())
    path = workdir / f"external_{round(m * 100)}.json"
    write_report_json(report, path)
    paths.append(path)

ranking = cmd_compare(paths, levels, k=10, out_dir=workdir / "out")
print("models ranked by average relative change of their top-10 (lower is stabler):")
for i, (model, mean, std) in enumerate(ranking, start=1):
    print(f"  {i}. {model:<10} mean {mean:.3f}  std {std:.3f}")
print(f"\nper-model stability/overlap files written to {workdir / 'out'}")
