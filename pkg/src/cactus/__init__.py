"""CACTUS: Up/Down abstraction classification with a stability-aware
evaluation harness for tabular data under missingness."""

from .abstraction import (
    AbstractedDataset,
    AbstractionModel,
    FeatureAbstraction,
    abstract_categorical,
    apply_abstraction,
    fit_abstraction,
    roc_threshold,
)
from .baselines import (
    Forest,
    ForestParams,
    fit_forest,
    forest_importance,
    forest_predict,
    forest_predict_detail,
    mean_impute,
)
from .classifier import ClassProfiles, classify, classify_rows, fit_profiles, significance
from .evaluation import (
    ConfusionMatrix,
    MetricSet,
    OverlapCurve,
    StabilityReport,
    confusion,
    metrics,
    overlap_curve,
    relative_change,
    run_experiment,
)
from .missingness import CANONICAL_LEVELS, InjectionPlan, inject_mcar, missing_fraction
from .reports import ImportanceReport, import_external_report, top_k
from .synthetic import make_clinical_cohort, make_cohort
from .tabular import (
    Dataset,
    FeatureColumn,
    SplitSpec,
    load_csv,
    split,
    stratify_subset,
    write_csv,
)

__version__ = "0.1.0"

__all__ = [
    "AbstractedDataset",
    "AbstractionModel",
    "CANONICAL_LEVELS",
    "ClassProfiles",
    "ConfusionMatrix",
    "Dataset",
    "FeatureAbstraction",
    "FeatureColumn",
    "Forest",
    "ForestParams",
    "ImportanceReport",
    "InjectionPlan",
    "MetricSet",
    "OverlapCurve",
    "SplitSpec",
    "StabilityReport",
    "abstract_categorical",
    "apply_abstraction",
    "classify",
    "classify_rows",
    "confusion",
    "fit_abstraction",
    "fit_forest",
    "fit_profiles",
    "forest_importance",
    "forest_predict",
    "forest_predict_detail",
    "import_external_report",
    "inject_mcar",
    "load_csv",
    "make_clinical_cohort",
    "make_cohort",
    "mean_impute",
    "metrics",
    "missing_fraction",
    "overlap_curve",
    "relative_change",
    "roc_threshold",
    "run_experiment",
    "significance",
    "split",
    "stratify_subset",
    "top_k",
    "write_csv",
]
