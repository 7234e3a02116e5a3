"""Command-line pipeline: run the full experiment, export report artifacts,
and exchange importance reports with external tools.

Exit codes partition error classes: 2 config, 3 io, 4 data, 5 internal.
All artifacts are rendered in memory before anything is written, so a
failing run leaves no partial outputs. The manifest lists every artifact
with a content hash; re-running an identical config reproduces the hashes.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import re
import sys
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path

import click

from . import __version__
from .abstraction import (
    AbstractionModel,
    fit_abstraction,
    apply_abstraction,
    model_to_json,
    read_model,
)
from .baselines import ForestParams, fit_forest, forest_importance
from .classifier import significance
from .errors import (
    CactusError,
    ConfigInvalid,
    FeatureMismatch,
    IoFailure,
    MissingLevelReport,
    SchemaViolation,
)
from .evaluation import (
    metrics_csv_rows,
    metrics_json,
    overlap_csv_rows,
    overlap_json,
    relative_change,
    overlap_curve,
    run_experiment,
    stability_csv_rows,
    stability_json,
    ModelEvaluation,
)
from .reports import (
    ImportanceReport,
    import_external_report,
    report_csv_rows,
    report_to_json,
    top_k,
)
from .tabular import load_csv, stratify_subset

OUT_DIR_ENV = "CACTUS_OUT_DIR"

_CONFIG_KEYS = {
    "input": str,
    "target": str,
    "stratify": str,
    "levels": str,
    "repeats": int,
    "seed": int,
    "alpha": float,
    "top_k": int,
    "test_fraction": float,
    "trees": int,
    "depth": int,
    "min_leaf": int,
    "features_per_split": int,
    "out": str,
}


@dataclass(frozen=True)
class RunConfig:
    input_path: str
    target: str
    stratify_column: str | None = None
    stratify_level: str | None = None
    levels: tuple = (0.10, 0.20, 0.30)
    repeats: int = 10
    seed: int = 0
    alpha: float = 1.0
    top_k: int = 10
    test_fraction: float = 0.25
    trees: int = 100
    depth: int = 8
    min_leaf: int = 2
    features_per_split: int | None = None
    out_dir: str = "."

    def validate(self) -> None:
        if not self.input_path:
            raise ConfigInvalid("an input CSV is required")
        if not self.target:
            raise ConfigInvalid("a target column name is required")
        if any(not 0.0 <= m < 1.0 for m in self.levels):
            raise ConfigInvalid(f"levels {self.levels} must lie in [0,1)")
        if self.repeats < 1:
            raise ConfigInvalid("repeats must be >= 1")
        if self.top_k < 1:
            raise ConfigInvalid("top-k must be >= 1")
        if not self.alpha > 0:
            raise ConfigInvalid("alpha must be > 0")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigInvalid("test fraction must lie in (0,1)")
        for field in ("trees", "depth", "min_leaf"):
            if getattr(self, field) < 1:
                raise ConfigInvalid(f"{field} must be >= 1")


def parse_config_file(path) -> dict:
    """Flat ``key = value`` lines; '#' starts a comment."""
    raw = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise IoFailure(f"cannot read config {path}: {e}")
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigInvalid(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONFIG_KEYS:
            raise ConfigInvalid(f"{path}:{lineno}: unknown key {key!r}")
        try:
            raw[key] = _CONFIG_KEYS[key](value)
        except ValueError:
            raise ConfigInvalid(f"{path}:{lineno}: bad value for {key!r}: {value!r}")
    return raw


def _parse_levels(text: str) -> tuple:
    try:
        return tuple(sorted({float(tok) for tok in text.split(",") if tok.strip()}))
    except ValueError:
        raise ConfigInvalid(f"cannot parse levels {text!r}")


def _parse_stratify(text: str) -> tuple[str, str]:
    if "=" not in text:
        raise ConfigInvalid(f"stratify must look like column=level, got {text!r}")
    column, level = text.split("=", 1)
    return column.strip(), level.strip()


def build_config(config_path, flags: dict) -> RunConfig:
    """defaults < config file < command-line flags; env var only supplies
    the default output directory."""
    merged: dict = {}
    if config_path:
        merged.update(parse_config_file(config_path))
    merged.update({k: v for k, v in flags.items() if v is not None})

    stratify_column = stratify_level = None
    if merged.get("stratify"):
        stratify_column, stratify_level = _parse_stratify(merged["stratify"])
    levels = (0.10, 0.20, 0.30)
    if merged.get("levels") is not None:
        levels = _parse_levels(merged["levels"])
    out_dir = merged.get("out") or os.environ.get(OUT_DIR_ENV) or "."

    config = RunConfig(
        input_path=merged.get("input", ""),
        target=merged.get("target", ""),
        stratify_column=stratify_column,
        stratify_level=stratify_level,
        levels=levels,
        repeats=merged.get("repeats", 10),
        seed=merged.get("seed", 0),
        alpha=merged.get("alpha", 1.0),
        top_k=merged.get("top_k", 10),
        test_fraction=merged.get("test_fraction", 0.25),
        trees=merged.get("trees", 100),
        depth=merged.get("depth", 8),
        min_leaf=merged.get("min_leaf", 2),
        features_per_split=merged.get("features_per_split"),
        out_dir=out_dir,
    )
    config.validate()
    return config


# --- artifact rendering ---


def _csv_bytes(rows) -> bytes:
    buf = io.StringIO(newline="")
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue().encode("utf-8")


def _json_bytes(doc) -> bytes:
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")


def heatmap_rows(model: AbstractionModel, report: ImportanceReport) -> list:
    """Join abstraction thresholds with significance ranks, report order."""
    rows = [["rank", "feature", "kind", "threshold", "up_levels", "direction", "significance"]]
    for rank, (feature, importance) in enumerate(report.entries, start=1):
        if feature not in model:
            raise FeatureMismatch(f"feature {feature!r} in report but not in model")
        fa = model[feature]
        threshold = "" if fa.threshold is None else repr(fa.threshold)
        ups = "" if fa.up_levels is None else "|".join(sorted(fa.up_levels))
        rows.append([rank, feature, fa.kind, threshold, ups, fa.direction, repr(importance)])
    return rows


def _load_dataset(config: RunConfig):
    try:
        d = load_csv(config.input_path, config.target)
    except OSError as e:
        raise IoFailure(f"cannot read {config.input_path}: {e}")
    if config.stratify_column:
        d = stratify_subset(d, config.stratify_column, config.stratify_level)
    return d


def cmd_run(config: RunConfig) -> dict:
    """Full pipeline; returns the manifest after writing all artifacts."""
    config.validate()
    d = _load_dataset(config)
    results = run_experiment(
        d,
        levels=config.levels,
        repeats=config.repeats,
        master_seed=config.seed,
        test_fraction=config.test_fraction,
        alpha=config.alpha,
        k=config.top_k,
        forest_params=ForestParams(
            n_trees=config.trees,
            max_depth=config.depth,
            min_leaf=config.min_leaf,
            features_per_split=config.features_per_split,
        ),
    )
    # descriptive artifacts come from the full complete cohort, not a split
    cohort_model = fit_abstraction(d)
    cohort_significance = significance(apply_abstraction(cohort_model, d))

    artifacts = {
        "metrics.json": _json_bytes(metrics_json(results)),
        "metrics.csv": _csv_bytes(metrics_csv_rows(results)),
        "stability.json": _json_bytes([stability_json(ev) for ev in results.values()]),
        "stability.csv": _csv_bytes(stability_csv_rows(results)),
        "overlap.json": _json_bytes(overlap_json(results)),
        "overlap.csv": _csv_bytes(overlap_csv_rows(results)),
        "heatmap.csv": _csv_bytes(
            heatmap_rows(cohort_model, top_k(cohort_significance, config.top_k))
        ),
        "abstraction_model.json": _json_bytes(model_to_json(cohort_model)),
    }
    out = Path(config.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name, blob in artifacts.items():
            (out / name).write_bytes(blob)
        manifest = {
            "tool": "cactus",
            "version": __version__,
            "created_utc": datetime.now(timezone.utc).isoformat(),
            "config": asdict(config),
            "files": {
                name: hashlib.sha256(blob).hexdigest() for name, blob in artifacts.items()
            },
        }
        (out / "manifest.json").write_bytes(_json_bytes(manifest))
    except OSError as e:
        raise IoFailure(f"cannot write artifacts to {config.out_dir}: {e}")
    return manifest


def cmd_heatmap(model_path, report_path, out_path, k: int | None = None) -> None:
    model = _read_model_file(model_path)
    report = import_external_report(report_path)
    if k is not None:
        report = top_k(report, k)
    blob = _csv_bytes(heatmap_rows(model, report))
    try:
        Path(out_path).write_bytes(blob)
    except OSError as e:
        raise IoFailure(f"cannot write {out_path}: {e}")


def _read_model_file(path) -> AbstractionModel:
    try:
        return read_model(path)
    except OSError as e:
        raise IoFailure(f"cannot read model {path}: {e}")
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise SchemaViolation(f"{path}: not an abstraction model file ({e})")


_LEVEL_TAG = re.compile(r"\+(\d+(?:\.\d+)?)%$")


def level_from_tag(dataset_tag: str) -> float:
    """Missingness level encoded in a dataset tag; no suffix means complete."""
    m = _LEVEL_TAG.search(dataset_tag.strip())
    return float(m.group(1)) / 100.0 if m else 0.0


def _safe_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", name) or "model"


def cmd_compare(report_paths, levels, k: int, out_dir) -> list:
    """Cross-model stability/overlap from interchange files.

    Every model must supply a complete-data report plus one per level.
    Returns the combined [(model, aggregate_mean, aggregate_std)] ranking,
    ascending by mean.
    """
    levels = tuple(sorted(set(float(m) for m in levels)))
    grouped: dict = {}
    for path in report_paths:
        report = import_external_report(path)
        level = level_from_tag(report.dataset_tag)
        # CSV interchange files carry no model field, so their names double
        # as model+level tags; strip the level suffix to group them
        model_key = _LEVEL_TAG.sub("", report.model_name).strip() or report.model_name
        slot = grouped.setdefault(model_key, {})
        if level in slot:
            raise SchemaViolation(f"model {model_key!r} has two reports for level {level}")
        slot[level] = report

    artifacts = {}
    ranking = []
    for model_name in sorted(grouped):
        slot = grouped[model_name]
        if 0.0 not in slot:
            raise MissingLevelReport(f"model {model_name!r} lacks a complete-data report")
        missing = [m for m in levels if m > 0.0 and m not in slot]
        if missing:
            raise MissingLevelReport(f"model {model_name!r} lacks reports for levels {missing}")
        by_level = {m: slot[m] for m in levels if m > 0.0}
        stability = relative_change(slot[0.0], by_level, k)
        overlap = overlap_curve(slot[0.0], by_level, k)
        ev = ModelEvaluation(model_name, {}, stability, overlap, {})
        safe = _safe_name(model_name)
        artifacts[f"stability_{safe}.json"] = _json_bytes(stability_json(ev))
        artifacts[f"stability_{safe}.csv"] = _csv_bytes(stability_csv_rows({model_name: ev}))
        artifacts[f"overlap_{safe}.json"] = _json_bytes(overlap_json({model_name: ev}))
        artifacts[f"overlap_{safe}.csv"] = _csv_bytes(overlap_csv_rows({model_name: ev}))
        ranking.append((model_name, stability.aggregate_mean, stability.aggregate_std))

    ranking.sort(key=lambda row: (row[1], row[0]))
    rank_rows = [["rank", "model", "aggregate_mean", "aggregate_std"]]
    for i, (model_name, mean, std) in enumerate(ranking, start=1):
        rank_rows.append([i, model_name, repr(mean), repr(std)])
    artifacts["ranking.csv"] = _csv_bytes(rank_rows)

    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name, blob in artifacts.items():
            (out / name).write_bytes(blob)
    except OSError as e:
        raise IoFailure(f"cannot write artifacts to {out_dir}: {e}")
    return ranking


# --- click wiring ---


def _fail(e: BaseException, code: int):
    click.echo(f"error: {e}", err=True)
    sys.exit(code)


def _guard(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except CactusError as e:
        _fail(e, e.exit_code)
    except Exception as e:  # anything unplanned is an internal error
        _fail(e, 5)


@click.group()
@click.version_option(__version__, prog_name="cactus")
def main():
    """Abstraction classifier and missingness stability harness."""


@main.command("run")
@click.option("--config", "config_path", type=click.Path(), help="flat key=value config file")
@click.option("--input", "input_", help="input CSV path")
@click.option("--target", help="binary 0/1 target column name")
@click.option("--stratify", help="column=level cohort filter")
@click.option("--levels", help="comma-separated missingness fractions")
@click.option("--repeats", type=int)
@click.option("--seed", type=int)
@click.option("--alpha", type=float)
@click.option("--top-k", "top_k", type=int)
@click.option("--test-fraction", "test_fraction", type=float)
@click.option("--trees", type=int)
@click.option("--depth", type=int)
@click.option("--min-leaf", "min_leaf", type=int)
@click.option("--features-per-split", "features_per_split", type=int)
@click.option("--out", help=f"output directory (or ${OUT_DIR_ENV})")
def run_command(config_path, input_, **flags):
    """Run the full injection grid and export every report artifact."""
    flags["input"] = input_
    config = _guard(build_config, config_path, flags)
    manifest = _guard(cmd_run, config)
    click.echo(f"wrote {len(manifest['files']) + 1} artifacts to {config.out_dir}")


@main.command("heatmap")
@click.argument("model_file", type=click.Path())
@click.argument("report_file", type=click.Path())
@click.option("--top-k", "top_k", type=int, help="keep only the first k report entries")
@click.option("--out", required=True, help="output CSV path")
def heatmap_command(model_file, report_file, top_k, out):
    """Join abstraction thresholds with a significance ranking."""
    _guard(cmd_heatmap, model_file, report_file, out, top_k)
    click.echo(f"wrote {out}")


@main.command("compare")
@click.argument("report_files", nargs=-1, required=True, type=click.Path())
@click.option("--levels", default="0.1,0.2,0.3", show_default=True)
@click.option("--top-k", "top_k", type=int, default=10, show_default=True)
@click.option("--out", required=True, help="output directory")
def compare_command(report_files, levels, top_k, out):
    """Rank models by feature stability from interchange report files."""
    parsed = _guard(_parse_levels, levels)
    ranking = _guard(cmd_compare, report_files, parsed, top_k, out)
    for i, (model_name, mean, std) in enumerate(ranking, start=1):
        click.echo(f"{i}. {model_name}: mean relative change {mean:.4f} (std {std:.4f})")


@main.group("report")
def report_group():
    """Importance-report interchange utilities."""


@report_group.command("import")
@click.argument("path", type=click.Path())
@click.option("--out", help="write canonical JSON here instead of stdout")
def report_import_command(path, out):
    """Validate and canonically re-sort an external importance report."""
    report = _guard(import_external_report, path)
    doc = report_to_json(report)
    if out:
        def _write():
            try:
                Path(out).write_bytes(_json_bytes(doc))
            except OSError as e:
                raise IoFailure(f"cannot write {out}: {e}")

        _guard(_write)
        click.echo(f"wrote {out}")
    else:
        click.echo(json.dumps(doc, indent=2))


@main.group("baseline")
def baseline_group():
    """In-repo comparison models."""


@baseline_group.command("fit")
@click.option("--input", "input_", required=True, help="input CSV path")
@click.option("--target", required=True)
@click.option("--trees", type=int, default=100, show_default=True)
@click.option("--depth", type=int, default=8, show_default=True)
@click.option("--min-leaf", "min_leaf", type=int, default=2, show_default=True)
@click.option("--features-per-split", "features_per_split", type=int)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--tag", help="dataset tag for the report (defaults to the dataset name)")
@click.option("--out", required=True, help="output report path (.json or .csv)")
def baseline_fit_command(input_, target, trees, depth, min_leaf, features_per_split, seed, tag, out):
    """Fit the forest baseline and emit its importance report."""

    def _fit():
        try:
            d = load_csv(input_, target)
        except OSError as e:
            raise IoFailure(f"cannot read {input_}: {e}")
        params = ForestParams(trees, depth, min_leaf, features_per_split, seed)
        report = forest_importance(fit_forest(d, params), dataset_tag=tag)
        from .reports import write_report_csv, write_report_json

        try:
            if Path(out).suffix.lower() == ".csv":
                write_report_csv(report, out)
            else:
                write_report_json(report, out)
        except OSError as e:
            raise IoFailure(f"cannot write {out}: {e}")

    _guard(_fit)
    click.echo(f"wrote {out}")


if __name__ == "__main__":
    main()
