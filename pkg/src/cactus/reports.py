"""Ranked (feature, importance) lists: the interchange unit of all
stability analytics.

Reports are canonically ordered by importance descending with ties broken
by feature name ascending. Any model, in-repo or external, participates in
stability analysis by producing this format (JSON or CSV).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import IoFailure, KTooLarge, NonFiniteImportance, SchemaViolation


def _canonical(pairs) -> tuple:
    return tuple(sorted(pairs, key=lambda e: (-e[1], e[0])))


@dataclass(frozen=True)
class ImportanceReport:
    model_name: str
    dataset_tag: str
    entries: tuple  # ((feature, importance), ...) canonically ordered

    @classmethod
    def from_pairs(cls, model_name: str, dataset_tag: str, pairs) -> "ImportanceReport":
        """Validate and canonically sort (feature, importance) pairs."""
        clean = []
        seen = set()
        for feature, importance in pairs:
            feature = str(feature)
            importance = float(importance)
            if feature in seen:
                raise SchemaViolation(f"duplicate feature {feature!r} in report")
            seen.add(feature)
            if not math.isfinite(importance) or importance < 0.0:
                raise NonFiniteImportance(
                    f"feature {feature!r}: importance {importance!r} must be finite and >= 0"
                )
            clean.append((feature, importance))
        return cls(str(model_name), str(dataset_tag), _canonical(clean))

    def importance_of(self, feature: str, default: float = 0.0) -> float:
        for f, imp in self.entries:
            if f == feature:
                return imp
        return default

    def feature_set(self) -> frozenset:
        return frozenset(f for f, _ in self.entries)

    def __len__(self) -> int:
        return len(self.entries)


def top_k(report: ImportanceReport, k: int) -> ImportanceReport:
    """First k entries under the canonical tie-broken order."""
    if k < 1 or k > len(report.entries):
        raise KTooLarge(f"k={k} outside 1..{len(report.entries)}")
    return ImportanceReport(report.model_name, report.dataset_tag, report.entries[:k])


def report_to_json(report: ImportanceReport) -> dict:
    return {
        "model": report.model_name,
        "dataset_tag": report.dataset_tag,
        "entries": [{"feature": f, "importance": imp} for f, imp in report.entries],
    }


def report_from_json(doc: dict) -> ImportanceReport:
    if not isinstance(doc, dict):
        raise SchemaViolation("report document must be a JSON object")
    for key in ("model", "dataset_tag", "entries"):
        if key not in doc:
            raise SchemaViolation(f"report document missing key {key!r}")
    entries = doc["entries"]
    if not isinstance(entries, list) or not entries:
        raise SchemaViolation("report entries must be a non-empty list")
    pairs = []
    for e in entries:
        if not isinstance(e, dict) or "feature" not in e or "importance" not in e:
            raise SchemaViolation(f"malformed entry {e!r}")
        try:
            pairs.append((str(e["feature"]), float(e["importance"])))
        except (TypeError, ValueError):
            raise NonFiniteImportance(f"entry {e!r} has a non-numeric importance")
    return ImportanceReport.from_pairs(doc["model"], doc["dataset_tag"], pairs)


def write_report_json(report: ImportanceReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report_to_json(report), fh, indent=2)
        fh.write("\n")


def report_csv_rows(report: ImportanceReport) -> list:
    rows = [["rank", "feature", "importance"]]
    for rank, (f, imp) in enumerate(report.entries, start=1):
        rows.append([rank, f, repr(imp)])
    return rows


def write_report_csv(report: ImportanceReport, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh).writerows(report_csv_rows(report))


def read_report_csv(path, model_name: str = "", dataset_tag: str = "") -> ImportanceReport:
    """Read the (rank, feature, importance) CSV form; re-sorts canonically."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip().lower() for c in rows[0]] != ["rank", "feature", "importance"]:
        raise SchemaViolation(f"{path}: expected header rank,feature,importance")
    if len(rows) == 1:
        raise SchemaViolation(f"{path}: empty entry list")
    pairs = []
    for row in rows[1:]:
        if len(row) != 3:
            raise SchemaViolation(f"{path}: malformed row {row!r}")
        try:
            pairs.append((row[1], float(row[2])))
        except ValueError:
            raise NonFiniteImportance(f"{path}: non-numeric importance {row[2]!r}")
    return ImportanceReport.from_pairs(model_name, dataset_tag, pairs)


def import_external_report(path) -> ImportanceReport:
    """Load a report produced by any tool, validating the interchange schema.

    JSON files must carry model/dataset_tag; CSV files carry entries only,
    so model and tag default to the file stem.
    """
    p = Path(path)
    try:
        if p.suffix.lower() == ".json":
            with open(p, encoding="utf-8") as fh:
                try:
                    doc = json.load(fh)
                except json.JSONDecodeError as e:
                    raise SchemaViolation(f"{path}: invalid JSON ({e})")
            return report_from_json(doc)
        return read_report_csv(p, model_name=p.stem, dataset_tag=p.stem)
    except OSError as e:
        raise IoFailure(f"cannot read {path}: {e}")
