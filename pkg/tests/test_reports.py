import json

import pytest

from cactus.errors import KTooLarge, NonFiniteImportance, SchemaViolation
from cactus.reports import (
    ImportanceReport,
    import_external_report,
    read_report_csv,
    report_from_json,
    report_to_json,
    top_k,
    write_report_csv,
    write_report_json,
)


def _report(pairs, model="m", tag="t"):
    return ImportanceReport.from_pairs(model, tag, pairs)


def test_canonical_order_and_ties():
    rep = _report([("b", 0.3), ("c", 0.5), ("a", 0.3)])
    assert [f for f, _ in rep.entries] == ["c", "a", "b"]


def test_rejects_bad_importances():
    with pytest.raises(NonFiniteImportance):
        _report([("a", -0.1)])
    with pytest.raises(NonFiniteImportance):
        _report([("a", float("nan"))])
    with pytest.raises(NonFiniteImportance):
        _report([("a", float("inf"))])
    with pytest.raises(SchemaViolation):
        _report([("a", 0.1), ("a", 0.2)])


def test_top_k():
    rep = _report([("a", 3.0), ("b", 2.0), ("c", 1.0)])
    assert top_k(rep, 3).entries == rep.entries
    assert [f for f, _ in top_k(rep, 1).entries] == ["a"]
    with pytest.raises(KTooLarge):
        top_k(rep, 4)
    with pytest.raises(KTooLarge):
        top_k(rep, 0)


def test_top_k_tie_prefers_lexicographically_smaller():
    rep = _report([("zeta", 0.3), ("alpha", 0.3)])
    assert [f for f, _ in top_k(rep, 1).entries] == ["alpha"]


def test_json_round_trip(tmp_path):
    rep = _report([("nse", 390.4), ("psa/tpsa", 192.0)], model="lgbm", tag="total+10%")
    path = tmp_path / "rep.json"
    write_report_json(rep, path)
    again = report_from_json(json.loads(path.read_text()))
    assert again == rep


def test_csv_round_trip(tmp_path):
    rep = _report([("nse", 390.4), ("psa/tpsa", 192.0), ("egf", 79.6)])
    path = tmp_path / "rep.csv"
    write_report_csv(rep, path)
    again = read_report_csv(path, model_name="m", dataset_tag="t")
    assert again == rep


def test_import_external_lgbm_style_csv(tmp_path):
    path = tmp_path / "lgbm.csv"
    path.write_text("rank,feature,importance\n1,psa/tpsa,192.0\n2,nse,390.4\n")
    rep = import_external_report(path)
    # re-sorted under canonical rules regardless of the stated ranks
    assert rep.entries[0] == ("nse", 390.4)
    assert rep.model_name == "lgbm"


def test_import_rejects_bad_files(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("rank,feature,importance\n")
    with pytest.raises(SchemaViolation):
        import_external_report(empty)

    negative = tmp_path / "neg.json"
    negative.write_text(json.dumps({
        "model": "x", "dataset_tag": "t",
        "entries": [{"feature": "a", "importance": -3}],
    }))
    with pytest.raises(NonFiniteImportance):
        import_external_report(negative)

    malformed = tmp_path / "bad.json"
    malformed.write_text("{\"model\": \"x\"}")
    with pytest.raises(SchemaViolation):
        import_external_report(malformed)

    notjson = tmp_path / "broken.json"
    notjson.write_text("{nope")
    with pytest.raises(SchemaViolation):
        import_external_report(notjson)
