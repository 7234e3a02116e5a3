import json

import pytest
from click.testing import CliRunner

from cactus.cli import (
    RunConfig,
    build_config,
    cmd_compare,
    cmd_heatmap,
    cmd_run,
    level_from_tag,
    main,
    parse_config_file,
)
from cactus.errors import ConfigInvalid, FeatureMismatch, MissingLevelReport
from cactus.reports import ImportanceReport, write_report_json
from cactus.synthetic import make_clinical_cohort, make_cohort
from cactus.tabular import write_csv

ARTIFACTS = [
    "metrics.json", "metrics.csv", "stability.json", "stability.csv",
    "overlap.json", "overlap.csv", "heatmap.csv", "abstraction_model.json",
]


@pytest.fixture(scope="module")
def cohort_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "cohort.csv"
    write_csv(make_cohort(rows=160, n_informative=4, n_noise=4, seed=3), path)
    return path


def _config(cohort_csv, out, **overrides):
    base = dict(
        input_path=str(cohort_csv), target="target", levels=(0.1, 0.2),
        repeats=2, seed=11, top_k=5, trees=10, depth=4, out_dir=str(out),
    )
    base.update(overrides)
    return RunConfig(**base)


def test_cmd_run_writes_all_artifacts(cohort_csv, tmp_path):
    manifest = cmd_run(_config(cohort_csv, tmp_path / "out"))
    assert sorted(manifest["files"]) == sorted(ARTIFACTS)
    for name in ARTIFACTS + ["manifest.json"]:
        assert (tmp_path / "out" / name).exists()
    heat = (tmp_path / "out" / "heatmap.csv").read_text().splitlines()
    assert len(heat) == 1 + 5  # header + top-k rows
    overlap = json.loads((tmp_path / "out" / "overlap.json").read_text())
    for entry in overlap:
        assert [p[0] for p in entry["points"]] == [0.0, 0.1, 0.2]


def test_cmd_run_is_idempotent(cohort_csv, tmp_path):
    m1 = cmd_run(_config(cohort_csv, tmp_path / "a"))
    m2 = cmd_run(_config(cohort_csv, tmp_path / "b"))
    assert m1["files"] == m2["files"]
    for name in ARTIFACTS:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_run_with_stratification(tmp_path):
    csv_path = tmp_path / "clinical.csv"
    write_csv(make_clinical_cohort(seed=5), csv_path)
    config = RunConfig(
        input_path=str(csv_path), target="target",
        stratify_column="sex", stratify_level="female",
        levels=(0.1,), repeats=1, seed=3, top_k=10, trees=5, depth=3,
        out_dir=str(tmp_path / "out"),
    )
    cmd_run(config)
    heat = (tmp_path / "out" / "heatmap.csv").read_text().splitlines()
    assert len(heat) == 11
    assert "sex" not in (tmp_path / "out" / "abstraction_model.json").read_text()


def test_cmd_heatmap_join_and_mismatch(cohort_csv, tmp_path):
    cmd_run(_config(cohort_csv, tmp_path / "out"))
    model_path = tmp_path / "out" / "abstraction_model.json"
    report = ImportanceReport.from_pairs("m", "t", [("inf_01", 0.9), ("noise_02", 0.1)])
    report_path = tmp_path / "rep.json"
    write_report_json(report, report_path)
    cmd_heatmap(model_path, report_path, tmp_path / "heat.csv")
    lines = (tmp_path / "heat.csv").read_text().splitlines()
    assert len(lines) == 3
    assert lines[1].startswith("1,inf_01")

    bad = ImportanceReport.from_pairs("m", "t", [("ghost", 1.0)])
    bad_path = tmp_path / "bad.json"
    write_report_json(bad, bad_path)
    with pytest.raises(FeatureMismatch):
        cmd_heatmap(model_path, bad_path, tmp_path / "x.csv")


def test_level_tag_parsing():
    assert level_from_tag("total+10%") == 0.1
    assert level_from_tag("cohort+0%") == 0.0
    assert level_from_tag("complete") == 0.0
    assert level_from_tag("males+30%") == 0.3


def _level_reports(tmp_path, model, values_by_level):
    paths = []
    for level, pairs in values_by_level.items():
        tag = f"x+{round(level * 100)}%"
        rep = ImportanceReport.from_pairs(model, tag, pairs)
        p = tmp_path / f"{model}_{round(level * 100)}.json"
        write_report_json(rep, p)
        paths.append(p)
    return paths


def test_cmd_compare_ranks_stable_model_first(tmp_path):
    pairs = [(f"f{i}", 1.0 - i / 20) for i in range(10)]
    stable = _level_reports(tmp_path, "steady", {m: pairs for m in (0, 0.1, 0.2, 0.3)})
    drifting = _level_reports(
        tmp_path, "drifty",
        {
            0: pairs,
            0.1: [(f, v * (1 + i / 5)) for i, (f, v) in enumerate(pairs)],
            0.2: [(f, v + 0.3 * (i % 2)) for i, (f, v) in enumerate(pairs)],
            0.3: [(f"g{i}", 1.0) for i in range(10)],
        },
    )
    ranking = cmd_compare(stable + drifting, (0.1, 0.2, 0.3), 10, tmp_path / "cmp")
    assert ranking[0][0] == "steady" and ranking[0][1] == 0.0
    assert ranking[1][0] == "drifty" and ranking[1][1] > 0.0
    names = {p.name for p in (tmp_path / "cmp").iterdir()}
    assert {"ranking.csv", "stability_steady.json", "overlap_drifty.csv"} <= names


def test_cmd_compare_accepts_external_csv_reports(tmp_path):
    # bare CSV interchange: the file name carries the model and level tag
    pairs = [(f"f{i}", 1.0 - i / 20) for i in range(10)]
    paths = []
    for level in (0, 10, 20, 30):
        p = tmp_path / f"lgbm+{level}%.csv"
        rep = ImportanceReport.from_pairs("", "", pairs)
        from cactus.reports import write_report_csv

        write_report_csv(rep, p)
        paths.append(p)
    ranking = cmd_compare(paths, (0.1, 0.2, 0.3), 10, tmp_path / "ext")
    assert ranking == [("lgbm", 0.0, 0.0)]


def test_rerun_from_manifest_config_reproduces_hashes(cohort_csv, tmp_path):
    manifest = cmd_run(_config(cohort_csv, tmp_path / "first"))
    recorded = dict(manifest["config"])
    recorded["levels"] = tuple(recorded["levels"])
    recorded["out_dir"] = str(tmp_path / "second")
    again = cmd_run(RunConfig(**recorded))
    assert again["files"] == manifest["files"]


def test_cmd_compare_missing_level(tmp_path):
    pairs = [(f"f{i}", 1.0 - i / 20) for i in range(10)]
    paths = _level_reports(tmp_path, "gappy", {m: pairs for m in (0, 0.1, 0.2)})
    with pytest.raises(MissingLevelReport):
        cmd_compare(paths, (0.1, 0.2, 0.3), 10, tmp_path / "cmp2")


def test_cli_report_import_round_trip(tmp_path):
    runner = CliRunner()
    src = tmp_path / "ext.csv"
    src.write_text("rank,feature,importance\n1,psa/tpsa,192.0\n2,nse,390.4\n")
    out = tmp_path / "canonical.json"
    res = runner.invoke(main, ["report", "import", str(src), "--out", str(out)])
    assert res.exit_code == 0, res.output
    doc = json.loads(out.read_text())
    assert doc["entries"][0]["feature"] == "nse"


def test_cli_baseline_fit(cohort_csv, tmp_path):
    runner = CliRunner()
    out = tmp_path / "forest.json"
    res = runner.invoke(main, [
        "baseline", "fit", "--input", str(cohort_csv), "--target", "target",
        "--trees", "5", "--depth", "3", "--seed", "7", "--tag", "demo+0%",
        "--out", str(out),
    ])
    assert res.exit_code == 0, res.output
    doc = json.loads(out.read_text())
    assert doc["model"] == "forest" and doc["dataset_tag"] == "demo+0%"
    assert len(doc["entries"]) == 8


def test_config_file_and_flag_precedence(tmp_path, cohort_csv):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        f"input = {cohort_csv}\n"
        "target = target\n"
        "levels = 0.1,0.3\n"
        "repeats = 4   # overridden by the flag below\n"
        "top-k = 6\n"
    )
    config = build_config(cfg, {"repeats": 2, "out": str(tmp_path)})
    assert config.levels == (0.1, 0.3)
    assert config.repeats == 2
    assert config.top_k == 6

    bad = tmp_path / "bad.cfg"
    bad.write_text("unknown_key = 1\n")
    with pytest.raises(ConfigInvalid):
        parse_config_file(bad)


def test_env_var_sets_default_out_dir(cohort_csv, monkeypatch, tmp_path):
    monkeypatch.setenv("CACTUS_OUT_DIR", str(tmp_path / "from_env"))
    config = build_config(None, {"input": str(cohort_csv), "target": "target"})
    assert config.out_dir == str(tmp_path / "from_env")


def test_exit_codes(cohort_csv, tmp_path):
    runner = CliRunner()
    io_err = runner.invoke(main, ["run", "--input", "/no/such.csv", "--target", "t"])
    assert io_err.exit_code == 3
    cfg_err = runner.invoke(main, [
        "run", "--input", str(cohort_csv), "--target", "target", "--levels", "2.0",
    ])
    assert cfg_err.exit_code == 2
    data_err = runner.invoke(main, [
        "run", "--input", str(cohort_csv), "--target", "inf_01",
        "--out", str(tmp_path / "never"),
    ])
    assert data_err.exit_code == 4
