"""Command-line workflows end to end at small scale."""

import hashlib
import json
import pathlib
import subprocess
import sys

import pytest

from biasprobe import cli
from biasprobe.assembly import mix_inoculation, read_bundle
from biasprobe.cli import RunConfig, load_config, ConfigError, default_task_ids
from biasprobe.metrics import EvalReport

TASKS = "morphology_x_lexical_content,control_morphology,control_lexical_content"
GEN_FLAGS = ["--ambiguous-size", "500", "--control-size", "120",
             "--seed", "7", "--jobs", "1"]


def _generate(out_dir, tasks=TASKS, extra=()):
    return cli.main(["generate", "--out", str(out_dir),
                     "--tasks", tasks, *GEN_FLAGS, *extra])


def _tree_digest(root):
    digest = hashlib.sha256()
    for path in sorted(pathlib.Path(root).rglob("*")):
        if path.is_file():
            digest.update(str(path.relative_to(root)).encode())
            digest.update(path.read_bytes())
    return digest.hexdigest()


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli_ws")
    out = root / "bundles"
    assert _generate(out) == 0
    return out


@pytest.fixture(scope="module")
def matrix(workspace, tmp_path_factory):
    reports = tmp_path_factory.mktemp("cli_reports")
    code = cli.main([
        "run-matrix", "--out", str(workspace), "--reports", str(reports),
        "--tasks", TASKS, "--learners", "oracle_linguistic,dual_feature_meta",
        "--rates", "0,0.01", "--jobs", "1",
    ])
    assert code == 0
    return reports


class TestGenerate:
    def test_layout_and_manifest(self, workspace):
        task_dir = workspace / "morphology_x_lexical_content"
        manifest = json.loads((task_dir / "manifest.json").read_text())
        for name in manifest["condition_files"].values():
            assert (task_dir / name).is_file()
        assert manifest["counts"] == {"training": 100, "inoculating": 200,
                                      "test": 100, "auxiliary": 100}
        control_dir = workspace / "control_morphology"
        control_manifest = json.loads(
            (control_dir / "manifest.json").read_text())
        assert control_manifest["counts"] == {
            "control_train": 40, "control_eval_in": 40,
            "control_eval_out": 40}
        assert "timestamp" not in " ".join(manifest)

    def test_unknown_task_exits_2(self, tmp_path, capsys):
        code = _generate(tmp_path / "x", tasks="morphology_x_telepathy")
        assert code == 2
        assert "unknown tasks" in capsys.readouterr().err

    def test_byte_identical_reruns(self, workspace, tmp_path):
        again = tmp_path / "again"
        assert _generate(again) == 0
        assert _tree_digest(again) == _tree_digest(workspace)

    def test_generate_with_rate_bakes_inoculation(self, tmp_path):
        out = tmp_path / "mixed"
        code = _generate(out, tasks="morphology_x_lexical_content",
                         extra=["--rate", "0.1"])
        assert code == 0
        bundle = read_bundle(str(out / "morphology_x_lexical_content"))
        assert bundle.manifest["inoculated_count"] == 10  # half_up(0.1 * 100)


class TestValidate:
    def test_clean_workspace_passes(self, workspace, capsys):
        code = cli.main(["validate", "--out", str(workspace),
                         "--tasks", TASKS])
        assert code == 0
        assert capsys.readouterr().out.count("ok ") == 3

    def test_corrupted_stamp_fails(self, workspace, tmp_path, capsys):
        corrupt = tmp_path / "corrupt"
        assert _generate(corrupt, tasks="morphology_x_lexical_content") == 0
        target = corrupt / "morphology_x_lexical_content" / "test.jsonl"
        lines = target.read_text(encoding="utf-8").splitlines()
        record = json.loads(lines[0])
        record["l_s"] = 1 - record["l_s"]
        lines[0] = json.dumps(record, ensure_ascii=False)
        target.write_text("\n".join(lines) + "\n", encoding="utf-8")
        code = cli.main(["validate", "--out", str(corrupt),
                         "--tasks", "morphology_x_lexical_content"])
        assert code == 2
        out = capsys.readouterr().out
        assert "FAIL" in out and record["uid"] in out

    def test_missing_bundle_fails(self, tmp_path):
        code = cli.main(["validate", "--out", str(tmp_path / "nowhere"),
                         "--tasks", "control_morphology"])
        assert code == 2


class TestRunMatrix:
    def test_report_files_exist(self, matrix):
        for learner in ("oracle_linguistic", "dual_feature_meta"):
            base = matrix / learner
            assert (base / "control_morphology@0.json").is_file()
            assert (base / "control_lexical_content@0.json").is_file()
            assert (base / "morphology_x_lexical_content@0.json").is_file()
            assert (base / "morphology_x_lexical_content@0.01.json").is_file()

    def test_cell_count_reported(self, matrix, capsys):
        # 2 learners x (2 controls + 1 ambiguous x 2 rates) = 8 cells
        reports = list(matrix.rglob("*@*.json"))
        assert len(reports) == 8

    def test_summary_and_matrix_outputs(self, matrix):
        summary = (matrix / "summary.csv").read_text(encoding="utf-8")
        rows = [r for r in summary.splitlines() if r]
        assert len(rows) == 9  # header + 8 cells
        assert rows[0].startswith("task_id,")
        assert "mcc_test" in rows[0] and "control_pass" in rows[0]
        assert (matrix / "matrix.txt").read_text(encoding="utf-8")

    def test_figures_rendered(self, matrix):
        figures = matrix / "figures"
        for learner in ("oracle_linguistic", "dual_feature_meta"):
            for rate in ("0", "0.01"):
                for ext in ("svg", "png"):
                    name = f"lbs_heatmap_{learner}@{rate}.{ext}"
                    assert (figures / name).is_file(), name
            for ext in ("svg", "png"):
                assert (figures / f"lbs_by_rate_{learner}.{ext}").is_file()

    def test_oracle_cell_contents(self, matrix):
        path = matrix / "oracle_linguistic" / "morphology_x_lexical_content@0.json"
        report = EvalReport.from_dict(json.loads(path.read_text()))
        assert report.lbs == 1.0
        assert report.mcc["control_linguistic"] == 1.0
        assert report.mcc["control_surface"] == 1.0
        assert report.control_pass is True

    def test_dual_rate_response(self, matrix):
        base = matrix / "dual_feature_meta"
        at_zero = EvalReport.from_dict(json.loads(
            (base / "morphology_x_lexical_content@0.json").read_text()))
        at_rate = EvalReport.from_dict(json.loads(
            (base / "morphology_x_lexical_content@0.01.json").read_text()))
        assert at_zero.lbs == 0.0
        assert at_rate.lbs == 1.0

    def test_custom_rate_needs_flag(self, workspace, tmp_path, capsys):
        args = ["run-matrix", "--out", str(workspace),
                "--reports", str(tmp_path / "r"),
                "--tasks", TASKS, "--learners", "oracle_linguistic",
                "--rates", "0,0.02", "--jobs", "1"]
        assert cli.main(args) == 2
        assert "non-canonical" in capsys.readouterr().err
        assert cli.main(args + ["--allow-custom-rates"]) == 0

    def test_report_command_rebuilds_summary(self, matrix):
        summary_path = matrix / "summary.csv"
        before = summary_path.read_text(encoding="utf-8")
        summary_path.unlink()
        code = cli.main(["report", "--reports", str(matrix), "--jobs", "1"])
        assert code == 0
        assert summary_path.read_text(encoding="utf-8") == before


class TestTrainPredictEvaluate:
    def test_round_trip_matches_matrix_cell(self, workspace, matrix, tmp_path):
        task_dir = workspace / "morphology_x_lexical_content"
        model = tmp_path / "model.json"
        weights = tmp_path / "weights.txt"
        predictions = tmp_path / "predictions.jsonl"
        report_out = tmp_path / "report.json"
        assert cli.main(["train", "--task-dir", str(task_dir),
                         "--learner", "dual_feature_meta", "--rate", "0.01",
                         "--model-out", str(model),
                         "--weights-out", str(weights)]) == 0
        assert "dual_feature_meta" in weights.read_text(encoding="utf-8")
        assert cli.main(["predict", "--model", str(model),
                         "--task-dir", str(task_dir), "--rate", "0.01",
                         "--out", str(predictions)]) == 0
        assert cli.main(["evaluate", "--task-dir", str(task_dir),
                         "--predictions", str(predictions),
                         "--learner-id", "dual_feature_meta",
                         "--rate", "0.01", "--apply-rate", "0.01",
                         "--report-out", str(report_out)]) == 0
        standalone = EvalReport.from_dict(
            json.loads(report_out.read_text(encoding="utf-8")))
        cell = EvalReport.from_dict(json.loads(
            (matrix / "dual_feature_meta" /
             "morphology_x_lexical_content@0.01.json").read_text()))
        for key in ("training", "test", "auxiliary"):
            assert standalone.mcc[key] == cell.mcc[key], key
            assert standalone.n_scored[key] == cell.n_scored[key], key

    def test_oracle_predict_subset_conditions(self, workspace, tmp_path):
        task_dir = workspace / "morphology_x_lexical_content"
        model = tmp_path / "oracle.json"
        predictions = tmp_path / "oracle_predictions.jsonl"
        assert cli.main(["train", "--task-dir", str(task_dir),
                         "--learner", "oracle_surface", "--rate", "0",
                         "--model-out", str(model)]) == 0
        assert cli.main(["predict", "--model", str(model),
                         "--task-dir", str(task_dir),
                         "--conditions", "test",
                         "--out", str(predictions)]) == 0
        rows = predictions.read_text(encoding="utf-8").splitlines()
        assert len(rows) == 100
        payload = json.loads(rows[0])
        assert set(payload) <= {"uid", "predicted_label", "score"}

    def test_unknown_condition_rejected(self, workspace, tmp_path, capsys):
        task_dir = workspace / "morphology_x_lexical_content"
        model = tmp_path / "oracle.json"
        assert cli.main(["train", "--task-dir", str(task_dir),
                         "--learner", "oracle_surface", "--rate", "0",
                         "--model-out", str(model)]) == 0
        code = cli.main(["predict", "--model", str(model),
                         "--task-dir", str(task_dir),
                         "--conditions", "verification",
                         "--out", str(tmp_path / "p.jsonl")])
        assert code == 2

    def test_missing_test_coverage_fails(self, workspace, tmp_path, capsys):
        task_dir = workspace / "morphology_x_lexical_content"
        model = tmp_path / "model.json"
        predictions = tmp_path / "partial.jsonl"
        cli.main(["train", "--task-dir", str(task_dir),
                  "--learner", "oracle_linguistic", "--rate", "0",
                  "--model-out", str(model)])
        cli.main(["predict", "--model", str(model),
                  "--task-dir", str(task_dir), "--out", str(predictions)])
        lines = predictions.read_text(encoding="utf-8").splitlines()
        bundle = read_bundle(str(task_dir))
        test_uids = {r.uid for r in bundle.records["test"]}
        dropped = next(ln for ln in lines
                       if json.loads(ln)["uid"] in test_uids)
        kept = [ln for ln in lines if ln != dropped]
        predictions.write_text("\n".join(kept) + "\n", encoding="utf-8")
        code = cli.main(["evaluate", "--task-dir", str(task_dir),
                         "--predictions", str(predictions)])
        assert code == 2
        err = capsys.readouterr().err
        assert json.loads(dropped)["uid"] in err

    def test_malformed_line_cites_location(self, workspace, tmp_path, capsys):
        predictions = tmp_path / "bad.jsonl"
        predictions.write_text(
            '{"uid": "u1", "predicted_label": 1}\n{"uid": "u2"}\n',
            encoding="utf-8")
        code = cli.main(["evaluate",
                         "--task-dir",
                         str(workspace / "morphology_x_lexical_content"),
                         "--predictions", str(predictions)])
        assert code == 2
        assert "bad.jsonl:2" in capsys.readouterr().err


class TestConfigFile:
    def test_yaml_config_drives_generate(self, tmp_path):
        out = tmp_path / "from_config"
        cfg = tmp_path / "run.yaml"
        cfg.write_text(
            "out_dir: {out}\n"
            "tasks: [control_morphology]\n"
            "control_size: 120\n"
            "seed: 7\n"
            "jobs: 1\n".format(out=out),
            encoding="utf-8")
        assert cli.main(["generate", "--config", str(cfg)]) == 0
        assert (out / "control_morphology" / "manifest.json").is_file()

    def test_flag_overrides_config(self, tmp_path):
        cfg = tmp_path / "run.yaml"
        cfg.write_text("out_dir: ignored\nseed: 3\n", encoding="utf-8")
        config = load_config(str(cfg), overrides={"out_dir": "kept",
                                                  "seed": None})
        assert config.out_dir == "kept"
        assert config.seed == 3

    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "run.yaml"
        cfg.write_text("robustness: maximal\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_config(str(cfg))

    def test_lexical_semantics_flag_extends_roster(self):
        base = RunConfig()
        extended = RunConfig(enable_lexical_semantics=True)
        assert "control_lexical_semantics" not in base.task_ids
        assert "control_lexical_semantics" in extended.task_ids
        assert len(extended.task_ids) == len(base.task_ids) + 1
        assert set(default_task_ids(False)) <= set(default_task_ids(True))


class TestSubprocessEntry:
    def test_module_invocation(self, workspace):
        proc = subprocess.run(
            [sys.executable, "-m", "biasprobe.cli", "validate",
             "--out", str(workspace), "--tasks", "control_morphology"],
            capture_output=True, text=True, timeout=120)
        assert proc.returncode == 0, proc.stderr
        assert "ok " in proc.stdout
