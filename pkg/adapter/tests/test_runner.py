import json
import subprocess
import sys

import pytest

from lmadapter import (
    SIDECAR_FILE,
    AdapterConfig,
    AdapterError,
    finetune_and_predict,
)
from lmadapter.cli import main as adapter_main


def _read_jsonl(path):
    return [json.loads(line)
            for line in path.read_text(encoding="utf-8").splitlines()]


def _bundle_uids(task_dir, condition):
    manifest = json.loads((task_dir / "manifest.json").read_text())
    path = task_dir / manifest["condition_files"][condition]
    return [json.loads(line)["uid"]
            for line in path.read_text(encoding="utf-8").splitlines()]


@pytest.fixture(scope="module")
def control_run(bundles, tiny_checkpoint, tmp_path_factory):
    out = tmp_path_factory.mktemp("control_run")
    config = AdapterConfig(
        task_dir=str(bundles["control"]), model=str(tiny_checkpoint),
        out_dir=str(out), learning_rate=3e-5, seed=5)
    sidecar = finetune_and_predict(config)
    return out, sidecar


class TestFinetuneAndPredict:
    def test_one_predictions_file_per_condition(self, control_run):
        out, sidecar = control_run
        assert set(sidecar["prediction_files"]) == {
            "control_train", "control_eval_in", "control_eval_out"}
        for name in sidecar["prediction_files"].values():
            assert (out / name).is_file()
        assert (out / sidecar["combined_predictions"]).is_file()

    def test_exchange_schema_holds_on_every_line(self, control_run, bundles):
        out, sidecar = control_run
        for condition, name in sidecar["prediction_files"].items():
            rows = _read_jsonl(out / name)
            uids = _bundle_uids(bundles["control"], condition)
            assert [r["uid"] for r in rows] == uids
            for row in rows:
                assert set(row) == {"uid", "predicted_label", "score"}
                assert row["predicted_label"] in (0, 1)
                assert 0.0 <= row["score"] <= 1.0

    def test_sidecar_documents_the_run(self, control_run, bundles):
        _, sidecar = control_run
        assert sidecar["format"] == "adapter-run/1"
        assert sidecar["task_id"] == "control_absolute_position"
        assert sidecar["train_condition"] == "control_train"
        assert sidecar["n_train"] == 40
        assert sidecar["config"]["learning_rate"] == 3e-5
        assert sidecar["config"]["epochs"] == 5
        assert sidecar["config"]["batch_size"] == 16
        assert sidecar["classification_head"]
        assert "torch" in sidecar["library_versions"]
        assert isinstance(sidecar["deterministic_achieved"], bool)

    def test_sidecar_written_to_disk(self, control_run):
        out, sidecar = control_run
        on_disk = json.loads((out / SIDECAR_FILE).read_text())
        assert on_disk == sidecar

    def test_primary_harness_scores_the_output(self, control_run, bundles):
        out, sidecar = control_run
        proc = subprocess.run(
            [sys.executable, "-m", "biasprobe.cli", "evaluate",
             "--task-dir", str(bundles["control"]),
             "--predictions", str(out / sidecar["combined_predictions"]),
             "--learner-id", "lm_adapter"],
            capture_output=True, text=True, timeout=300)
        assert proc.returncode == 0, proc.stderr
        report = json.loads(proc.stdout)
        assert set(report["mcc"]) == {"training", "control_in", "control_out"}

    def test_same_seed_reproduces_predictions(self, bundles, tiny_checkpoint,
                                              tmp_path):
        outputs = []
        for name in ("first", "second"):
            config = AdapterConfig(
                task_dir=str(bundles["control"]), model=str(tiny_checkpoint),
                out_dir=str(tmp_path / name), learning_rate=1e-5, seed=9)
            sidecar = finetune_and_predict(config)
            if not sidecar["deterministic_achieved"]:
                pytest.skip("runtime lacks deterministic kernels")
            combined = tmp_path / name / sidecar["combined_predictions"]
            outputs.append(combined.read_bytes())
        assert outputs[0] == outputs[1]

    def test_ambiguous_bundle_trains_and_scores(self, bundles,
                                                tiny_checkpoint, tmp_path):
        config = AdapterConfig(
            task_dir=str(bundles["ambiguous"]), model=str(tiny_checkpoint),
            out_dir=str(tmp_path / "amb"), seed=3)
        sidecar = finetune_and_predict(config)
        assert sidecar["train_condition"] == "training"
        assert set(sidecar["prediction_files"]) == {
            "training", "test", "auxiliary"}
        proc = subprocess.run(
            [sys.executable, "-m", "biasprobe.cli", "evaluate",
             "--task-dir", str(bundles["ambiguous"]),
             "--predictions",
             str(tmp_path / "amb" / sidecar["combined_predictions"]),
             "--learner-id", "lm_adapter"],
            capture_output=True, text=True, timeout=300)
        assert proc.returncode == 0, proc.stderr
        report = json.loads(proc.stdout)
        assert set(report["mcc"]) == {"training", "test", "auxiliary"}

    def test_unloadable_checkpoint_has_hint(self, bundles, tmp_path):
        config = AdapterConfig(
            task_dir=str(bundles["control"]),
            model=str(tmp_path / "no_such_checkpoint"),
            out_dir=str(tmp_path / "out"))
        with pytest.raises(AdapterError, match="local checkpoint directory"):
            finetune_and_predict(config)


class TestCommandLine:
    def test_run_subcommand(self, bundles, tiny_checkpoint, tmp_path,
                            capsys):
        code = adapter_main([
            "run", "--task-dir", str(bundles["control"]),
            "--model", str(tiny_checkpoint), "--lr", "2e-5",
            "--seed", "4", "--out", str(tmp_path / "run")])
        assert code == 0
        sidecar = json.loads(capsys.readouterr().out)
        assert sidecar["config"]["seed"] == 4
        assert (tmp_path / "run" / SIDECAR_FILE).is_file()

    def test_off_grid_rate_exits_2(self, bundles, tiny_checkpoint, tmp_path,
                                   capsys):
        code = adapter_main([
            "run", "--task-dir", str(bundles["control"]),
            "--model", str(tiny_checkpoint), "--lr", "5e-5",
            "--out", str(tmp_path / "run")])
        assert code == 2
        assert "learning rate" in capsys.readouterr().err

    def test_export_subcommand(self, bundles, tmp_path, capsys):
        code = adapter_main(["export", "--task-dir", str(bundles["control"]),
                             "--out", str(tmp_path / "csv")])
        assert code == 0
        assert (tmp_path / "csv" / "control_train.csv").is_file()
        assert "control_eval_out" in capsys.readouterr().out
