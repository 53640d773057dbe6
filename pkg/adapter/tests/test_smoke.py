"""Soft smoke gate: a competent pretrained checkpoint should clear the 0.7
control bar on a surface control task.

The gate needs an actual pretrained model. Point ADAPTER_SMOKE_MODEL at a
local checkpoint directory (or a resolvable model id) to arm it; without
one the test skips with a warning rather than failing, and even an armed
run that lands under the bar only warns — the hard requirements stay
schema-level and live in test_runner.
"""

import json
import os
import subprocess
import sys
import time
import warnings

import pytest

from lmadapter import AdapterConfig, finetune_and_predict

SMOKE_BUDGET_SECONDS = 15 * 60
CONTROL_BAR = 0.7


def _run_primary(args):
    proc = subprocess.run(
        [sys.executable, "-m", "biasprobe.cli", *args],
        capture_output=True, text=True, timeout=600)
    if proc.returncode != 0:
        raise RuntimeError(f"primary CLI failed: {proc.stderr}")


def _checkpoint_available(model):
    from transformers import AutoTokenizer
    try:
        AutoTokenizer.from_pretrained(model)
        return True
    except Exception:
        return False


def test_pretrained_checkpoint_clears_control_bar(tmp_path):
    model = os.environ.get("ADAPTER_SMOKE_MODEL", "prajjwal1/bert-tiny")
    if not _checkpoint_available(model):
        warnings.warn(
            f"smoke checkpoint {model!r} unavailable (offline sandbox); "
            f"set ADAPTER_SMOKE_MODEL to a local pretrained checkpoint "
            f"to arm this gate", UserWarning)
        pytest.skip(f"no pretrained checkpoint: {model}")

    started = time.monotonic()
    task_dir = tmp_path / "bundle" / "control_lexical_content"
    _run_primary(["generate", "--out", str(tmp_path / "bundle"),
                  "--tasks", "control_lexical_content",
                  "--control-size", "600", "--seed", "2", "--jobs", "1"])
    config = AdapterConfig(
        task_dir=str(task_dir), model=model,
        out_dir=str(tmp_path / "run"), learning_rate=3e-5, seed=0)
    sidecar = finetune_and_predict(config)

    report_path = tmp_path / "report.json"
    proc = subprocess.run(
        [sys.executable, "-m", "biasprobe.cli", "evaluate",
         "--task-dir", str(task_dir),
         "--predictions",
         str(tmp_path / "run" / sidecar["combined_predictions"]),
         "--learner-id", "lm_adapter",
         "--report-out", str(report_path)],
        capture_output=True, text=True, timeout=600)
    assert proc.returncode == 0, proc.stderr

    elapsed = time.monotonic() - started
    assert elapsed < SMOKE_BUDGET_SECONDS, f"smoke run took {elapsed:.0f}s"

    control_out = json.loads(report_path.read_text())["mcc"]["control_out"]
    if control_out < CONTROL_BAR:
        warnings.warn(
            f"pretrained checkpoint scored control MCC {control_out:.3f} "
            f"< {CONTROL_BAR} on control_lexical_content; investigate the "
            f"checkpoint before trusting ambiguous-task results",
            UserWarning)
