"""Fine-tune a pretrained sequence classifier on a task bundle.

This bridge consumes a generated task directory purely through its public
file formats: ``manifest.json`` plus one JSONL file per condition. Records
are projected down to (uid, text, label) before anything touches the model,
so stamped feature metadata can never leak into training or prediction.
Output is one predictions file per condition in the exchange schema
({uid, predicted_label, score}) plus a sidecar manifest describing the run.
"""

import csv
import json
import os
import random
from collections import namedtuple

from .config import AdapterConfig, AdapterError

MANIFEST_FILE = "manifest.json"
SIDECAR_FILE = "adapter_manifest.json"
COMBINED_PREDICTIONS = "predictions.jsonl"
WITHHELD_CONDITIONS = ("inoculating",)

Row = namedtuple("Row", ["uid", "text", "label"])


def _remediate(message, hint):
    return AdapterError(f"{message} ({hint})")


def read_task_manifest(task_dir):
    path = os.path.join(task_dir, MANIFEST_FILE)
    if not os.path.isfile(path):
        raise _remediate(
            f"no task manifest at {path}",
            "generate the bundle first: biasprobe generate --tasks <task>")
    with open(path, encoding="utf-8") as handle:
        manifest = json.load(handle)
    for key in ("task_id", "condition_files"):
        if key not in manifest:
            raise _remediate(f"{path}: missing key {key!r}",
                             "the directory does not look like a task bundle")
    return manifest


def _project(payload, path, lineno):
    """Keep uid/text/label only; the adapter never sees feature stamps."""
    try:
        uid, text, label = payload["uid"], payload["text"], payload["label"]
    except KeyError as exc:
        raise AdapterError(f"{path}:{lineno}: record lacks {exc}") from None
    if not isinstance(uid, str) or not uid:
        raise AdapterError(f"{path}:{lineno}: uid must be a non-empty string")
    if not isinstance(text, str) or not text:
        raise AdapterError(f"{path}:{lineno}: text must be a non-empty string")
    if label not in (0, 1) or isinstance(label, bool):
        raise AdapterError(f"{path}:{lineno}: label must be 0 or 1")
    return Row(uid=uid, text=text, label=label)


def read_condition_rows(task_dir, filename):
    path = os.path.join(task_dir, filename)
    rows = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as exc:
                raise AdapterError(f"{path}:{lineno}: {exc}") from None
            rows.append(_project(payload, path, lineno))
    if not rows:
        raise AdapterError(f"{path}: no records")
    return rows


def load_bundle_rows(task_dir):
    """All conditions except the withheld inoculation pool."""
    manifest = read_task_manifest(task_dir)
    rows = {}
    for condition, filename in manifest["condition_files"].items():
        if condition in WITHHELD_CONDITIONS:
            continue
        rows[condition] = read_condition_rows(task_dir, filename)
    return manifest, rows


def training_condition(rows):
    for condition in ("training", "control_train"):
        if condition in rows:
            return condition
    raise AdapterError(
        f"no training condition among {sorted(rows)} "
        f"(expected 'training' or 'control_train')")


# --- export ------------------------------------------------------------------

def export_for_external(task_dir, out_dir):
    """Flatten each condition's JSONL into a (uid, text, label) CSV."""
    manifest, rows = load_bundle_rows(task_dir)
    os.makedirs(out_dir, exist_ok=True)
    written = {}
    for condition, items in sorted(rows.items()):
        path = os.path.join(out_dir, f"{condition}.csv")
        with open(path, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(Row._fields)
            for row in items:
                writer.writerow([row.uid, row.text, row.label])
        written[condition] = path
    return written


def read_exported(path):
    """Round-trip reader for files written by export_for_external."""
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if tuple(header or ()) != Row._fields:
            raise AdapterError(f"{path}: expected header {Row._fields}")
        return [Row(uid=uid, text=text, label=int(label))
                for uid, text, label in reader]


# --- fine-tuning -------------------------------------------------------------

def _load_checkpoint(config):
    import torch
    from transformers import (AutoModelForSequenceClassification,
                              AutoTokenizer)
    try:
        tokenizer = AutoTokenizer.from_pretrained(config.model)
        model = AutoModelForSequenceClassification.from_pretrained(
            config.model, num_labels=2)
    except Exception as exc:
        raise _remediate(
            f"could not load checkpoint {config.model!r}: {exc}",
            "pass a local checkpoint directory or an id the runtime "
            "can resolve") from None
    model.to(torch.device("cpu"))
    return tokenizer, model


def _seed_everything(config):
    import torch
    random.seed(config.seed)
    torch.manual_seed(config.seed)
    if not config.deterministic:
        return False
    try:
        torch.use_deterministic_algorithms(True)
        return True
    except Exception:
        return False


def _encode(tokenizer, rows, max_length):
    import torch
    encoded = tokenizer([row.text for row in rows], padding=True,
                        truncation=True, max_length=max_length,
                        return_tensors="pt")
    labels = torch.tensor([row.label for row in rows], dtype=torch.long)
    return encoded, labels


def _train(model, tokenizer, rows, config):
    import torch
    optimizer = torch.optim.AdamW(model.parameters(),
                                  lr=config.learning_rate)
    shuffler = torch.Generator().manual_seed(config.seed)
    model.train()
    last_epoch_loss = 0.0
    for _ in range(config.epochs):
        order = torch.randperm(len(rows), generator=shuffler).tolist()
        losses = []
        for start in range(0, len(order), config.batch_size):
            batch = [rows[i] for i in order[start:start + config.batch_size]]
            encoded, labels = _encode(tokenizer, batch, config.max_length)
            output = model(**encoded, labels=labels)
            output.loss.backward()
            optimizer.step()
            optimizer.zero_grad()
            losses.append(float(output.loss.detach()))
        last_epoch_loss = sum(losses) / len(losses)
    return last_epoch_loss


def _predict(model, tokenizer, rows, config, eval_batch=64):
    import torch
    model.eval()
    out = []
    with torch.no_grad():
        for start in range(0, len(rows), eval_batch):
            batch = rows[start:start + eval_batch]
            encoded, _ = _encode(tokenizer, batch, config.max_length)
            logits = model(**encoded).logits
            probs = torch.softmax(logits, dim=-1)
            labels = torch.argmax(logits, dim=-1)
            for row, label, prob in zip(batch, labels, probs[:, 1]):
                out.append({"uid": row.uid,
                            "predicted_label": int(label),
                            "score": float(prob)})
    return out


def _write_predictions(predictions, path):
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as handle:
        for payload in predictions:
            handle.write(json.dumps(payload) + "\n")
    os.replace(tmp, path)


def finetune_and_predict(config: AdapterConfig):
    """Train a classifier head on the training split, predict everything else.

    Returns the sidecar manifest (also written to the output directory).
    """
    import torch
    import transformers

    manifest, rows = load_bundle_rows(config.task_dir)
    train_condition = training_condition(rows)
    deterministic_achieved = _seed_everything(config)
    tokenizer, model = _load_checkpoint(config)

    final_loss = _train(model, tokenizer, rows[train_condition], config)

    os.makedirs(config.out_dir, exist_ok=True)
    prediction_files = {}
    combined = []
    for condition, items in sorted(rows.items()):
        predictions = _predict(model, tokenizer, items, config)
        filename = f"predictions_{condition}.jsonl"
        _write_predictions(predictions, os.path.join(config.out_dir, filename))
        prediction_files[condition] = filename
        combined.extend(predictions)
    _write_predictions(combined,
                       os.path.join(config.out_dir, COMBINED_PREDICTIONS))

    sidecar = {
        "format": "adapter-run/1",
        "task_id": manifest["task_id"],
        "config": config.to_dict(),
        "train_condition": train_condition,
        "n_train": len(rows[train_condition]),
        "final_epoch_mean_loss": final_loss,
        "classification_head": type(model).__name__,
        "deterministic_requested": config.deterministic,
        "deterministic_achieved": deterministic_achieved,
        "device": "cpu",
        "library_versions": {
            "torch": torch.__version__,
            "transformers": transformers.__version__,
        },
        "prediction_files": prediction_files,
        "combined_predictions": COMBINED_PREDICTIONS,
    }
    sidecar_path = os.path.join(config.out_dir, SIDECAR_FILE)
    tmp = sidecar_path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as handle:
        json.dump(sidecar, handle, indent=2, sort_keys=True)
        handle.write("\n")
    os.replace(tmp, sidecar_path)
    return sidecar
