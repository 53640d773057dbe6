"""Fixtures: tiny fabricated checkpoint + small bundles from the primary CLI.

The adapter is exercised against real task bundles produced by the primary
command line (its public interface) and a from-scratch BERT-style checkpoint
small enough to fine-tune in seconds on one CPU. Nothing here touches the
network.
"""

import json
import os
import re
import subprocess
import sys

import pytest

os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")
os.environ.setdefault("HF_HUB_DISABLE_PROGRESS_BARS", "1")
os.environ.setdefault("TOKENIZERS_PARALLELISM", "false")

CONTROL_TASK = "control_absolute_position"
AMBIGUOUS_TASK = "morphology_x_lexical_content"


def run_primary(args):
    proc = subprocess.run(
        [sys.executable, "-m", "biasprobe.cli", *args],
        capture_output=True, text=True, timeout=600)
    if proc.returncode != 0:
        raise RuntimeError(f"primary CLI failed: {proc.stderr}")
    return proc.stdout


@pytest.fixture(scope="session")
def bundles(tmp_path_factory):
    root = tmp_path_factory.mktemp("adapter_bundles")
    plain = root / "plain"
    mixed = root / "mixed"
    run_primary(["generate", "--out", str(plain),
                 "--tasks", f"{CONTROL_TASK},{AMBIGUOUS_TASK}",
                 "--control-size", "120", "--ambiguous-size", "200",
                 "--seed", "11", "--jobs", "1"])
    run_primary(["generate", "--out", str(mixed),
                 "--tasks", AMBIGUOUS_TASK,
                 "--ambiguous-size", "200", "--rate", "0.1",
                 "--seed", "11", "--jobs", "1"])
    return {
        "control": plain / CONTROL_TASK,
        "ambiguous": plain / AMBIGUOUS_TASK,
        "inoculated": mixed / AMBIGUOUS_TASK,
    }


def _bundle_words(task_dir):
    words = set()
    manifest = json.loads((task_dir / "manifest.json").read_text())
    for name in manifest["condition_files"].values():
        for line in (task_dir / name).read_text(encoding="utf-8").splitlines():
            text = json.loads(line)["text"]
            words.update(re.findall(r"\w+|[^\w\s]", text.lower()))
    return words


@pytest.fixture(scope="session")
def tiny_checkpoint(bundles, tmp_path_factory):
    import torch
    from tokenizers import Tokenizer, models, normalizers, pre_tokenizers
    from tokenizers import processors
    from transformers import (BertConfig, BertForSequenceClassification,
                              BertTokenizerFast)

    words = sorted(_bundle_words(bundles["control"])
                   | _bundle_words(bundles["ambiguous"]))
    vocab = {tok: i for i, tok in enumerate(
        ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"] + words)}
    backend = Tokenizer(models.WordPiece(vocab=vocab, unk_token="[UNK]"))
    backend.normalizer = normalizers.BertNormalizer(lowercase=True)
    backend.pre_tokenizer = pre_tokenizers.BertPreTokenizer()
    backend.post_processor = processors.BertProcessing(
        sep=("[SEP]", vocab["[SEP]"]), cls=("[CLS]", vocab["[CLS]"]))
    tokenizer = BertTokenizerFast(
        tokenizer_object=backend, unk_token="[UNK]", pad_token="[PAD]",
        cls_token="[CLS]", sep_token="[SEP]", mask_token="[MASK]")

    config = BertConfig(
        vocab_size=len(vocab), hidden_size=32, num_hidden_layers=2,
        num_attention_heads=2, intermediate_size=64,
        max_position_embeddings=64)
    torch.manual_seed(0)
    model = BertForSequenceClassification(config)

    path = tmp_path_factory.mktemp("tiny_checkpoint")
    model.save_pretrained(path)
    tokenizer.save_pretrained(path)
    return path
