"""Bridge from generated task bundles to pretrained-LM fine-tuning."""

from .config import (
    ALLOWED_LEARNING_RATES,
    DEFAULT_BATCH_SIZE,
    DEFAULT_EPOCHS,
    AdapterConfig,
    AdapterError,
)
from .runner import (
    COMBINED_PREDICTIONS,
    SIDECAR_FILE,
    Row,
    export_for_external,
    finetune_and_predict,
    load_bundle_rows,
    read_condition_rows,
    read_exported,
    read_task_manifest,
    training_condition,
)

__all__ = [
    "ALLOWED_LEARNING_RATES",
    "DEFAULT_BATCH_SIZE",
    "DEFAULT_EPOCHS",
    "AdapterConfig",
    "AdapterError",
    "COMBINED_PREDICTIONS",
    "SIDECAR_FILE",
    "Row",
    "export_for_external",
    "finetune_and_predict",
    "load_bundle_rows",
    "read_condition_rows",
    "read_exported",
    "read_task_manifest",
    "training_condition",
]
