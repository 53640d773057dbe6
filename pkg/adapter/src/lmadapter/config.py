"""Run configuration for the fine-tuning bridge."""

from dataclasses import dataclass, field

# The published fine-tuning recipe this bridge mirrors: one of three small
# learning rates, five epochs, batch 16, no early stopping.
ALLOWED_LEARNING_RATES = (1e-5, 2e-5, 3e-5)
DEFAULT_EPOCHS = 5
DEFAULT_BATCH_SIZE = 16


class AdapterError(ValueError):
    """Configuration or runtime problem, with a remediation hint attached."""


@dataclass(frozen=True)
class AdapterConfig:
    task_dir: str
    model: str
    out_dir: str
    learning_rate: float = 2e-5
    epochs: int = DEFAULT_EPOCHS
    batch_size: int = DEFAULT_BATCH_SIZE
    seed: int = 0
    max_length: int = 64
    deterministic: bool = True
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.learning_rate not in ALLOWED_LEARNING_RATES:
            raise AdapterError(
                f"learning rate {self.learning_rate:g} is not one of "
                f"{[f'{r:g}' for r in ALLOWED_LEARNING_RATES]}; pick one of "
                f"the grid values (e.g. --lr 2e-5)")
        if self.epochs <= 0:
            raise AdapterError(f"epochs must be positive, got {self.epochs}")
        if self.batch_size <= 0:
            raise AdapterError(
                f"batch size must be positive, got {self.batch_size}")
        if self.max_length <= 2:
            raise AdapterError(
                f"max_length must leave room for text tokens, "
                f"got {self.max_length}")

    def to_dict(self):
        return {
            "task_dir": self.task_dir,
            "model": self.model,
            "out_dir": self.out_dir,
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "seed": self.seed,
            "max_length": self.max_length,
            "deterministic": self.deterministic,
        }
