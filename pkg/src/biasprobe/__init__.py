"""Deterministic benchmark generator and evaluation harness for probing
whether a classifier generalizes from linguistic structure or from surface
patterns when training data is ambiguous between the two."""

from .assembly import (
    AssemblyError,
    DatasetBundle,
    INOCULATION_RATES,
    InsufficientVariety,
    SentenceRecord,
    TaskSpec,
    ValidationReport,
    assemble_task,
    build_paradigm,
    mix_inoculation,
    read_bundle,
    validate_bundle,
    write_bundle,
)
from .features import (
    LINGUISTIC_FEATURES,
    SURFACE_FEATURES,
    apply_orthography,
    check_surface,
    choose_length_threshold,
    task_features,
    tokenize,
)
from .learners import (
    LEARNER_IDS,
    LearnerError,
    LinearModel,
    OracleModel,
    TrainConfig,
    oracle_predict,
    train_bow_logistic,
    train_dual_feature,
    train_learner,
)
from .lexicon import Lexicon, LexiconError, load_lexicon
from .metrics import (
    ConfusionMatrix,
    DEFAULT_CONTROL_THRESHOLD,
    EvalReport,
    MetricsError,
    Prediction,
    ReportTable,
    aggregate,
    build_report,
    control_filter,
    lbs,
    mcc,
    read_predictions,
    write_predictions,
)
from .templates import TemplateError, TemplateSet, load_templates, parse_templates

__version__ = "0.1.0"

__all__ = [
    "AssemblyError",
    "ConfusionMatrix",
    "DEFAULT_CONTROL_THRESHOLD",
    "DatasetBundle",
    "EvalReport",
    "INOCULATION_RATES",
    "InsufficientVariety",
    "LEARNER_IDS",
    "LINGUISTIC_FEATURES",
    "LearnerError",
    "Lexicon",
    "LexiconError",
    "LinearModel",
    "MetricsError",
    "OracleModel",
    "Prediction",
    "ReportTable",
    "SURFACE_FEATURES",
    "SentenceRecord",
    "TaskSpec",
    "TemplateError",
    "TemplateSet",
    "TrainConfig",
    "ValidationReport",
    "aggregate",
    "apply_orthography",
    "assemble_task",
    "build_paradigm",
    "build_report",
    "check_surface",
    "choose_length_threshold",
    "control_filter",
    "lbs",
    "load_lexicon",
    "load_templates",
    "mcc",
    "mix_inoculation",
    "oracle_predict",
    "parse_templates",
    "read_bundle",
    "read_predictions",
    "task_features",
    "tokenize",
    "train_bow_logistic",
    "train_dual_feature",
    "train_learner",
    "validate_bundle",
    "write_bundle",
    "write_predictions",
]
