"""Feature definitions and checkers.

Surface feature checkers are pure functions of the sentence string. They are
the second, independent route to the label: the generator stamps l_s from its
realization plan, and validation re-derives the same bit from nothing but the
text. Linguistic feature values are never derivable from the string alone
(that is the point of the benchmark), so their gold values come exclusively
from generation metadata.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass

LINGUISTIC_FEATURES = (
    "morphology",
    "syntactic_category",
    "syntactic_construction",
    "syntactic_position",
)
SURFACE_FEATURES = (
    "absolute_position",
    "length",
    "lexical_content",
    "relative_position",
    "orthography",
)
# control-only, opt-in; never paired with a surface feature
OPTIONAL_LINGUISTIC_FEATURES = ("lexical_semantics",)

ALL_FEATURES = LINGUISTIC_FEATURES + SURFACE_FEATURES + OPTIONAL_LINGUISTIC_FEATURES

# words that stay lowercase in title case unless sentence-initial
_SMALL_WORDS = frozenset({"a", "an", "the"})

MIN_PILOT_SAMPLE = 100
LENGTH_MARGIN = 2


class FeatureError(Exception):
    pass


@dataclass(frozen=True)
class FeatureDef:
    feature_id: str
    kind: str  # "linguistic" | "surface"
    length_threshold: float | None = None


def get_feature(feature_id, length_threshold=None):
    if feature_id in SURFACE_FEATURES:
        if feature_id == "length" and length_threshold is None:
            raise FeatureError("length feature needs a threshold")
        return FeatureDef(feature_id, "surface", length_threshold)
    if feature_id in LINGUISTIC_FEATURES + OPTIONAL_LINGUISTIC_FEATURES:
        return FeatureDef(feature_id, "linguistic")
    raise FeatureError(f"unknown feature {feature_id!r}")


def tokenize(text):
    """Whitespace tokens with the final punctuation mark detached."""
    text = text.strip()
    if text.endswith((".", "!", "?")):
        text = text[:-1]
    return text.split()


def _token_is_capitalized(token):
    return token[:1].isupper()


def check_surface(feature_id, text, threshold=None):
    """Read a surface feature's value straight off the sentence string."""
    tokens = tokenize(text)
    if not tokens:
        raise FeatureError("cannot check an empty sentence")
    if feature_id == "absolute_position":
        return 1 if tokens[0].lower() == "the" else 0
    if feature_id == "length":
        if threshold is None:
            raise FeatureError("length check needs a threshold")
        return 1 if len(tokens) >= threshold else 0
    if feature_id == "lexical_content":
        return 1 if any(t.lower() == "the" for t in tokens) else 0
    if feature_id == "relative_position":
        lowered = [t.lower() for t in tokens]
        the_at = lowered.index("the") if "the" in lowered else None
        a_at = lowered.index("a") if "a" in lowered else None
        if the_at is None:
            return 0
        if a_at is None:
            return 1
        return 1 if the_at < a_at else 0
    if feature_id == "orthography":
        for i, tok in enumerate(tokens):
            if i > 0 and tok.lower() in _SMALL_WORDS:
                if tok != tok.lower():
                    return 0
            elif not _token_is_capitalized(tok):
                return 0
        return 1
    raise FeatureError(f"{feature_id!r} is not a surface feature")


def task_features(task_id):
    """(linguistic_feature, surface_feature) encoded in a task id.

    Ambiguous tasks are named <linguistic>_x_<surface>; control tasks
    control_<feature> with exactly one axis set.
    """
    if task_id.startswith("control_"):
        feat = task_id[len("control_"):]
        if feat in SURFACE_FEATURES:
            return (None, feat)
        if feat in LINGUISTIC_FEATURES + OPTIONAL_LINGUISTIC_FEATURES:
            return (feat, None)
        raise FeatureError(f"unknown control task {task_id!r}")
    if "_x_" in task_id:
        ling, surf = task_id.split("_x_", 1)
        if ling in LINGUISTIC_FEATURES and surf in SURFACE_FEATURES:
            return (ling, surf)
    raise FeatureError(f"cannot parse task id {task_id!r}")


def gold_linguistic(feature_id, record):
    """Metadata passthrough for a linguistic feature's gold value."""
    if feature_id not in LINGUISTIC_FEATURES + OPTIONAL_LINGUISTIC_FEATURES:
        raise FeatureError(f"{feature_id!r} is not a linguistic feature")
    task_id = record["task_id"] if isinstance(record, dict) else record.task_id
    ling, _ = task_features(task_id)
    if ling != feature_id:
        raise FeatureError(
            f"record from {task_id!r} does not carry {feature_id!r}")
    value = record["l_l"] if isinstance(record, dict) else record.l_l
    if value not in (0, 1):
        raise FeatureError(f"record from {task_id!r} has no gold l_l")
    return value


def apply_orthography(text, value):
    """Baseline (value 0) or title case (value 1). Idempotent."""
    if value == 0:
        return text
    had_period = text.endswith(".")
    tokens = tokenize(text)
    out = []
    for i, tok in enumerate(tokens):
        if i > 0 and tok.lower() in _SMALL_WORDS:
            out.append(tok.lower())
        else:
            out.append(tok[:1].upper() + tok[1:])
    return " ".join(out) + ("." if had_period else "")


def choose_length_threshold(sample_texts):
    """Median token count of a pilot sample of baseline sentences."""
    if len(sample_texts) < MIN_PILOT_SAMPLE:
        raise FeatureError(
            f"pilot sample too small: {len(sample_texts)} < {MIN_PILOT_SAMPLE}")
    return statistics.median(len(tokenize(t)) for t in sample_texts)


__all__ = [
    "LINGUISTIC_FEATURES", "SURFACE_FEATURES", "OPTIONAL_LINGUISTIC_FEATURES",
    "ALL_FEATURES", "MIN_PILOT_SAMPLE", "LENGTH_MARGIN",
    "FeatureDef", "FeatureError", "get_feature", "tokenize",
    "check_surface", "task_features", "gold_linguistic",
    "apply_orthography", "choose_length_threshold",
]
