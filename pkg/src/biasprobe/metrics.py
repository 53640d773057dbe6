"""Scoring and reporting.

Everything downstream of prediction lives here: Matthews correlation,
the bias score computed on the disambiguating test split, the control
filter that discards results from learners that never acquired a
feature, and the aggregation that turns a pile of per-cell reports into
the 4x5 task matrix plus per-rate score distributions.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace

from .features import LINGUISTIC_FEATURES, SURFACE_FEATURES, task_features

DEFAULT_CONTROL_THRESHOLD = 0.7

# Conditions scored on ambiguous tasks, in report order.  "test" holds the
# bias score; "training" is the fit on the (possibly inoculated) training
# split; "control_linguistic"/"control_surface" are copied in from the same
# learner's runs on the two relevant control tasks.
AMBIGUOUS_REPORT_KEYS = (
    "training",
    "test",
    "auxiliary",
    "control_linguistic",
    "control_surface",
)
CONTROL_REPORT_KEYS = ("training", "control_in", "control_out")

# Condition name in the data files -> key used inside a report.
_CONDITION_TO_KEY = {
    "training": "training",
    "test": "test",
    "auxiliary": "auxiliary",
    "control_train": "training",
    "control_eval_in": "control_in",
    "control_eval_out": "control_out",
}

PREDICTION_FIELDS = ("uid", "predicted_label", "score")

REPORT_FORMAT = "eval-report/1"


class MetricsError(ValueError):
    """Raised for malformed predictions or uid mismatches."""


def _format_uids(uids):
    shown = sorted(uids)
    if len(shown) > 8:
        return ", ".join(shown[:8]) + f", ... ({len(shown)} total)"
    return ", ".join(shown)


@dataclass(frozen=True)
class ConfusionMatrix:
    """Binary confusion counts; label 1 is "positive"."""

    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        for name in ("tp", "fp", "fn", "tn"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise MetricsError(f"{name} must be a non-negative int, got {value!r}")

    @property
    def total(self):
        return self.tp + self.fp + self.fn + self.tn

    @classmethod
    def from_pairs(cls, pairs):
        """Build from (gold, predicted) label pairs, each label in {0, 1}."""
        tp = fp = fn = tn = 0
        for gold, pred in pairs:
            if gold not in (0, 1) or pred not in (0, 1):
                raise MetricsError(f"labels must be 0 or 1, got ({gold!r}, {pred!r})")
            if gold == 1:
                if pred == 1:
                    tp += 1
                else:
                    fn += 1
            else:
                if pred == 1:
                    fp += 1
                else:
                    tn += 1
        return cls(tp=tp, fp=fp, fn=fn, tn=tn)


def mcc(cm):
    """Matthews correlation coefficient; 0.0 when any marginal is empty."""
    factors = (
        cm.tp + cm.fp,
        cm.tp + cm.fn,
        cm.tn + cm.fp,
        cm.tn + cm.fn,
    )
    if 0 in factors:
        return 0.0
    numerator = cm.tp * cm.tn - cm.fp * cm.fn
    return numerator / math.sqrt(math.prod(factors))


def accuracy(cm):
    if cm.total == 0:
        return 0.0
    return (cm.tp + cm.tn) / cm.total


@dataclass(frozen=True)
class Prediction:
    """One scored example; the exchange unit between learners and scoring."""

    uid: str
    predicted_label: int
    score: float | None = None

    def __post_init__(self):
        if not isinstance(self.uid, str) or not self.uid:
            raise MetricsError(f"uid must be a non-empty string, got {self.uid!r}")
        label = self.predicted_label
        if isinstance(label, bool) or label not in (0, 1):
            raise MetricsError(f"predicted_label must be 0 or 1, got {label!r}")
        if self.score is not None:
            if not isinstance(self.score, (int, float)) or isinstance(self.score, bool):
                raise MetricsError(f"score must be numeric, got {self.score!r}")
            if not 0.0 <= float(self.score) <= 1.0:
                raise MetricsError(f"score must lie in [0, 1], got {self.score!r}")

    def to_dict(self):
        out = {"uid": self.uid, "predicted_label": self.predicted_label}
        if self.score is not None:
            out["score"] = float(self.score)
        return out

    @classmethod
    def from_dict(cls, payload):
        unknown = set(payload) - set(PREDICTION_FIELDS)
        if unknown:
            raise MetricsError(f"unknown prediction fields: {sorted(unknown)}")
        if "uid" not in payload or "predicted_label" not in payload:
            raise MetricsError("prediction needs at least uid and predicted_label")
        return cls(
            uid=payload["uid"],
            predicted_label=payload["predicted_label"],
            score=payload.get("score"),
        )


def write_predictions(predictions, path):
    with open(path, "w", encoding="utf-8") as handle:
        for pred in predictions:
            handle.write(json.dumps(pred.to_dict(), ensure_ascii=False) + "\n")


def read_predictions(path):
    """Parse a predictions file; schema errors carry path:line context."""
    out = []
    seen = set()
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                payload = json.loads(line)
                if not isinstance(payload, dict):
                    raise MetricsError("each line must hold a JSON object")
                pred = Prediction.from_dict(payload)
            except (json.JSONDecodeError, MetricsError) as exc:
                raise MetricsError(f"{path}:{lineno}: {exc}") from exc
            if pred.uid in seen:
                raise MetricsError(f"{path}:{lineno}: duplicate uid {pred.uid}")
            seen.add(pred.uid)
            out.append(pred)
    return out


def prediction_map(predictions):
    out = {}
    for pred in predictions:
        if pred.uid in out:
            raise MetricsError(f"duplicate prediction uid {pred.uid}")
        out[pred.uid] = pred
    return out


def confusion_for_condition(records, predictions, condition):
    """Confusion matrix over the records of one condition.

    Every selected record must have exactly one prediction; predictions for
    other conditions are ignored so one file can cover a whole bundle.
    """
    preds = predictions if isinstance(predictions, dict) else prediction_map(predictions)
    selected = [r for r in records if r.condition == condition]
    missing = [r.uid for r in selected if r.uid not in preds]
    if missing:
        raise MetricsError(
            f"missing predictions for condition {condition}: {_format_uids(missing)}"
        )
    pairs = [(r.label, preds[r.uid].predicted_label) for r in selected]
    return ConfusionMatrix.from_pairs(pairs)


def lbs(records, predictions):
    """Bias score: MCC over the test condition only.

    +1 means the learner tracked the linguistic label out of domain, -1 the
    surface label (on test the two disagree by construction).  Predictions
    for uids outside the supplied records are rejected; predictions for
    non-test records are accepted and ignored.
    """
    preds = predictions if isinstance(predictions, dict) else prediction_map(predictions)
    known = {r.uid for r in records}
    extra = set(preds) - known
    if extra:
        raise MetricsError(f"predictions for unknown uids: {_format_uids(extra)}")
    return mcc(confusion_for_condition(records, preds, "test"))


@dataclass(frozen=True)
class EvalReport:
    """Scores for one (task, learner, rate) cell.

    ``mcc`` is keyed by report condition (see AMBIGUOUS_REPORT_KEYS /
    CONTROL_REPORT_KEYS); ``control_pass`` is None when the relevant
    control scores were unavailable.
    """

    task_id: str
    learner_id: str
    inoculation_rate: float
    mcc: dict
    n_scored: dict
    control_pass: bool | None
    threshold: float = DEFAULT_CONTROL_THRESHOLD
    notes: tuple = ()

    @property
    def lbs(self):
        return self.mcc.get("test")

    @property
    def is_control_task(self):
        return self.task_id.startswith("control_")

    def to_dict(self):
        return {
            "format": REPORT_FORMAT,
            "task_id": self.task_id,
            "learner_id": self.learner_id,
            "inoculation_rate": self.inoculation_rate,
            "mcc": dict(self.mcc),
            "n_scored": dict(self.n_scored),
            "control_pass": self.control_pass,
            "threshold": self.threshold,
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, payload):
        if payload.get("format") != REPORT_FORMAT:
            raise MetricsError(f"unsupported report format: {payload.get('format')!r}")
        return cls(
            task_id=payload["task_id"],
            learner_id=payload["learner_id"],
            inoculation_rate=payload["inoculation_rate"],
            mcc=dict(payload["mcc"]),
            n_scored=dict(payload["n_scored"]),
            control_pass=payload["control_pass"],
            threshold=payload.get("threshold", DEFAULT_CONTROL_THRESHOLD),
            notes=tuple(payload.get("notes", ())),
        )


def write_report(report, path):
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(report.to_dict(), handle, indent=2, sort_keys=True)
        handle.write("\n")


def read_report(path):
    with open(path, "r", encoding="utf-8") as handle:
        return EvalReport.from_dict(json.load(handle))


def control_filter(report, threshold=DEFAULT_CONTROL_THRESHOLD):
    """True iff every relevant control MCC clears the threshold (>= passes).

    Ambiguous tasks need both feature controls; control tasks are judged on
    their out-of-domain evaluation.  Missing control scores fail the filter.
    """
    if report.is_control_task:
        keys = ("control_out",)
    else:
        keys = ("control_linguistic", "control_surface")
    values = [report.mcc.get(key) for key in keys]
    if any(v is None for v in values):
        return False
    return all(v >= threshold for v in values)


def build_report(task_id, learner_id, inoculation_rate, records, predictions,
                 threshold=DEFAULT_CONTROL_THRESHOLD, control_mcc=None, notes=()):
    """Score predictions against a bundle's records and assemble the report.

    Conditions with no predictions at all are skipped (a file may cover a
    single condition); partially covered conditions are an error.  For
    ambiguous tasks ``control_mcc`` supplies {"control_linguistic": ...,
    "control_surface": ...} from the learner's control-task runs; without it
    control_pass is None rather than a verdict.
    """
    preds = prediction_map(predictions) if not isinstance(predictions, dict) else predictions
    records = list(records)
    known = {r.uid for r in records}
    extra = set(preds) - known
    if extra:
        raise MetricsError(f"predictions for unknown uids: {_format_uids(extra)}")

    scores = {}
    counts = {}
    for condition in _CONDITION_TO_KEY:
        selected = [r for r in records if r.condition == condition]
        if not selected:
            continue
        if not any(r.uid in preds for r in selected):
            continue
        cm = confusion_for_condition(selected, preds, condition)
        key = _CONDITION_TO_KEY[condition]
        scores[key] = mcc(cm)
        counts[key] = cm.total

    note_list = list(notes)
    if control_mcc:
        for key in ("control_linguistic", "control_surface"):
            if key in control_mcc and control_mcc[key] is not None:
                scores[key] = control_mcc[key]

    report = EvalReport(
        task_id=task_id,
        learner_id=learner_id,
        inoculation_rate=inoculation_rate,
        mcc=scores,
        n_scored=counts,
        control_pass=None,
        threshold=threshold,
        notes=tuple(note_list),
    )
    is_control = report.is_control_task
    have_controls = (
        "control_out" in scores if is_control
        else all(k in scores for k in ("control_linguistic", "control_surface"))
    )
    if have_controls:
        report = replace(report, control_pass=control_filter(report, threshold))
    else:
        report = replace(report, notes=report.notes + ("control scores unavailable",))
    return report


@dataclass(frozen=True)
class TableCell:
    """One ambiguous cell of the aggregate matrix."""

    task_id: str
    learner_id: str
    inoculation_rate: float
    lbs: float | None
    control_pass: bool | None

    @property
    def excluded(self):
        return self.control_pass is False


@dataclass(frozen=True)
class ReportTable:
    """Aggregate view over many reports.

    ``cells`` maps (learner_id, rate, linguistic, surface) to a TableCell;
    ``distributions`` maps (learner_id, rate) to the tuple of bias scores
    from non-excluded cells; ``controls`` maps (learner_id, task_id) to the
    control report.
    """

    cells: dict = field(default_factory=dict)
    distributions: dict = field(default_factory=dict)
    controls: dict = field(default_factory=dict)

    @property
    def learners(self):
        return tuple(sorted({key[0] for key in self.cells} |
                            {key[0] for key in self.controls}))

    @property
    def rates(self):
        return tuple(sorted({key[1] for key in self.cells}))


def aggregate(reports):
    """Fold reports into the matrix + per-rate score distributions."""
    cells = {}
    controls = {}
    for report in reports:
        if report.is_control_task:
            controls[(report.learner_id, report.task_id)] = report
            continue
        linguistic, surface = task_features(report.task_id)
        key = (report.learner_id, report.inoculation_rate, linguistic, surface)
        cells[key] = TableCell(
            task_id=report.task_id,
            learner_id=report.learner_id,
            inoculation_rate=report.inoculation_rate,
            lbs=report.lbs,
            control_pass=report.control_pass,
        )
    distributions = {}
    for (learner, rate, _, _), cell in sorted(cells.items()):
        if cell.excluded or cell.lbs is None:
            continue
        distributions.setdefault((learner, rate), []).append(cell.lbs)
    distributions = {k: tuple(v) for k, v in distributions.items()}
    return ReportTable(cells=cells, distributions=distributions, controls=controls)


SUMMARY_COLUMNS = (
    "task_id",
    "kind",
    "linguistic_feature",
    "surface_feature",
    "learner_id",
    "inoculation_rate",
    "mcc_training",
    "mcc_test",
    "mcc_auxiliary",
    "control_linguistic",
    "control_surface",
    "mcc_control_in",
    "mcc_control_out",
    "control_pass",
    "excluded",
)


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def summary_rows(reports):
    rows = []
    for report in sorted(reports, key=lambda r: (r.learner_id, r.task_id,
                                                 r.inoculation_rate)):
        linguistic, surface = task_features(report.task_id)
        excluded = report.control_pass is False
        rows.append({
            "task_id": report.task_id,
            "kind": "control" if report.is_control_task else "ambiguous",
            "linguistic_feature": _fmt(linguistic),
            "surface_feature": _fmt(surface),
            "learner_id": report.learner_id,
            "inoculation_rate": _fmt(report.inoculation_rate),
            "mcc_training": _fmt(report.mcc.get("training")),
            "mcc_test": _fmt(report.mcc.get("test")),
            "mcc_auxiliary": _fmt(report.mcc.get("auxiliary")),
            "control_linguistic": _fmt(report.mcc.get("control_linguistic")),
            "control_surface": _fmt(report.mcc.get("control_surface")),
            "mcc_control_in": _fmt(report.mcc.get("control_in")),
            "mcc_control_out": _fmt(report.mcc.get("control_out")),
            "control_pass": _fmt(report.control_pass),
            "excluded": _fmt(excluded),
        })
    return rows


def write_summary_csv(reports, path):
    rows = summary_rows(reports)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=SUMMARY_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)


def render_matrix_text(table, learner_id, rate):
    """Plain-text 4x5 bias-score matrix; excluded cells shown as [x]."""
    col_width = 18
    lines = [f"learner={learner_id} rate={rate:g}  (rows: linguistic, cols: surface)"]
    header = " " * 24 + "".join(f"{s:<{col_width}}" for s in SURFACE_FEATURES)
    lines.append(header)
    for linguistic in LINGUISTIC_FEATURES:
        row = [f"{linguistic:<24}"]
        for surface in SURFACE_FEATURES:
            cell = table.cells.get((learner_id, rate, linguistic, surface))
            if cell is None or cell.lbs is None:
                row.append(f"{'-':<{col_width}}")
            elif cell.excluded:
                row.append(f"{f'[x] {cell.lbs:+.3f}':<{col_width}}")
            else:
                row.append(f"{f'{cell.lbs:+.3f}':<{col_width}}")
        lines.append("".join(row))
    return "\n".join(lines)


def render_rate_summary(table, learner_id):
    """Per-rate mean/min/max of included bias scores for one learner."""
    lines = [f"learner={learner_id}  bias score by inoculation rate"]
    for rate in table.rates:
        values = table.distributions.get((learner_id, rate), ())
        if not values:
            lines.append(f"  rate={rate:<8g} no included cells")
            continue
        mean = sum(values) / len(values)
        lines.append(
            f"  rate={rate:<8g} n={len(values):<3d} "
            f"mean={mean:+.3f} min={min(values):+.3f} max={max(values):+.3f}"
        )
    return "\n".join(lines)
