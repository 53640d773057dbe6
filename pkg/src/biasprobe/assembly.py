"""Paradigm construction, task assembly, inoculation mixing, validation, IO.

An ambiguous task pairs one linguistic feature with one surface feature. Its
unit of generation is an eight-cell paradigm: both feature values crossed
with both domains, all realized from one lexical binding per domain so that
cells differ only in the feature-carrying material. Cell shape determines the
condition:

    in-domain,  values agree    -> training
    in-domain,  values conflict -> inoculating
    out-domain, values conflict -> test
    out-domain, values agree    -> auxiliary

Control tasks use four-cell paradigms (feature value x domain) and feed three
conditions: control_train (in), control_eval_in (in, held-out paradigms), and
control_eval_out (out).

Serialized bundles are one JSONL file per condition plus a manifest. Records
carry exactly: uid, text, label, l_l, l_s, domain, condition, paradigm_id,
template_id, task_id.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, replace

from .features import (
    LENGTH_MARGIN,
    MIN_PILOT_SAMPLE,
    FeatureError,
    check_surface,
    choose_length_threshold,
    task_features,
    tokenize,
)
from .lexicon import load_lexicon
from .seeding import stable_hash, stream_rng
from .templates import (
    SurfacePlan,
    bind_template,
    body_tokens,
    build_pools,
    enumerate_templates,
    realize,
)

GENERATOR_VERSION = "1.0.0"
FORMAT_VERSION = 1

AMBIGUOUS_CONDITIONS = ("training", "inoculating", "test", "auxiliary")
CONTROL_CONDITIONS = ("control_train", "control_eval_in", "control_eval_out")
CONDITIONS = AMBIGUOUS_CONDITIONS + CONTROL_CONDITIONS

CONDITION_FILES = {
    "training": "train.jsonl",
    "inoculating": "inoc_pool.jsonl",
    "test": "test.jsonl",
    "auxiliary": "aux.jsonl",
    "control_train": "control_train.jsonl",
    "control_eval_in": "control_eval_in.jsonl",
    "control_eval_out": "control_eval_out.jsonl",
}
MANIFEST_FILE = "manifest.json"

# Only the grand totals (50k ambiguous, 30k control) are externally fixed;
# the per-condition shares below are generator defaults, recorded in every
# manifest so downstream consumers never have to guess them.
DEFAULT_AMBIGUOUS_SPLITS = {
    "training": 10_000,
    "inoculating": 20_000,
    "test": 10_000,
    "auxiliary": 10_000,
}
DEFAULT_CONTROL_SPLITS = {
    "control_train": 10_000,
    "control_eval_in": 10_000,
    "control_eval_out": 10_000,
}
INOCULATION_RATES = (0.0, 0.001, 0.003, 0.01)

RECORD_FIELDS = (
    "uid", "text", "label", "l_l", "l_s",
    "domain", "condition", "paradigm_id", "template_id", "task_id",
)

_AMBIG_CONDITION = {
    ("in", True): "training",
    ("in", False): "inoculating",
    ("out", False): "test",
    ("out", True): "auxiliary",
}


class AssemblyError(Exception):
    pass


class InsufficientVariety(AssemblyError):
    def __init__(self, task_id, condition, achieved, requested):
        self.task_id = task_id
        self.condition = condition
        self.achieved = achieved
        self.requested = requested
        super().__init__(
            f"{task_id}: ran out of distinct sentences for {condition!r} "
            f"(achieved {achieved} of {requested})")


def half_up(x):
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class SentenceRecord:
    uid: str
    text: str
    label: int
    l_l: int | None
    l_s: int | None
    domain: str
    condition: str
    paradigm_id: str
    template_id: str
    task_id: str

    def to_dict(self):
        return {name: getattr(self, name) for name in RECORD_FIELDS}

    def to_json_line(self):
        return json.dumps(self.to_dict(), ensure_ascii=False)

    @classmethod
    def from_dict(cls, data):
        missing = [name for name in RECORD_FIELDS if name not in data]
        if missing:
            raise AssemblyError(f"record missing fields: {missing}")
        extra = [name for name in data if name not in RECORD_FIELDS]
        if extra:
            raise AssemblyError(f"record has unknown fields: {extra}")
        return cls(**{name: data[name] for name in RECORD_FIELDS})


@dataclass(frozen=True)
class Paradigm:
    id: str
    design: str  # "ambiguous_2x2x2" | "control_2x2"
    cells: tuple[SentenceRecord, ...]


@dataclass(frozen=True)
class TaskSpec:
    task_id: str
    linguistic_feature: str | None
    surface_feature: str | None
    total_size: int
    split_sizes: dict
    inoculation_rate: float = 0.0
    seed: int = 0

    @property
    def is_control(self):
        return self.linguistic_feature is None or self.surface_feature is None

    @classmethod
    def make(cls, task_id, seed=0, total_size=None, split_sizes=None,
             inoculation_rate=0.0):
        ling, surf = task_features(task_id)
        control = ling is None or surf is None
        if split_sizes is None:
            split_sizes = _default_splits(control, total_size)
        split_sizes = dict(split_sizes)
        expected = CONTROL_CONDITIONS if control else AMBIGUOUS_CONDITIONS
        if set(split_sizes) != set(expected):
            raise AssemblyError(
                f"{task_id}: split_sizes keys must be {expected}")
        for cond, count in split_sizes.items():
            if count <= 0 or count % 2:
                raise AssemblyError(
                    f"{task_id}: {cond} size must be a positive even count "
                    f"(label balance), got {count}")
        total = sum(split_sizes.values())
        if total_size is not None and total_size != total:
            raise AssemblyError(
                f"{task_id}: total_size {total_size} != sum of splits {total}")
        return cls(task_id=task_id, linguistic_feature=ling,
                   surface_feature=surf, total_size=total,
                   split_sizes=split_sizes,
                   inoculation_rate=inoculation_rate, seed=seed)


def _default_splits(control, total_size):
    base = DEFAULT_CONTROL_SPLITS if control else DEFAULT_AMBIGUOUS_SPLITS
    if total_size is None:
        return dict(base)
    unit_total = sum(base.values())
    if total_size % unit_total == 0:
        factor = total_size // unit_total
        return {cond: count * factor for cond, count in base.items()}
    # small runs: keep the 1:2:1:1 (or 1:1:1) shape at reduced scale
    parts = {cond: count // 10_000 for cond, count in base.items()}
    n_parts = sum(parts.values())
    if total_size % (2 * n_parts):
        raise AssemblyError(
            f"total_size {total_size} not divisible into even "
            f"{n_parts}-part splits")
    unit = total_size // n_parts
    return {cond: unit * share for cond, share in parts.items()}


@dataclass
class DatasetBundle:
    task: TaskSpec
    records: dict
    manifest: dict

    def all_records(self):
        out = []
        for condition in self.records:
            out.extend(self.records[condition])
        return out


def _uid(task_id, paradigm_id, cell):
    return stable_hash(task_id, paradigm_id, cell)


class _TaskBuilder:
    """Per-task generation state: frames, pools, split, length threshold."""

    def __init__(self, task, lexicon, template_set):
        self.task = task
        self.lexicon = lexicon
        self.template_set = template_set
        feature = task.linguistic_feature or task.surface_feature
        self.frames = {
            "in": enumerate_templates(template_set, feature, "in"),
            "out": enumerate_templates(template_set, feature, "out"),
        }
        self.split = (lexicon.splits.get(task.linguistic_feature)
                      if task.linguistic_feature else None)
        self.surface = task.surface_feature
        self._pools = {}
        self._adjunct_by_size = {
            a.token_count(1): a for a in template_set.adjuncts}
        self.adjunct_sizes = sorted(self._adjunct_by_size)
        self.length_threshold = None
        if self.surface == "length":
            self.length_threshold = self._length_pilot()

    def pools(self, template, domain):
        key = (template.id, domain)
        if key not in self._pools:
            self._pools[key] = build_pools(
                template, domain, self.lexicon, self.split)
        return self._pools[key]

    def _bind(self, template, domain, rng):
        return bind_template(
            template, domain, self.lexicon, rng, split=self.split,
            surface_feature=self.surface, pools=self.pools(template, domain))

    def _adjunct_tokens(self, size, domain, rng):
        if size == 0:
            return ()
        template = self._adjunct_by_size[size]
        binding = bind_template(template, domain, self.lexicon, rng,
                                split=self.split)
        return tuple(body_tokens(template, 1, binding))

    def _length_pilot(self):
        """Threshold = median length of a uniform-adjunct pilot sample."""
        rng = stream_rng(self.task.seed, self.task.task_id, "length-pilot")
        sizes = [0] + self.adjunct_sizes
        texts = []
        for i in range(2 * MIN_PILOT_SAMPLE):
            domain = ("in", "out")[i % 2]
            template = rng.choice(self.frames[domain])
            binding = self._bind(template, domain, rng)
            tokens = self._adjunct_tokens(rng.choice(sizes), domain, rng)
            plan = SurfacePlan("length", 1, tokens)
            texts.append(realize(template, (i // 2) % 2, binding, surface=plan))
        return choose_length_threshold(texts)

    def _length_plans(self, template, domain, rng):
        threshold = self.length_threshold
        core = template.token_count(1)
        big = [s for s in self.adjunct_sizes
               if core + s >= threshold + LENGTH_MARGIN]
        small = [s for s in [0] + self.adjunct_sizes
                 if core + s <= threshold - LENGTH_MARGIN]
        if not big or not small:
            raise AssemblyError(
                f"{self.task.task_id}: no adjunct size puts {template.id} "
                f"({core} tokens) across threshold {threshold} with margin "
                f"{LENGTH_MARGIN}")
        long_tokens = self._adjunct_tokens(rng.choice(big), domain, rng)
        short_tokens = self._adjunct_tokens(rng.choice(small), domain, rng)
        return {1: SurfacePlan("length", 1, long_tokens),
                0: SurfacePlan("length", 0, short_tokens)}

    def _plans(self, template, domain, rng):
        if self.surface is None:
            return {1: None, 0: None}
        if self.surface == "length":
            return self._length_plans(template, domain, rng)
        return {1: SurfacePlan(self.surface, 1),
                0: SurfacePlan(self.surface, 0)}

    def ambiguous_cells(self, rng, paradigm_id, need_out=True, needed=None):
        """Records for one paradigm; `needed` restricts realized conditions."""
        task_id = self.task.task_id
        cells = []
        for domain in ("in", "out") if need_out else ("in",):
            template = rng.choice(self.frames[domain])
            binding = self._bind(template, domain, rng)
            plans = self._plans(template, domain, rng)
            for l_l in (1, 0):
                for l_s in (1, 0):
                    condition = _AMBIG_CONDITION[(domain, l_l == l_s)]
                    if needed is not None and condition not in needed:
                        continue
                    text = realize(template, l_l, binding, surface=plans[l_s])
                    cells.append(SentenceRecord(
                        uid=_uid(task_id, paradigm_id,
                                 f"{domain}:l{l_l}:s{l_s}"),
                        text=text, label=l_l, l_l=l_l, l_s=l_s, domain=domain,
                        condition=condition, paradigm_id=paradigm_id,
                        template_id=template.id, task_id=task_id))
        return cells

    def control_cells(self, rng, paradigm_id, need_out=True):
        """Four control records; in-cells default to control_train."""
        task_id = self.task.task_id
        linguistic = self.task.linguistic_feature is not None
        cells = []
        for domain in ("in", "out") if need_out else ("in",):
            template = rng.choice(self.frames[domain])
            binding = self._bind(template, domain, rng)
            plans = self._plans(template, domain, rng)
            condition = "control_train" if domain == "in" else "control_eval_out"
            for value in (1, 0):
                text = realize(template, value, binding, surface=plans[value])
                cells.append(SentenceRecord(
                    uid=_uid(task_id, paradigm_id, f"{domain}:v{value}"),
                    text=text, label=value,
                    l_l=value if linguistic else None,
                    l_s=None if linguistic else value,
                    domain=domain, condition=condition,
                    paradigm_id=paradigm_id, template_id=template.id,
                    task_id=task_id))
        return cells


def build_paradigm(task, rng, lexicon=None, templates=None, index=0):
    """One complete paradigm (8 ambiguous cells or 4 control cells)."""
    lexicon = lexicon if lexicon is not None else load_lexicon()
    templates = templates if templates is not None else _load_templates()
    builder = _TaskBuilder(task, lexicon, templates)
    paradigm_id = f"p{index:06d}"
    if task.is_control:
        cells = builder.control_cells(rng, paradigm_id)
        return Paradigm(id=paradigm_id, design="control_2x2",
                        cells=tuple(cells))
    cells = builder.ambiguous_cells(rng, paradigm_id)
    return Paradigm(id=paradigm_id, design="ambiguous_2x2x2",
                    cells=tuple(cells))


def _load_templates():
    from .templates import load_templates
    return load_templates()


def assemble_task(task, lexicon, templates):
    """Full DatasetBundle for one task at inoculation rate 0."""
    builder = _TaskBuilder(task, lexicon, templates)
    quotas = dict(task.split_sizes)
    records = {condition: [] for condition in task.split_sizes}
    seen_texts = set()
    budget = 3 * (sum(quotas.values()) // 2) + 1000
    index = 0
    while any(q > 0 for q in quotas.values()):
        if index >= budget:
            condition = max((c for c in quotas if quotas[c] > 0),
                            key=lambda c: quotas[c])
            raise InsufficientVariety(
                task.task_id, condition,
                achieved=task.split_sizes[condition] - quotas[condition],
                requested=task.split_sizes[condition])
        rng = stream_rng(task.seed, task.task_id, "paradigm", index)
        paradigm_id = f"p{index:06d}"
        index += 1
        if task.is_control:
            need_out = quotas["control_eval_out"] > 0
            cells = builder.control_cells(rng, paradigm_id, need_out=need_out)
            keep = []
            for cell in cells:
                if cell.domain == "in" and quotas["control_train"] <= 0:
                    cell = replace(cell, condition="control_eval_in")
                if quotas[cell.condition] > 0:
                    keep.append(cell)
        else:
            needed = {c for c in AMBIGUOUS_CONDITIONS if quotas[c] > 0}
            need_out = bool(needed & {"test", "auxiliary"})
            keep = builder.ambiguous_cells(
                rng, paradigm_id, need_out=need_out, needed=needed)
        texts = [cell.text for cell in keep]
        if len(set(texts)) != len(texts) or any(t in seen_texts for t in texts):
            # drop the whole paradigm so label balance stays exact
            continue
        seen_texts.update(texts)
        for cell in keep:
            records[cell.condition].append(cell)
            quotas[cell.condition] -= 1
    manifest = _manifest(task, builder, records)
    return DatasetBundle(task=task, records=records, manifest=manifest)


def _manifest(task, builder, records):
    return {
        "format_version": FORMAT_VERSION,
        "generator_version": GENERATOR_VERSION,
        "task_id": task.task_id,
        "linguistic_feature": task.linguistic_feature,
        "surface_feature": task.surface_feature,
        "seed": task.seed,
        "total_size": task.total_size,
        "split_sizes": dict(task.split_sizes),
        "split_note": ("per-condition sizes are generator defaults; only "
                       "the bundle totals are externally fixed"),
        "inoculation_rate": task.inoculation_rate,
        "inoculated_count": 0,
        "length_threshold": builder.length_threshold,
        "lexicon_sha256": builder.lexicon.source_sha256,
        "templates_sha256": builder.template_set.source_sha256,
        "condition_files": {c: CONDITION_FILES[c] for c in records},
        "counts": {c: len(records[c]) for c in records},
    }


def mix_inoculation(bundle, rate, rng=None):
    """Replace round(rate*|training|) training records with pool records.

    The records come from the inoculation pool (conflicting labels, labeled
    with l_l), are swapped in at the replaced records' positions, and are
    removed from the serialized pool so bundle-wide text uniqueness holds.
    """
    task = bundle.task
    n_train = len(bundle.records["training"])
    k = half_up(rate * n_train)
    if rng is None:
        rng = stream_rng(task.seed, task.task_id, "inoculation", repr(rate))
    manifest = dict(bundle.manifest)
    manifest["inoculation_rate"] = rate
    manifest["inoculated_count"] = k
    if k == 0:
        return DatasetBundle(task=replace(task, inoculation_rate=rate),
                             records=dict(bundle.records), manifest=manifest)
    pool = bundle.records["inoculating"]
    if k > len(pool):
        raise AssemblyError(
            f"{task.task_id}: inoculation pool exhausted "
            f"({k} needed, {len(pool)} available)")
    take = {1: (k + 1) // 2, 0: k // 2}
    train = list(bundle.records["training"])
    chosen_pool, used = [], set()
    for label in (1, 0):
        candidates = [r for r in pool if r.label == label]
        if take[label] > len(candidates):
            raise AssemblyError(
                f"{task.task_id}: pool exhausted for label {label}")
        picked = rng.sample(candidates, take[label])
        chosen_pool.extend(picked)
        used.update(r.uid for r in picked)
        positions = sorted(rng.sample(
            [i for i, r in enumerate(train) if r.label == label], take[label]))
        for position, record in zip(positions, picked):
            train[position] = record
    records = dict(bundle.records)
    records["training"] = train
    records["inoculating"] = [r for r in pool if r.uid not in used]
    manifest["counts"] = {c: len(records[c]) for c in records}
    return DatasetBundle(task=replace(task, inoculation_rate=rate),
                         records=records, manifest=manifest)


# --- validation -------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    uid: str
    code: str
    message: str


@dataclass
class ValidationReport:
    task_id: str
    n_records: int
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations


def _split_form_sets(lexicon, feature_id):
    """Lowercased surface forms of each side's split members."""
    split = lexicon.splits.get(feature_id)
    if split is None:
        return None
    sides = {"in": split.in_domain, "out": split.out_domain}
    forms = {"in": set(), "out": set()}
    for domain, keys in sides.items():
        for key in keys:
            entry = lexicon.get(*key)
            forms[domain].update(s.lower() for _, s in entry.forms)
    shared = forms["in"] & forms["out"]
    return {d: fs - shared for d, fs in forms.items()}


def _morphology_form_sets(lexicon):
    """Irregular-past and regular-present target forms per domain side."""
    split = lexicon.splits["morphology"]
    sets = {}
    for domain in ("in", "out"):
        keys = split.in_domain if domain == "in" else split.out_domain
        irregular, regular = set(), set()
        for key in keys:
            entry = lexicon.get(*key)
            if entry.verb_class == "irregular":
                irregular.add(entry.form("past_irregular").lower())
            elif entry.verb_class == "regular":
                regular.add(entry.form("plural_present").lower())
        sets[domain] = (irregular, regular)
    return sets


def validate_bundle(bundle, lexicon=None):
    """Structural audit; violations are data, not exceptions."""
    task = bundle.task
    report = ValidationReport(task_id=task.task_id,
                              n_records=sum(len(v)
                                            for v in bundle.records.values()))
    add = report.violations.append

    lexicon = lexicon if lexicon is not None else load_lexicon()
    surface = task.surface_feature
    threshold = bundle.manifest.get("length_threshold")
    form_sides = (_split_form_sets(lexicon, task.linguistic_feature)
                  if task.linguistic_feature else None)
    morph_sets = (_morphology_form_sets(lexicon)
                  if task.linguistic_feature == "morphology" else None)

    seen_uids, seen_texts = {}, {}
    expected_counts = dict(task.split_sizes)
    k = bundle.manifest.get("inoculated_count", 0)
    if "inoculating" in expected_counts:
        expected_counts["inoculating"] -= k

    for condition, rows in bundle.records.items():
        if condition not in CONDITIONS:
            add(Violation("", "condition", f"unknown condition {condition!r}"))
            continue
        if len(rows) != expected_counts.get(condition, len(rows)):
            add(Violation("", "count",
                          f"{condition}: {len(rows)} records, expected "
                          f"{expected_counts[condition]}"))
        balance = sum(r.label for r in rows) - sum(1 - r.label for r in rows)
        if abs(balance) > 1:
            add(Violation("", "balance",
                          f"{condition}: label imbalance {balance:+d}"))
        for record in rows:
            _check_record(record, condition, task, surface, threshold,
                          form_sides, morph_sets, seen_uids, seen_texts, add)
    return report


def _check_record(record, file_condition, task, surface, threshold,
                  form_sides, morph_sets, seen_uids, seen_texts, add):
    uid = record.uid
    if uid in seen_uids:
        add(Violation(uid, "uid", "duplicate uid"))
    seen_uids[uid] = True
    if record.text in seen_texts:
        add(Violation(uid, "dedup",
                      f"text duplicates uid {seen_texts[record.text]}"))
    else:
        seen_texts[record.text] = uid
    if record.task_id != task.task_id:
        add(Violation(uid, "task", f"wrong task_id {record.task_id!r}"))
    if record.label not in (0, 1):
        add(Violation(uid, "label", f"label {record.label!r} not binary"))
        return

    condition = record.condition
    if condition not in CONDITIONS:
        add(Violation(uid, "condition", f"unknown condition {condition!r}"))
        return
    if condition != file_condition and not (
            file_condition == "training" and condition == "inoculating"):
        # inoculated records legitimately sit in the training split
        add(Violation(uid, "condition",
                      f"{condition!r} record in {file_condition!r} split"))

    if condition in AMBIGUOUS_CONDITIONS:
        if record.l_l not in (0, 1) or record.l_s not in (0, 1):
            add(Violation(uid, "metadata", "ambiguous record missing l_l/l_s"))
            return
        expected_domain = "in" if condition in ("training",
                                                "inoculating") else "out"
        agree = condition in ("training", "auxiliary")
        if record.domain != expected_domain:
            add(Violation(uid, "invariant",
                          f"{condition} record in domain {record.domain}"))
        if record.label != record.l_l:
            add(Violation(uid, "invariant", "label != l_l"))
        if agree and record.l_s != record.l_l:
            add(Violation(uid, "invariant", f"{condition} needs l_l == l_s"))
        if not agree and record.l_s != 1 - record.l_l:
            add(Violation(uid, "invariant", f"{condition} needs l_s == 1-l_l"))
    else:
        expected_domain = "out" if condition == "control_eval_out" else "in"
        if record.domain != expected_domain:
            add(Violation(uid, "invariant",
                          f"{condition} record in domain {record.domain}"))
        carried = record.l_l if task.linguistic_feature else record.l_s
        other = record.l_s if task.linguistic_feature else record.l_l
        if carried != record.label:
            add(Violation(uid, "invariant", "control value != label"))
        if other is not None:
            add(Violation(uid, "metadata",
                          "control record carries both feature values"))

    if surface is not None and record.l_s is not None:
        derived = check_surface(surface, record.text, threshold=threshold)
        if derived != record.l_s:
            add(Violation(uid, "checker",
                          f"{surface} checker says {derived}, stamped "
                          f"{record.l_s}"))

    tokens = [t.lower() for t in tokenize(record.text)]
    if form_sides is not None:
        other_side = "out" if record.domain == "in" else "in"
        leaked = sorted(set(tokens) & form_sides[other_side])
        if leaked:
            add(Violation(uid, "domain-leak",
                          f"{record.domain}-domain text contains "
                          f"{other_side}-side forms {leaked}"))
    if morph_sets is not None and record.l_l in (0, 1):
        irregular, regular = morph_sets[record.domain]
        has_irregular = bool(set(tokens) & irregular)
        has_regular = bool(set(tokens) & regular)
        if record.l_l == 1 and (not has_irregular or has_regular):
            add(Violation(uid, "morphology-form",
                          "positive record lacks irregular-past target or "
                          "carries a regular-present form"))
        if record.l_l == 0 and (not has_regular or has_irregular):
            add(Violation(uid, "morphology-form",
                          "negative record lacks regular-present target or "
                          "carries an irregular-past form"))


# --- serialization ----------------------------------------------------------

def write_records(records, path):
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(record.to_json_line() + "\n")


def read_records(path):
    records = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(SentenceRecord.from_dict(json.loads(line)))
            except (json.JSONDecodeError, AssemblyError, TypeError) as exc:
                raise AssemblyError(f"{path}:{line_no}: {exc}") from exc
    return records


def write_bundle(bundle, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    for condition, rows in bundle.records.items():
        write_records(rows, os.path.join(out_dir, CONDITION_FILES[condition]))
    with open(os.path.join(out_dir, MANIFEST_FILE), "w",
              encoding="utf-8") as fh:
        json.dump(bundle.manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_bundle(task_dir):
    manifest_path = os.path.join(task_dir, MANIFEST_FILE)
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    split_sizes = {c: int(n) for c, n in manifest["split_sizes"].items()}
    task = TaskSpec(
        task_id=manifest["task_id"],
        linguistic_feature=manifest["linguistic_feature"],
        surface_feature=manifest["surface_feature"],
        total_size=manifest["total_size"],
        split_sizes=split_sizes,
        inoculation_rate=manifest["inoculation_rate"],
        seed=manifest["seed"])
    records = {}
    for condition, name in manifest["condition_files"].items():
        records[condition] = read_records(os.path.join(task_dir, name))
    return DatasetBundle(task=task, records=records, manifest=manifest)


__all__ = [
    "GENERATOR_VERSION", "FORMAT_VERSION", "CONDITIONS",
    "AMBIGUOUS_CONDITIONS", "CONTROL_CONDITIONS", "CONDITION_FILES",
    "MANIFEST_FILE", "DEFAULT_AMBIGUOUS_SPLITS", "DEFAULT_CONTROL_SPLITS",
    "INOCULATION_RATES", "RECORD_FIELDS", "AssemblyError",
    "InsufficientVariety", "half_up", "SentenceRecord", "Paradigm",
    "TaskSpec", "DatasetBundle", "build_paradigm", "assemble_task",
    "mix_inoculation", "Violation", "ValidationReport", "validate_bundle",
    "write_records", "read_records", "write_bundle", "read_bundle",
]
