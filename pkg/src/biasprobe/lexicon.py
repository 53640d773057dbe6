"""Closed-vocabulary lexicon: typed entries, inflection tables, domain pools.

The lexicon is a TSV data file, one entry per line:

    lemma<TAB>category<TAB>tag=form,...<TAB>flag=value,...<TAB>domain

All inflection is table-driven; there is no rule-based morphology at run
time. Features that rely on a lexical split (irregular/regular verbs for
morphology, adjectives and nominal predicates for syntactic_category,
control/raising predicates for syntactic_construction, antonym and
synonym/hypernym groups for lexical_semantics) derive their split sets from
the entries' domain assignments at load time.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field, replace

CATEGORIES = (
    "noun", "verb", "adjective", "determiner", "proper_name",
    "auxiliary", "preposition", "complementizer",
)
DOMAINS = ("in", "out", "both")
NUMBERS = ("sg", "pl", "both")
ANIMACIES = ("animate", "inanimate", "any")
VERB_CLASSES = ("regular", "irregular", "none")
TRANSITIVITIES = ("trans", "intrans", "clausal", "none")
PREDICATE_KINDS = (
    "subj_control", "subj_raising", "obj_control", "obj_raising",
    "control_adj", "raising_adj", "nominal_pred", "nominal_mod", "none",
)
SEMANTIC_RELATIONS = ("antonym", "synonym", "hypernym")

CONSTRUCTION_KINDS = (
    "subj_control", "subj_raising", "obj_control", "obj_raising",
    "control_adj", "raising_adj",
)


class LexiconError(Exception):
    """Malformed lexicon data or an impossible lookup."""


class EmptyPoolError(LexiconError):
    """A slot constraint matched no entries."""


@dataclass(frozen=True)
class LexEntry:
    lemma: str
    category: str
    forms: tuple  # tuple of (tag, surface) pairs, insertion order preserved
    number: str = "both"
    animacy: str = "any"
    verb_class: str = "none"
    transitivity: str = "none"
    predicate_kind: str = "none"
    semantic_relation: tuple | None = None  # (group_id, relation)
    domain: str = "both"

    @property
    def key(self):
        return (self.lemma, self.category)

    def form(self, tag):
        for t, surface in self.forms:
            if t == tag:
                return surface
        raise LexiconError(f"{self.lemma} ({self.category}) has no form {tag!r}")

    def has_form(self, tag):
        return any(t == tag for t, _ in self.forms)


@dataclass(frozen=True)
class LexiconSplit:
    """Per-feature partition of crucial lexical items across domains."""

    feature_id: str
    in_domain: frozenset  # frozenset of (lemma, category) keys
    out_domain: frozenset

    def side(self, key):
        if key in self.in_domain:
            return "in"
        if key in self.out_domain:
            return "out"
        return None

    @property
    def members(self):
        return self.in_domain | self.out_domain


@dataclass
class Lexicon:
    entries: list = field(default_factory=list)
    splits: dict = field(default_factory=dict)
    source_sha256: str | None = None

    def __post_init__(self):
        self._by_key = {e.key: e for e in self.entries}

    def get(self, lemma, category):
        try:
            return self._by_key[(lemma, category)]
        except KeyError:
            raise LexiconError(f"no entry {lemma!r} with category {category!r}")

    def all(self, category=None):
        if category is None:
            return list(self.entries)
        return [e for e in self.entries if e.category == category]

    def semantic_groups(self):
        """Map group_id -> (relation, [entries]), members in lemma order."""
        groups = {}
        for e in self.entries:
            if e.semantic_relation is not None:
                gid, rel = e.semantic_relation
                groups.setdefault(gid, (rel, []))[1].append(e)
        return groups


def _parse_pairs(column, line_no, what):
    if column == "-":
        return []
    pairs = []
    for chunk in column.split(","):
        if "=" not in chunk:
            raise LexiconError(f"line {line_no}: bad {what} item {chunk!r}")
        k, v = chunk.split("=", 1)
        if not k or not v:
            raise LexiconError(f"line {line_no}: bad {what} item {chunk!r}")
        pairs.append((k, v))
    return pairs


_FLAG_VALUES = {
    "number": NUMBERS,
    "animacy": ANIMACIES,
    "verb_class": VERB_CLASSES,
    "transitivity": TRANSITIVITIES,
    "predicate_kind": PREDICATE_KINDS,
}


def _entry_from_line(line, line_no):
    cols = line.split("\t")
    if len(cols) != 5:
        raise LexiconError(f"line {line_no}: expected 5 tab-separated columns")
    lemma, category, forms_col, flags_col, domain = cols
    if category not in CATEGORIES:
        raise LexiconError(f"line {line_no}: unknown category {category!r}")
    if domain not in DOMAINS:
        raise LexiconError(f"line {line_no}: unknown domain {domain!r}")
    forms = _parse_pairs(forms_col, line_no, "form")
    if not forms:
        raise LexiconError(f"line {line_no}: entry {lemma!r} has no forms")
    seen = set()
    for tag, _ in forms:
        if tag in seen:
            raise LexiconError(f"line {line_no}: duplicate form tag {tag!r}")
        seen.add(tag)
    kwargs = {}
    for k, v in _parse_pairs(flags_col, line_no, "flag"):
        if k == "semantic_relation":
            if ":" not in v:
                raise LexiconError(
                    f"line {line_no}: semantic_relation must be group:relation")
            gid, rel = v.split(":", 1)
            if rel not in SEMANTIC_RELATIONS:
                raise LexiconError(f"line {line_no}: unknown relation {rel!r}")
            kwargs["semantic_relation"] = (gid, rel)
        elif k in _FLAG_VALUES:
            if v not in _FLAG_VALUES[k]:
                raise LexiconError(f"line {line_no}: bad {k} value {v!r}")
            kwargs[k] = v
        else:
            raise LexiconError(f"line {line_no}: unknown flag {k!r}")
    return LexEntry(lemma=lemma, category=category, forms=tuple(forms),
                    domain=domain, **kwargs)


def _check_entry(e):
    if e.category == "verb":
        if e.verb_class == "none":
            raise LexiconError(f"verb {e.lemma!r} must declare a verb_class")
        if not e.has_form("bare"):
            raise LexiconError(f"verb {e.lemma!r} lacks a bare form")
        if e.verb_class == "irregular":
            if not e.has_form("past_irregular"):
                raise LexiconError(
                    f"{e.lemma!r} is irregular but has no past_irregular form")
            naive = (e.form("bare") + "ed", e.form("bare") + "d")
            if e.form("past_irregular") in naive:
                raise LexiconError(
                    f"{e.lemma!r}: past_irregular looks like a regular past")
        elif not e.has_form("past"):
            raise LexiconError(f"regular verb {e.lemma!r} lacks a past form")
        if e.has_form("plural_present") and \
                e.form("plural_present") != e.form("bare"):
            raise LexiconError(
                f"{e.lemma!r}: plural_present must equal the bare form")


def _build_splits(entries):
    def partition(feature_id, keep):
        ins, outs = set(), set()
        for e in entries:
            if not keep(e):
                continue
            if e.domain == "in":
                ins.add(e.key)
            elif e.domain == "out":
                outs.add(e.key)
        return LexiconSplit(feature_id, frozenset(ins), frozenset(outs))

    plain = lambda e: e.semantic_relation is None and e.predicate_kind == "none"
    splits = {
        "morphology": partition(
            "morphology", lambda e: e.category == "verb" and plain(e)),
        "syntactic_category": partition(
            "syntactic_category",
            lambda e: (e.category == "adjective" and plain(e))
            or e.predicate_kind in ("nominal_pred", "nominal_mod")),
        "syntactic_construction": partition(
            "syntactic_construction",
            lambda e: e.predicate_kind in CONSTRUCTION_KINDS),
        "lexical_semantics": partition(
            "lexical_semantics", lambda e: e.semantic_relation is not None),
    }
    return splits


def default_data_path(name):
    return os.path.join(os.path.dirname(__file__), "data", name)


def file_sha256(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def load_lexicon(path=None):
    if path is None:
        path = default_data_path("lexicon.tsv")
    entries = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line or line.lstrip().startswith("#"):
                continue
            entry = _entry_from_line(line, line_no)
            if entry.key in seen:
                raise LexiconError(
                    f"line {line_no}: duplicate entry {entry.key}")
            seen.add(entry.key)
            _check_entry(entry)
            entries.append(entry)
    groups = {}
    for e in entries:
        if e.semantic_relation is not None:
            gid, rel = e.semantic_relation
            groups.setdefault(gid, []).append(e)
    for gid, members in groups.items():
        if len(members) != 2:
            raise LexiconError(f"semantic group {gid!r} must have 2 members")
        a, b = members
        if a.semantic_relation[1] != b.semantic_relation[1]:
            raise LexiconError(f"semantic group {gid!r} mixes relations")
        if a.domain != b.domain or a.domain == "both":
            raise LexiconError(
                f"semantic group {gid!r} members must share one domain")
        if a.category != b.category or a.transitivity != b.transitivity:
            raise LexiconError(f"semantic group {gid!r} members mismatch")
    entries.sort(key=lambda e: e.key)
    return Lexicon(entries=entries, splits=_build_splits(entries),
                   source_sha256=file_sha256(path))


def save_lexicon(lexicon, path):
    """Write entries back out in the load format (round-trip stable)."""
    with open(path, "w", encoding="utf-8") as fh:
        for e in lexicon.entries:
            forms = ",".join(f"{t}={s}" for t, s in e.forms)
            flags = []
            if e.number != "both":
                flags.append(f"number={e.number}")
            if e.animacy != "any":
                flags.append(f"animacy={e.animacy}")
            if e.verb_class != "none":
                flags.append(f"verb_class={e.verb_class}")
            if e.transitivity != "none":
                flags.append(f"transitivity={e.transitivity}")
            if e.predicate_kind != "none":
                flags.append(f"predicate_kind={e.predicate_kind}")
            if e.semantic_relation is not None:
                gid, rel = e.semantic_relation
                flags.append(f"semantic_relation={gid}:{rel}")
            fh.write("\t".join([
                e.lemma, e.category, forms, ",".join(flags) or "-", e.domain,
            ]) + "\n")


def inflect(entry, tag):
    """Look up a surface form. Purely table-driven; raises when absent."""
    return entry.form(tag)


def domain_pool(lexicon, split, domain, predicate=None, membership="auto"):
    """Entries available to one domain, in stable lexicographic order.

    membership controls interaction with the feature's lexical split:
    "require" keeps only split members on the requested side, "exclude"
    drops all split members, and "auto" keeps non-members plus the
    requested side's members.
    """
    if domain not in ("in", "out"):
        raise LexiconError(f"domain must be 'in' or 'out', got {domain!r}")
    out = []
    for e in lexicon.entries:
        side = split.side(e.key) if split is not None else None
        if membership == "require":
            if split is None:
                raise LexiconError("membership='require' needs a split")
            if side != domain:
                continue
        elif membership == "exclude":
            if side is not None:
                continue
            if e.domain not in (domain, "both"):
                continue
        else:
            if side is not None:
                if side != domain:
                    continue
            elif e.domain not in (domain, "both"):
                continue
        if predicate is not None and not predicate(e):
            continue
        out.append(e)
    if not out:
        raise EmptyPoolError(
            f"no entries for domain={domain!r} membership={membership!r} "
            f"split={split.feature_id if split else None!r}")
    return out


__all__ = [
    "CATEGORIES", "DOMAINS", "CONSTRUCTION_KINDS",
    "LexEntry", "Lexicon", "LexiconSplit", "LexiconError", "EmptyPoolError",
    "load_lexicon", "save_lexicon", "inflect", "domain_pool", "replace",
]
