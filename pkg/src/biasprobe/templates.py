"""Declarative sentence templates and the instantiation engine.

Templates are data, not code. The shipped inventory lives in
data/templates.txt; one block per template:

    [template_id]
    feature: morphology
    domain: in
    type: noun_complement
    slot: d0 det
    slot: n0 noun num=sg trans=clausal
    slot: v_pos verb class=irregular trans=intrans split=require
    agree: d0=n0
    v1: d0 n0 ~that d1 n1 v_pos:past_irregular ...
    v0: d0 n0 ~that d1 n1 v_neg:plural_present ...
    rel: d0 d2
    content: d2

Element sequences mix ~literals with slot references (optionally
slot:form_tag). `v1`/`v0` give the realization for each feature value;
`seq:` is shorthand for both (used by surface-control frames whose two
classes differ only in the surface overlay). Blocks with `kind: adjunct`
define the subordinate clauses the length feature splices onto sentences.

Every random choice comes from the caller's rng, so instantiation is a pure
function of (template, value, domain, lexicon, seed).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .features import apply_orthography
from .lexicon import EmptyPoolError, default_data_path, domain_pool, file_sha256

_NEUTRAL_EXCLUDED = ("the", "a")  # determiners reserved for surface contrasts


class TemplateError(Exception):
    pass


@dataclass(frozen=True)
class SlotSpec:
    name: str
    category: str
    number: str = "any"            # sg | pl | any
    animacy: str | None = None
    verb_class: str | None = None
    transitivity: str | None = None
    predicate_kind: str | None = None
    relation: str | None = None    # "antonym" | "other" (semantic pair slots)
    mate: str | None = None        # partner slot sharing the semantic group
    form: str | None = None        # default inflection tag
    split_domain: bool = False     # draw from the feature's lexical split


@dataclass(frozen=True)
class Element:
    kind: str                      # "lit" | "slot"
    value: str
    form: str | None = None


@dataclass(frozen=True)
class Template:
    id: str
    feature_id: str
    domain: str
    kind: str = "core"             # "core" | "adjunct"
    sentence_type: str = ""
    slots: tuple = ()
    agreements: tuple = ()         # (dependent, controller) pairs
    seqs: tuple = ()               # (value0_elements, value1_elements)
    rel_pair: tuple | None = None  # (the_slot, a_slot) for relative_position
    content_slot: str | None = None

    def slot(self, name):
        for s in self.slots:
            if s.name == name:
                return s
        raise TemplateError(f"{self.id}: no slot {name!r}")

    @property
    def slot_names(self):
        return tuple(s.name for s in self.slots)

    @property
    def agree_map(self):
        return dict(self.agreements)

    def seq(self, value):
        return self.seqs[value]

    def token_count(self, value):
        return len(self.seqs[value])

    @property
    def abs_slot(self):
        """Determiner slot carrying the absolute_position contrast, if the
        sentence starts with the same determiner slot in both realizations."""
        first0, first1 = self.seqs[0][0], self.seqs[1][0]
        if (first0.kind == "slot" and first1.kind == "slot"
                and first0.value == first1.value
                and self.slot(first0.value).category == "determiner"):
            return first0.value
        return None

    @property
    def det_slots(self):
        """Determiner slots in order of appearance in the value-1 sequence."""
        seen = []
        for el in self.seqs[1]:
            if el.kind == "slot" and el.value not in seen \
                    and self.slot(el.value).category == "determiner":
                seen.append(el.value)
        return tuple(seen)


@dataclass(frozen=True)
class TemplateSet:
    templates: tuple
    adjuncts: tuple
    source_sha256: str | None = None

    def get(self, template_id):
        for t in self.templates + self.adjuncts:
            if t.id == template_id:
                return t
        raise TemplateError(f"no template {template_id!r}")


_SLOT_KEYS = {
    "num": "number", "anim": "animacy", "class": "verb_class",
    "trans": "transitivity", "kind": "predicate_kind", "rel": "relation",
    "mate": "mate", "form": "form", "split": "split_domain",
}


def _parse_slot(rest, where):
    parts = rest.split()
    if len(parts) < 2:
        raise TemplateError(f"{where}: slot needs a name and category")
    name, category = parts[0], parts[1]
    kwargs = {}
    for item in parts[2:]:
        if "=" not in item:
            raise TemplateError(f"{where}: bad slot option {item!r}")
        k, v = item.split("=", 1)
        if k not in _SLOT_KEYS:
            raise TemplateError(f"{where}: unknown slot option {k!r}")
        if k == "split":
            if v not in ("require", "exclude"):
                raise TemplateError(f"{where}: split must be require|exclude")
            kwargs["split_domain"] = v == "require"
        else:
            kwargs[_SLOT_KEYS[k]] = v
    return SlotSpec(name=name, category=category, **kwargs)


def _parse_elements(rest, where):
    elements = []
    for item in rest.split():
        if item.startswith("~"):
            if len(item) == 1:
                raise TemplateError(f"{where}: empty literal")
            elements.append(Element("lit", item[1:]))
        elif ":" in item:
            name, tag = item.split(":", 1)
            if not name or not tag:
                raise TemplateError(f"{where}: bad element {item!r}")
            elements.append(Element("slot", name, tag))
        else:
            elements.append(Element("slot", item))
    if not elements:
        raise TemplateError(f"{where}: empty element sequence")
    return tuple(elements)


def _finish_block(block_id, fields, slots, agreements):
    kind = fields.pop("kind", "core")
    feature = fields.pop("feature", "")
    domain = fields.pop("domain", "both" if kind == "adjunct" else "")
    stype = fields.pop("type", "")
    if kind == "adjunct":
        seq = fields.pop("seq", None)
        if seq is None:
            raise TemplateError(f"{block_id}: adjunct needs a seq line")
        seqs = (seq, seq)
        feature = feature or "_adjunct"
    else:
        if not feature:
            raise TemplateError(f"{block_id}: missing feature")
        if domain not in ("in", "out"):
            raise TemplateError(f"{block_id}: domain must be in|out")
        if "seq" in fields:
            shared = fields.pop("seq")
            seqs = (shared, shared)
        else:
            if "v0" not in fields or "v1" not in fields:
                raise TemplateError(f"{block_id}: needs v0 and v1 (or seq)")
            seqs = (fields.pop("v0"), fields.pop("v1"))
    rel_pair = fields.pop("rel", None)
    content = fields.pop("content", None)
    if fields:
        raise TemplateError(f"{block_id}: unknown lines {sorted(fields)}")
    tpl = Template(
        id=block_id, feature_id=feature, domain=domain, kind=kind,
        sentence_type=stype, slots=tuple(slots), agreements=tuple(agreements),
        seqs=seqs, rel_pair=rel_pair, content_slot=content,
    )
    _validate_template(tpl)
    return tpl


def _validate_template(tpl):
    names = set()
    for s in tpl.slots:
        if s.name in names:
            raise TemplateError(f"{tpl.id}: duplicate slot {s.name!r}")
        names.add(s.name)
        if s.mate is not None:
            # a pair follower must trail its leader and share the relation
            if s.mate not in names:
                raise TemplateError(
                    f"{tpl.id}: mate {s.mate!r} must be declared first")
            leader = tpl.slot(s.mate)
            if leader.relation != s.relation or s.relation is None:
                raise TemplateError(
                    f"{tpl.id}: {s.name!r} and {s.mate!r} need one relation")
            if leader.mate is not None:
                raise TemplateError(f"{tpl.id}: chained mates on {s.name!r}")
    for dep, ctrl in tpl.agreements:
        if dep not in names or ctrl not in names:
            raise TemplateError(f"{tpl.id}: agreement on unknown slot")
    for seq in tpl.seqs:
        for el in seq:
            if el.kind == "slot" and el.value not in names:
                raise TemplateError(f"{tpl.id}: element {el.value!r} undefined")
    if tpl.kind == "core" and len(tpl.seqs[0]) != len(tpl.seqs[1]):
        # token-count parity keeps length uninformative about the class
        raise TemplateError(f"{tpl.id}: value sequences differ in length")
    dets = tpl.det_slots
    if tpl.rel_pair is not None:
        ra, rb = tpl.rel_pair
        for r in (ra, rb):
            if r not in dets:
                raise TemplateError(f"{tpl.id}: rel slot {r!r} not a determiner")
        for seq in tpl.seqs:
            order = [el.value for el in seq if el.kind == "slot"]
            if order.index(ra) >= order.index(rb):
                raise TemplateError(
                    f"{tpl.id}: rel pair must keep {ra!r} before {rb!r}")
    if tpl.content_slot is not None and tpl.content_slot not in dets:
        raise TemplateError(f"{tpl.id}: content slot must be a determiner")


def parse_templates(path):
    blocks = []
    block_id = None
    fields, slots, agreements = {}, [], []

    def close():
        nonlocal block_id, fields, slots, agreements
        if block_id is not None:
            blocks.append(_finish_block(block_id, fields, slots, agreements))
        block_id, fields, slots, agreements = None, {}, [], []

    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            where = f"{path}:{line_no}"
            if line.startswith("[") and line.endswith("]"):
                close()
                block_id = line[1:-1].strip()
                if not block_id:
                    raise TemplateError(f"{where}: empty template id")
                continue
            if block_id is None:
                raise TemplateError(f"{where}: content outside a template block")
            if ":" not in line:
                raise TemplateError(f"{where}: expected key: value")
            key, rest = line.split(":", 1)
            key, rest = key.strip(), rest.strip()
            if key == "slot":
                slots.append(_parse_slot(rest, where))
            elif key == "agree":
                for link in rest.split():
                    if "=" not in link:
                        raise TemplateError(f"{where}: agree items are dep=ctrl")
                    dep, ctrl = link.split("=", 1)
                    agreements.append((dep, ctrl))
            elif key in ("v0", "v1", "seq"):
                fields[key] = _parse_elements(rest, where)
            elif key == "rel":
                parts = rest.split()
                if len(parts) != 2:
                    raise TemplateError(f"{where}: rel needs two slots")
                fields["rel"] = (parts[0], parts[1])
            elif key in ("feature", "domain", "type", "kind", "content"):
                fields[key] = rest
            else:
                raise TemplateError(f"{where}: unknown key {key!r}")
    close()
    ids = [b.id for b in blocks]
    if len(ids) != len(set(ids)):
        raise TemplateError("duplicate template ids")
    templates = tuple(b for b in blocks if b.kind == "core")
    adjuncts = tuple(sorted((b for b in blocks if b.kind == "adjunct"),
                            key=lambda t: (t.token_count(0), t.id)))
    for feature_id in {t.feature_id for t in templates}:
        ins = {t.id for t in templates
               if t.feature_id == feature_id and t.domain == "in"}
        outs = {t.id for t in templates
                if t.feature_id == feature_id and t.domain == "out"}
        if ins & outs:
            raise TemplateError(f"{feature_id}: template id in both domains")
    return TemplateSet(templates=templates, adjuncts=adjuncts,
                       source_sha256=file_sha256(path))


def load_templates(path=None):
    if path is None:
        path = default_data_path("templates.txt")
    return parse_templates(path)


def enumerate_templates(template_set, feature_id, domain=None):
    """Templates for one feature, optionally restricted to one domain."""
    found = [t for t in template_set.templates if t.feature_id == feature_id
             and (domain is None or t.domain == domain)]
    if not found:
        raise TemplateError(
            f"no templates for feature {feature_id!r} domain {domain!r}")
    return found


def supports_surface(template, surface_id):
    """Can this core template host the given surface manipulation?"""
    if surface_id == "absolute_position":
        name = template.abs_slot
        if name is None:
            return False
        ctrl = template.agree_map.get(name)
        return ctrl is not None and template.slot(ctrl).number in ("sg", "any")
    if surface_id == "relative_position":
        return template.rel_pair is not None
    if surface_id == "lexical_content":
        return template.content_slot is not None
    return surface_id in ("orthography", "length", None)


# --- binding ---------------------------------------------------------------


@dataclass
class Binding:
    numbers: dict = field(default_factory=dict)
    entries: dict = field(default_factory=dict)
    neutral_dets: dict = field(default_factory=dict)


def _slot_predicate(spec, required_tags):
    def pred(e):
        if e.category != spec.category:
            return False
        if spec.animacy is not None and e.animacy != spec.animacy:
            return False
        if spec.verb_class is not None and e.verb_class != spec.verb_class:
            return False
        if spec.transitivity is not None and e.transitivity != spec.transitivity:
            return False
        if spec.predicate_kind is not None:
            if e.predicate_kind != spec.predicate_kind:
                return False
        elif e.predicate_kind != "none":
            return False
        if spec.relation is not None:
            if e.semantic_relation is None:
                return False
            rel = e.semantic_relation[1]
            if spec.relation == "antonym" and rel != "antonym":
                return False
            if spec.relation == "other" and rel == "antonym":
                return False
        elif e.semantic_relation is not None:
            return False
        return all(e.has_form(t) for t in required_tags)
    return pred


def _required_tags(template, spec):
    """Every inflection tag this slot may be asked to produce."""
    tags = set()
    for seq in template.seqs:
        for el in seq:
            if el.kind == "slot" and el.value == spec.name:
                tags.add(el.form or spec.form or "")
    tags.discard("")
    resolved = set()
    for tag in tags:
        if tag == "auto_present":
            resolved.update(("third_sg_present", "plural_present"))
        elif tag == "auto_past":
            resolved.update(("past_sg", "past_pl"))
        elif tag:
            resolved.add(tag)
    if spec.category in ("noun", "proper_name", "determiner") and not resolved:
        if spec.number == "sg":
            resolved.add("singular")
        elif spec.number == "pl":
            resolved.add("plural")
    if spec.category in ("adjective", "preposition") and not resolved:
        resolved.add("base")
    return frozenset(resolved)


def build_pools(template, domain, lexicon, split):
    """Precompute candidate entry lists per slot (sorted, deterministic).

    Returned mapping: slot name -> dict with keys "any", "sg", "pl" as
    applicable, plus "neutral_sg"/"neutral_pl" lists for determiner slots.
    """
    pools = {}
    for spec in template.slots:
        if spec.split_domain:
            if split is None:
                raise TemplateError(
                    f"{template.id}:{spec.name} requires a lexical split")
            membership = "require"
        else:
            membership = "exclude" if split is not None else "auto"
        tags = _required_tags(template, spec)
        pred = _slot_predicate(spec, tags)
        entry = {}
        try:
            if spec.category in ("noun", "determiner"):
                for number, tag in (("sg", "singular"), ("pl", "plural")):
                    if spec.number not in ("any", number):
                        continue
                    num_pred = (lambda num, tg: lambda e:
                                pred(e) and e.has_form(tg)
                                and e.number in (num, "both"))(number, tag)
                    try:
                        entry[number] = domain_pool(
                            lexicon, split, domain, num_pred, membership)
                    except EmptyPoolError:
                        pass
                if not entry:
                    raise EmptyPoolError(
                        f"{template.id}:{spec.name}: no entries in any number")
            else:
                entry["any"] = domain_pool(
                    lexicon, split, domain, pred, membership)
        except EmptyPoolError as err:
            raise EmptyPoolError(
                f"{template.id} slot {spec.name!r} ({domain}): {err}") from err
        if spec.category == "determiner":
            for number in ("sg", "pl"):
                if number in entry:
                    neutral = [e for e in entry[number]
                               if e.lemma not in _NEUTRAL_EXCLUDED]
                    if not neutral:
                        raise EmptyPoolError(
                            f"{template.id}:{spec.name}: no neutral dets")
                    entry[f"neutral_{number}"] = neutral
        pools[spec.name] = entry
    return pools


def _forced_singulars(template, surface_feature):
    forced = set()
    agree = template.agree_map
    if surface_feature == "absolute_position" and template.abs_slot:
        ctrl = agree.get(template.abs_slot)
        if ctrl is not None:
            forced.add(ctrl)
    if surface_feature == "relative_position" and template.rel_pair:
        for det in template.rel_pair:
            if det in agree:
                forced.add(agree[det])
    return forced


def bind_template(template, domain, lexicon, rng, split=None,
                  surface_feature=None, pools=None):
    """Draw one consistent assignment of entries and numbers for all slots."""
    if pools is None:
        pools = build_pools(template, domain, lexicon, split)
    binding = Binding()
    forced_sg = _forced_singulars(template, surface_feature)
    for spec in template.slots:
        if spec.category in ("noun", "proper_name"):
            if spec.category == "proper_name":
                number = "sg"
            elif spec.name in forced_sg:
                if spec.number == "pl":
                    raise TemplateError(
                        f"{template.id}:{spec.name} cannot be singular")
                number = "sg"
            elif spec.number in ("sg", "pl"):
                number = spec.number
            else:
                available = [n for n in ("sg", "pl") if n in pools[spec.name]]
                number = available[0] if len(available) == 1 \
                    else rng.choice(("sg", "pl"))
            binding.numbers[spec.name] = number
    agree = template.agree_map
    for spec in template.slots:
        if spec.name in binding.numbers:
            continue
        ctrl = agree.get(spec.name)
        if ctrl is not None and ctrl in binding.numbers:
            binding.numbers[spec.name] = binding.numbers[ctrl]
        elif spec.number in ("sg", "pl"):
            binding.numbers[spec.name] = spec.number
    mates = {}
    for spec in template.slots:
        if spec.name in mates:
            binding.entries[spec.name] = mates[spec.name]
            continue
        pool = pools[spec.name]
        number = binding.numbers.get(spec.name)
        if spec.category in ("noun", "determiner"):
            if number not in pool:
                number = next(n for n in ("sg", "pl") if n in pool)
                binding.numbers[spec.name] = number
            choices = pool[number]
        else:
            choices = pool["any"]
        if spec.relation is not None and spec.mate is None:
            # semantic pair slot: pick a group, then split it with its mate
            groups = {}
            for e in choices:
                groups.setdefault(e.semantic_relation[0], []).append(e)
            gid = rng.choice(sorted(groups))
            first, second = sorted(groups[gid], key=lambda e: e.lemma)
            if rng.random() < 0.5:
                first, second = second, first
            binding.entries[spec.name] = first
            mate_name = next(s.name for s in template.slots
                             if s.mate == spec.name)
            mates[mate_name] = second
            continue
        binding.entries[spec.name] = rng.choice(choices)
        if spec.category == "determiner":
            neutral = pool.get(f"neutral_{binding.numbers[spec.name]}")
            if neutral:
                binding.neutral_dets[spec.name] = rng.choice(neutral)
    return binding


# --- realization -----------------------------------------------------------


_DEFAULT_NUMBER_TAG = {"sg": "singular", "pl": "plural"}


def _resolve_tag(template, spec, element, binding):
    tag = element.form or spec.form
    if tag in ("auto_present", "auto_past"):
        ctrl = template.agree_map.get(spec.name)
        if ctrl is None:
            raise TemplateError(
                f"{template.id}:{spec.name} has {tag} but no agreement link")
        number = binding.numbers[ctrl]
        if tag == "auto_present":
            return "third_sg_present" if number == "sg" else "plural_present"
        return "past_sg" if number == "sg" else "past_pl"
    if tag is not None:
        return tag
    if spec.category in ("noun", "proper_name", "determiner"):
        return _DEFAULT_NUMBER_TAG[binding.numbers[spec.name]]
    if spec.category in ("adjective", "preposition", "complementizer"):
        return "base"
    raise TemplateError(f"{template.id}:{spec.name} needs an explicit form")


def _det_surface(template, spec, binding, surface):
    name = spec.name
    number_tag = _DEFAULT_NUMBER_TAG[binding.numbers[name]]
    if surface is not None:
        feature_id, value = surface.feature_id, surface.value
        if feature_id == "absolute_position" and name == template.abs_slot:
            return "the" if value == 1 else "a"
        if feature_id == "lexical_content" and name == template.content_slot:
            if value == 1:
                return "the"
            return binding.neutral_dets[name].form(number_tag)
        if feature_id == "relative_position" and template.rel_pair \
                and name in template.rel_pair:
            first = name == template.rel_pair[0]
            if value == 1:
                return "the" if first else "a"
            return "a" if first else "the"
        if feature_id in ("lexical_content", "relative_position"):
            return binding.neutral_dets[name].form(number_tag)
    return binding.entries[name].form(number_tag)


@dataclass(frozen=True)
class SurfacePlan:
    feature_id: str
    value: int
    adjunct_tokens: tuple = ()


def body_tokens(template, value, binding, surface=None):
    """Lowercase token list for one realization, before sentence dressing."""
    tokens = []
    for el in template.seq(value):
        if el.kind == "lit":
            tokens.append(el.value)
            continue
        spec = template.slot(el.value)
        if spec.category == "determiner" and el.form is None:
            tokens.append(_det_surface(template, spec, binding, surface))
        else:
            tag = _resolve_tag(template, spec, el, binding)
            tokens.append(binding.entries[el.value].form(tag))
    return tokens


def realize(template, value, binding, surface=None):
    """Assemble the full sentence for one paradigm cell."""
    tokens = body_tokens(template, value, binding, surface)
    if surface is not None and surface.feature_id == "length":
        tokens = tokens + list(surface.adjunct_tokens)
    tokens[0] = tokens[0][:1].upper() + tokens[0][1:]
    text = " ".join(tokens) + "."
    if surface is not None and surface.feature_id == "orthography":
        text = apply_orthography(text, surface.value)
    return text


def instantiate(template, feature_value, domain, lexicon, rng, split=None):
    """One core sentence for (template, value, domain); returns (text, binding)."""
    if template.domain not in (domain, "both"):
        raise TemplateError(
            f"{template.id} is {template.domain}-domain, not {domain}")
    binding = bind_template(template, domain, lexicon, rng, split=split)
    return realize(template, feature_value, binding), binding


def adjunct_by_size(template_set, lo, hi):
    """Adjunct templates whose token count falls in [lo, hi]."""
    return [a for a in template_set.adjuncts if lo <= a.token_count(0) <= hi]


__all__ = [
    "Template", "TemplateSet", "SlotSpec", "Element", "TemplateError",
    "SurfacePlan", "Binding",
    "parse_templates", "enumerate_templates", "supports_surface",
    "build_pools", "bind_template", "body_tokens", "realize",
    "instantiate", "adjunct_by_size",
]
