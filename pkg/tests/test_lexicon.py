"""Packaged lexicon integrity and loader error handling."""

import pytest

from biasprobe.features import LINGUISTIC_FEATURES
from biasprobe.lexicon import (
    LexiconError,
    default_data_path,
    domain_pool,
    file_sha256,
    inflect,
    load_lexicon,
)


def test_loads_with_checksum(lexicon):
    assert lexicon.entries
    assert lexicon.source_sha256 == file_sha256(default_data_path("lexicon.tsv"))


def test_every_category_populated(lexicon):
    for category in ("noun", "verb", "determiner", "adjective", "preposition",
                     "auxiliary"):
        assert lexicon.all(category), f"no entries for {category}"


def test_nouns_carry_both_number_forms(lexicon):
    for entry in lexicon.all("noun"):
        if entry.number == "both":
            assert entry.has_form("singular") and entry.has_form("plural"), \
                f"{entry.lemma} missing a number form"


def test_neutral_determiners_cover_both_numbers(lexicon):
    # the/a are reserved for surface contrasts, so every number needs other
    # determiners to draw from
    for number in ("sg", "pl"):
        pool = [e for e in lexicon.all("determiner")
                if e.lemma not in ("the", "a") and e.number in (number, "both")]
        assert len(pool) >= 3, f"too few neutral determiners for {number}"


def test_split_features_have_disjoint_sides(lexicon):
    for feature_id in LINGUISTIC_FEATURES + ("lexical_semantics",):
        split = lexicon.splits.get(feature_id)
        if split is None:
            continue
        assert split.in_domain, f"{feature_id}: empty in-domain side"
        assert split.out_domain, f"{feature_id}: empty out-domain side"
        assert not (set(split.in_domain) & set(split.out_domain)), \
            f"{feature_id}: sides overlap"


def test_morphology_split_separates_verb_classes(lexicon):
    split = lexicon.splits["morphology"]
    for key in split.members:
        entry = lexicon.get(*key)
        assert entry.category == "verb"
        assert entry.verb_class in ("regular", "irregular")


def test_irregular_pasts_are_not_regularly_formed(lexicon):
    for entry in lexicon.all("verb"):
        if entry.verb_class == "irregular" and entry.has_form("past_irregular"):
            regular = entry.lemma + ("d" if entry.lemma.endswith("e") else "ed")
            assert entry.form("past_irregular") != regular, entry.lemma


def test_domain_pool_respects_split_sides(lexicon):
    # pools may share side-less entries but never leak the other side's items
    split = lexicon.splits["morphology"]
    pool_in = domain_pool(lexicon, split, "in")
    pool_out = domain_pool(lexicon, split, "out")
    assert pool_in and pool_out
    assert all(split.side(e.key) != "out" for e in pool_in)
    assert all(split.side(e.key) != "in" for e in pool_out)
    assert any(split.side(e.key) == "in" for e in pool_in)
    assert any(split.side(e.key) == "out" for e in pool_out)


def test_inflect_unknown_tag_rejected(lexicon):
    entry = lexicon.all("noun")[0]
    with pytest.raises(LexiconError):
        inflect(entry, "no_such_tag")


def test_malformed_file_rejected(tmp_path):
    bad = tmp_path / "broken.tsv"
    bad.write_text("just one column\n", encoding="utf-8")
    with pytest.raises(LexiconError):
        load_lexicon(str(bad))
