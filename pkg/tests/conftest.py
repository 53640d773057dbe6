"""Shared fixtures: packaged resources and small pre-assembled bundles."""

import pytest

from biasprobe.assembly import TaskSpec, assemble_task
from biasprobe.lexicon import load_lexicon
from biasprobe.templates import load_templates


@pytest.fixture(scope="session")
def lexicon():
    return load_lexicon()


@pytest.fixture(scope="session")
def templates():
    return load_templates()


@pytest.fixture(scope="session")
def small_bundle(lexicon, templates):
    """Ambiguous task at 1/100 scale: splits 100/200/100/100."""
    spec = TaskSpec.make("morphology_x_lexical_content", total_size=500, seed=101)
    return assemble_task(spec, lexicon, templates)


@pytest.fixture(scope="session")
def length_bundle(lexicon, templates):
    """Ambiguous length-paired task; manifest carries the pilot threshold."""
    spec = TaskSpec.make("syntactic_category_x_length", total_size=500, seed=101)
    return assemble_task(spec, lexicon, templates)


@pytest.fixture(scope="session")
def control_bundle(lexicon, templates):
    """Linguistic control task at 1/100 scale: splits 100/100/100."""
    spec = TaskSpec.make("control_morphology", total_size=300, seed=101)
    return assemble_task(spec, lexicon, templates)
