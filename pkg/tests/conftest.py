"""Shared fixtures: demonstration corpus on disk plus the objects built from it.

Everything here is session-scoped; the corpus is immutable and building the
index and engine once keeps the suite fast.
"""

from __future__ import annotations

import pytest

from sdocoder.engine import DecisionEngine
from sdocoder.fixture import build_fixture
from sdocoder.index import SearchIndex
from sdocoder.ingestion import load_bundle


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory):
    directory = tmp_path_factory.mktemp("corpus")
    build_fixture(directory)
    return directory


@pytest.fixture(scope="session")
def bundle(fixture_dir):
    return load_bundle(fixture_dir / "manifest.tsv")


@pytest.fixture(scope="session")
def kb(bundle):
    return bundle.kb


@pytest.fixture(scope="session")
def index(kb):
    return SearchIndex(kb)


@pytest.fixture(scope="session")
def engine(bundle):
    return DecisionEngine(bundle.kb, bundle.tree, bundle.procedure_sets)
