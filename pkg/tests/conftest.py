from __future__ import annotations

import pytest

from cityforge.vocab import load_builtin_catalog, load_registry

from helpers import build_fixture_kg


@pytest.fixture(scope="session")
def registry():
    return load_registry()


@pytest.fixture(scope="session")
def catalog(registry):
    return load_builtin_catalog(registry)


@pytest.fixture(scope="session")
def fixture_kg(registry):
    return build_fixture_kg(registry)
