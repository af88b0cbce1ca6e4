from __future__ import annotations

import pathlib
import sys

import pytest

HERE = pathlib.Path(__file__).resolve().parent
sys.path.insert(0, str(HERE))  # oracles.py and systems_gen.py

from talforge.textfmt import load_file  # noqa: E402

CORPUS = HERE.parent / "corpus"


@pytest.fixture(scope="session")
def corpus_dir() -> pathlib.Path:
    return CORPUS


@pytest.fixture(scope="session")
def weir():
    return load_file(str(CORPUS / "weir.tal"))


@pytest.fixture(scope="session")
def aa():
    return load_file(str(CORPUS / "aa.tal"))


@pytest.fixture(autouse=True)
def _default_budget(monkeypatch):
    # an exported override in the developer's shell must not change test outcomes
    monkeypatch.delenv("TALFORGE_BUDGET", raising=False)
