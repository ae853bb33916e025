from __future__ import annotations

from importlib import resources
from pathlib import Path

import pytest


def fixture_path(name: str) -> Path:
    return Path(str(resources.files("aptattrib.fixtures").joinpath(name)))


@pytest.fixture(scope="session")
def training_set():
    from aptattrib.dataset import load_training_csv

    return load_training_csv(fixture_path("russian_apt_training.csv"))


@pytest.fixture(scope="session")
def whispergate():
    from aptattrib.dataset import load_unknown_csv

    return load_unknown_csv(fixture_path("whispergate_unknown.csv"), "WhisperGate")


@pytest.fixture(scope="session")
def table1():
    from aptattrib.report import load_table_csv

    return load_table_csv(fixture_path("table1.csv"))
