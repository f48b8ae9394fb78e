from pathlib import Path

import pytest

from services.coind import load_automaton
from services.lang import parse_program

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def cancel_program():
    return parse_program((DATA_DIR / "cancel.chr").read_text(encoding="utf-8"))


@pytest.fixture
def successor_program():
    return parse_program((DATA_DIR / "successor.chr").read_text(encoding="utf-8"))


@pytest.fixture
def bisim_text() -> str:
    return (DATA_DIR / "bisim.chr").read_text(encoding="utf-8")


@pytest.fixture
def sample_automaton():
    return load_automaton((DATA_DIR / "sample.aut").read_text(encoding="utf-8"))
