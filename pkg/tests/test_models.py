from pathlib import Path

from models.state import EMPTY_STORE, ConcreteState
from services import store

MODELS_DIR = Path(__file__).resolve().parent.parent / "models"


def test_models_import_nothing_from_services():
    for path in MODELS_DIR.glob("*.py"):
        source = path.read_text(encoding="utf-8")
        assert "from services" not in source, path.name
        assert "import services" not in source, path.name


def test_store_values_are_shared_with_states():
    assert store.EMPTY_STORE is EMPTY_STORE
    assert ConcreteState().builtins is EMPTY_STORE
    assert store.consistent(EMPTY_STORE)
