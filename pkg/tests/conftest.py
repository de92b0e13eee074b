import json

import pytest

from src.engine.abgroup import FinAbGroup, cyclic_ring, matrix_ring_payload, self_bimodule
from src.engine.qcomplex import configure_q_complexes


@pytest.fixture(autouse=True)
def reset_engine_settings():
    """Shared Q-complexes keep their bases; budgets, workers and stores go back to defaults."""
    yield
    configure_q_complexes()


@pytest.fixture
def f2():
    return cyclic_ring(2)


@pytest.fixture
def f3():
    return cyclic_ring(3)


@pytest.fixture
def z4():
    return cyclic_ring(4)


@pytest.fixture
def v4():
    return FinAbGroup((2, 2))


@pytest.fixture
def f2_self(f2):
    return self_bimodule(f2)


@pytest.fixture
def cache_dir(tmp_path):
    return tmp_path / "cache"


@pytest.fixture
def m2f2_table(tmp_path):
    path = tmp_path / "m2f2.json"
    path.write_text(json.dumps(matrix_ring_payload(2, 2)))
    return path
