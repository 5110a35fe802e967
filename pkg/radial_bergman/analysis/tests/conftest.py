import pytest

from radial_bergman.types.config import Settings


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    for name in ("BERGMAN_QUAD_REL_TOL", "BERGMAN_K_LADDER", "BERGMAN_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    Settings.reset()
    yield
    Settings.reset()
