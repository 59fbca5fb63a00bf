import json
import sys
from pathlib import Path

import pytest

from qimcrypt import kernels
from qimcrypt.qimage import GrayImage
from qimcrypt.cipher import EncryptionKey

sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = Path(__file__).parent / "fixtures"

BACKENDS = ["numpy"]
try:
    from qimcrypt import _kernels as _compiled
    BACKENDS.insert(0, "cython")
except ImportError:  # extension not built
    _compiled = None


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run the test once per available kernel implementation."""
    impl = _compiled if request.param == "cython" else kernels._kernels_py
    monkeypatch.setattr(kernels, "apply_mcx", impl.apply_mcx)
    monkeypatch.setattr(kernels, "apply_1q", impl.apply_1q)
    return request.param


@pytest.fixture(scope="session")
def derived():
    return json.loads((FIXTURES / "derived.json").read_text())


@pytest.fixture
def test_image():
    return GrayImage(1, (255, 0, 200, 100))


@pytest.fixture
def paper_key():
    return EncryptionKey(1, 1, 1, 1, 1, 0.5557924316949603, 3.9816188727791215)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
