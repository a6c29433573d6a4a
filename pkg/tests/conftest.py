import numpy as np
import pytest

from voxelvist.world import default_block_classes
from voxelvist import worlds


@pytest.fixture(scope="session")
def classes():
    return default_block_classes()


@pytest.fixture(scope="session")
def sealed():
    return worlds.sealed_box()


@pytest.fixture(scope="session")
def plane():
    # big enough that a 10-step diamond and an r=8 view never reach the edge
    return worlds.flat_plane(31, 31, 12)


@pytest.fixture(scope="session")
def demo():
    return worlds.bundled_demo_world()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def record():
    """Store the one-line verdict of an acceptance criterion."""

    def _record(number: int, title: str, ok: bool, detail: str) -> bool:
        ACCEPTANCE[number] = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        print(ACCEPTANCE[number])
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[number])
