import numpy as np
import pytest

from iconix.backends.mock import MockBackend
from iconix.imaging import PixelFormat, Raster


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and item.module.__name__ == "test_acceptance":
        verdict = "PASS" if report.passed else "FAIL"
        print(f"\nACCEPTANCE {verdict}: {item.name}")


@pytest.fixture(scope="session")
def mock_backend():
    return MockBackend()


@pytest.fixture
def white_4x4():
    return Raster.from_array(np.full((4, 4), 255, dtype=np.uint8))


@pytest.fixture
def black_4x4():
    return Raster.from_array(np.zeros((4, 4), dtype=np.uint8))


def gray(values) -> Raster:
    """Shorthand: nested list -> Gray8 raster."""
    return Raster.from_array(np.array(values, dtype=np.uint8))


def rgba(values) -> Raster:
    arr = np.array(values, dtype=np.uint8)
    assert arr.ndim == 3 and arr.shape[2] == 4
    return Raster.from_array(arr)


def random_gray(rng: np.random.Generator, width: int, height: int) -> Raster:
    return Raster.from_array(rng.integers(0, 256, size=(height, width), dtype=np.uint8))
