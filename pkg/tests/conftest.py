"""
Pytest configuration and shared fixtures.
"""
from collections.abc import Generator
from pathlib import Path

import numpy as np
import pytest

from skinnet.autodiff import default_dtype
from skinnet.data.dataset import write_image_png, write_mask_png
from skinnet.data.models import Sample
from skinnet.data.synthetic import synthetic_dataset
from skinnet.network.model import ModelSpec


# ==================== Session-scoped fixtures ====================

@pytest.fixture(scope="session")
def synthetic_samples() -> list[Sample]:
    """Ten reproducible 32x32 synthetic samples."""
    return synthetic_dataset(10, size=32, seed=0)


# ==================== Function-scoped fixtures ====================

@pytest.fixture
def rng() -> np.random.Generator:
    """Provide a seeded random generator."""
    return np.random.default_rng(1234)


@pytest.fixture
def float64() -> Generator[None, None, None]:
    """Construct tensors in 64-bit for the duration of the test."""
    with default_dtype(np.float64):
        yield


@pytest.fixture
def toy_spec() -> ModelSpec:
    """Smallest useful architecture: one level, growth 2, 8x8 input, two rates."""
    return ModelSpec(depth=1, base_growth=2, input_size=8, rates=(1, 2))


@pytest.fixture
def small_spec() -> ModelSpec:
    """Two levels at 16x16, fast enough for end-to-end checks."""
    return ModelSpec(depth=2, base_growth=2, input_size=16, rates=(1, 2, 4))


@pytest.fixture
def temp_output_dir(tmp_path: Path) -> Path:
    """Create a temporary output directory."""
    output_dir = tmp_path / "test_output"
    output_dir.mkdir()
    return output_dir


@pytest.fixture
def isic_dir(tmp_path: Path) -> Path:
    """Four image/mask pairs in the ISIC layout, 40x40 pixels."""
    root = tmp_path / "isic"
    for s in synthetic_dataset(4, size=40, seed=7):
        write_image_png(s.image, root / f"{s.id}.png")
        write_mask_png(s.mask, root / f"{s.id}_segmentation.png")
    return root


def pytest_configure(config):
    """Configure custom pytest markers."""
    config.addinivalue_line(
        "markers", "unit: mark test as a unit test (fast, isolated)"
    )
    config.addinivalue_line(
        "markers", "integration: mark test as an integration test"
    )
    config.addinivalue_line("markers", "slow: mark test as slow-running")
