from pathlib import Path

import numpy as np
import pytest

from tailrank.config import get_data_dir

FIXTURES = Path(__file__).parent / "fixtures"

YEAST_FILES = ("yeast-train.arff", "yeast-test.arff")


def yeast_paths():
    data_dir = get_data_dir()
    return [data_dir / name for name in YEAST_FILES]


def yeast_available() -> bool:
    return all(path.is_file() for path in yeast_paths())


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(20240607))


@pytest.fixture
def demo_matrix_at_two() -> np.ndarray:
    """The 3x4 completion example filled in with 2 at both unknown entries."""
    return np.array([
        [2.0, 1.0, 2.0, 1.0],
        [1.0, 1.0, 2.0, 2.0],
        [1.0, 1.0, 2.0, 2.0],
    ])
