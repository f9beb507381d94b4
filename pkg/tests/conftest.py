import numpy as np
import pytest


@pytest.fixture
def x3() -> np.ndarray:
    return np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0]])


@pytest.fixture
def x4(x3) -> np.ndarray:
    # x3 plus its negated mean, the four-row set used by the trimming goldens.
    return np.vstack([x3, -x3.mean(axis=0)])


def random_vector_set(rng: np.random.Generator, n: int | None = None, d: int | None = None) -> np.ndarray:
    n = int(rng.integers(2, 9)) if n is None else n
    d = int(rng.integers(1, 6)) if d is None else d
    return rng.normal(size=(n, d)) * 10.0
