import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def dense_solve(a, b):
    """Dense LU oracle for small systems."""
    return np.linalg.solve(np.asarray(a.todense()), np.asarray(b))
