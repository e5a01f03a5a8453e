import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def dense_solve(pencil, z, b):
    """Reference solution of (H - zS)u = b by a dense solve."""
    return np.linalg.solve(pencil.shifted_matrix(z) if not pencil.sparse
                           else pencil.shifted_matrix(z).toarray(), b)
