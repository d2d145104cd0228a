import numpy as np
import pytest

from crossmatch import build_distance_matrix, min_weight_perfect_matching


@pytest.fixture(scope="session", autouse=True)
def _compiled_solver():
    # pay the numba compile/cache load once, outside timed tests
    min_weight_perfect_matching(build_distance_matrix(np.eye(4)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
