import numpy as np
import pytest

from prefec import Constellation, build_square_qam


@pytest.fixture(scope="session")
def qam4():
    return build_square_qam(4)


@pytest.fixture(scope="session")
def qam16():
    return build_square_qam(16)


@pytest.fixture(scope="session")
def qam64():
    return build_square_qam(64)


@pytest.fixture()
def tiny_constellation():
    """2-PAM-like layout with explicit arrays, for constructor edge tests."""
    points = np.array([[1.0], [-1.0]])
    labels = np.array([[0], [1]], dtype=np.uint8)
    return Constellation(points=points, labels=labels, probs=np.array([0.5, 0.5]))
