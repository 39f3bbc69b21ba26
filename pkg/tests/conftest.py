import numpy as np
import pytest

from src.problems.models import RotationalQuadratic
from src.problems.service import make_figure1_problem


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def quadratic():
    """rho=1, a=2: interaction dominant with alpha=1 at eta=3."""
    return RotationalQuadratic(rho=1.0, a=2.0)


@pytest.fixture
def figure1():
    return make_figure1_problem


def write_config(path, body: str) -> str:
    path.write_text(body)
    return str(path)
