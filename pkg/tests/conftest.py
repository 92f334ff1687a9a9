"""Shared fixtures: flat ambients, the null hyperplane and run configuration"""

import numpy as np
import pytest

from config.config_loader import load_config
from nullgeo.ambient import flat_ambient
from nullgeo.hypersurface import Embedding, LightlikeHypersurface
from nullgeo.tensor_fields import ExpressionField


@pytest.fixture
def minkowski4():
    return flat_ambient([-1.0, 1.0, 1.0, 1.0])


@pytest.fixture
def null_hyperplane(minkowski4):
    """t = x in R^4_1 with xi = d0 and the canonical screen"""
    return LightlikeHypersurface(
        minkowski4,
        Embedding.from_text(["x0", "x0", "x1", "x2"], 3),
        xi=ExpressionField.from_text(["1", "0", "0"], 3),
        screen=[ExpressionField.from_text(["0", "1", "0"], 3),
                ExpressionField.from_text(["0", "0", "1"], 3)],
    )


@pytest.fixture
def sample_points():
    return [np.array([0.1, -0.2, 0.3]), np.array([-0.4, 0.25, 0.05]), np.array([0.0, 0.0, 0.0])]


@pytest.fixture
def config():
    return load_config()


@pytest.fixture
def log_dir(tmp_path):
    return tmp_path / "logs"
