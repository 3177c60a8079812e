import numpy as np
import pytest

from gravitas.kinematics import stream
from gravitas.params import ModelParams


@pytest.fixture
def params():
    return ModelParams(g_newton=1.0, m=1.0, mu=0.05, lambda_probe=0.7,
                       alpha_tilde=1.0)


@pytest.fixture
def rng():
    return stream(20260810, 0)
