import numpy as np
import pytest

from strobomap import ForcingParams, SystemParams, VectorFieldSpec

LIN_A, LIN_B, THETA, T_LIN = -1.0, 0.5, 1.0, 1.9


@pytest.fixture(scope="session")
def linear_field():
    return VectorFieldSpec.linear(LIN_A, LIN_B)


@pytest.fixture(scope="session")
def quintic_field():
    return VectorFieldSpec.quintic(-10.0, 0.7, 0.01)


@pytest.fixture(scope="session")
def arctan_field():
    return VectorFieldSpec.arctan(100.0, 0.1)


@pytest.fixture(scope="session")
def l1(linear_field):
    """System factory for the reference linear model (theta = 1, T = 1.9)."""

    def make(A, d=0.5, T=T_LIN):
        return SystemParams(field=linear_field,
                            forcing=ForcingParams(A=A, d=d, T=T), theta=THETA)

    return make


@pytest.fixture(scope="session")
def linear_template(l1):
    return l1(1.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260810)
