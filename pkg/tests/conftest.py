import hypothesis
import numpy as np
import pytest
from hypothesis import strategies as st

from pillar_qed import QdState, SystemParams

hypothesis.settings.register_profile(
    "default", deadline=None, max_examples=100, derandomize=True
)
hypothesis.settings.load_profile("default")

# fitted device constants used throughout (ueV)
DEVICE = dict(g=9.4, kappa_top=1.2, kappa_side=24.7, gamma=5.0, omega_c=1333596.0)


@pytest.fixture
def device_params() -> SystemParams:
    return SystemParams(**DEVICE)


@pytest.fixture
def resonant_qd(device_params) -> QdState:
    return QdState(omega_qd=device_params.omega_c, coupled=True)


@pytest.fixture
def empty_qd(device_params) -> QdState:
    return QdState(omega_qd=device_params.omega_c, coupled=False)


def rates():
    return st.floats(min_value=0.0, max_value=50.0, allow_nan=False, allow_infinity=False)


def positive_rates(min_value=0.05):
    return st.floats(min_value=min_value, max_value=50.0, allow_nan=False, allow_infinity=False)


def system_params(omega_min=1e3, omega_max=2e6):
    return st.builds(
        SystemParams,
        g=rates(),
        kappa_top=positive_rates(),
        kappa_side=rates(),
        gamma=rates(),
        omega_c=st.floats(min_value=omega_min, max_value=omega_max),
    )


def grid_around(center: float, half_span: float, n: int) -> np.ndarray:
    return np.linspace(center - half_span, center + half_span, n)
