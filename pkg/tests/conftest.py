import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile(
    "thorough", deadline=None, max_examples=400, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def unit_vectors():
    """Hypothesis strategy for directions on the sphere, away from the zero vector."""
    comp = st.floats(-1.0, 1.0, allow_nan=False)
    return (
        st.tuples(comp, comp, comp)
        .filter(lambda v: np.linalg.norm(v) > 0.1)
        .map(lambda v: np.array(v) / np.linalg.norm(v))
    )


def momenta(scale=0.05):
    comp = st.floats(-scale, scale, allow_nan=False)
    return st.tuples(comp, comp, comp).map(np.array)


@pytest.fixture
def fig2_scenario():
    from qedsbs.model import PhysicalScenario

    return PhysicalScenario(1e5, 400.0, 0.02, 0.05)
