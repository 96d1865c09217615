import numpy as np
import pytest

from levelcross.model import (CouplingSpec, CrossingModel, Mirror, Polynomial,
                              ShiftedHarmonic, reference_model)


@pytest.fixture(scope="session")
def ref():
    """Reference pair: V1 = (x+1)^2 - 1, V2 its mirror, r0 = 1."""
    return reference_model(r0=1.0, r1=0.0)


@pytest.fixture(scope="session")
def ref_r1():
    return reference_model(r0=0.0, r1=1.0)


@pytest.fixture(scope="session")
def ref_uncoupled():
    return reference_model(r0=0.0, r1=0.0)


@pytest.fixture(scope="session")
def asym():
    """Distinct wells: V2 = 2 (x - 0.8)^2 - 1.28, crossing intact."""
    return CrossingModel(
        v1=ShiftedHarmonic(c=-1.0, w=1.0, d=-1.0),
        v2=ShiftedHarmonic(c=0.8, w=2.0, d=-1.28),
        coupling=CouplingSpec(r0=Polynomial((1.0,)), r1=Polynomial((0.0,))),
        window=(0.5, 1.3),
        symmetric=False,
    )


@pytest.fixture(scope="session")
def quartic_sym():
    """Polynomial well pair with a quartic term; symmetric."""
    v1 = Polynomial((0.0, 2.4, 1.6, 0.4, 0.1))
    return CrossingModel(
        v1=v1, v2=Mirror(of=v1),
        coupling=CouplingSpec(r0=Polynomial((1.0,)), r1=Polynomial((0.0,))),
        window=(0.5, 1.4),
        symmetric=True,
    )


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
