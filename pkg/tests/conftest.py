import numpy as np
import pytest

from wgqed import (
    EXPONENTIAL_CONTINUUM,
    GAPLESS_CHAIN,
    KernelSpec,
    PhotonicModel,
    QubitArray,
)

LAMBDA0 = 2.0 * np.pi


@pytest.fixture(scope="session")
def exp_model():
    """Exponential-cutoff continuum at the workhorse parameters."""
    return PhotonicModel(kind=EXPONENTIAL_CONTINUUM, coupling=0.04, cutoff=10.0)


@pytest.fixture(scope="session")
def exp_spec(exp_model):
    return KernelSpec(model=exp_model)


@pytest.fixture(scope="session")
def chain800():
    return PhotonicModel(
        kind=GAPLESS_CHAIN, coupling=0.04, length=20 * LAMBDA0, mode_count=800
    )


@pytest.fixture(scope="session")
def single_qubit():
    return QubitArray(gaps=[1.0], positions=[0.0])
