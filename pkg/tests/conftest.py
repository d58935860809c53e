import numpy as np
import pytest

from rotorchain.sites import RotorParams, build_basis
from rotorchain.units import (WATER_A_CM1, WATER_B_CM1, WATER_C_CM1,
                              WATER_MU_DEBYE, cm1_to_hartree, debye_to_ebohr)


def water_params(j_max: int = 1) -> RotorParams:
    return RotorParams.asymmetric_top(
        a=cm1_to_hartree(WATER_A_CM1),
        b=cm1_to_hartree(WATER_B_CM1),
        c=cm1_to_hartree(WATER_C_CM1),
        mu=debye_to_ebohr(WATER_MU_DEBYE),
        j_max=j_max,
    )


@pytest.fixture(scope="session")
def water_basis():
    return build_basis(water_params())


@pytest.fixture(scope="session")
def linear_basis():
    return build_basis(RotorParams.linear(b=1.0, mu=1.0, j_max=1))


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240811)
