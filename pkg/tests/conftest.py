import pytest

from nvgate.config import default_config
from nvgate.levels import dipole_from_config, scheme_from_config
from nvgate.scattering import (
    amplitudes,
    find_balance,
    find_magic,
    rate_params_from_config,
)


@pytest.fixture(scope="session")
def cfg():
    return default_config()


@pytest.fixture(scope="session")
def scheme(cfg):
    return scheme_from_config(cfg)


@pytest.fixture(scope="session")
def dipole(cfg):
    return dipole_from_config(cfg)


@pytest.fixture(scope="session")
def rates(cfg):
    return rate_params_from_config(cfg)


@pytest.fixture(scope="session")
def nu_magic(scheme, dipole):
    return find_magic(scheme, dipole)


@pytest.fixture(scope="session")
def nu_balance(scheme, dipole):
    return find_balance(scheme, dipole)


@pytest.fixture(scope="session")
def amps_magic(scheme, dipole, nu_magic):
    return amplitudes(scheme, dipole, nu_magic)


@pytest.fixture(scope="session")
def amps_balance(scheme, dipole, nu_balance):
    return amplitudes(scheme, dipole, nu_balance)
