import pytest

from vipho.g2p import default_dictionary
from vipho.inventory import build_inventory, build_vocabulary


@pytest.fixture(scope="session")
def inv():
    return build_inventory()


@pytest.fixture(scope="session")
def seed_dict():
    return default_dictionary()


@pytest.fixture(scope="session")
def vocab(seed_dict):
    return build_vocabulary(seed_dict)
