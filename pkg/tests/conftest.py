import pytest

from cycsim.numtheory import make_group_spec


@pytest.fixture(scope="session")
def spec13():
    return make_group_spec(13)


@pytest.fixture(scope="session")
def spec5():
    return make_group_spec(5)


def pytest_addoption(parser):
    parser.addoption("--run-slow", action="store_true", default=False,
                     help="include slow large-prime checks")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-slow"):
        return
    skip = pytest.mark.skip(reason="slow; enable with --run-slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running large-prime checks")
