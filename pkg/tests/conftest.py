import pytest

import helpers
import thermosched as ts


@pytest.fixture(scope="session")
def mek_platform():
    return helpers.MEK


@pytest.fixture(scope="session")
def mek_coefficients():
    return helpers.MEK_COEFF


@pytest.fixture(scope="session")
def mixed_pool():
    return helpers.MIXED_POOL


@pytest.fixture
def example_window():
    """The three-task single-window reference instance plus its assignment."""
    instance = helpers.worked_example()
    return instance, helpers.worked_example_assignment(instance)


@pytest.fixture
def seven_tasks():
    return helpers.seven_task_layout()
