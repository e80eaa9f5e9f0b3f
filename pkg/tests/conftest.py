import pytest
from hypothesis import settings

from dyckfold.limit_law import limit_M_over_n_distribution, solve_F

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def f_table():
    return solve_F()


@pytest.fixture(scope="session")
def g_table(f_table):
    return limit_M_over_n_distribution(f_table)
