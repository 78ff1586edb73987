import pytest

from rankstop.distributions import builtin_suite
from rankstop.fullinfo import solve_full_info
from rankstop.relranks import compute_pq


@pytest.fixture(scope="session")
def builtins():
    return builtin_suite()


@pytest.fixture(scope="session")
def solutions(builtins):
    """Full-information solutions of every built-in, computed once."""
    return {name: solve_full_info(dist) for name, dist in builtins.items()}


@pytest.fixture(scope="session")
def pq_params(builtins):
    """(p, q) of every built-in, computed once."""
    return {name: compute_pq(dist) for name, dist in builtins.items()}
