import functools

import pytest

from superpositivity.eigenforms import hecke_basis
from superpositivity.lfunction import CompletedLFunction


@functools.lru_cache(maxsize=None)
def form(k: int, index: int = 0, N: int = 400):
    return hecke_basis(k, N)[index]


@functools.lru_cache(maxsize=None)
def completed(k: int, index: int = 0):
    return CompletedLFunction(form(k, index))


@pytest.fixture(scope="session")
def delta_form():
    return form(12)


@pytest.fixture(scope="session")
def delta_L():
    return completed(12)


@functools.lru_cache(maxsize=None)
def moment_ratio(K: float, ell: int, delta: float, t: float = 0.0):
    """(LHS, main total) of the twisted moment; shared by several test files."""
    from superpositivity.mollifier import twisted_moment_lhs, twisted_moment_main
    lhs = twisted_moment_lhs(ell, delta, t, K).value
    # delta = 0.02 at K = 30 sits above the delta <= 1/100 range check
    main = twisted_moment_main(ell, delta, t, K, check_range=False).total
    return lhs, main


@functools.lru_cache(maxsize=None)
def constants_report():
    from superpositivity.constants import tail_and_total
    return tail_and_total()


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance
    lines = [line for _, (_, line) in sorted(test_acceptance.RESULTS.items())]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
