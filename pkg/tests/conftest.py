from pathlib import Path

import pytest

from treegreen import Coefficients, build_tree, load_config
from treegreen.green import GreensFunction

CONFIGS = Path(__file__).parent / "configs"


def problem(name):
    """Built problem from ``tests/configs/<name>.json``."""
    return load_config(CONFIGS / f"{name}.json").build()


def greens(name, **kw):
    pr = problem(name)
    return GreensFunction(pr.tree, pr.coeffs, pr.bc, **kw)


def ytree(lengths=(1.0, 1.0, 1.0), root="phi"):
    return build_tree(
        ["phi", "n", "b1", "b2"],
        [("e0", "phi", "n", lengths[0]), ("e1", "n", "b1", lengths[1]), ("e2", "n", "b2", lengths[2])],
        root=root,
    )


def interval(length=1.0):
    return build_tree(["a", "b"], [("e", "a", "b", length)], root="a")


@pytest.fixture
def y_tree():
    return ytree()


@pytest.fixture
def unit_interval():
    return interval()


@pytest.fixture(scope="session")
def y_green():
    t = ytree()
    return GreensFunction(t, Coefficients(t))


@pytest.fixture(scope="session")
def river_green():
    return greens("ytree_river")


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
