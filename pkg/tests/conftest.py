import functools
import pathlib

import pytest

from qgps.pipeline import PRECISION_ENV, analyse, load_problem, solve_analysis

PROBLEMS = pathlib.Path(__file__).resolve().parent.parent / "problems"


def problem_path(name):
    return str(PROBLEMS / f"{name}.qgps")


@functools.lru_cache(maxsize=None)
def analysis(name, precision=None):
    problem, _ = load_problem(problem_path(name), precision)
    return analyse(problem)


@functools.lru_cache(maxsize=None)
def solved(name, N, precision=None):
    an = analysis(name, precision)
    return an, solve_analysis(an, N)


def analysis_from_text(text, precision=None, params=None):
    from qgps.parsing import parse_problem

    return analyse(parse_problem(text, precision, params))


@pytest.fixture(autouse=True)
def _no_precision_env(monkeypatch):
    monkeypatch.delenv(PRECISION_ENV, raising=False)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
