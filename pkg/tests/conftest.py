"""Shared, session-cached artifacts: catalog entries, figure renders and traces.

The fig2 render dominates wall time (tens of seconds on one core), so it is
computed once per worker count and reused by every module that needs it.
"""

import json
import time

import pytest

from basins.diagnostics import trace_boundary
from basins.render import RenderJob, render, resolve_entry

_renders = {}
_traces = {}
render_seconds = {}


def preset_image(name, workers=4, **overrides):
    key = (name, workers, tuple(sorted(overrides.items())))
    if key not in _renders:
        t0 = time.perf_counter()
        _renders[key] = render(RenderJob.preset(name, **overrides), workers=workers)
        render_seconds[key] = time.perf_counter() - t0
    return _renders[key]


def job_image(job, workers=4):
    key = ("job", json.dumps(job.echo(), sort_keys=True), workers)
    if key not in _renders:
        _renders[key] = render(job, workers=workers)
    return _renders[key]


def traced(key, img, tol):
    if (key, tol) not in _traces:
        _traces[(key, tol)] = trace_boundary(img, tol)
    return _traces[(key, tol)]


@pytest.fixture(scope="session")
def ex1():
    return resolve_entry("ex1", {"b": -1.0})


@pytest.fixture(scope="session")
def ex2s():
    return resolve_entry("ex2-super", {"b": -1.0})


@pytest.fixture(scope="session")
def ex3():
    return resolve_entry("ex3", {})


@pytest.fixture(scope="session")
def ex4():
    return resolve_entry("ex4", {})


@pytest.fixture(scope="session")
def ex5():
    return resolve_entry("ex5", {})


@pytest.fixture(scope="session")
def tan2():
    return resolve_entry("tan", {})


@pytest.fixture(scope="session")
def fig2():
    return preset_image("fig2")


@pytest.fixture(scope="session")
def fig2_curve(fig2):
    return traced("fig2", fig2, 1e-3)


acceptance_lines = []


def pytest_terminal_summary(terminalreporter):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)
