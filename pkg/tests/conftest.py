"""Shared fixtures: the benchmark problem and cached closed-loop runs."""

import numpy as np
import pytest

from mpct_eadmm.offline import build_offline
from mpct_eadmm.pendulum import SimConfig, closed_loop, pendulum_problem


@pytest.fixture(scope="session")
def problem():
    return pendulum_problem()


@pytest.fixture(scope="session")
def offline(problem):
    return build_offline(problem)


@pytest.fixture(scope="session")
def zero_ref(problem):
    return np.zeros(problem.n + problem.m)


@pytest.fixture(scope="session")
def benchmark_x0():
    """Physical initial state of the benchmark scenario."""
    return np.array([0.0, 0.0, 20.0])


@pytest.fixture(scope="session")
def warm_trajectory(problem, offline, benchmark_x0, zero_ref):
    return closed_loop(problem, offline, SimConfig(), benchmark_x0, zero_ref, warmstart=True)


@pytest.fixture(scope="session")
def cold_trajectory(problem, offline, benchmark_x0, zero_ref):
    return closed_loop(problem, offline, SimConfig(), benchmark_x0, zero_ref, warmstart=False)
