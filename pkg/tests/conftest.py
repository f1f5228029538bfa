"""Shared fixtures: warm the jitted kernels once so compile time never
lands inside a timed test."""

import numpy as np
import pytest

from nvbath import _kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    pos = np.array([[2.0, 0.0, 0.0], [0.0, 3.0, 0.0]])
    axis = np.array([0.0, 0.0, 1.0])
    _kernels.second_moment_sum(pos, axis)
    _kernels.phase_envelope(np.array([[0.5, -0.5]]), np.array([1.0, 2.0]),
                            np.array([0.0, 0.1]))
    _kernels.gaussian_mixture(np.array([1.0]), np.array([1.0]), 0.5,
                              np.array([0.5, 1.0, 1.5]))
    yield
