import os
import subprocess
import sys

import numpy as np
import pytest

from conftest import random_state
from wfmarl import kernels
from wfmarl.farm import effective_velocities, effective_velocities_reference, rasterize_flow

needs_compiled = pytest.mark.skipif(kernels.compiled_superposed_velocity is None,
                                    reason="compiled extension not built")


def test_fallback_matches_scalar_reference(rng):
    for _ in range(50):
        state = random_state(rng, int(rng.integers(1, 12)))
        np.testing.assert_allclose(effective_velocities(state, kernels.python_superposed_velocity),
                                   effective_velocities_reference(state), rtol=1e-12, atol=1e-12)


@needs_compiled
def test_compiled_matches_fallback(rng):
    for _ in range(50):
        state = random_state(rng, int(rng.integers(1, 12)))
        np.testing.assert_allclose(effective_velocities(state, kernels.compiled_superposed_velocity),
                                   effective_velocities(state, kernels.python_superposed_velocity),
                                   rtol=1e-13, atol=1e-13)


@needs_compiled
def test_compiled_matches_fallback_on_raster(rng):
    state = random_state(rng, 6)
    args = (state, (-300.0, 6000.0), (-500.0, 500.0), (41, 17))
    a = rasterize_flow(*args, kernel=kernels.compiled_superposed_velocity)[2]
    b = rasterize_flow(*args, kernel=kernels.python_superposed_velocity)[2]
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-13)


def test_environment_forces_fallback():
    env = dict(os.environ, WFMARL_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from wfmarl import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_backend_reported():
    assert kernels.BACKEND in ("compiled", "python")
    if kernels.BACKEND == "compiled":
        assert kernels.superposed_velocity is kernels.compiled_superposed_velocity
