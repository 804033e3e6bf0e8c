import importlib
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from finsim import kernels
from finsim.body import BodyParams

MODS = kernels.backends()
needs_compiled = pytest.mark.skipif("compiled" not in MODS, reason="compiled extension not built")


def body_args(body=BodyParams()):
    grid = body.grid()
    s = grid.points()
    return (s, grid.weights(), body.diameter(s), np.asarray(body.section_masses), np.asarray(body.section_coms),
            body.spine_length, body.water_density, body.drag_coeff, body.fin_area, body.added_mass_coeff)


@needs_compiled
def test_compiled_is_default():
    assert kernels.BACKEND == "compiled"


@needs_compiled
def test_shape_terms_agree():
    py, c = MODS["python"], MODS["compiled"]
    u = np.concatenate([np.linspace(-3, 3, 2001), np.linspace(-0.1, 0.1, 2001)])
    for a in (0.0, 0.3, 1.0):
        for x, y in zip(py.shape_terms(u, a, 0.25), c.shape_terms(u, a, 0.25)):
            assert np.max(np.abs(x - y)) < 1e-15


@needs_compiled
def test_tail_integrals_agree():
    rng = np.random.default_rng(0)
    ta = rng.uniform(-2.5, 2.5, 500)
    w = rng.uniform(-10, 10, 500)
    a = MODS["python"].tail_integrals(ta, w, *body_args())
    b = MODS["compiled"].tail_integrals(ta, w, *body_args())
    assert np.allclose(a, b, rtol=1e-11, atol=1e-15)


@needs_compiled
def test_swim_rk4_agree():
    t = np.linspace(0, 4, 8001)
    f = 0.3 + 0.3 * np.cos(4 * math.pi * t)
    m = 0.02 * np.sin(2 * math.pi * t)
    args = (np.array([0.1, -0.2, 0.3, 0.05, 0.0]), f, m, 1e-3, 2.05, 0.03, 4.0, 0.12)
    assert np.array_equal(MODS["python"].swim_rk4(*args), MODS["compiled"].swim_rk4(*args))


def test_swim_rk4_shape_check():
    with pytest.raises(ValueError):
        kernels.swim_rk4(np.zeros(5), np.zeros(4), np.zeros(4), 1e-3, 1.0, 1.0, 1.0, 1.0)


def test_env_forces_python_backend():
    code = "import finsim.kernels as k; print(k.BACKEND)"
    env = dict(os.environ, FINSIM_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
