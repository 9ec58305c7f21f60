"""Parity checks between the compiled kernels and the pure-Python reference."""

import os
import subprocess
import sys

import numpy as np
import pytest

from s2body import _kernels_py
from s2body.kernels import BACKEND, COT_GUARD, NEWT_GUARD

try:
    from s2body import _kernels_c
except ImportError:
    _kernels_c = None

needs_c = pytest.mark.skipif(_kernels_c is None,
                             reason="compiled extension not built")


def tangent_config(rng, n, sphere=True):
    m = rng.uniform(0.5, 2.0, size=n)
    q = rng.normal(size=(n, 3))
    if sphere:
        q /= np.linalg.norm(q, axis=1)[:, None]
        v = rng.normal(size=(n, 3)) * 0.3
        v -= (np.sum(v * q, axis=1))[:, None] * q
        r = np.ones(n)
    else:
        v = rng.normal(size=(n, 3)) * 0.3
        r = np.ones(n)
    return m, q, v, r


def test_backend_reported():
    assert BACKEND in ("c", "python")


def test_env_override_forces_python_backend():
    env = dict(os.environ, S2BODY_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import s2body; print(s2body.BACKEND)"],
        capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == "python"


@needs_c
@pytest.mark.parametrize("sphere,potential,guard", [
    (True, 0, COT_GUARD),
    (True, 1, NEWT_GUARD),
    (False, 1, NEWT_GUARD),
])
def test_nbody_backends_agree(sphere, potential, guard):
    rng = np.random.default_rng(42)
    m, q, v, r = tangent_config(rng, 4, sphere=sphere)
    args = (m, q, v, r, 1e-3, 200, sphere, potential, guard)
    pp, vp, dp, ip, jp = _kernels_py.nbody_rk4(*args)
    pc, vc, dc, ic, jc = _kernels_c.nbody_rk4(*args)
    assert dp == dc == 200 and ip == ic and jp == jc
    assert np.max(np.abs(pp - pc)) < 1e-9
    assert np.max(np.abs(vp - vc)) < 1e-9


@needs_c
def test_euler_backends_agree():
    rng = np.random.default_rng(7)
    I = np.array([1.0, 2.0, 3.0])
    om0 = rng.normal(size=3)
    a = _kernels_py.euler_rk4(I, om0, 1e-3, 500)
    b = _kernels_c.euler_rk4(I, om0, 1e-3, 500)
    assert np.max(np.abs(a - b)) < 1e-13


@needs_c
def test_singular_abort_parity():
    # head-on pair on the sphere, same collision step and same flagged pair
    m = np.array([1.0, 1.0])
    q = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    v = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0]])
    r = np.ones(2)
    args = (m, q, v, r, 1e-2, 500, True, 0, COT_GUARD)
    pp, vp, dp, ip, jp = _kernels_py.nbody_rk4(*args)
    pc, vc, dc, ic, jc = _kernels_c.nbody_rk4(*args)
    assert dp == dc < 500
    assert (ip, jp) == (ic, jc) == (0, 1)
    assert pp.shape == pc.shape == (dp + 1, 2, 3)
    assert np.max(np.abs(pp - pc)) < 1e-10
