import json
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraclap import _kernels

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")


@needs_numba
@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.integers(1, 60), st.integers(1, 200))
def test_moments_and_fill_agree(seed, m, J, n):
    rng = np.random.default_rng(seed)
    t = np.sort(rng.uniform(0, np.pi, n))
    w = rng.uniform(0, 0.1, n)
    lam = rng.standard_normal((n, m, m))
    a = _kernels.cosine_moments_numba(t, w, lam, 2 * J)
    b = _kernels.cosine_moments_numpy(t, w, lam, 2 * J)
    scale = np.sum(w[:, None, None] * np.abs(lam))
    assert np.max(np.abs(a - b)) <= 1e-13 * max(scale, 1.0)
    fa = _kernels.galerkin_fill_numba(a, J)
    fb = _kernels.galerkin_fill_numpy(a, J)
    assert np.array_equal(fa, fb)


@needs_numba
@pytest.mark.parametrize("s, n", [(2.0, 1000), (1.5, 10**5), (4.0, 7), (1.0001, 3 * 10**5)])
def test_zeta_partial_sums_agree(s, n):
    a = _kernels.zeta_partial_sum_numba(s, n)
    b = _kernels.zeta_partial_sum_numpy(s, n)
    assert abs(a - b) <= 4e-16 * abs(a)


def test_zeta_partial_sum_small_exact():
    assert _kernels.zeta_partial_sum(2.0, 3) == pytest.approx(1 + 1 / 4 + 1 / 9, rel=1e-16)


def test_env_flag_selects_numpy_path():
    code = (
        "import json, numpy as np; from fraclap import _kernels, newton_solve, ProblemSpec;"
        "spec = ProblemSpec.from_strings(1.0, ['sin(t) - 0.3*x1^3'], ['0']);"
        "x, rep = newton_solve(spec, J=32);"
        "print(json.dumps({'backend': _kernels.backend(), 'a': x.a[:, 0].tolist(), 'ok': rep.converged}))"
    )
    out = {}
    for flag in ("1", "0"):
        env = dict(os.environ, FRACLAP_DISABLE_NUMBA=flag)
        proc = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, timeout=300)
        assert proc.returncode == 0, proc.stderr
        out[flag] = json.loads(proc.stdout)
    assert out["1"]["backend"] == "numpy"
    assert out["0"]["backend"] == ("numba" if _kernels.HAVE_NUMBA else "numpy")
    assert out["1"]["ok"] and out["0"]["ok"]
    assert np.max(np.abs(np.array(out["1"]["a"]) - np.array(out["0"]["a"]))) <= 1e-13
