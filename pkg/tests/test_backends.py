"""The compiled and interpreted kernels must agree, and backend selection must work."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from kprabhakar import BACKEND, OperatorParams, _fallback
from kprabhakar.fracops import _kernel_terms
from kprabhakar.special import _series_coefficients

native = pytest.importorskip("kprabhakar._native")


def test_backend_flag():
    assert BACKEND in ("native", "python")


@pytest.mark.parametrize("params", [
    (1.0, 1.0, 1.0, 1.0),
    (1.0, 0.7, 1.6, 1.3),
    (2.0, 1.0, 0.4, -1.2),
    (0.5, 2.0, 3.0, 0.0),
])
def test_ml_series_identical(params):
    log_coef, sign, _ = _series_coefficients(*params, 400)
    z = np.concatenate([np.linspace(-8.0, 8.0, 161), [0.0, 1e-300, -1e-3]])
    for tol in (1e-14, 1e-6):
        py = _fallback.ml_series(log_coef, sign, z, tol)
        c = native.ml_series(log_coef, sign, z, tol)
        for a, b in zip(py, c):
            assert np.array_equal(np.asarray(a), np.asarray(b))


def test_ml_series_unconverged_identical():
    log_coef, sign, _ = _series_coefficients(1.0, 0.1, 1.5, 1.0, 64)
    z = np.array([50.0, -50.0, 1e200, -1e200])  # the last two overflow
    py = _fallback.ml_series(log_coef, sign, z, 1e-14)
    c = native.ml_series(log_coef, sign, z, 1e-14)
    assert not np.any(py[3]) and not np.any(c[3])
    for a, b in zip(py, c):
        assert np.array_equal(np.asarray(a), np.asarray(b), equal_nan=True)


@pytest.mark.parametrize("params,window", [
    ((1.0, 1.0, 1.5, 0.5, 0.3), 1.0),
    ((1.5, 0.7, 2.5, 1.2, 0.4), 3.5),
    ((1.0, 1.0, 0.5, -1.0, 2.0), 1.0),
])
@pytest.mark.parametrize("n", [1, 2, 17, 500])
def test_kernel_weights_agree(params, window, n):
    alphas, log_scales, signs = _kernel_terms(OperatorParams(*params), window, 1e-14)
    ty, sy = _fallback.kernel_weights(alphas, log_scales, signs, n)
    tc, sc = native.kernel_weights(alphas, log_scales, signs, n)
    # libm and numpy round exp differently; cancellation in the cell moments
    # amplifies that by at most the cell count
    scale = max(np.max(np.abs(ty)), np.max(np.abs(sy)))
    assert np.max(np.abs(ty - tc)) <= 1e-13 * n * scale
    assert np.max(np.abs(sy - sc)) <= 1e-13 * n * scale


def test_causal_apply_identical():
    rng = np.random.default_rng(7)
    for n in (1, 5, 64, 300):
        toeplitz = rng.normal(size=n + 1)
        start = rng.normal(size=n + 1)
        f = rng.normal(size=n + 1)
        assert np.array_equal(_fallback.causal_apply(toeplitz, start, f),
                              native.causal_apply(toeplitz, start, f))


def test_causal_apply_definition():
    rng = np.random.default_rng(3)
    n = 9
    toeplitz, start, f = rng.normal(size=(3, n + 1))
    out = _fallback.causal_apply(toeplitz, start, f)
    assert out[0] == 0.0  # the integral vanishes at the lower terminal
    for i in range(1, n + 1):
        expect = sum(toeplitz[d] * f[i - d] for d in range(i)) + start[i] * f[0]
        assert out[i] == pytest.approx(expect, rel=1e-13, abs=1e-13)


def test_forced_python_backend_matches():
    code = (
        "import json;from kprabhakar import BACKEND, OperatorParams, lyapunov_bound, Interval;"
        "print(json.dumps([BACKEND, lyapunov_bound(OperatorParams(1.5, 0.7, 2.5, 1.2, 0.4), Interval(0, 1))]))"
    )
    env = dict(os.environ, KPRABHAKAR_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    backend, value = json.loads(out.stdout)
    assert backend == "python"
    from kprabhakar import Interval, lyapunov_bound

    assert value == pytest.approx(lyapunov_bound(OperatorParams(1.5, 0.7, 2.5, 1.2, 0.4), Interval(0, 1)),
                                  rel=1e-13)
