"""Compare the compiled and interpreted hot kernels.

Usage: python benchmarks/bench_kernels.py [--repeat 5] [--n 2000]

Each kernel runs on identical inputs in both backends; the script reports the
best wall time of ``--repeat`` runs, the speed-up and the largest relative
difference between the two results.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from kprabhakar import _fallback
from kprabhakar.fracops import _kernel_terms
from kprabhakar.special import OperatorParams, _series_coefficients

try:
    from kprabhakar import _native
except ImportError:  # extension not built
    _native = None


def _cases(n: int):
    p = OperatorParams(1.0, 0.7, 1.6, 1.3, 0.8)
    log_coef, sign, _ = _series_coefficients(p.k, p.rho, p.beta, p.gamma, 400)
    z = np.linspace(-6.0, 6.0, 2000)
    alphas, log_scales, signs = _kernel_terms(p, 2.0, 1e-14)
    toeplitz, start = _fallback.kernel_weights(alphas, log_scales, signs, n)
    f = np.sin(np.linspace(0.0, 2.0, n + 1))
    return {
        "ml_series": ("ml_series", (log_coef, sign, z, 1e-14)),
        "kernel_weights": ("kernel_weights", (alphas, log_scales, signs, n)),
        "causal_apply": ("causal_apply", (toeplitz, start, f)),
    }


def _max_rel(a, b) -> float:
    a = a if isinstance(a, tuple) else (a,)
    b = b if isinstance(b, tuple) else (b,)
    worst = 0.0
    for x, y in zip(a, b):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        scale = np.maximum(np.abs(x), np.abs(y))
        scale[scale == 0.0] = 1.0
        worst = max(worst, float(np.max(np.abs(x - y) / scale)))
    return worst


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5, help="timing repetitions (best is kept)")
    parser.add_argument("--n", type=int, default=2000, help="grid cells for the quadrature kernels")
    args = parser.parse_args(argv)

    if _native is None:
        print("compiled extension not available; only the interpreted backend can run")
        return

    print(f"{'kernel':<16}{'python [s]':>12}{'native [s]':>12}{'speed-up':>10}{'max rel diff':>14}")
    for label, (name, call_args) in _cases(args.n).items():
        py_fn = getattr(_fallback, name)
        c_fn = getattr(_native, name)
        t_py = min(timeit.repeat(lambda: py_fn(*call_args), number=1, repeat=args.repeat))
        t_c = min(timeit.repeat(lambda: c_fn(*call_args), number=1, repeat=args.repeat))
        diff = _max_rel(py_fn(*call_args), c_fn(*call_args))
        print(f"{label:<16}{t_py:>12.4g}{t_c:>12.4g}{t_py / t_c:>10.1f}{diff:>14.2e}")


if __name__ == "__main__":
    main()
