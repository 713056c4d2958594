"""Green's function of the two-point problem ``D y + q y = 0``, ``y(a) = y(b) = 0``.

With ``phi(x) = x^(beta/k-1) E(omega x^(rho/k))`` and ``L = b - a``,

    G(t, u) = phi(t-a) phi(b-u) / (k phi(L)) - [u <= t] phi(t-u) / k.

On a uniform grid every argument is a multiple of the spacing, so the whole
matrix is built from the single vector ``phi(i h)``.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .fracops import Interval
from .special import DEFAULT_TOL, OperatorParams, ml_k_values

ZERO_FLOOR = 1e-12
_ORDER_SNAP = 1e-12


def check_bvp_params(p: OperatorParams, *, allow_signs: bool = False) -> None:
    """Reject parameters outside the boundary-value domain.

    Requires ``1 < beta/k <= 2``, and ``omega >= 0``, ``gamma >= 0`` unless
    ``allow_signs`` is set (exploratory use, where positivity is not assured).
    """
    r = p.order
    if not (r > 1.0 and r <= 2.0 + _ORDER_SNAP):
        raise DomainError(f"boundary value problem needs 1 < beta/k <= 2, got beta/k={r!r}")
    if allow_signs:
        return
    if p.omega < 0.0:
        raise DomainError(f"boundary value problem needs omega >= 0, got {p.omega!r}")
    if p.gamma < 0.0:
        raise DomainError(f"boundary value problem needs gamma >= 0, got {p.gamma!r}")


def phi(p: OperatorParams, x, tol: float = DEFAULT_TOL) -> np.ndarray:
    """``x^(beta/k-1) E(omega x^(rho/k))`` for ``x >= 0`` (zero at ``x = 0``)."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0.0):
        raise DomainError("phi is evaluated at nonnegative distances only")
    e = ml_k_values(p, p.omega * x ** (p.rho / p.k), tol)
    return x ** (p.order - 1.0) * e


def _check_point(iv: Interval, name: str, x: float) -> float:
    if not iv.contains(x):
        raise DomainError(f"{name}={x!r} lies outside [{iv.a!r}, {iv.b!r}]")
    return min(max(float(x), iv.a), iv.b)


def green_eval(p: OperatorParams, iv: Interval, t: float, u: float, tol: float = DEFAULT_TOL,
               *, allow_signs: bool = False) -> float:
    """``G(t, u)`` at one point of the square ``[a, b]^2``."""
    check_bvp_params(p, allow_signs=allow_signs)
    t = _check_point(iv, "t", t)
    u = _check_point(iv, "u", u)
    if u == iv.a:
        return 0.0
    ft, fu, fl, fd = phi(p, [t - iv.a, iv.b - u, iv.length, max(t - u, 0.0)], tol)
    return float((ft / fl) * fu / p.k - (fd / p.k if u <= t else 0.0))


def green_diag(p: OperatorParams, iv: Interval, u: float, tol: float = DEFAULT_TOL,
               *, allow_signs: bool = False) -> float:
    """``h(u) = G(u, u) = phi(u-a) phi(b-u) / (k phi(L))``."""
    check_bvp_params(p, allow_signs=allow_signs)
    u = _check_point(iv, "u", u)
    fa, fb, fl = phi(p, [u - iv.a, iv.b - u, iv.length], tol)
    return float((fa / fl) * fb / p.k)


def green_max_closed_form(p: OperatorParams, iv: Interval, tol: float = DEFAULT_TOL,
                          *, allow_signs: bool = False) -> tuple[float, float]:
    """Location and value of the maximum of ``G``: ``((a+b)/2, h((a+b)/2))``.

    The value is ``(L/4)^(beta/k-1) E(omega (L/2)^(rho/k))^2 / (k E(omega L^(rho/k)))``.
    """
    check_bvp_params(p, allow_signs=allow_signs)
    length = iv.length
    half, full = ml_k_values(
        p, p.omega * np.array([(0.5 * length) ** (p.rho / p.k), length ** (p.rho / p.k)]), tol
    )
    value = (0.25 * length) ** (p.order - 1.0) * half * half / (p.k * full)
    return iv.midpoint, float(value)


def _rows(phis: np.ndarray, k: float, lo: int, hi: int) -> np.ndarray:
    n = phis.shape[0] - 1
    i = np.arange(lo, hi)[:, None]
    j = np.arange(n + 1)[None, :]
    product = (phis[i] / phis[n]) * phis[n - j] / k
    diff = np.where(j <= i, phis[np.clip(i - j, 0, n)] / k, 0.0)
    out = product - diff
    out[:, 0] = 0.0  # G(t, a) vanishes identically; avoid cancellation noise
    return out


def green_matrix(p: OperatorParams, iv: Interval, n: int, tol: float = DEFAULT_TOL, *,
                 threads: int = 1, allow_signs: bool = False) -> np.ndarray:
    """``G(t_i, u_j)`` on the ``(n+1) x (n+1)`` uniform grid.

    Rows are independent, so splitting them over ``threads`` workers leaves
    every entry unchanged.
    """
    check_bvp_params(p, allow_signs=allow_signs)
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}")
    phis = phi(p, iv.grid(n) - iv.a, tol)
    if threads <= 1:
        return _rows(phis, p.k, 0, n + 1)
    bounds = np.linspace(0, n + 1, min(threads, n + 1) + 1).astype(int)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        blocks = list(pool.map(lambda lh: _rows(phis, p.k, *lh), zip(bounds[:-1], bounds[1:])))
    return np.vstack(blocks)


@dataclass(frozen=True, eq=False)
class GreenGrid:
    """``G`` on a uniform grid plus the extremal statistics of the scan."""

    interval: Interval
    n: int
    values: np.ndarray
    min_entry: float
    column_argmax: np.ndarray
    diag_argmax: int
    grid_max: float
    positivity_checked: bool

    @property
    def nodes(self) -> np.ndarray:
        return self.interval.grid(self.n)

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.values).copy()

    def column_offsets(self) -> np.ndarray:
        """``|argmax_t G(t, u_j) - j|`` in cells, over interior columns."""
        j = np.arange(1, self.n)
        return np.abs(self.column_argmax[1:-1] - j)

    def to_csv(self) -> str:
        """Row-major ``t,u,G`` with 17 significant digits and LF newlines."""
        nodes = self.nodes
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "u", "G"])
        for i, t in enumerate(nodes):
            for j, u in enumerate(nodes):
                writer.writerow([f"{t:.17g}", f"{u:.17g}", f"{self.values[i, j]:.17g}"])
        return buf.getvalue()


def green_scan(p: OperatorParams, iv: Interval, n: int, tol: float = DEFAULT_TOL, *,
               threads: int = 1, allow_signs: bool = False) -> GreenGrid:
    """Fill the grid and record its minimum, column maxima and diagonal maximum."""
    if n < 8:
        raise DomainError(f"green_scan needs n >= 8, got {n}")
    values = green_matrix(p, iv, n, tol, threads=threads, allow_signs=allow_signs)
    values.setflags(write=False)
    column_argmax = np.argmax(values, axis=0)
    diag = np.diag(values)
    return GreenGrid(
        interval=iv,
        n=n,
        values=values,
        min_entry=float(values.min()),
        column_argmax=column_argmax,
        diag_argmax=int(np.argmax(diag)),
        grid_max=float(values.max()),
        positivity_checked=not allow_signs,
    )


def classical_green(iv: Interval, t, u):
    """``(t-a)(b-u)/(b-a) - (t-u)_+``, the Green's function of ``-y'' = f``."""
    t = np.asarray(t, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    return (t - iv.a) * (iv.b - u) / iv.length - np.maximum(t - u, 0.0)


__all__ = [
    "ZERO_FLOOR",
    "GreenGrid",
    "check_bvp_params",
    "phi",
    "green_eval",
    "green_diag",
    "green_max_closed_form",
    "green_matrix",
    "green_scan",
    "classical_green",
]
