"""Nyström discretisation of ``y(t) = int_a^b G(t,u) q(u) y(u) du``.

A nontrivial solution exists exactly when 1 is an eigenvalue of the integral
operator, so for constant ``q`` the smallest admissible magnitude is the
reciprocal of the spectral radius of the ``q = 1`` operator. The residual of
the differential form ``D y + q y`` gives an independent check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from . import kernels
from .errors import DomainError
from .fracops import (
    Interval,
    SampledFunction,
    _kernel_terms,
    derivative_at_nodes,
    singular_exponents,
    starting_weights,
)
from .green import check_bvp_params, green_matrix, phi
from .lyapunov import lyapunov_bound
from .serialize import csv_text
from .special import DEFAULT_TOL, OperatorParams

N_MIN = 16
N_MAX = 512
RESIDUAL_TOL = 1e-10
RULES = ("simpson", "product")

Potential = Union[float, Callable, SampledFunction]


def _check_n(n: int) -> int:
    if int(n) != n or n < N_MIN or n > N_MAX or n % 2:
        raise DomainError(f"n must be an even integer in [{N_MIN}, {N_MAX}], got {n!r}")
    return int(n)


def sample_potential(q: Potential, iv: Interval, n: int) -> np.ndarray:
    """Values of ``q`` on the ``n``-cell grid of ``iv``.

    Accepts a constant, a vectorised callable or a :class:`SampledFunction`
    (linearly resampled when its grid differs).
    """
    nodes = iv.grid(n)
    if isinstance(q, SampledFunction):
        qi = q.interval
        slack = 1e-12 * iv.length
        if abs(qi.a - iv.a) > slack or abs(qi.b - iv.b) > slack:
            raise DomainError(
                f"q is sampled on [{qi.a!r}, {qi.b!r}] but the problem interval is "
                f"[{iv.a!r}, {iv.b!r}]"
            )
        values = q.values if q.n == n else q(nodes)
    elif callable(q):
        values = np.broadcast_to(np.asarray(q(nodes), dtype=np.float64), nodes.shape)
    else:
        values = np.full(nodes.shape, float(q))
    values = np.array(values, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise DomainError("q must be finite on the grid")
    return values


def simpson_weights(n: int, h: float) -> np.ndarray:
    """Composite Simpson weights ``h/3 [1, 4, 2, ..., 2, 4, 1]`` for even ``n``."""
    if n % 2:
        raise DomainError(f"Simpson weights need an even cell count, got {n}")
    w = np.full(n + 1, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * (h / 3.0)


@dataclass(frozen=True, eq=False)
class FredholmSystem:
    interval: Interval
    n: int
    matrix: np.ndarray

    @property
    def nodes(self) -> np.ndarray:
        return self.interval.grid(self.n)


@dataclass(frozen=True, eq=False)
class EigenReport:
    spectral_radius: float
    iterations: int
    converged: bool
    eigenvector: SampledFunction
    residual: float

    def to_dict(self) -> dict:
        return {
            "spectral_radius": self.spectral_radius,
            "iterations": self.iterations,
            "converged": self.converged,
            "residual": self.residual,
            "n": self.eigenvector.n,
        }

    def eigenvector_csv(self) -> str:
        return csv_text(["t", "y"], [self.eigenvector.nodes, self.eigenvector.values])


def integral_matrix(p: OperatorParams, iv: Interval, n: int, tol: float = DEFAULT_TOL,
                    exps: list[float] | None = None) -> np.ndarray:
    """Matrix of the product-trapezoid k-Prabhakar integral on the ``n``-cell grid.

    ``exps`` adds starting weights that make the rule exact for those powers
    of ``(t-a)``.
    """
    alphas, log_scales, signs = _kernel_terms(p, iv.length, tol)
    toeplitz, start = kernels.kernel_weights(alphas, log_scales, signs, n)
    i = np.arange(n + 1)[:, None]
    j = np.arange(n + 1)[None, :]
    out = np.where((j >= 1) & (j <= i), toeplitz[np.clip(i - j, 0, n)], 0.0)
    out[:, 0] = start
    if exps:
        w = starting_weights(p, exps, iv, n, tol=tol)
        out[:, :w.shape[1]] += w
    return out


def _product_operator(p: OperatorParams, iv: Interval, n: int, tol: float) -> np.ndarray:
    # G = phi(t-a) phi(b-u) / (k phi(L)) - phi(t-u)/k and the kernel of P is phi/k,
    # so the operator is a rank-one term plus -P, both integrated by the P rule;
    # eigenfunctions carry the null-space powers, hence the corrected rule.
    big_p = integral_matrix(p, iv, n, tol, singular_exponents(p, homogeneous=True))
    phis = phi(p, iv.grid(n) - iv.a, tol)
    return np.outer(phis / phis[n], big_p[n]) - big_p


def assemble(p: OperatorParams, iv: Interval, q: Potential, n: int, tol: float = DEFAULT_TOL,
             *, threads: int = 1, rule: str = "simpson") -> FredholmSystem:
    """Nyström matrix of ``y -> int G(t, u) q(u) y(u) du``.

    ``rule="simpson"`` gives entries ``w_j G(t_i, u_j) q(u_j)`` with composite
    Simpson weights. ``rule="product"`` integrates the weakly singular part
    exactly against piecewise-linear data, which is the discretisation the
    derivative operator inverts; use it when the eigenvector is fed to
    :func:`residual`.
    """
    check_bvp_params(p)
    n = _check_n(n)
    if rule not in RULES:
        raise DomainError(f"rule must be one of {RULES}, got {rule!r}")
    qv = sample_potential(q, iv, n)
    if rule == "simpson":
        g = green_matrix(p, iv, n, tol, threads=threads)
        matrix = g * (simpson_weights(n, iv.length / n) * qv)[None, :]
    else:
        matrix = _product_operator(p, iv, n, tol) * qv[None, :]
        matrix[0] = 0.0
        matrix[n] = 0.0
    matrix.setflags(write=False)
    return FredholmSystem(iv, n, matrix)


def spectral_radius(system: FredholmSystem, max_iter: int = 10_000,
                    tol: float = RESIDUAL_TOL) -> EigenReport:
    """Dominant eigenvalue by power iteration from the all-ones vector.

    Stops once ``||M v - lam v||_inf / ||v||_inf <= tol``, where ``lam`` is
    the Rayleigh quotient of the current iterate.
    """
    m = system.matrix
    v = np.ones(m.shape[0])
    lam = 0.0
    res = np.inf
    it = 0
    converged = False
    while it < max_iter:
        it += 1
        w = m @ v
        scale = np.max(np.abs(w))
        if scale == 0.0:
            lam, res, v, converged = 0.0, 0.0, w, True
            break
        lam = float(v @ w) / float(v @ v)
        res = float(np.max(np.abs(w - lam * v)) / np.max(np.abs(v)))
        if res <= tol and it > 1:
            converged = True
            break
        v = w / scale
    if v[np.argmax(np.abs(v))] < 0.0:
        v = -v
        lam = -lam
    vec = SampledFunction(system.interval, v)
    return EigenReport(abs(lam), it, converged, vec, res)


def critical_constant_q(p: OperatorParams, iv: Interval, n: int = 128,
                        tol: float = DEFAULT_TOL, *, rule: str = "simpson") -> float:
    """Smallest constant ``q`` for which the discrete problem has a nontrivial solution."""
    report = spectral_radius(assemble(p, iv, 1.0, n, tol, rule=rule))
    if not report.converged or report.spectral_radius == 0.0:
        raise DomainError("power iteration did not produce a positive dominant eigenvalue")
    return 1.0 / report.spectral_radius


@dataclass(frozen=True, eq=False)
class CriticalReport:
    critical_q: float
    length: float
    bound: float
    eigen: EigenReport

    @property
    def lhs(self) -> float:
        """``lambda* (b - a)``, the integral of the critical constant potential."""
        return self.critical_q * self.length

    @property
    def margin(self) -> float:
        return self.lhs - self.bound

    def to_dict(self) -> dict:
        return {
            "critical_q": self.critical_q,
            "q_integral": self.lhs,
            "bound": self.bound,
            "margin": self.margin,
            "sound": bool(self.lhs >= self.bound),
            "iterations": self.eigen.iterations,
            "converged": self.eigen.converged,
        }


def critical_report(p: OperatorParams, iv: Interval, n: int = 128,
                    tol: float = DEFAULT_TOL, *, threads: int = 1,
                    rule: str = "simpson") -> CriticalReport:
    """Critical constant together with the Lyapunov bound it must respect."""
    eig = spectral_radius(assemble(p, iv, 1.0, n, tol, threads=threads, rule=rule))
    if not eig.converged or eig.spectral_radius == 0.0:
        raise DomainError("power iteration did not produce a positive dominant eigenvalue")
    return CriticalReport(1.0 / eig.spectral_radius, iv.length, lyapunov_bound(p, iv, tol), eig)


def residual(p: OperatorParams, iv: Interval, q: Potential, y: SampledFunction,
             n: int | None = None, tol: float = DEFAULT_TOL) -> float:
    """``max |D y + q y|`` over interior nodes where the derivative stencil fits."""
    check_bvp_params(p)
    if n is not None and n != y.n:
        raise DomainError(f"y has {y.n} cells but n={n} was requested")
    if not np.any(y.values):
        return 0.0
    qv = sample_potential(q, iv, y.n)
    idx, dy = derivative_at_nodes(p, y, tol=tol, homogeneous=True)
    return float(np.max(np.abs(dy + qv[idx] * y.values[idx])))


__all__ = [
    "FredholmSystem",
    "EigenReport",
    "CriticalReport",
    "sample_potential",
    "simpson_weights",
    "integral_matrix",
    "assemble",
    "spectral_radius",
    "critical_constant_q",
    "critical_report",
    "residual",
]
