"""k-Gamma, Pochhammer k-symbol and the k-Mittag-Leffler series.

The k-Gamma function is evaluated through the scaling relation

    ln Gamma_k(x) = (x/k - 1) ln k + ln Gamma(x/k),

and the k-Mittag-Leffler function

    E^gamma_{k,rho,beta}(z) = sum_n (gamma)_{n,k} z^n / (Gamma_k(rho n + beta) n!)

is summed term by term in ascending order, every coefficient handled in log
space so that neither factorials nor powers of ``z`` overflow on their own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import gammaln, gammasgn

from . import kernels
from .errors import ConvergenceError, DomainError, GammaOverflowError

DEFAULT_TOL = 1e-14
TERM_CAP = 10_000
_INITIAL_TERMS = 64
_POLE_EPS = 1e-12


@dataclass(frozen=True)
class OperatorParams:
    """Parameter tuple ``(k, rho, beta, gamma, omega)`` shared by every operator.

    ``gamma`` may be negative here because the derivative operator evaluates
    an integral with ``-gamma``; modules that need ``gamma >= 0`` gate it
    themselves.
    """

    k: float
    rho: float
    beta: float
    gamma: float
    omega: float

    def __post_init__(self):
        for name in ("k", "rho", "beta", "gamma", "omega"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        for name in ("k", "rho", "beta"):
            if getattr(self, name) <= 0.0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)!r}")

    @classmethod
    def classical(cls) -> "OperatorParams":
        """``(k, rho, beta, gamma, omega) = (1, 1, 2, 0, 0)``: the ``-y'' = f`` case."""
        return cls(1.0, 1.0, 2.0, 0.0, 0.0)

    @property
    def order(self) -> float:
        """``beta / k``, the effective fractional order."""
        return self.beta / self.k

    def replace(self, **changes) -> "OperatorParams":
        return replace(self, **changes)

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.k, self.rho, self.beta, self.gamma, self.omega)


@dataclass(frozen=True)
class SeriesResult:
    value: float
    terms_used: int
    tail_bound: float


def _check_positive(name, value):
    if not (value > 0.0) or not math.isfinite(value):
        raise DomainError(f"{name} must be a positive finite number, got {value!r}")


def _is_gamma_pole(x: float, k: float) -> bool:
    r = x / k
    return r <= _POLE_EPS and abs(r - round(r)) <= _POLE_EPS


def log_k_gamma(x: float, k: float) -> tuple[float, float]:
    """Return ``(ln|Gamma_k(x)|, sign Gamma_k(x))`` for any non-pole real ``x``."""
    _check_positive("k", k)
    if _is_gamma_pole(x, k):
        raise DomainError(f"Gamma_k has a pole at x={x!r} (k={k!r})")
    r = x / k
    return (r - 1.0) * math.log(k) + float(gammaln(r)), float(gammasgn(r))


def k_gamma(x: float, k: float) -> float:
    """The k-Gamma function for ``x > 0``, ``k > 0``.

    Raises :class:`GammaOverflowError` (carrying ``log_value``) when the result
    is not representable.
    """
    _check_positive("x", x)
    _check_positive("k", k)
    log_value, _ = log_k_gamma(x, k)
    if log_value > 709.78:
        raise GammaOverflowError(
            f"Gamma_k({x!r}; k={k!r}) overflows (log value {log_value:.6g})", log_value
        )
    return math.exp(log_value)


def k_pochhammer(g: float, n: int, k: float) -> float:
    """Pochhammer k-symbol ``g (g+k) ... (g+(n-1)k)``; 1 for ``n = 0``."""
    _check_positive("k", k)
    if n < 0 or int(n) != n:
        raise DomainError(f"n must be a nonnegative integer, got {n!r}")
    out = 1.0
    for i in range(int(n)):
        out *= g + i * k
    return out


def _series_coefficients(k, rho, beta, gamma, count):
    """Log-magnitudes, signs and pole mask of ``(gamma)_{n,k} / (Gamma_k(rho n + beta) n!)``."""
    n = np.arange(count, dtype=np.float64)
    factors = gamma + n * k
    with np.errstate(divide="ignore"):
        log_factors = np.log(np.abs(factors))
    # (gamma)_{n,k} uses factors 0..n-1
    log_poch = np.concatenate(([0.0], np.cumsum(log_factors)[:-1]))
    sign_factors = np.sign(factors)
    sign_poch = np.concatenate(([1.0], np.cumprod(sign_factors)[:-1]))

    args = (rho * n + beta) / k
    poles = (args <= _POLE_EPS) & (np.abs(args - np.round(args)) <= _POLE_EPS)
    safe_args = np.where(poles, 0.5, args)
    log_gk = (safe_args - 1.0) * math.log(k) + gammaln(safe_args)
    sign_gk = gammasgn(safe_args)

    log_coef = log_poch - log_gk - gammaln(n + 1.0)
    sign = sign_poch * sign_gk
    sign = np.where(poles, 0.0, sign)
    log_coef = np.where(sign == 0.0, -np.inf, log_coef)
    return log_coef, sign, poles


def _sum_series(k, rho, beta, gamma, z, tol):
    """Vectorised series sum; returns ``(values, terms, tails, converged, poles)``."""
    z = np.atleast_1d(np.asarray(z, dtype=np.float64))
    values = np.empty(z.shape[0])
    terms = np.empty(z.shape[0], dtype=np.int64)
    tails = np.empty(z.shape[0])
    converged = np.zeros(z.shape[0], dtype=bool)
    pending = np.arange(z.shape[0])
    count = _INITIAL_TERMS
    poles = np.zeros(0, dtype=bool)
    while pending.size:
        log_coef, sign, poles = _series_coefficients(k, rho, beta, gamma, count)
        v, t, tb, c = kernels.ml_series(log_coef, sign, z[pending], tol)
        values[pending] = v
        terms[pending] = t
        tails[pending] = tb
        converged[pending] = c.astype(bool)
        pending = pending[~c.astype(bool)]
        if count >= TERM_CAP:
            break
        count = min(TERM_CAP, count * 4)
    return values, terms, tails, converged, poles


def _raise_unconverged(values, terms, converged, z):
    bad = np.flatnonzero(~converged)
    i = int(bad[0])
    why = ("the partial sum overflowed double precision"
           if not math.isfinite(float(values[i])) else "the term cap was reached")
    raise ConvergenceError(
        f"k-Mittag-Leffler series did not converge at z={float(z[i])!r} within "
        f"{int(terms[i])} terms: {why} (partial value {float(values[i])!r})",
        float(values[i]),
        int(terms[i]),
    )


def ml_k(p: OperatorParams, z: float, tol: float = DEFAULT_TOL) -> SeriesResult:
    """Evaluate ``E^gamma_{k,rho,beta}(z)`` with truncation diagnostics.

    ``tail_bound`` covers truncation only. When terms alternate in sign the
    rounding error is about ``1e-14`` times the largest term, which exceeds
    ``|E|`` by many orders once ``|z|`` is large and negative.
    """
    _check_positive("tol", tol)
    zz = np.array([float(z)])
    values, terms, tails, converged, _ = _sum_series(p.k, p.rho, p.beta, p.gamma, zz, tol)
    if not converged[0]:
        _raise_unconverged(values, terms, converged, zz)
    return SeriesResult(float(values[0]), int(terms[0]), float(tails[0]))


def ml_k_values(p: OperatorParams, z, tol: float = DEFAULT_TOL, *, beta: float | None = None):
    """Array version of :func:`ml_k` returning only the values.

    ``beta`` overrides ``p.beta`` (used for the shifted series
    ``E_{k,rho,beta-jk}``, whose third parameter may be nonpositive).
    """
    _check_positive("tol", tol)
    z = np.asarray(z, dtype=np.float64)
    shape = z.shape
    flat = z.reshape(-1)
    b = p.beta if beta is None else float(beta)
    values, terms, _, converged, _ = _sum_series(p.k, p.rho, b, p.gamma, flat, tol)
    if not converged.all():
        _raise_unconverged(values, terms, converged, flat)
    return values.reshape(shape)


def series_coefficients(p: OperatorParams, count: int, *, beta: float | None = None):
    """Return ``(log|c_n|, sign c_n)`` for ``n < count`` (zero sign marks a vanishing term)."""
    b = p.beta if beta is None else float(beta)
    log_coef, sign, _ = _series_coefficients(p.k, p.rho, b, p.gamma, count)
    return log_coef, sign


def terms_needed(p: OperatorParams, z_max: float, tol: float = DEFAULT_TOL, *,
                 beta: float | None = None) -> int:
    """Number of series terms the truncation rule uses at ``|z| = z_max``.

    Because the coefficients eventually decay factorially, the count at the
    largest argument also bounds the count for every smaller one. A negative
    ``gamma`` is replaced by ``|gamma|``, whose Pochhammer symbol dominates.
    """
    b = p.beta if beta is None else float(beta)
    zz = np.array([abs(float(z_max))])
    values, terms, _, converged, _ = _sum_series(p.k, p.rho, b, abs(p.gamma), zz, tol)
    if not converged[0]:
        _raise_unconverged(values, terms, converged, zz)
    return int(terms[0])


def ml_weighted_derivative(p: OperatorParams, x: float, j: int, tol: float = DEFAULT_TOL) -> float:
    """``d^j/dx^j [x^(beta/k-1) E(omega x^(rho/k))]`` through the shifted series.

    Uses ``x^(beta/k-(j+1)) / k^j * E_{k,rho,beta-jk}(omega x^(rho/k))``. A
    Gamma_k pole inside the terms actually summed is reported as a
    :class:`DomainError` naming the series index.
    """
    _check_positive("x", x)
    if j < 0 or int(j) != j:
        raise DomainError(f"j must be a nonnegative integer, got {j!r}")
    j = int(j)
    shifted = p.beta - j * p.k
    z = p.omega * x ** (p.rho / p.k)
    zz = np.array([z])
    values, terms, _, converged, poles = _sum_series(p.k, p.rho, shifted, p.gamma, zz, tol)
    if not converged[0]:
        _raise_unconverged(values, terms, converged, zz)
    hit = np.flatnonzero(poles[: int(terms[0])])
    if hit.size:
        n = int(hit[0])
        raise DomainError(
            f"Gamma_k pole in the shifted series: term n={n} has argument "
            f"rho*n + beta - j*k = {p.rho * n + shifted!r}"
        )
    return x ** (p.beta / p.k - (j + 1)) / p.k ** j * float(values[0])
