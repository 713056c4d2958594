"""k-Prabhakar integral and derivative on sampled functions.

The integral

    P f(x) = int_a^x (x-t)^(beta/k-1)/k * E(omega (x-t)^(rho/k)) f(t) dt

is computed by expanding the kernel into its power series
``sum_n c_n s^((rho n + beta)/k - 1)`` and integrating every power exactly on
each grid cell against the piecewise-linear interpolant of ``f``. The only
discretisation error is therefore the interpolation error of ``f``.

The derivative is ``(d/dx)^m [k^m P_{rho, mk-beta, omega}^{-gamma} f]`` with
``m = floor(beta/k) + 1``; the outer derivative is a Richardson-extrapolated
central difference whose step equals the sample spacing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import gammaln

from . import kernels
from .errors import DomainError
from .special import (
    DEFAULT_TOL,
    OperatorParams,
    ml_k,
    ml_k_values,
    series_coefficients,
    terms_needed,
)

_SNAP = 1e-12
_WARN_MARGIN = 0.5
_POWER_REACH = 2.0
_POWER_GAP = 0.1
_MAX_POWERS = 4


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (math.isfinite(a) and math.isfinite(b)):
            raise DomainError(f"interval endpoints must be finite, got [{a!r}, {b!r}]")
        if not a < b:
            raise DomainError(f"interval must satisfy a < b, got [{a!r}, {b!r}]")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.a + self.b)

    def grid(self, n: int) -> np.ndarray:
        """``n + 1`` equally spaced nodes including both endpoints."""
        nodes = self.a + self.length * (np.arange(n + 1) / n)
        nodes[-1] = self.b
        return nodes

    def contains(self, x: float) -> bool:
        slack = _SNAP * self.length
        return self.a - slack <= x <= self.b + slack


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Values of a function on ``n + 1`` uniform nodes of an interval."""

    interval: Interval
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        if values.shape[0] < 3:
            raise DomainError(f"need at least 3 samples (n >= 2), got {values.shape[0]}")
        if not np.all(np.isfinite(values)):
            raise DomainError("sampled values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_callable(cls, fn: Callable, interval: Interval, n: int) -> "SampledFunction":
        if n < 2:
            raise DomainError(f"n must be at least 2, got {n}")
        t = interval.grid(n)
        return cls(interval, np.broadcast_to(np.asarray(fn(t), dtype=np.float64), t.shape))

    @property
    def n(self) -> int:
        return self.values.shape[0] - 1

    @property
    def h(self) -> float:
        return self.interval.length / self.n

    @property
    def nodes(self) -> np.ndarray:
        return self.interval.grid(self.n)

    def __call__(self, x):
        """Piecewise-linear interpolant."""
        return np.interp(x, self.nodes, self.values)

    def resample(self, n: int) -> "SampledFunction":
        if n == self.n:
            return self
        return SampledFunction(self.interval, self(self.interval.grid(n)))


@dataclass(frozen=True)
class LaplaceCheck:
    s: float
    numeric: float
    closed_form: float
    convergence_margin: float
    tail_bound: float
    horizon: float
    subdiv: int
    slow_convergence: bool

    @property
    def relative_error(self) -> float:
        return abs(self.numeric - self.closed_form) / abs(self.closed_form)


def prabhakar_kernel(p: OperatorParams, t: float, tol: float = DEFAULT_TOL) -> float:
    """``t^(beta/k-1)/k * E(omega t^(rho/k))`` for ``t > 0``; zero otherwise."""
    if t <= 0.0:
        return 0.0
    e = ml_k(p, p.omega * t ** (p.rho / p.k), tol).value
    return t ** (p.order - 1.0) / p.k * e


def derivative_order(p: OperatorParams) -> int:
    """``m = floor(beta/k) + 1``; ratios within 1e-12 of an integer are snapped."""
    r = p.order
    nearest = round(r)
    if abs(r - nearest) <= _SNAP * max(1.0, abs(r)):
        r = float(nearest)
    return int(math.floor(r)) + 1


def _kernel_terms(p: OperatorParams, window: float, tol: float):
    """Exponents and log-amplitudes of the kernel's power expansion on ``[0, window]``.

    Returns ``(alphas, log_scales, signs)`` with ``log_scales`` already
    including ``alpha * log(window)``.
    """
    if p.omega == 0.0:
        count = 1
    else:
        count = terms_needed(p, abs(p.omega) * window ** (p.rho / p.k), tol)
    log_coef, sign = series_coefficients(p, count)
    n = np.arange(count, dtype=np.float64)
    alphas = (p.rho * n + p.beta) / p.k
    if p.omega == 0.0:
        log_omega = np.zeros(1)
        sign_omega = np.ones(1)
    else:
        log_omega = n * math.log(abs(p.omega))
        sign_omega = np.where((n % 2 == 1) & (p.omega < 0), -1.0, 1.0)
    with np.errstate(invalid="ignore"):
        log_scales = log_coef + log_omega - math.log(p.k) + alphas * math.log(window)
    signs = sign * sign_omega
    log_scales = np.where(signs == 0.0, 0.0, log_scales)
    return alphas, log_scales, signs


def _refined_values(f: SampledFunction, subdiv: int) -> np.ndarray:
    """Samples on a grid ``subdiv`` times finer, by local quadratic interpolation."""
    if subdiv == 1:
        return np.array(f.values)
    v = f.values
    n = f.n
    out = np.empty(n * subdiv + 1)
    frac = np.arange(subdiv) / subdiv
    for i in range(n):
        c = min(max(i, 1), n - 1)  # centre of the three-point stencil
        x = (i - c) + frac  # offset from the centre node, in cells
        l0 = 0.5 * x * (x - 1.0)
        l1 = 1.0 - x * x
        l2 = 0.5 * x * (x + 1.0)
        out[i * subdiv:(i + 1) * subdiv] = l0 * v[c - 1] + l1 * v[c] + l2 * v[c + 1]
    out[-1] = v[-1]
    return out


def _check_subdiv(subdiv):
    if int(subdiv) != subdiv or subdiv < 1:
        raise DomainError(f"subdiv must be a positive integer, got {subdiv!r}")
    return int(subdiv)


def integral_at_nodes(p: OperatorParams, f: SampledFunction, subdiv: int = 1,
                      tol: float = DEFAULT_TOL) -> np.ndarray:
    """``P f`` at every node of ``f``'s grid (value 0 at the left endpoint)."""
    subdiv = _check_subdiv(subdiv)
    values = _refined_values(f, subdiv)
    n_fine = values.shape[0] - 1
    alphas, log_scales, signs = _kernel_terms(p, f.interval.length, tol)
    toeplitz, start = kernels.kernel_weights(alphas, log_scales, signs, n_fine)
    out = kernels.causal_apply(toeplitz, start, values)
    return out[::subdiv].copy()


def _pointwise(alphas, log_scales, signs, f_nodes, f_values, a, x):
    """Product-trapezoid value of the power-series kernel integral at a single ``x``."""
    window = x - a
    if window <= 0.0:
        return 0.0
    last = int(np.searchsorted(f_nodes, x, side="left"))
    tl = f_nodes[:last]
    tr = np.minimum(f_nodes[1:last + 1], x)
    fl = f_values[:last]
    fr = np.interp(tr, f_nodes, f_values)
    keep = tr > tl
    tl, tr, fl, fr = tl[keep], tr[keep], fl[keep], fr[keep]
    ul = (x - tr) / window
    ur = (x - tl) / window
    total = 0.0
    for alpha, log_scale, sign in zip(alphas, log_scales, signs):
        if sign == 0.0:
            continue
        scale = sign * math.exp(log_scale)
        if scale == 0.0:
            continue
        pl = ul ** alpha
        pr = ur ** alpha
        big_a = (pr - pl) / alpha
        big_b = ((ur * pr - ul * pl) / (alpha + 1.0) - ul * big_a) / (ur - ul)
        total += scale * float(np.sum(fr * big_a + (fl - fr) * big_b))
    return total


def prabhakar_integral(p: OperatorParams, f: SampledFunction, x: float, subdiv: int = 1,
                       tol: float = DEFAULT_TOL) -> float:
    """``P f(x)`` with lower terminal at the left end of ``f``'s interval."""
    subdiv = _check_subdiv(subdiv)
    iv = f.interval
    if not iv.contains(x):
        raise DomainError(f"x={x!r} lies outside [{iv.a!r}, {iv.b!r}]")
    x = min(max(float(x), iv.a), iv.b)
    if x == iv.a:
        return 0.0
    n_fine = f.n * subdiv
    fine_nodes = iv.grid(n_fine)
    # land exactly on a node when x is one, so that the last cell is not a sliver
    pos = (x - iv.a) / iv.length * n_fine
    if abs(pos - round(pos)) <= _SNAP * n_fine:
        x = float(fine_nodes[int(round(pos))])
    alphas, log_scales, signs = _kernel_terms(p, x - iv.a, tol)
    values = _refined_values(f, subdiv)
    return _pointwise(alphas, log_scales, signs, fine_nodes, values, iv.a, x)


def _central_weights(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Offsets and weights of the second-order central stencil for ``d^m/dx^m``."""
    half = (m + 1) // 2
    offsets = np.arange(-half, half + 1)
    vander = np.vander(offsets.astype(np.float64), increasing=True).T
    rhs = np.zeros(offsets.shape[0])
    rhs[m] = math.factorial(m)
    return offsets, np.linalg.solve(vander, rhs)


def _inner_params(p: OperatorParams, m: int) -> OperatorParams:
    return OperatorParams(p.k, p.rho, m * p.k - p.beta, -p.gamma, p.omega)


def stencil_radius(p: OperatorParams) -> int:
    """Number of grid cells the derivative stencil reaches on each side."""
    m = derivative_order(p)
    return 2 * ((m + 1) // 2)


def _richardson(values_at, m: int, h: float):
    offsets, w = _central_weights(m)
    fine = sum(wi * values_at(int(o)) for o, wi in zip(offsets, w)) / h ** m
    coarse = sum(wi * values_at(2 * int(o)) for o, wi in zip(offsets, w)) / (2.0 * h) ** m
    return (4.0 * fine - coarse) / 3.0


def _select_powers(starts: list[float], step: float, limit: float) -> list[float]:
    """Powers ``s + i + j step`` below ``limit``, at most four, kept apart from integers and each other."""
    reach = int(limit / step) + 2
    candidates = sorted({s0 + i + j * step for s0 in starts for i in range(int(limit) + 1)
                         for j in range(reach)})
    keep: list[float] = []
    for nu in candidates:
        if nu <= 0.0 or nu >= limit or abs(nu - round(nu)) < _POWER_GAP:
            continue
        if any(abs(nu - q) < _POWER_GAP for q in keep):
            continue
        keep.append(nu)
    return keep[:_MAX_POWERS]


def singular_exponents(p: OperatorParams, *, homogeneous: bool = False) -> list[float]:
    """Non-integer powers of ``(t-a)`` that limit the inner integral near ``a``.

    ``P f`` for smooth ``f`` behaves like ``(t-a)^(beta/k + i + j rho/k)``
    near ``a``; with ``homogeneous=True`` the powers
    ``beta/k - 1 + i + j rho/k`` of the operator's null space and
    ``2 beta/k - 1 + i + j rho/k`` of its image under ``P`` (both present in
    solutions of the boundary value problem) are added. A power ``nu`` left
    uncorrected caps the local order at ``nu - beta/k``, so powers below
    ``beta/k + 2`` are kept, at most four of them, skipping any within 0.1 of
    an integer or of a power already kept.
    """
    r = p.order
    starts = [r - 1.0, r, 2.0 * r - 1.0] if homogeneous else [r]
    return _select_powers(starts, p.rho / p.k, r + _POWER_REACH)


def outer_exponents(p: OperatorParams) -> list[float]:
    """Non-integer powers of ``(t-a)`` in the inner integral of a problem solution.

    A solution ``y = c phi - P(q y)`` carries ``(t-a)^(beta/k - 1 + l beta/k + ...)``,
    so the quantity differentiated by the outer stencil carries
    ``(t-a)^(m + beta/k - 1 + l beta/k + i + j rho/k)``. A power ``mu`` spoils the
    central difference at the first nodes by ``O(h^(mu - m))``; those below
    ``m + 2`` are corrected.
    """
    m = derivative_order(p)
    r = p.order
    starts = [m + r - 1.0 + l * r for l in range(2)]
    return _select_powers(starts, p.rho / p.k, m + _POWER_REACH)


def _outer_correction(m: int, h: float, mus: list[float], s: np.ndarray, n: int) -> np.ndarray:
    """Starting weights for the Richardson stencil at scaled positions ``s = (x-a)/h``.

    Returns ``W`` of shape ``(len(s), q)``; adding ``W @ F[:q]`` makes the
    derivative exact for ``(t-a)^mu``, ``mu`` in ``mus``, and for integer powers
    up to ``max(mus)``.
    """
    if not mus:
        return np.zeros((s.shape[0], 0))
    powers = [float(i) for i in range(int(math.floor(max(mus))) + 1)] + list(mus)
    q = len(powers)
    if n < 2 * q:
        return np.zeros((s.shape[0], 0))
    local = np.arange(q, dtype=np.float64)
    vander = np.array([[1.0 if (j == 0 and mu == 0.0) else j ** mu for j in local] for mu in powers])
    residual = np.empty((q, s.shape[0]))
    for row, mu in enumerate(powers):
        falling = math.prod(mu - i for i in range(m))
        with np.errstate(divide="ignore"):
            exact = falling * np.where(falling == 0.0, 0.0, s ** (mu - m)) / h ** m
        approx = _richardson(lambda o: np.power(s + o, mu), m, h)
        residual[row] = exact - approx
    return np.linalg.solve(vander, residual).T


def _power_integral(inner: OperatorParams, a: float, h: float, window: float, nu: float,
                    xs: np.ndarray, tol: float) -> np.ndarray:
    """Exact ``P_inner [((t-a)/h)^nu](x)`` via the Beta integral, termwise."""
    alphas, log_scales, signs = _kernel_terms(inner, window, tol)
    u = (xs - a) / window
    out = np.zeros_like(xs, dtype=np.float64)
    log_beta = gammaln(alphas) + gammaln(nu + 1.0) - gammaln(alphas + nu + 1.0)
    for alpha, log_scale, lb, sign in zip(alphas, log_scales, log_beta, signs):
        if sign == 0.0:
            continue
        out += sign * np.exp(log_scale + lb) * u ** alpha
    return out * ((xs - a) / h) ** nu


def starting_weights(p: OperatorParams, exps: list[float], iv: Interval, n: int,
                     subdiv: int = 1, tol: float = DEFAULT_TOL,
                     xs: np.ndarray | None = None) -> np.ndarray:
    """Correction to the product rule acting on the first few samples.

    Returns ``W`` of shape ``(points, q)`` such that adding ``W @ g[:q]`` to
    the product-rule value of ``P g`` makes the rule exact for
    ``(t-a)^nu``, ``nu`` in ``exps``, and for the integer powers up to
    ``max(exps)``. The points are the grid nodes, or ``xs`` when given. An
    empty ``W`` is returned when there is nothing to correct or the grid is
    too coarse to host the correction.
    """
    points = iv.grid(n) if xs is None else np.asarray(xs, dtype=np.float64)
    top = max(exps) if exps else 1.0
    powers = [float(i) for i in range(int(math.floor(top)) + 1)] + list(exps)
    q = len(powers)
    if len(exps) == 0 or n < 2 * q:
        return np.zeros((points.shape[0], 0))
    h = iv.length / n
    local = np.arange(q, dtype=np.float64)
    vander = np.array([[1.0 if (j == 0 and nu == 0.0) else j ** nu for j in local] for nu in powers])
    residual = np.empty((q, points.shape[0]))
    t = (iv.grid(n) - iv.a) / h
    for row, nu in enumerate(powers):
        basis = SampledFunction(iv, t ** nu)
        if xs is None:
            rule = integral_at_nodes(p, basis, subdiv, tol)
        else:
            rule = np.array([prabhakar_integral(p, basis, float(x), subdiv, tol) for x in xs])
        exact = _power_integral(p, iv.a, h, iv.length, nu, points, tol)
        residual[row] = exact - rule
    return np.linalg.solve(vander, residual).T


def _corrected_inner(inner: OperatorParams, exps: list[float], g: SampledFunction,
                     subdiv: int, tol: float, xs: np.ndarray | None = None) -> np.ndarray:
    """Inner integral of ``D`` with starting weights on the first few samples."""
    if xs is None:
        base = integral_at_nodes(inner, g, subdiv, tol)
    else:
        base = np.array([prabhakar_integral(inner, g, float(x), subdiv, tol) for x in xs])
    w = starting_weights(inner, exps, g.interval, g.n, subdiv, tol, xs)
    return base + w @ g.values[:w.shape[1]]


def derivative_at_nodes(p: OperatorParams, f: SampledFunction, subdiv: int = 1,
                        tol: float = DEFAULT_TOL, *, homogeneous: bool = False
                        ) -> tuple[np.ndarray, np.ndarray]:
    """``D f`` at every node whose stencil fits inside the interval.

    ``homogeneous`` widens the starting-weight corrections to the powers
    carried by solutions of the boundary value problem; pass it for
    functions that are not of the form ``P g``.
    Returns ``(indices, values)``.
    """
    subdiv = _check_subdiv(subdiv)
    m = derivative_order(p)
    inner = _inner_params(p, m)
    r = stencil_radius(p)
    idx = np.arange(r, f.n - r + 1)
    if idx.size == 0:
        raise DomainError(f"grid with n={f.n} is too coarse for a stencil of radius {r}")
    exps = singular_exponents(p, homogeneous=homogeneous)
    big_f = p.k ** m * _corrected_inner(inner, exps, f, subdiv, tol)
    vals = _richardson(lambda o: big_f[idx + o], m, f.h)
    if homogeneous:
        w = _outer_correction(m, f.h, outer_exponents(p), idx.astype(np.float64), f.n)
        vals = vals + w @ big_f[:w.shape[1]]
    return idx, vals


def prabhakar_derivative(p: OperatorParams, f: SampledFunction, x: float, subdiv: int = 1,
                         tol: float = DEFAULT_TOL, *, homogeneous: bool = False) -> float:
    """``D f(x)`` at a single point strictly inside the interval."""
    subdiv = _check_subdiv(subdiv)
    iv = f.interval
    m = derivative_order(p)
    r = stencil_radius(p)
    h = f.h
    slack = _SNAP * iv.length
    if x - r * h < iv.a - slack or x + r * h > iv.b + slack:
        raise DomainError(
            f"x={x!r} is within {r} cells (h={h:.6g}) of an endpoint of "
            f"[{iv.a!r}, {iv.b!r}]; the derivative stencil does not fit"
        )
    inner = _inner_params(p, m)
    offsets = np.arange(-r, r + 1)
    xs = np.clip(x + offsets * h, iv.a, iv.b)
    exps = singular_exponents(p, homogeneous=homogeneous)
    big_f = p.k ** m * _corrected_inner(inner, exps, f, subdiv, tol, xs)
    value = float(_richardson(lambda o: big_f[o + r], m, h))
    if homogeneous:
        w = _outer_correction(m, h, outer_exponents(p), np.array([(x - iv.a) / h]), f.n)
        if w.shape[1]:
            head = iv.grid(f.n)[:w.shape[1]]
            value += float(w[0] @ (p.k ** m * _corrected_inner(inner, exps, f, subdiv, tol, head)))
    return value


def _margin(p: OperatorParams, s: float) -> float:
    return abs(p.omega * p.k * (p.k * s) ** (-p.rho / p.k))


def laplace_closed_form_integral(p: OperatorParams, s: float) -> float:
    """``(ks)^(-beta/k) (1 - omega k (ks)^(-rho/k))^(-gamma/k)``, the kernel's transform."""
    if not s > 0.0:
        raise DomainError(f"s must be positive, got {s!r}")
    margin = _margin(p, s)
    if margin >= 1.0:
        raise DomainError(
            f"convergence condition |omega k (ks)^(-rho/k)| < 1 violated (margin {margin!r})"
        )
    q = p.omega * p.k * (p.k * s) ** (-p.rho / p.k)
    return (p.k * s) ** (-p.order) * (1.0 - q) ** (-p.gamma / p.k)


def laplace_numeric(p: OperatorParams, s: float, horizon: float | None = None,
                    subdiv: int | None = None, tol: float = DEFAULT_TOL) -> LaplaceCheck:
    """Quadrature of ``int_0^horizon e^(-st) kernel(t) dt`` next to the closed form.

    The default horizon is ``40 / (s - s0)`` where ``s0`` is the exponential
    growth rate of the kernel (zero when ``omega = 0``), so that the neglected
    tail is about ``e^-40`` of the integrand scale.
    """
    closed = laplace_closed_form_integral(p, s)
    margin = _margin(p, s)
    growth = s * margin ** (p.k / p.rho) if margin > 0.0 else 0.0
    decay = s - growth
    if horizon is None:
        horizon = 40.0 / decay
    if not horizon > 0.0:
        raise DomainError(f"horizon must be positive, got {horizon!r}")
    if subdiv is None:
        subdiv = int(min(400_000, max(2_000, math.ceil(horizon * s / 5e-4))))
    subdiv = _check_subdiv(subdiv)

    iv = Interval(0.0, horizon)
    t = iv.grid(subdiv)
    # P g(H) with g(t) = exp(-s (H - t)) equals int_0^H e^{-s u} kernel(u) du
    g = np.exp(-s * (horizon - t))
    alphas, log_scales, signs = _kernel_terms(p, horizon, tol)
    toeplitz, start = kernels.kernel_weights(alphas, log_scales, signs, subdiv)
    numeric = float(np.dot(toeplitz[:subdiv], g[::-1][:subdiv]) + start[subdiv] * g[0])

    end_value = math.exp(-s * horizon) * prabhakar_kernel(p, horizon, tol)
    slope = decay - max(0.0, p.order - 1.0) / horizon
    tail = abs(end_value) / slope if slope > 0.0 else math.inf
    return LaplaceCheck(
        s=float(s),
        numeric=numeric,
        closed_form=closed,
        convergence_margin=margin,
        tail_bound=tail,
        horizon=float(horizon),
        subdiv=subdiv,
        slow_convergence=margin >= _WARN_MARGIN,
    )


def kernel_function(p: OperatorParams, iv: Interval, n: int, tol: float = DEFAULT_TOL) -> SampledFunction:
    """``(t-a)^(beta/k-1) E(omega (t-a)^(rho/k))`` sampled on ``n`` cells.

    Requires ``beta/k >= 1`` so that the value at ``t = a`` is finite.
    """
    if p.order < 1.0:
        raise DomainError(f"kernel function is unbounded at t=a for beta/k={p.order!r} < 1")
    t = iv.grid(n) - iv.a
    e = ml_k_values(p, p.omega * t ** (p.rho / p.k), tol)
    return SampledFunction(iv, t ** (p.order - 1.0) * e)


def constant_integral(p: OperatorParams, x_bar: float, tol: float = DEFAULT_TOL) -> float:
    """Closed form of ``P 1`` at distance ``x_bar`` from the lower terminal.

    Equals ``x_bar^(beta/k) E_{k,rho,beta+k}(omega x_bar^(rho/k))``.
    """
    shifted = p.replace(beta=p.beta + p.k)
    return x_bar ** p.order * ml_k(shifted, p.omega * x_bar ** (p.rho / p.k), tol).value


__all__ = [
    "Interval",
    "SampledFunction",
    "LaplaceCheck",
    "prabhakar_kernel",
    "prabhakar_integral",
    "prabhakar_derivative",
    "integral_at_nodes",
    "derivative_at_nodes",
    "derivative_order",
    "stencil_radius",
    "laplace_closed_form_integral",
    "laplace_numeric",
    "kernel_function",
    "constant_integral",
    "singular_exponents",
    "outer_exponents",
    "starting_weights",
]
