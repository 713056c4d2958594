"""Lyapunov-type bound and the nonexistence certificate built on it.

If ``D y + q y = 0`` with ``y(a) = y(b) = 0`` has a nontrivial continuous
solution then

    int_a^b |q| >= (4/L)^(beta/k-1) k E(omega L^(rho/k)) / E(omega (L/2)^(rho/k))^2,

the reciprocal of the maximum of the Green's function.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .errors import DomainError
from .fracops import Interval, SampledFunction
from .green import check_bvp_params
from .serialize import dumps
from .special import DEFAULT_TOL, OperatorParams, ml_k_values

NECESSARY_CONDITION_MET = "NECESSARY_CONDITION_MET"
NO_NONTRIVIAL_SOLUTION = "NO_NONTRIVIAL_SOLUTION"


@dataclass(frozen=True)
class BoundReport:
    bound: float
    q_integral: float
    verdict: str
    margin: float

    def to_dict(self) -> dict:
        return {
            "bound": self.bound,
            "q_integral": self.q_integral,
            "margin": self.margin,
            "verdict": self.verdict,
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())


def lyapunov_bound(p: OperatorParams, iv: Interval, tol: float = DEFAULT_TOL) -> float:
    """Right-hand side of the inequality for parameters in the boundary-value domain."""
    check_bvp_params(p)
    length = iv.length
    half, full = ml_k_values(
        p, p.omega * np.array([(0.5 * length) ** (p.rho / p.k), length ** (p.rho / p.k)]), tol
    )
    return float((4.0 / length) ** (p.order - 1.0) * p.k * full / (half * half))


def abs_integral(q: SampledFunction) -> float:
    """Composite Simpson integral of ``|q|`` on the sample grid.

    An odd cell count is handled by scipy's end correction. Sign changes
    between nodes are not located, so ``|q|`` is only as accurate as its
    samples.
    """
    return float(simpson(np.abs(q.values), dx=q.h))


def certify(p: OperatorParams, iv: Interval, q: SampledFunction,
            tol: float = DEFAULT_TOL) -> BoundReport:
    """Compare ``int |q|`` with the bound; equality counts as the condition being met."""
    qi = q.interval
    slack = 1e-12 * iv.length
    if abs(qi.a - iv.a) > slack or abs(qi.b - iv.b) > slack:
        raise DomainError(
            f"q is sampled on [{qi.a!r}, {qi.b!r}] but the problem interval is [{iv.a!r}, {iv.b!r}]"
        )
    bound = lyapunov_bound(p, iv, tol)
    integral = abs_integral(q)
    verdict = NO_NONTRIVIAL_SOLUTION if integral < bound else NECESSARY_CONDITION_MET
    return BoundReport(bound=bound, q_integral=integral, verdict=verdict, margin=integral - bound)


__all__ = [
    "NECESSARY_CONDITION_MET",
    "NO_NONTRIVIAL_SOLUTION",
    "BoundReport",
    "lyapunov_bound",
    "abs_integral",
    "certify",
]
