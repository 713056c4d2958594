"""k-Prabhakar fractional operators, their Green's function and Lyapunov-type bounds."""

from .bvp import (
    CriticalReport,
    EigenReport,
    FredholmSystem,
    assemble,
    critical_constant_q,
    critical_report,
    residual,
    spectral_radius,
)
from .errors import ConvergenceError, DomainError, GammaOverflowError, KPrabhakarError
from .fracops import (
    Interval,
    LaplaceCheck,
    SampledFunction,
    derivative_at_nodes,
    integral_at_nodes,
    laplace_closed_form_integral,
    laplace_numeric,
    prabhakar_derivative,
    prabhakar_integral,
    prabhakar_kernel,
)
from .green import GreenGrid, green_diag, green_eval, green_max_closed_form, green_scan
from .kernels import BACKEND
from .lyapunov import BoundReport, certify, lyapunov_bound
from .special import (
    OperatorParams,
    SeriesResult,
    k_gamma,
    k_pochhammer,
    ml_k,
    ml_weighted_derivative,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BoundReport",
    "ConvergenceError",
    "CriticalReport",
    "DomainError",
    "EigenReport",
    "FredholmSystem",
    "GammaOverflowError",
    "GreenGrid",
    "Interval",
    "KPrabhakarError",
    "LaplaceCheck",
    "OperatorParams",
    "SampledFunction",
    "SeriesResult",
    "assemble",
    "certify",
    "critical_constant_q",
    "critical_report",
    "derivative_at_nodes",
    "green_diag",
    "green_eval",
    "green_max_closed_form",
    "green_scan",
    "integral_at_nodes",
    "k_gamma",
    "k_pochhammer",
    "laplace_closed_form_integral",
    "laplace_numeric",
    "lyapunov_bound",
    "ml_k",
    "ml_weighted_derivative",
    "prabhakar_derivative",
    "prabhakar_integral",
    "prabhakar_kernel",
    "residual",
    "spectral_radius",
]
