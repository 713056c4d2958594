import math

import mpmath
import numpy as np
import pytest

from kprabhakar import (
    DomainError,
    Interval,
    OperatorParams,
    SampledFunction,
    derivative_at_nodes,
    integral_at_nodes,
    k_gamma,
    laplace_closed_form_integral,
    laplace_numeric,
    prabhakar_derivative,
    prabhakar_integral,
    prabhakar_kernel,
)
from kprabhakar.fracops import constant_integral, derivative_order, kernel_function
from kprabhakar.verify import left_inverse_errors

UNIT = Interval(0.0, 1.0)


def sampled(fn, n, iv=UNIT):
    return SampledFunction.from_callable(fn, iv, n)


def mp_kernel(p, s):
    """Oracle: the kernel from its series at 30 digits."""
    with mpmath.workdps(30):
        s = mpmath.mpf(s)
        total = mpmath.mpf(0)
        for n in range(80):
            arg = mpmath.mpf(p.rho * n + p.beta) / p.k
            poch = mpmath.rf(mpmath.mpf(p.gamma) / p.k, n) * mpmath.mpf(p.k) ** n
            z = p.omega * s ** (mpmath.mpf(p.rho) / p.k)
            total += poch * z ** n / (mpmath.mpf(p.k) ** (arg - 1) * mpmath.gamma(arg) * mpmath.factorial(n))
        return s ** (mpmath.mpf(p.beta) / p.k - 1) * total / p.k


# kernel

def test_kernel_examples():
    assert prabhakar_kernel(OperatorParams(1.5, 0.7, 2.5, 1.2, 0.4), -1.0) == 0.0
    assert prabhakar_kernel(OperatorParams(1.5, 0.7, 2.5, 1.2, 0.4), 0.0) == 0.0
    assert prabhakar_kernel(OperatorParams(1, 1, 2, 0, 0), 2.0) == pytest.approx(2.0, rel=1e-15)
    for params in ((1, 1, 1.5, 0.5, 0), (2, 0.7, 3.1, 1.0, 0), (0.5, 1.3, 0.8, 2.0, 0)):
        p = OperatorParams(*params)
        expect = 1.0 / (p.k * k_gamma(p.beta, p.k))
        assert prabhakar_kernel(p, 1.0) == pytest.approx(expect, rel=1e-14)


@pytest.mark.parametrize("params,t", [
    ((1.5, 0.7, 2.5, 1.2, 0.4), 0.8),
    ((1.0, 1.0, 1.5, 0.5, 0.3), 2.0),
    ((0.8, 1.3, 1.4, 0.7, 0.9), 0.3),
])
def test_kernel_matches_series_oracle(params, t):
    p = OperatorParams(*params)
    assert prabhakar_kernel(p, t) == pytest.approx(float(mp_kernel(p, t)), rel=1e-12)


def test_kernel_nonnegative_for_nonnegative_parameters():
    p = OperatorParams(1.3, 0.6, 0.9, 1.4, 0.7)
    assert all(prabhakar_kernel(p, t) > 0.0 for t in np.linspace(0.01, 5.0, 60))


# integral

def test_integral_of_zero():
    p = OperatorParams(1.5, 0.7, 2.5, 1.2, 0.4)
    f = sampled(np.zeros_like, 32)
    assert prabhakar_integral(p, f, 0.7) == 0.0
    assert np.all(integral_at_nodes(p, f) == 0.0)


def test_integral_of_one_riemann_liouville():
    # int_0^1 (1-t)^0.5 dt / Gamma(1.5) = 1/Gamma(2.5)
    p = OperatorParams(1, 1, 1.5, 0, 0)
    f = sampled(np.ones_like, 16)
    expect = 1.0 / math.gamma(2.5)
    assert prabhakar_integral(p, f, 1.0) == pytest.approx(expect, rel=1e-13)
    assert prabhakar_integral(p, f, 1.0) == pytest.approx(0.752253, abs=5e-7)


@pytest.mark.parametrize("params,iv", [
    ((1.5, 0.7, 2.5, 1.2, 0.4), Interval(-1.0, 2.0)),
    ((1.0, 1.0, 1.5, 0.5, 0.3), Interval(0.0, 1.0)),
    ((0.8, 1.3, 0.6, 0.7, 0.9), Interval(2.0, 3.5)),
    ((2.0, 0.5, 1.1, 2.0, 1.5), Interval(0.0, 2.0)),
])
def test_integral_of_one_closed_form(params, iv):
    # piecewise-linear data is reproduced exactly, so only rounding remains
    p = OperatorParams(*params)
    f = sampled(np.ones_like, 20, iv)
    nodes = iv.grid(20)
    at_nodes = integral_at_nodes(p, f)
    for x, v in zip(nodes[1:], at_nodes[1:]):
        assert v == pytest.approx(constant_integral(p, x - iv.a), rel=1e-12)
    x = iv.a + 0.37 * iv.length
    assert prabhakar_integral(p, f, x) == pytest.approx(constant_integral(p, x - iv.a), rel=1e-12)


def test_integral_of_linear_function_is_exact():
    # Riemann-Liouville: I^beta t = t^(beta+1) / Gamma(beta+2)
    p = OperatorParams(1, 1, 0.7, 0, 0)
    f = sampled(lambda t: t, 10)
    nodes = UNIT.grid(10)
    expect = nodes ** 1.7 / math.gamma(2.7)
    assert np.allclose(integral_at_nodes(p, f), expect, rtol=1e-12, atol=1e-15)


def test_integral_second_order_convergence_against_quadrature():
    p = OperatorParams(1.5, 0.7, 2.5, 1.2, 0.4)
    x = 0.8
    with mpmath.workdps(20):
        ref = float(mpmath.quad(lambda t: mp_kernel(p, x - t) * mpmath.sin(t), [0, x]))
    e32 = abs(prabhakar_integral(p, sampled(np.sin, 32), x) - ref)
    e64 = abs(prabhakar_integral(p, sampled(np.sin, 64), x) - ref)
    assert e64 < 5e-6
    assert e32 / e64 > 3.5
    refined = abs(prabhakar_integral(p, sampled(np.sin, 32), x, subdiv=4) - ref)
    assert refined < e32 / 5


def test_integral_nodes_agree_with_pointwise():
    p = OperatorParams(0.8, 1.3, 1.4, 0.7, 0.9)
    f = sampled(lambda t: np.cos(3 * t) + t ** 2, 24)
    nodes = UNIT.grid(24)
    vals = integral_at_nodes(p, f)
    for i in (0, 5, 13, 24):
        assert prabhakar_integral(p, f, nodes[i]) == pytest.approx(vals[i], rel=1e-12, abs=1e-15)


def test_integral_linearity():
    p = OperatorParams(1.5, 0.7, 2.5, 1.2, 0.4)
    f = sampled(np.sin, 40)
    g = sampled(np.exp, 40)
    combo = SampledFunction(UNIT, 2.0 * f.values - 3.0 * g.values)
    lhs = integral_at_nodes(p, combo)
    rhs = 2.0 * integral_at_nodes(p, f) - 3.0 * integral_at_nodes(p, g)
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-14)


def test_integral_outside_interval():
    f = sampled(np.sin, 16)
    with pytest.raises(DomainError):
        prabhakar_integral(OperatorParams(1, 1, 1.5, 0, 0), f, 1.5)
    with pytest.raises(DomainError):
        prabhakar_integral(OperatorParams(1, 1, 1.5, 0, 0), f, 0.5, subdiv=0)


# derivative

def test_derivative_order():
    assert derivative_order(OperatorParams(1, 1, 1.5, 0, 0)) == 2
    assert derivative_order(OperatorParams(2, 1, 1.5, 0, 0)) == 1
    assert derivative_order(OperatorParams(1, 1, 2.0, 0, 0)) == 3


def test_riemann_liouville_derivative_of_t():
    # D^1.5 t = Gamma(2)/Gamma(0.5) x^(-0.5)
    p = OperatorParams(1, 1, 1.5, 0, 0)
    expect = 1.0 / math.gamma(0.5) / math.sqrt(0.5)
    assert expect == pytest.approx(0.797885, abs=5e-7)
    value = prabhakar_derivative(p, sampled(lambda t: t, 128), 0.5)
    assert value == pytest.approx(expect, rel=1e-6)


def test_derivative_of_kernel_function_vanishes():
    for params in ((1.0, 1.0, 1.5, 0.5, 0.3), (1.5, 0.7, 2.5, 1.2, 0.4), (2.0, 1.0, 3.2, 1.0, 1.0)):
        p = OperatorParams(*params)
        errs = []
        for n in (64, 128):
            y = kernel_function(p, UNIT, n)
            _, d = derivative_at_nodes(p, y, homogeneous=True)
            errs.append(np.max(np.abs(d)))
        assert errs[1] < 5e-4
        assert errs[0] / errs[1] > 2.0


def test_derivative_pointwise_matches_nodes():
    p = OperatorParams(1.5, 0.7, 2.5, 1.2, 0.4)
    f = sampled(lambda t: np.sin(2 * t) + t, 64)
    idx, vals = derivative_at_nodes(p, f)
    nodes = UNIT.grid(64)
    for i in (idx[0], 32, idx[-1]):
        assert prabhakar_derivative(p, f, nodes[i]) == pytest.approx(vals[i - idx[0]], rel=1e-9, abs=1e-11)


def test_left_inverse_converges():
    p = OperatorParams(1.0, 1.0, 1.5, 0.5, 0.3)
    e64, e128 = left_inverse_errors(p, np.sin)
    assert e64 / e128 >= 2.0


def test_derivative_stencil_errors():
    p = OperatorParams(1, 1, 1.5, 0, 0)
    f = sampled(lambda t: t, 16)
    with pytest.raises(DomainError, match="stencil"):
        prabhakar_derivative(p, f, 0.0)
    with pytest.raises(DomainError, match="stencil"):
        prabhakar_derivative(p, f, 1.0)


def test_kernel_function_requires_order_at_least_one():
    with pytest.raises(DomainError):
        kernel_function(OperatorParams(1, 1, 0.5, 0, 0), UNIT, 16)


# Laplace oracle

def test_laplace_closed_form_special_cases():
    p = OperatorParams(2.0, 0.7, 3.0, 0.0, 0.3)
    assert laplace_closed_form_integral(p, 1.7) == pytest.approx((2.0 * 1.7) ** -1.5, rel=1e-15)
    p = OperatorParams(1.5, 0.7, 2.5, 1.2, 0.0)
    assert laplace_closed_form_integral(p, 2.0) == pytest.approx(3.0 ** (-2.5 / 1.5), rel=1e-15)
    p = OperatorParams(1.0, 0.8, 1.3, 0.6, 0.4)
    s = 2.5
    expect = s ** -1.3 * (1.0 - 0.4 * s ** -0.8) ** -0.6
    assert laplace_closed_form_integral(p, s) == pytest.approx(expect, rel=1e-14)


def test_laplace_examples():
    c = laplace_numeric(OperatorParams(1, 1, 2, 0, 0), 2.0)
    assert c.closed_form == 0.25
    assert c.relative_error < 1e-6
    c = laplace_numeric(OperatorParams(1, 1, 1.5, 0.5, 0.3), 3.0)
    assert c.relative_error < 1e-6
    p = OperatorParams(1.5, 0.7, 2.5, 1.2, 0.0)
    c = laplace_numeric(p, 1.3)
    assert c.numeric == pytest.approx((1.5 * 1.3) ** (-p.order), rel=1e-6)


def test_laplace_margin_policy():
    p = OperatorParams(1.0, 1.0, 1.5, 0.5, 0.6)
    with pytest.raises(DomainError, match="margin"):
        laplace_closed_form_integral(p, 0.5)
    with pytest.raises(DomainError):
        laplace_numeric(p, 0.6)
    slow = laplace_numeric(p, 1.0)
    assert slow.slow_convergence
    assert slow.convergence_margin == pytest.approx(0.6)
    assert not laplace_numeric(p, 3.0).slow_convergence
    with pytest.raises(DomainError):
        laplace_closed_form_integral(p, 0.0)
