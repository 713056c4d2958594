import math

import numpy as np
import pytest

from kprabhakar import (
    DomainError,
    Interval,
    OperatorParams,
    SampledFunction,
    assemble,
    critical_constant_q,
    critical_report,
    lyapunov_bound,
    residual,
    spectral_radius,
)
from kprabhakar.bvp import FredholmSystem, sample_potential, simpson_weights
from kprabhakar.verify import equivalence_residuals

CLASSICAL = OperatorParams.classical()
UNIT = Interval(0.0, 1.0)


def test_zero_potential_gives_zero_matrix():
    for rule in ("simpson", "product"):
        system = assemble(OperatorParams(1.0, 1.0, 1.5, 0.5, 0.3), UNIT, 0.0, 32, rule=rule)
        assert not np.any(system.matrix)
        rep = spectral_radius(system)
        assert rep.spectral_radius == 0.0
        assert rep.converged


def test_classical_spectral_radius():
    errs = []
    for n in (32, 64, 128, 256):
        rep = spectral_radius(assemble(CLASSICAL, UNIT, 1.0, n))
        assert rep.converged
        errs.append(abs(rep.spectral_radius - 1.0 / math.pi ** 2))
    assert errs[1] < 1e-4
    assert all(a > b for a, b in zip(errs, errs[1:]))
    ref = spectral_radius(assemble(CLASSICAL, UNIT, 1.0, 64)).spectral_radius
    assert ref == pytest.approx(0.1013212, abs=1e-4)


def test_eigenvector_is_sine():
    # Simpson's alternating weights leave an O(h^2) wiggle on odd nodes only
    errs = []
    for n in (64, 128):
        rep = spectral_radius(assemble(CLASSICAL, UNIT, 1.0, n))
        err = rep.eigenvector.values - np.sin(np.pi * UNIT.grid(n))
        assert np.max(np.abs(err[::2])) < 1e-8
        assert rep.residual <= 1e-10
        errs.append(np.max(np.abs(err)))
    assert errs[1] < 2e-4
    assert errs[0] / errs[1] > 3.5


def test_potential_scaling():
    p = OperatorParams(1.5, 0.7, 2.5, 1.2, 0.4)
    one = spectral_radius(assemble(p, UNIT, 1.0, 64)).spectral_radius
    two = spectral_radius(assemble(p, UNIT, 2.0, 64)).spectral_radius
    assert two == pytest.approx(2.0 * one, rel=1e-9)


def test_endpoint_rows_vanish():
    p = OperatorParams(1.0, 1.0, 1.5, 0.5, 0.3)
    for rule in ("simpson", "product"):
        m = assemble(p, UNIT, lambda t: 1.0 + t, 32, rule=rule).matrix
        assert not np.any(m[0])
        assert np.max(np.abs(m[-1])) <= 1e-12 * np.max(np.abs(m))
        assert not m.flags.writeable


def test_rules_agree_on_critical_constant():
    p = OperatorParams(1.0, 1.0, 1.5, 0.5, 0.3)
    simpson = critical_constant_q(p, UNIT, 256)
    product = critical_constant_q(p, UNIT, 256, rule="product")
    assert simpson == pytest.approx(product, rel=2e-3)


def test_critical_constant_classical():
    assert critical_constant_q(CLASSICAL, UNIT, 128) == pytest.approx(math.pi ** 2, abs=1e-3)
    # the critical constant scales like L^-2 in the classical case
    assert critical_constant_q(CLASSICAL, Interval(0.0, 2.0), 128) == pytest.approx(
        math.pi ** 2 / 4.0, abs=1e-3)


@pytest.mark.parametrize("params", [
    (1.0, 1.0, 1.5, 0.5, 0.3),
    (2.0, 1.0, 3.2, 1.0, 1.0),
    (0.8, 1.3, 1.4, 0.7, 0.9),
])
def test_critical_constant_respects_bound(params):
    p = OperatorParams(*params)
    rep = critical_report(p, UNIT, 64)
    assert rep.lhs >= rep.bound
    assert rep.bound == lyapunov_bound(p, UNIT)
    d = rep.to_dict()
    assert d["sound"] and d["converged"]
    assert d["margin"] == pytest.approx(rep.lhs - rep.bound)


def test_residual_examples():
    y = SampledFunction(UNIT, np.zeros(65))
    assert residual(CLASSICAL, UNIT, 5.0, y) == 0.0
    res = equivalence_residuals((64, 128, 256))
    assert res[1] < 1e-2
    assert res[0] > res[1] > res[2]
    assert math.log2(res[1] / res[2]) >= 1.0


@pytest.mark.parametrize("params", [(1.0, 1.0, 1.5, 0.5, 0.3), (2.0, 1.0, 3.2, 1.0, 1.0)])
def test_eigenvector_residual_decreases(params):
    p = OperatorParams(*params)
    res = []
    for n in (32, 64, 128):
        rep = spectral_radius(assemble(p, UNIT, 1.0, n, rule="product"))
        res.append(residual(p, UNIT, 1.0 / rep.spectral_radius, rep.eigenvector))
    assert res[0] > res[1] > res[2]
    assert res[2] < 5e-3


def test_non_convergence_is_reported():
    # eigenvalues +1 and -1 tie, so the iterates oscillate
    system = FredholmSystem(UNIT, 2, np.diag([1.0, -1.0, 0.0]))
    rep = spectral_radius(system, max_iter=50)
    assert not rep.converged
    assert rep.iterations == 50
    rep = spectral_radius(assemble(CLASSICAL, UNIT, 1.0, 64), max_iter=1)
    assert not rep.converged


def test_grid_size_validation():
    for n in (8, 15, 17, 1024):
        with pytest.raises(DomainError):
            assemble(CLASSICAL, UNIT, 1.0, n)
    with pytest.raises(DomainError):
        assemble(CLASSICAL, UNIT, 1.0, 32, rule="gauss")
    with pytest.raises(DomainError):
        assemble(OperatorParams(1, 1, 0.8, 0, 0), UNIT, 1.0, 32)


def test_sample_potential_forms():
    nodes = UNIT.grid(16)
    assert np.all(sample_potential(3.0, UNIT, 16) == 3.0)
    assert np.allclose(sample_potential(np.cos, UNIT, 16), np.cos(nodes))
    q = SampledFunction.from_callable(lambda t: t, UNIT, 32)
    assert np.allclose(sample_potential(q, UNIT, 16), nodes)
    with pytest.raises(DomainError):
        sample_potential(q, Interval(0.0, 2.0), 16)
    with pytest.raises(DomainError):
        sample_potential(lambda t: np.full_like(t, np.inf), UNIT, 16)


def test_simpson_weights():
    w = simpson_weights(4, 0.25)
    assert np.allclose(w, np.array([1, 4, 2, 4, 1]) * 0.25 / 3)
    with pytest.raises(DomainError):
        simpson_weights(5, 0.2)


def test_eigenvector_csv():
    rep = spectral_radius(assemble(CLASSICAL, UNIT, 1.0, 16))
    lines = rep.eigenvector_csv().splitlines()
    assert lines[0] == "t,y"
    assert len(lines) == 18
    assert rep.to_dict()["n"] == 16
