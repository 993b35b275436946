"""
Tests for energy contributions and effective-field right-hand sides
"""

import numpy as np
import pytest

from afmflow.energy import (effective_field_rhs, energy, exchange_rhs, lower_order_rhs,
                            stationarity_residual)
from afmflow.experiments import toy_minimizer
from afmflow.fields import SublatticePair, constant_pair
from afmflow.models.material import MaterialParams


def test_toy_initial_energy(toy, toy_initial):
    e = energy(toy_initial, toy)
    assert e.total == pytest.approx(125.0 / 3.0)
    assert e.anisotropy == pytest.approx(125.0 / 3.0)
    assert e.exchange == pytest.approx(0.0, abs=1e-12)


def test_toy_minimizer_energy(toy, space):
    e = energy(toy_minimizer(space), toy)
    assert e.total == pytest.approx(-100.0)
    assert e.inter_homogeneous == pytest.approx(-100.0)
    assert e.anisotropy == pytest.approx(0.0, abs=1e-12)


def test_toy_minimizer_is_stationary(toy, space):
    r1, r2 = stationarity_residual(toy_minimizer(space), toy)
    assert r1 < 1e-10
    assert r2 < 1e-10


def test_exchange_of_linear_field(space):
    params = MaterialParams(a11=2.0, a22=1.0, a12=0.0, a0=0.0)
    x = space.mesh.vertices[:, 0]
    m1 = np.column_stack([x, np.zeros_like(x), np.ones_like(x)])
    pair = SublatticePair(space, m1, np.tile([0.0, 0.0, 1.0], (space.n, 1)))
    assert energy(pair, params).intra_exchange == pytest.approx(1.0)


def test_zeeman_uses_lumped_weights(space):
    params = MaterialParams(a11=1.0, a22=1.0, h_ext=[0.0, 0.0, 2.0], eta_s1=1.0, eta_s2=0.5)
    pair = constant_pair(space, (0, 0, 1), (0, 0, 1))
    assert energy(pair, params).zeeman == pytest.approx(-2.0 * 1.5)


def test_energy_is_symmetric_under_relabeling(material, pair):
    a = energy(pair, material)
    b = energy(pair.swapped(), material.swapped())
    assert a.total == pytest.approx(b.total, rel=1e-12)
    assert a.dmi == pytest.approx(b.dmi, rel=1e-12)


def test_rhs_splits_into_exchange_and_lower_order(material, pair):
    for ell in (1, 2):
        np.testing.assert_allclose(effective_field_rhs(ell, pair, material),
                                   exchange_rhs(ell, pair, material)
                                   + lower_order_rhs(ell, pair, material))


@pytest.mark.parametrize("ell", [1, 2])
def test_rhs_is_negative_energy_derivative(material, pair, ell):
    rng = np.random.default_rng(11)
    phi = rng.normal(size=pair.m1.shape)
    s = 1e-6

    def shifted(sign):
        m1 = pair.m1 + sign * s * phi if ell == 1 else pair.m1
        m2 = pair.m2 + sign * s * phi if ell == 2 else pair.m2
        return energy(SublatticePair(pair.space, m1, m2), material).total

    derivative = (shifted(1) - shifted(-1)) / (2 * s)
    rhs = effective_field_rhs(ell, pair, material)
    assert -np.sum(rhs * phi) == pytest.approx(derivative, rel=1e-6, abs=1e-8)


def test_no_lower_order_terms_gives_zero_rhs(toy, toy_initial):
    params = toy.exchange_only()
    assert not params.has_lower_order
    assert not np.any(lower_order_rhs(1, toy_initial, params))
