"""
Tests for SI to dimensionless conversion
"""

import numpy as np
import pytest

from afmflow.errors import ConfigError
from afmflow.models.material import MU0, PhysicalParams
from afmflow.nondim import (derived_summary, dimensionless_time, exchange_length,
                            nondimensionalize, physical_energy, physical_time, redimensionalize,
                            scales_of, nanodisk_params)


def test_nanodisk_coefficients():
    material, llg, time_scale = nondimensionalize(nanodisk_params())
    assert material.a11 == pytest.approx(74.19, abs=0.01)
    assert material.a22 == pytest.approx(material.a11)
    assert material.a12 == 0.0
    assert material.a0 == pytest.approx(-148.4, abs=0.05)
    assert material.q1 == pytest.approx(1.2995, abs=1e-4)
    assert material.eta_s1 == pytest.approx(1.0)
    assert llg.eta1 == pytest.approx(1.0)
    assert llg.alpha1 == pytest.approx(5e-3)
    assert time_scale == pytest.approx(1.0 / (2.21e5 * 376e3))


def test_nanodisk_dmi_tensor():
    material, _, _ = nondimensionalize(nanodisk_params())
    expected = 3e-3 / (MU0 * 376e3 ** 2 * 1e-9)
    assert material.dmi1[1, 0] == pytest.approx(expected)
    assert material.dmi1[0, 1] == pytest.approx(-expected)
    np.testing.assert_allclose(material.dmi1, material.dmi2)


def test_time_step_conversion():
    _, _, time_scale = nondimensionalize(nanodisk_params())
    assert dimensionless_time(2e-15, time_scale) == pytest.approx(1.662e-4, rel=1e-3)
    assert physical_time(dimensionless_time(1e-9, time_scale), time_scale) == pytest.approx(1e-9)


def test_exchange_length():
    assert exchange_length(6.59e-12, 376e3) * 1e9 == pytest.approx(8.61, abs=0.005)
    with pytest.raises(ConfigError):
        exchange_length(0.0, 376e3)


def test_reference_length_scales_exchange():
    coarse, _, _ = nondimensionalize(nanodisk_params(L=2e-9))
    fine, _, _ = nondimensionalize(nanodisk_params(L=1e-9))
    assert coarse.a11 == pytest.approx(fine.a11 / 4.0)
    # a0 is measured against the lattice constant, not L
    assert coarse.a0 == pytest.approx(fine.a0)


def test_applied_field_is_relative_to_ms():
    material, _, _ = nondimensionalize(nanodisk_params(Hext=(0.0, 0.0, 37.6e3)))
    np.testing.assert_allclose(material.h_ext, [0.0, 0.0, 0.1])


def test_unequal_sublattices():
    p = PhysicalParams(Ms1=400e3, Ms2=200e3, A11=1e-11, A22=5e-12, A12=1e-12, A0=-1e-12,
                       gamma1=2.21e5, gamma2=1.105e5, gamma0=2.21e5, alpha1=0.01, alpha2=0.02)
    material, llg, _ = nondimensionalize(p)
    assert material.eta_s1 == pytest.approx(1.0)
    assert material.eta_s2 == pytest.approx(0.5)
    assert llg.eta1 == pytest.approx(1.0)
    assert llg.eta2 == pytest.approx(1.0)


def test_round_trip():
    original = PhysicalParams(Ms1=400e3, Ms2=300e3, A11=1e-11, A22=8e-12, A12=2e-12, A0=-3e-12,
                              K1=1e5, K2=2e5, Hext=[0.0, 1e4, 0.0], gamma1=2.0e5, gamma2=1.8e5,
                              alpha1=0.1, alpha2=0.05, L=2e-9)
    material, llg, _ = nondimensionalize(original)
    back = redimensionalize(material, llg, scales_of(original))
    for name in ("Ms1", "Ms2", "A11", "A22", "A12", "A0", "K1", "K2", "gamma1", "gamma2",
                 "alpha1", "alpha2", "L"):
        assert getattr(back, name) == pytest.approx(getattr(original, name), rel=1e-12)
    np.testing.assert_allclose(back.Hext, original.Hext)


def test_incoercive_exchange_is_rejected():
    p = PhysicalParams(Ms1=400e3, Ms2=400e3, A11=1e-12, A22=1e-12, A12=5e-12)
    with pytest.raises(ConfigError):
        nondimensionalize(p)


def test_invalid_physical_data():
    with pytest.raises(ConfigError):
        PhysicalParams(Ms1=-1.0, Ms2=1.0, A11=1e-12, A22=1e-12)
    with pytest.raises(ConfigError):
        PhysicalParams.from_dict({"Ms1": 1.0, "Ms2": 1.0, "A11": 1.0, "A22": 1.0, "Ku": 3.0})


def test_energy_unit_and_summary():
    p = nanodisk_params()
    scales = scales_of(p)
    assert physical_energy(1.0, scales) == pytest.approx(MU0 * 376e3 ** 2 * 1e-27)
    summary = derived_summary(p)
    assert summary["material"]["a11"] == pytest.approx(74.19, abs=0.01)
    assert summary["exchange_length_m"][0] == pytest.approx(8.61e-9, rel=1e-3)
    assert summary["time_scale_s"] == pytest.approx(scales.time)
