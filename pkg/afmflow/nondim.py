"""
Nondimensionalization
Conversion between SI material data and the dimensionless coefficients
used by the solvers, time-scale conversion and the exchange length
"""

import logging
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from .errors import ConfigError
from .models.material import MU0, LLGParams, MaterialParams, PhysicalParams

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Scales:
    """Reference scales of a conversion"""
    Ms_ref: float       # A/m
    L: float            # m
    lattice_a: float    # m
    gamma0: float       # m/(A s)

    @property
    def energy_density(self) -> float:
        """mu0 Ms^2 in J/m^3"""
        return MU0 * self.Ms_ref ** 2

    @property
    def energy(self) -> float:
        """Energy unit mu0 Ms^2 L^3 in J"""
        return self.energy_density * self.L ** 3

    @property
    def time(self) -> float:
        """Seconds per dimensionless time unit"""
        return 1.0 / (self.gamma0 * self.Ms_ref)

    def to_dict(self) -> Dict:
        return {"Ms_ref": self.Ms_ref, "L": self.L, "lattice_a": self.lattice_a,
                "gamma0": self.gamma0}


def scales_of(p: PhysicalParams) -> Scales:
    return Scales(p.Ms_ref, p.L, p.lattice_a, p.gamma0)


def nondimensionalize(p: PhysicalParams) -> Tuple[MaterialParams, LLGParams, float]:
    """
    Dimensionless material and LLG parameters of SI data plus the time scale
    in seconds per dimensionless unit. Raises ConfigError when the derived
    exchange coefficients violate a11 + a22 > 0 or a11*a22 > a12^2.
    """
    s = scales_of(p)
    mu_ms2 = s.energy_density
    eta_s1, eta_s2 = p.Ms1 / s.Ms_ref, p.Ms2 / s.Ms_ref

    material = MaterialParams(
        a11=2.0 * p.A11 / (mu_ms2 * s.L ** 2),
        a22=2.0 * p.A22 / (mu_ms2 * s.L ** 2),
        a12=p.A12 / (mu_ms2 * s.L ** 2),
        a0=4.0 * p.A0 / (mu_ms2 * s.lattice_a ** 2),
        q1=float(np.sqrt(2.0 * p.K1 / mu_ms2)),
        q2=float(np.sqrt(2.0 * p.K2 / mu_ms2)),
        axis1=p.axis1,
        axis2=p.axis2,
        dmi1=p.D1 / (mu_ms2 * s.L),
        dmi2=p.D2 / (mu_ms2 * s.L),
        h_ext=p.Hext / s.Ms_ref,
        eta_s1=eta_s1,
        eta_s2=eta_s2,
    )
    llg = LLGParams(
        eta1=(p.gamma1 / s.gamma0) / eta_s1,
        eta2=(p.gamma2 / s.gamma0) / eta_s2,
        alpha1=p.alpha1,
        alpha2=p.alpha2,
    )
    logger.info("Derived dimensionless parameters: a11=%.6g a22=%.6g a12=%.6g a0=%.6g "
                "q1=%.6g q2=%.6g (Ms_ref=%g A/m, L=%g m, time unit %.6g s)",
                material.a11, material.a22, material.a12, material.a0, material.q1,
                material.q2, s.Ms_ref, s.L, s.time)
    return material, llg, s.time


def redimensionalize(material: MaterialParams, llg: LLGParams, scales: Scales) -> PhysicalParams:
    """Inverse of nondimensionalize for the given reference scales"""
    mu_ms2 = scales.energy_density
    Ms1, Ms2 = material.eta_s1 * scales.Ms_ref, material.eta_s2 * scales.Ms_ref
    return PhysicalParams(
        Ms1=Ms1,
        Ms2=Ms2,
        A11=0.5 * material.a11 * mu_ms2 * scales.L ** 2,
        A22=0.5 * material.a22 * mu_ms2 * scales.L ** 2,
        A12=material.a12 * mu_ms2 * scales.L ** 2,
        A0=0.25 * material.a0 * mu_ms2 * scales.lattice_a ** 2,
        lattice_a=scales.lattice_a,
        K1=0.5 * material.q1 ** 2 * mu_ms2,
        K2=0.5 * material.q2 ** 2 * mu_ms2,
        axis1=material.axis1,
        axis2=material.axis2,
        D1=material.dmi1 * mu_ms2 * scales.L,
        D2=material.dmi2 * mu_ms2 * scales.L,
        Hext=material.h_ext * scales.Ms_ref,
        gamma1=llg.eta1 * material.eta_s1 * scales.gamma0,
        gamma2=llg.eta2 * material.eta_s2 * scales.gamma0,
        gamma0=scales.gamma0,
        alpha1=llg.alpha1,
        alpha2=llg.alpha2,
        L=scales.L,
        Ms_ref=scales.Ms_ref,
    )


def exchange_length(A: float, Ms: float) -> float:
    """sqrt(2A / (mu0 Ms^2)) in meters"""
    if not (A > 0 and Ms > 0):
        raise ConfigError("exchange length needs positive A and Ms")
    return float(np.sqrt(2.0 * A / (MU0 * Ms ** 2)))


def physical_energy(dimensionless: float, scales: Scales) -> float:
    """Energy in joules of a dimensionless energy value"""
    return dimensionless * scales.energy


def physical_time(t: float, time_scale: float) -> float:
    return t * time_scale


def dimensionless_time(t_seconds: float, time_scale: float) -> float:
    return t_seconds / time_scale


def nanodisk_params(L: float = 1e-9, Hext=(0.0, 0.0, 0.0)) -> PhysicalParams:
    """
    Skyrmion nanodisk material: Ms = 376 kA/m on both sublattices,
    A = 6.59 pJ/m, A0 = -6.59 pJ/m, K = 0.15 MJ/m^3 along e3,
    interfacial DMI D (outer(e2, e1) - outer(e1, e2)) with D = 3 mJ/m^2, alpha = 5e-3
    """
    D = 3e-3 * (np.outer([0.0, 1.0, 0.0], [1.0, 0.0, 0.0])
                - np.outer([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]))
    return PhysicalParams(
        Ms1=376e3, Ms2=376e3,
        A11=6.59e-12, A22=6.59e-12, A12=0.0, A0=-6.59e-12,
        lattice_a=1e-9,
        K1=0.15e6, K2=0.15e6,
        D1=D, D2=D,
        Hext=np.asarray(Hext, dtype=float),
        gamma1=2.21e5, gamma2=2.21e5, gamma0=2.21e5,
        alpha1=5e-3, alpha2=5e-3,
        L=L,
    )


def derived_summary(p: PhysicalParams) -> Dict:
    """Dimensionless coefficients and derived lengths for logs and manifests"""
    material, llg, time_scale = nondimensionalize(p)
    return {
        "material": material.to_dict(),
        "llg": llg.to_dict(),
        "time_scale_s": time_scale,
        "energy_scale_J": scales_of(p).energy,
        "exchange_length_m": (exchange_length(p.A11, p.Ms1), exchange_length(p.A22, p.Ms2)),
        "scales": scales_of(p).to_dict(),
    }
