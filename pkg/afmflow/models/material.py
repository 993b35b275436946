"""
Material Parameter Models
Dimensionless energy coefficients, LLG constants and SI-unit material data
"""

from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

import numpy as np

from ..errors import ConfigError

MU0 = 4.0e-7 * np.pi  # vacuum permeability, N/A^2


def _vector(value, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise ConfigError(f"{name} must be a 3-vector, got shape {arr.shape}")
    return arr


def _matrix(value, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.shape != (3, 3):
        raise ConfigError(f"{name} must be a 3x3 matrix, got shape {arr.shape}")
    return arr


def validate_exchange_coefficients(a11: float, a22: float, a12: float) -> List[str]:
    """
    Check the coefficient inequalities that make the exchange energy coercive
    """
    errors = []
    if not a11 + a22 > 0:
        errors.append(f"a11 + a22 > 0 violated (a11 + a22 = {a11 + a22:g})")
    if not a11 * a22 > a12 ** 2:
        errors.append(f"a11*a22 > a12^2 violated ({a11 * a22:g} <= {a12 ** 2:g})")
    return errors


@dataclass
class MaterialParams:
    """Dimensionless coefficients of the two-sublattice energy"""
    a11: float
    a22: float
    a12: float = 0.0
    a0: float = 0.0
    q1: float = 0.0
    q2: float = 0.0
    axis1: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    axis2: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    dmi1: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))
    dmi2: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))
    h_ext: np.ndarray = field(default_factory=lambda: np.zeros(3))
    eta_s1: float = 1.0
    eta_s2: float = 1.0

    def __post_init__(self):
        self.axis1 = _vector(self.axis1, "axis1")
        self.axis2 = _vector(self.axis2, "axis2")
        self.dmi1 = _matrix(self.dmi1, "dmi1")
        self.dmi2 = _matrix(self.dmi2, "dmi2")
        self.h_ext = _vector(self.h_ext, "h_ext")
        errors = validate_material_params(self)
        if errors:
            raise ConfigError.from_errors("invalid material parameters", errors)

    def exchange(self, ell: int) -> float:
        return self.a11 if ell == 1 else self.a22

    def anisotropy(self, ell: int):
        """Return (q, axis) for sublattice ell"""
        return (self.q1, self.axis1) if ell == 1 else (self.q2, self.axis2)

    def dmi(self, ell: int) -> np.ndarray:
        return self.dmi1 if ell == 1 else self.dmi2

    def eta_s(self, ell: int) -> float:
        return self.eta_s1 if ell == 1 else self.eta_s2

    @property
    def has_lower_order(self) -> bool:
        return bool(self.q1 or self.q2 or np.any(self.dmi1) or np.any(self.dmi2)
                    or np.any(self.h_ext))

    def exchange_only(self) -> "MaterialParams":
        """Copy with anisotropy, DMI and applied field switched off"""
        return replace(self, q1=0.0, q2=0.0, dmi1=np.zeros((3, 3)), dmi2=np.zeros((3, 3)),
                       h_ext=np.zeros(3))

    def with_field(self, h_ext) -> "MaterialParams":
        return replace(self, h_ext=np.asarray(h_ext, dtype=float))

    def swapped(self) -> "MaterialParams":
        """Copy with the two sublattices relabeled"""
        return MaterialParams(
            a11=self.a22, a22=self.a11, a12=self.a12, a0=self.a0,
            q1=self.q2, q2=self.q1, axis1=self.axis2, axis2=self.axis1,
            dmi1=self.dmi2, dmi2=self.dmi1, h_ext=self.h_ext,
            eta_s1=self.eta_s2, eta_s2=self.eta_s1,
        )

    def to_dict(self) -> Dict:
        return {
            "a11": self.a11,
            "a22": self.a22,
            "a12": self.a12,
            "a0": self.a0,
            "q1": self.q1,
            "q2": self.q2,
            "axis1": self.axis1.tolist(),
            "axis2": self.axis2.tolist(),
            "dmi1": self.dmi1.tolist(),
            "dmi2": self.dmi2.tolist(),
            "h_ext": self.h_ext.tolist(),
            "eta_s1": self.eta_s1,
            "eta_s2": self.eta_s2,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "MaterialParams":
        """Create parameters from a dictionary; unknown keys are rejected"""
        unknown = sorted(set(data) - set(cls.__dataclass_fields__))
        if unknown:
            raise ConfigError(f"unknown material keys: {', '.join(unknown)}")
        return cls(**data)


def validate_material_params(params: MaterialParams) -> List[str]:
    """
    Validate dimensionless material parameters and return list of errors
    """
    errors = validate_exchange_coefficients(params.a11, params.a22, params.a12)
    if params.a11 <= 0 or params.a22 <= 0:
        errors.append("a11 and a22 must be positive")
    for name in ("q1", "q2"):
        if getattr(params, name) < 0:
            errors.append(f"{name} must be non-negative")
    for name in ("axis1", "axis2"):
        norm = float(np.linalg.norm(getattr(params, name)))
        if abs(norm - 1.0) > 1e-12:
            errors.append(f"{name} must have unit length (|{name}| = {norm:.15g})")
    for name in ("eta_s1", "eta_s2"):
        if not getattr(params, name) > 0:
            errors.append(f"{name} must be positive")
    return errors


@dataclass
class LLGParams:
    """Gyromagnetic factors and Gilbert damping of the two sublattices"""
    eta1: float = 1.0
    eta2: float = 1.0
    alpha1: float = 1.0
    alpha2: float = 1.0

    def __post_init__(self):
        bad = [name for name in ("eta1", "eta2", "alpha1", "alpha2") if not getattr(self, name) > 0]
        if bad:
            raise ConfigError(f"LLG parameters must be positive: {', '.join(bad)}")

    def eta(self, ell: int) -> float:
        return self.eta1 if ell == 1 else self.eta2

    def alpha(self, ell: int) -> float:
        return self.alpha1 if ell == 1 else self.alpha2

    def to_dict(self) -> Dict:
        return {"eta1": self.eta1, "eta2": self.eta2, "alpha1": self.alpha1, "alpha2": self.alpha2}

    @classmethod
    def from_dict(cls, data: Dict) -> "LLGParams":
        unknown = sorted(set(data) - set(cls.__dataclass_fields__))
        if unknown:
            raise ConfigError(f"unknown LLG keys: {', '.join(unknown)}")
        return cls(**data)


@dataclass
class PhysicalParams:
    """Material data in SI units"""
    Ms1: float                      # A/m
    Ms2: float                      # A/m
    A11: float                      # J/m
    A22: float                      # J/m
    A12: float = 0.0                # J/m
    A0: float = 0.0                 # J/m
    lattice_a: float = 1e-9         # m
    K1: float = 0.0                 # J/m^3
    K2: float = 0.0                 # J/m^3
    axis1: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    axis2: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    D1: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))   # J/m^2
    D2: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))   # J/m^2
    Hext: np.ndarray = field(default_factory=lambda: np.zeros(3))      # A/m
    gamma1: float = 2.21e5          # m/(A s)
    gamma2: float = 2.21e5
    gamma0: float = 2.21e5
    alpha1: float = 1.0
    alpha2: float = 1.0
    L: Optional[float] = None       # reference length, defaults to lattice_a
    Ms_ref: Optional[float] = None  # reference magnetization, defaults to max(Ms1, Ms2)

    def __post_init__(self):
        self.axis1 = _vector(self.axis1, "axis1")
        self.axis2 = _vector(self.axis2, "axis2")
        self.D1 = _matrix(self.D1, "D1")
        self.D2 = _matrix(self.D2, "D2")
        self.Hext = _vector(self.Hext, "Hext")
        if self.L is None:
            self.L = self.lattice_a
        if self.Ms_ref is None:
            self.Ms_ref = max(self.Ms1, self.Ms2)
        errors = validate_physical_params(self)
        if errors:
            raise ConfigError.from_errors("invalid physical parameters", errors)

    def to_dict(self) -> Dict:
        data = {}
        for name in self.__dataclass_fields__:
            value = getattr(self, name)
            data[name] = value.tolist() if isinstance(value, np.ndarray) else value
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> "PhysicalParams":
        unknown = sorted(set(data) - set(cls.__dataclass_fields__))
        if unknown:
            raise ConfigError(f"unknown SI material keys: {', '.join(unknown)}")
        return cls(**data)


def validate_physical_params(params: PhysicalParams) -> List[str]:
    """
    Validate SI material data and return list of errors
    """
    errors = []
    for name in ("Ms1", "Ms2", "Ms_ref", "L", "lattice_a", "gamma0", "gamma1", "gamma2"):
        if not getattr(params, name) > 0:
            errors.append(f"{name} must be positive")
    for name in ("A11", "A22"):
        if not getattr(params, name) > 0:
            errors.append(f"{name} must be positive")
    for name in ("K1", "K2"):
        if getattr(params, name) < 0:
            errors.append(f"{name} must be non-negative")
    return errors


@dataclass
class FieldSchedule:
    """
    Applied field h(t) = amplitude(t) * direction with piecewise-linear amplitude.
    Outside the breakpoint span the amplitude is held at the end values.
    """
    times: List[float] = field(default_factory=lambda: [0.0])
    amplitudes: List[float] = field(default_factory=lambda: [0.0])
    direction: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))

    def __post_init__(self):
        self.times = [float(t) for t in self.times]
        self.amplitudes = [float(a) for a in self.amplitudes]
        self.direction = _vector(self.direction, "direction")
        errors = []
        if not self.times or len(self.times) != len(self.amplitudes):
            errors.append("times and amplitudes must be non-empty and of equal length")
        elif np.any(np.diff(self.times) <= 0):
            errors.append("breakpoint times must be strictly increasing")
        if errors:
            raise ConfigError.from_errors("invalid field schedule", errors)

    @classmethod
    def constant(cls, h) -> "FieldSchedule":
        h = _vector(h, "h")
        norm = float(np.linalg.norm(h))
        if norm == 0.0:
            return cls()
        return cls([0.0], [norm], h / norm)

    @classmethod
    def pulse(cls, amplitude: float, ramp_up: float, plateau_end: float, ramp_down_end: float,
              direction=(1.0, 0.0, 0.0)) -> "FieldSchedule":
        """Trapezoidal pulse starting at t = 0"""
        return cls([0.0, ramp_up, plateau_end, ramp_down_end], [0.0, amplitude, amplitude, 0.0],
                   direction)

    def amplitude(self, t: float) -> float:
        return float(np.interp(t, self.times, self.amplitudes))

    def field_at(self, t: float) -> np.ndarray:
        return self.amplitude(t) * self.direction

    def scaled(self, time_factor: float, amplitude_factor: float) -> "FieldSchedule":
        """Copy with rescaled time axis and amplitude, used for unit conversion"""
        return FieldSchedule([t * time_factor for t in self.times],
                             [a * amplitude_factor for a in self.amplitudes], self.direction)

    def to_dict(self) -> Dict:
        return {"times": list(self.times), "amplitudes": list(self.amplitudes),
                "direction": self.direction.tolist()}

    @classmethod
    def from_dict(cls, data: Dict) -> "FieldSchedule":
        unknown = sorted(set(data) - set(cls.__dataclass_fields__))
        if unknown:
            raise ConfigError(f"unknown schedule keys: {', '.join(unknown)}")
        return cls(**data)
