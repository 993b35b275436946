"""
Scheme Configuration Models
Theta-scheme weights, gradient-flow metric, stopping rule and linear solver options
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List

from ..errors import ConfigError


class Metric(Enum):
    L2 = "L2"
    LUMPED_L2 = "LumpedL2"
    H1 = "H1"

    @property
    def c_metric(self) -> float:
        """Constant c with ||phi|| <= c ||phi||_metric"""
        return 5 ** 0.5 if self is Metric.LUMPED_L2 else 1.0


class StopAggregation(Enum):
    MAX = "max_over_sublattices"
    SUM = "sum_over_sublattices"


class Preset(Enum):
    COUPLED = "coupled"
    DECOUPLED = "decoupled"
    GENERAL = "general-theta"
    LLG = "llg"


@dataclass(frozen=True)
class ThetaScheme:
    """Implicitness weights of the exchange terms"""
    theta1: float = 1.0   # intralattice
    theta2: float = 0.0   # inhomogeneous interlattice
    theta3: float = 0.0   # homogeneous interlattice

    def __post_init__(self):
        errors = validate_theta(self)
        if errors:
            raise ConfigError.from_errors("invalid theta scheme", errors)

    @classmethod
    def coupled(cls) -> "ThetaScheme":
        return cls(1.0, 0.5, 0.5)

    @classmethod
    def decoupled(cls) -> "ThetaScheme":
        return cls(1.0, 0.0, 0.0)

    @property
    def is_decoupled(self) -> bool:
        return self.theta2 == 0.0 and self.theta3 == 0.0

    @property
    def supported(self) -> bool:
        # theta1 < 1/2 needs tau = O(h^2)
        return self.theta1 >= 0.5

    def as_tuple(self):
        return (self.theta1, self.theta2, self.theta3)

    def to_dict(self) -> Dict:
        return {"theta1": self.theta1, "theta2": self.theta2, "theta3": self.theta3}

    @classmethod
    def from_dict(cls, data: Dict) -> "ThetaScheme":
        unknown = sorted(set(data) - set(cls.__dataclass_fields__))
        if unknown:
            raise ConfigError(f"unknown theta keys: {', '.join(unknown)}")
        return cls(**data)


def validate_theta(theta: ThetaScheme, a11: float = None, a22: float = None,
                   a12: float = None) -> List[str]:
    """
    Check theta ranges and, when coefficients are given, the tau-free well-posedness conditions
    """
    errors = []
    for name, value in zip(("theta1", "theta2", "theta3"), theta.as_tuple()):
        if not 0.0 <= value <= 1.0:
            errors.append(f"{name} must lie in [0, 1], got {value}")
    if not theta.theta1 > 0:
        errors.append("theta1 > 0 required")
    if a11 is not None and not a11 * a22 * theta.theta1 ** 2 > a12 ** 2 * theta.theta2 ** 2:
        errors.append("a11*a22*theta1^2 > a12^2*theta2^2 violated")
    return errors


@dataclass
class SolverConfig:
    """Krylov solver options for the reduced tangent systems"""
    tol: float = 1e-10
    max_iter: int = 0          # 0 means 10 * reduced dimension
    restart: int = 50
    method: str = "gmres"      # gmres | cg
    preconditioner: str = "block_jacobi"   # block_jacobi | ilu | none
    parallel: bool = False
    strict: bool = False       # raise NumericalError on non-convergence

    def __post_init__(self):
        errors = []
        if not 0.0 < self.tol < 1.0:
            errors.append("solver tol must lie in (0, 1)")
        if self.max_iter < 0:
            errors.append("solver max_iter must be non-negative")
        if self.restart < 1:
            errors.append("solver restart must be at least 1")
        if self.method not in ("gmres", "cg"):
            errors.append(f"unknown solver method '{self.method}'")
        if self.preconditioner not in ("block_jacobi", "ilu", "none"):
            errors.append(f"unknown preconditioner '{self.preconditioner}'")
        if errors:
            raise ConfigError.from_errors("invalid solver options", errors)

    def iteration_limit(self, dim: int) -> int:
        return self.max_iter or 10 * dim

    def to_dict(self) -> Dict:
        return {
            "tol": self.tol,
            "max_iter": self.max_iter,
            "restart": self.restart,
            "method": self.method,
            "preconditioner": self.preconditioner,
            "parallel": self.parallel,
            "strict": self.strict,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "SolverConfig":
        unknown = sorted(set(data) - set(cls.__dataclass_fields__))
        if unknown:
            raise ConfigError(f"unknown solver keys: {', '.join(unknown)}")
        return cls(**data)


@dataclass
class FlowConfig:
    """Gradient-flow run settings"""
    theta: ThetaScheme = field(default_factory=ThetaScheme.decoupled)
    metric: Metric = Metric.L2
    tau: float = 1e-3
    eps: float = 1e-4
    stop_aggregation: StopAggregation = StopAggregation.MAX
    max_steps: int = 10000
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        try:
            if isinstance(self.metric, str):
                self.metric = Metric(self.metric)
            if isinstance(self.stop_aggregation, str):
                self.stop_aggregation = StopAggregation(self.stop_aggregation)
        except ValueError as e:
            raise ConfigError(str(e)) from None
        errors = []
        if not self.tau > 0:
            errors.append("tau must be positive")
        if not self.eps > 0:
            errors.append("eps must be positive")
        if self.max_steps < 0:
            errors.append("max_steps must be non-negative")
        if errors:
            raise ConfigError.from_errors("invalid flow configuration", errors)

    @classmethod
    def preset(cls, name: str, **overrides) -> "FlowConfig":
        """Build a configuration for a named preset"""
        try:
            preset = Preset(name)
        except ValueError:
            raise ConfigError(f"unknown preset '{name}'") from None
        if preset is Preset.COUPLED:
            overrides.setdefault("theta", ThetaScheme.coupled())
        elif preset is Preset.DECOUPLED:
            overrides.setdefault("theta", ThetaScheme.decoupled())
        elif preset is Preset.LLG:
            # stopping rule and diagnostics of the tangent plane scheme
            overrides.setdefault("theta", ThetaScheme.decoupled())
            overrides.setdefault("metric", Metric.LUMPED_L2)
        elif "theta" not in overrides:
            raise ConfigError("general-theta preset needs explicit theta weights")
        return cls(**overrides)

    def to_dict(self) -> Dict:
        return {
            "theta": self.theta.to_dict(),
            "metric": self.metric.value,
            "tau": self.tau,
            "eps": self.eps,
            "stop_aggregation": self.stop_aggregation.value,
            "max_steps": self.max_steps,
            "solver": self.solver.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "FlowConfig":
        data = dict(data)
        unknown = sorted(set(data) - set(cls.__dataclass_fields__))
        if unknown:
            raise ConfigError(f"unknown flow keys: {', '.join(unknown)}")
        if "theta" in data:
            data["theta"] = ThetaScheme.from_dict(data["theta"])
        if "solver" in data:
            data["solver"] = SolverConfig.from_dict(data["solver"])
        return cls(**data)
