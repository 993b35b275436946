"""
Run Configuration Models
Sections of a run config file: mesh, material, algorithm and output
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional

from ..errors import ConfigError
from .material import FieldSchedule, LLGParams, MaterialParams, PhysicalParams
from .scheme import FlowConfig, Preset, SolverConfig, ThetaScheme

MESH_KINDS = ("box", "disk", "import")
INITIAL_KINDS = ("constant", "random", "skyrmion", "vtk")
TIME_UNITS = ("dimensionless", "s")
OUTPUT_FORMATS = ("csv", "vtk", "pdf")


def _reject_unknown(section: str, data: Dict, allowed) -> None:
    if not isinstance(data, dict):
        raise ConfigError(f"section '{section}' must be an object")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown keys in '{section}': {', '.join(unknown)}")


@dataclass
class MeshSection:
    """Generator parameters or an import path"""
    kind: str = "box"
    n: List[int] = field(default_factory=lambda: [8, 8, 8])
    lo: List[float] = field(default_factory=lambda: [0.0, 0.0, 0.0])
    hi: List[float] = field(default_factory=lambda: [1.0, 1.0, 1.0])
    radius: float = 30.0
    thickness: float = 1.0
    n_radial: int = 10
    n_layers: int = 1
    path: Optional[str] = None
    format: str = "gmsh_msh2_ascii"

    def __post_init__(self):
        errors = []
        if self.kind not in MESH_KINDS:
            errors.append(f"mesh kind must be one of {', '.join(MESH_KINDS)}")
        if self.kind == "import" and not self.path:
            errors.append("mesh kind 'import' needs a path")
        if len(self.n) != 3 or any(int(k) < 1 for k in self.n):
            errors.append("mesh n must be three positive counts")
        if errors:
            raise ConfigError.from_errors("invalid mesh section", errors)

    def to_dict(self) -> Dict:
        return {
            "kind": self.kind,
            "n": list(self.n),
            "lo": list(self.lo),
            "hi": list(self.hi),
            "radius": self.radius,
            "thickness": self.thickness,
            "n_radial": self.n_radial,
            "n_layers": self.n_layers,
            "path": self.path,
            "format": self.format,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "MeshSection":
        _reject_unknown("mesh", data, cls.__dataclass_fields__)
        return cls(**data)


@dataclass
class MaterialSection:
    """
    Exactly one of dimensionless or si. The schedule is in dimensionless
    units for dimensionless materials and in seconds and A/m for si.
    """
    dimensionless: Optional[MaterialParams] = None
    si: Optional[PhysicalParams] = None
    llg: Optional[LLGParams] = None
    schedule: Optional[FieldSchedule] = None

    def __post_init__(self):
        if (self.dimensionless is None) == (self.si is None):
            raise ConfigError("material section needs exactly one of 'dimensionless' or 'si'")
        if self.si is not None and self.llg is not None:
            raise ConfigError("LLG constants of an 'si' material come from gamma and alpha")

    def to_dict(self) -> Dict:
        data = {}
        if self.dimensionless is not None:
            data["dimensionless"] = self.dimensionless.to_dict()
        if self.si is not None:
            data["si"] = self.si.to_dict()
        if self.llg is not None:
            data["llg"] = self.llg.to_dict()
        if self.schedule is not None:
            data["schedule"] = self.schedule.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> "MaterialSection":
        _reject_unknown("material", data, cls.__dataclass_fields__)
        return cls(
            dimensionless=(MaterialParams.from_dict(data["dimensionless"])
                           if "dimensionless" in data else None),
            si=PhysicalParams.from_dict(data["si"]) if "si" in data else None,
            llg=LLGParams.from_dict(data["llg"]) if "llg" in data else None,
            schedule=FieldSchedule.from_dict(data["schedule"]) if "schedule" in data else None,
        )


@dataclass
class AlgorithmSection:
    """Preset, flow settings, final time of dynamic runs and initial state"""
    preset: str = "decoupled"
    theta: Optional[ThetaScheme] = None
    metric: Optional[str] = None
    tau: float = 1e-3
    eps: float = 1e-4
    stop_aggregation: str = "max_over_sublattices"
    max_steps: int = 10000
    solver: SolverConfig = field(default_factory=SolverConfig)
    T: Optional[float] = None
    time_unit: str = "dimensionless"     # unit of tau and T
    include_precession: bool = True
    initial: Dict = field(default_factory=lambda: {"kind": "constant"})
    seed: int = 0

    def __post_init__(self):
        errors = []
        if self.preset not in [p.value for p in Preset]:
            errors.append(f"unknown preset '{self.preset}'")
        if self.initial.get("kind") not in INITIAL_KINDS:
            errors.append(f"initial kind must be one of {', '.join(INITIAL_KINDS)}")
        if self.T is not None and not self.T > 0:
            errors.append("T must be positive")
        if self.time_unit not in TIME_UNITS:
            errors.append(f"time_unit must be one of {', '.join(TIME_UNITS)}")
        if errors:
            raise ConfigError.from_errors("invalid algorithm section", errors)

    @property
    def is_llg(self) -> bool:
        return self.preset == Preset.LLG.value

    def flow_config(self) -> FlowConfig:
        overrides = {"tau": self.tau, "eps": self.eps, "stop_aggregation": self.stop_aggregation,
                     "max_steps": self.max_steps, "solver": self.solver}
        if self.theta is not None:
            overrides["theta"] = self.theta
        if self.metric is not None:
            overrides["metric"] = self.metric
        return FlowConfig.preset(self.preset, **overrides)

    def to_dict(self) -> Dict:
        return {
            "preset": self.preset,
            "theta": self.theta.to_dict() if self.theta else None,
            "metric": self.metric,
            "tau": self.tau,
            "eps": self.eps,
            "stop_aggregation": self.stop_aggregation,
            "max_steps": self.max_steps,
            "solver": self.solver.to_dict(),
            "T": self.T,
            "time_unit": self.time_unit,
            "include_precession": self.include_precession,
            "initial": dict(self.initial),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "AlgorithmSection":
        _reject_unknown("algorithm", data, cls.__dataclass_fields__)
        data = dict(data)
        if data.get("theta") is not None:
            data["theta"] = ThetaScheme.from_dict(data["theta"])
        if "solver" in data:
            data["solver"] = SolverConfig.from_dict(data["solver"])
        return cls(**data)


@dataclass
class OutputSection:
    directory: str = "results"
    snapshot_every: int = 50
    formats: List[str] = field(default_factory=lambda: ["csv", "vtk"])

    def __post_init__(self):
        bad = [f for f in self.formats if f not in OUTPUT_FORMATS]
        if bad:
            raise ConfigError(f"unknown output formats: {', '.join(bad)}")
        if self.snapshot_every < 1:
            raise ConfigError("snapshot_every must be at least 1")

    def to_dict(self) -> Dict:
        return {"directory": self.directory, "snapshot_every": self.snapshot_every,
                "formats": list(self.formats)}

    @classmethod
    def from_dict(cls, data: Dict) -> "OutputSection":
        _reject_unknown("output", data, cls.__dataclass_fields__)
        return cls(**data)


@dataclass
class RunConfig:
    """Complete description of a run"""
    mesh: MeshSection
    material: MaterialSection
    algorithm: AlgorithmSection = field(default_factory=AlgorithmSection)
    output: OutputSection = field(default_factory=OutputSection)
    name: str = "run"

    def to_dict(self) -> Dict:
        """Convert config to dictionary for JSON serialization"""
        return {
            "name": self.name,
            "mesh": self.mesh.to_dict(),
            "material": self.material.to_dict(),
            "algorithm": self.algorithm.to_dict(),
            "output": self.output.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "RunConfig":
        """Create config from dictionary; unknown keys in any section are errors"""
        _reject_unknown("config", data, ("name", "mesh", "material", "algorithm", "output"))
        if "material" not in data:
            raise ConfigError("config needs a 'material' section")
        return cls(
            mesh=MeshSection.from_dict(data.get("mesh", {})),
            material=MaterialSection.from_dict(data["material"]),
            algorithm=AlgorithmSection.from_dict(data.get("algorithm", {})),
            output=OutputSection.from_dict(data.get("output", {})),
            name=data.get("name", "run"),
        )
