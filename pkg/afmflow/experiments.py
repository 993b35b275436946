"""
Experiment Presets
Named run configurations (toy cube, skyrmion nanodisk, field pulse) and the
preparation of a configured run: mesh, finite element space, dimensionless
parameters, applied-field schedule and initial state
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

import numpy as np

from .errors import ConfigError
from .fem_core import FESpace
from .fields import SublatticePair, make_initial, project_pair
from .mesh import Mesh, generate_box_mesh, generate_disk_mesh, import_mesh, mesh_stats
from .models.material import MU0, FieldSchedule, LLGParams, MaterialParams
from .models.run_config import (AlgorithmSection, MaterialSection, MeshSection, OutputSection,
                                RunConfig)
from .models.scheme import FlowConfig, SolverConfig, ThetaScheme
from .nondim import derived_summary, nondimensionalize, nanodisk_params
from .utils import read_vtk

logger = logging.getLogger(__name__)

TOY_AXIS = np.ones(3) / np.sqrt(3.0)

# field pulse of the nanodisk run, seconds
PULSE_RAMP_UP = 40e-12
PULSE_PLATEAU_END = 110e-12
PULSE_RAMP_DOWN_END = 150e-12
PULSE_FIELD_TESLA = 0.1


def toy_material() -> MaterialParams:
    """a11=2, a22=1, a12=-1/2, a0=-100, q1=5, q2=10, common axis (1,1,1)/sqrt(3)"""
    return MaterialParams(a11=2.0, a22=1.0, a12=-0.5, a0=-100.0, q1=5.0, q2=10.0,
                          axis1=TOY_AXIS, axis2=TOY_AXIS)


def toy_minimizer(space: FESpace) -> SublatticePair:
    """Constant pair (a, -a), the global minimizer of the toy energy with value -100"""
    a = np.tile(TOY_AXIS, (space.n, 1))
    return SublatticePair(space, a, -a)


def toy_cube(n: int = 8, preset: str = "decoupled", metric: str = "L2", tau: float = 1e-3,
             eps: float = 1e-4, alpha: float = 1.0) -> RunConfig:
    """Unit cube with exchange and anisotropy, constant initial guess ((1,0,0), (0,1,0))"""
    material = MaterialSection(dimensionless=toy_material(),
                               llg=LLGParams(1.0, 1.0, alpha, alpha) if preset == "llg" else None)
    algorithm = AlgorithmSection(
        preset=preset,
        metric=metric,
        tau=tau,
        eps=eps,
        theta=None,
        initial={"kind": "constant", "v1": [1.0, 0.0, 0.0], "v2": [0.0, 1.0, 0.0]},
    )
    if preset == "general-theta":
        algorithm.theta = ThetaScheme(1.0, 0.25, 0.75)
    return RunConfig(MeshSection(kind="box", n=[n, n, n]), material, algorithm,
                     OutputSection(directory="results/toy-cube"), name="toy-cube")


def skyrmion_disk(n_radial: int = 10, n_layers: int = 1, metric: str = "H1",
                  max_steps: int = 20000) -> RunConfig:
    """
    Nanodisk of diameter 60 nm and thickness 1 nm relaxed from a perturbed
    skyrmion-like state with the decoupled scheme, tau = eps = 1e-3
    """
    return RunConfig(
        MeshSection(kind="disk", radius=30.0, thickness=1.0, n_radial=n_radial,
                    n_layers=n_layers),
        MaterialSection(si=nanodisk_params()),
        AlgorithmSection(preset="decoupled", metric=metric, tau=1e-3, eps=1e-3,
                         max_steps=max_steps,
                         initial={"kind": "skyrmion", "sign": 1, "r0": 10.0, "steepness": 20.0,
                                  "amplitude": 0.3}),
        OutputSection(directory="results/skyrmion-disk", formats=["csv", "vtk"]),
        name="skyrmion-disk",
    )


def pulse_schedule_si(field_tesla: float = PULSE_FIELD_TESLA) -> FieldSchedule:
    """In-plane trapezoidal pulse along e1, times in seconds and amplitude in A/m"""
    return FieldSchedule.pulse(field_tesla / MU0, PULSE_RAMP_UP, PULSE_PLATEAU_END,
                               PULSE_RAMP_DOWN_END, direction=(1.0, 0.0, 0.0))


def skyrmion_pulse(n_radial: int = 10, T: float = 1e-9, tau: float = 2e-15,
                   initial: Optional[Dict] = None) -> RunConfig:
    """LLG response of the nanodisk skyrmion pair to the field pulse"""
    return RunConfig(
        MeshSection(kind="disk", radius=30.0, thickness=1.0, n_radial=n_radial, n_layers=1),
        MaterialSection(si=nanodisk_params(), schedule=pulse_schedule_si()),
        AlgorithmSection(preset="llg", tau=tau, T=T, time_unit="s",
                         initial=initial or {"kind": "skyrmion", "sign": 1, "r0": 10.0,
                                             "steepness": 20.0, "amplitude": 0.0}),
        OutputSection(directory="results/skyrmion-pulse", snapshot_every=500),
        name="skyrmion-pulse",
    )


EXPERIMENTS: Dict[str, Callable[..., RunConfig]] = {
    "toy-cube": toy_cube,
    "skyrmion-disk": skyrmion_disk,
    "skyrmion-pulse": skyrmion_pulse,
}


def experiment(name: str, **options) -> RunConfig:
    try:
        builder = EXPERIMENTS[name]
    except KeyError:
        raise ConfigError(f"unknown experiment '{name}' "
                          f"(available: {', '.join(sorted(EXPERIMENTS))})") from None
    return builder(**options)


def build_mesh(section: MeshSection) -> Mesh:
    if section.kind == "box":
        nx, ny, nz = (int(k) for k in section.n)
        return generate_box_mesh(nx, ny, nz, section.lo, section.hi)
    if section.kind == "disk":
        return generate_disk_mesh(section.radius, section.thickness, section.n_radial,
                                  section.n_layers)
    return import_mesh(section.path, section.format)


def load_initial_vtk(space: FESpace, path) -> SublatticePair:
    """Initial pair from the m1 and m2 arrays of a snapshot on the same mesh"""
    data = read_vtk(path)
    vectors = data["vectors"]
    if "m1" not in vectors or "m2" not in vectors:
        raise ConfigError(f"snapshot {path} lacks m1/m2 vectors")
    if len(vectors["m1"]) != space.n:
        raise ConfigError(f"snapshot {path} has {len(vectors['m1'])} points, mesh has {space.n}")
    return project_pair(SublatticePair(space, vectors["m1"], vectors["m2"]))


@dataclass
class PreparedRun:
    """Everything a solver entry point needs, in dimensionless units"""
    config: RunConfig
    mesh: Mesh
    space: FESpace
    params: MaterialParams
    llg: LLGParams
    flow: FlowConfig
    initial: SublatticePair
    schedule: Optional[FieldSchedule] = None
    T: Optional[float] = None
    time_scale: Optional[float] = None
    derived: Dict = field(default_factory=dict)

    @property
    def solver(self) -> SolverConfig:
        return self.flow.solver


def prepare(config: RunConfig) -> PreparedRun:
    """Resolve a configuration into mesh, parameters and initial state"""
    mesh = build_mesh(config.mesh)
    space = FESpace(mesh)
    stats = mesh_stats(mesh)
    logger.info("Mesh %s: %d vertices, %d elements, h_max=%.4g", mesh.name, stats.n_vertices,
                stats.n_elements, stats.h_max)

    material = config.material
    algorithm = config.algorithm
    time_scale = None
    derived: Dict = {"mesh": stats.to_dict()}
    if material.si is not None:
        params, llg, time_scale = nondimensionalize(material.si)
        derived.update(derived_summary(material.si))
        schedule = (material.schedule.scaled(1.0 / time_scale, 1.0 / material.si.Ms_ref)
                    if material.schedule else None)
    else:
        params, llg = material.dimensionless, material.llg or LLGParams()
        schedule = material.schedule
        derived["material"] = params.to_dict()

    tau, T = algorithm.tau, algorithm.T
    if algorithm.time_unit == "s":
        if time_scale is None:
            raise ConfigError("time_unit 's' needs an 'si' material section")
        tau = tau / time_scale
        T = T / time_scale if T is not None else None
        logger.info("Physical tau=%g s, T=%s s -> dimensionless tau=%.6g, T=%s",
                    algorithm.tau, algorithm.T, tau, T)
    flow = algorithm.flow_config()
    if tau != flow.tau:
        flow = FlowConfig(flow.theta, flow.metric, tau, flow.eps, flow.stop_aggregation,
                          flow.max_steps, flow.solver)

    options = dict(algorithm.initial)
    kind = options.pop("kind")
    if kind == "vtk":
        if "path" not in options:
            raise ConfigError("initial kind 'vtk' needs a path")
        initial = load_initial_vtk(space, options["path"])
    else:
        if kind in ("random", "skyrmion"):
            options.setdefault("seed", algorithm.seed)
        try:
            initial = make_initial(kind, space, **options)
        except TypeError as e:
            raise ConfigError(f"bad options for initial state '{kind}': {e}") from None
    derived["seed"] = algorithm.seed
    derived["tau"] = tau
    derived["T"] = T
    return PreparedRun(config, mesh, space, params, llg, flow, initial, schedule, T, time_scale,
                       derived)
