"""
Tests for run configuration models, experiment presets and run preparation
"""

import numpy as np
import pytest

from afmflow.errors import ConfigError
from afmflow.experiments import (EXPERIMENTS, experiment, prepare, pulse_schedule_si,
                                 skyrmion_disk, skyrmion_pulse, toy_cube)
from afmflow.fields import SublatticePair, project_pair
from afmflow.gradient_flow import average_mx, minimize
from afmflow.llg import evolve, weak_energy_check
from afmflow.models.material import MU0, MaterialParams
from afmflow.models.run_config import (AlgorithmSection, MaterialSection, MeshSection,
                                       OutputSection, RunConfig)
from afmflow.models.scheme import FlowConfig, Metric, ThetaScheme
from afmflow.nondim import nanodisk_params
from afmflow.utils import write_vtk


def test_presets():
    assert FlowConfig.preset("coupled").theta == ThetaScheme(1.0, 0.5, 0.5)
    assert FlowConfig.preset("decoupled").theta.is_decoupled
    llg = FlowConfig.preset("llg")
    assert llg.metric is Metric.LUMPED_L2
    assert llg.theta.is_decoupled


def test_theta_rejects_out_of_range():
    with pytest.raises(ConfigError):
        ThetaScheme(1.5, 0.0, 0.0)
    with pytest.raises(ConfigError):
        ThetaScheme.from_dict({"theta1": 1.0, "theta4": 0.0})


def test_flow_config_rejects_bad_values():
    with pytest.raises(ConfigError):
        FlowConfig(tau=0.0)
    with pytest.raises(ConfigError):
        FlowConfig(metric="H2")


def test_material_validation():
    with pytest.raises(ConfigError, match="a11\\*a22 > a12\\^2"):
        MaterialParams(a11=1.0, a22=1.0, a12=2.0)
    with pytest.raises(ConfigError):
        MaterialParams(a11=1.0, a22=1.0, axis1=[1.0, 1.0, 0.0])
    with pytest.raises(ConfigError):
        MaterialParams.from_dict({"a11": 1.0, "a22": 1.0, "A": 2.0})


def test_config_round_trip():
    config = toy_cube(n=4, preset="general-theta")
    again = RunConfig.from_dict(config.to_dict())
    assert again.to_dict() == config.to_dict()
    assert again.algorithm.theta == ThetaScheme(1.0, 0.25, 0.75)


def test_config_rejects_unknown_keys():
    data = toy_cube().to_dict()
    data["algorithm"]["tua"] = 1e-3
    with pytest.raises(ConfigError, match="tua"):
        RunConfig.from_dict(data)
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"mesh": {}})


def test_material_section_needs_one_kind():
    with pytest.raises(ConfigError):
        MaterialSection()
    with pytest.raises(ConfigError):
        MaterialSection(dimensionless=MaterialParams(1.0, 1.0), si=nanodisk_params())


def test_section_validation():
    with pytest.raises(ConfigError):
        MeshSection(kind="sphere")
    with pytest.raises(ConfigError):
        MeshSection(kind="import")
    with pytest.raises(ConfigError):
        AlgorithmSection(initial={"kind": "vortex"})
    with pytest.raises(ConfigError):
        AlgorithmSection(time_unit="ns")
    with pytest.raises(ConfigError):
        OutputSection(formats=["hdf5"])


def test_experiment_lookup():
    assert set(EXPERIMENTS) == {"toy-cube", "skyrmion-disk", "skyrmion-pulse"}
    assert experiment("toy-cube", n=2).mesh.n == [2, 2, 2]
    with pytest.raises(ConfigError, match="unknown experiment"):
        experiment("vortex")


def test_pulse_schedule():
    schedule = pulse_schedule_si()
    assert schedule.amplitude(0.0) == 0.0
    assert schedule.amplitude(20e-12) == pytest.approx(0.05 / MU0)
    assert schedule.amplitude(100e-12) == pytest.approx(0.1 / MU0)
    assert schedule.amplitude(130e-12) == pytest.approx(0.05 / MU0)
    assert schedule.amplitude(1e-9) == 0.0
    np.testing.assert_allclose(schedule.direction, [1.0, 0.0, 0.0])


def test_prepare_toy_cube():
    run = prepare(toy_cube(n=2))
    assert run.mesh.n_vertices == 27
    assert run.params.a0 == -100.0
    assert run.flow.tau == 1e-3
    np.testing.assert_allclose(run.initial.m1[0], [1.0, 0.0, 0.0])
    assert run.derived["material"]["q2"] == 10.0


def test_prepare_si_pulse_converts_units():
    run = prepare(skyrmion_pulse(n_radial=3, T=1e-12))
    assert run.flow.tau == pytest.approx(1.662e-4, rel=1e-3)
    assert run.T == pytest.approx(1e-12 / run.time_scale)
    # 0.1 T / mu0 in units of Ms
    plateau = run.schedule.amplitude(100e-12 / run.time_scale)
    assert plateau == pytest.approx(0.1 / MU0 / 376e3)
    assert run.llg.alpha1 == pytest.approx(5e-3)


def test_prepare_disk_with_h1_metric():
    run = prepare(skyrmion_disk(n_radial=3))
    assert run.flow.metric is Metric.H1
    assert run.flow.tau == 1e-3
    assert run.params.a11 == pytest.approx(74.19, abs=0.01)
    np.testing.assert_allclose(np.linalg.norm(run.initial.m1, axis=1), 1.0)


def test_seconds_need_si_material():
    config = toy_cube(n=2)
    config.algorithm.time_unit = "s"
    with pytest.raises(ConfigError):
        prepare(config)


def test_initial_state_from_snapshot(tmp_path):
    first = prepare(toy_cube(n=2))
    path = write_vtk(first.mesh, first.initial, path=tmp_path / "start.vtk")
    config = toy_cube(n=2)
    config.algorithm.initial = {"kind": "vtk", "path": str(path)}
    run = prepare(config)
    np.testing.assert_allclose(run.initial.m2, first.initial.m2)

    config.mesh = MeshSection(kind="box", n=[3, 3, 3])
    with pytest.raises(ConfigError, match="points"):
        prepare(config)


def test_bad_initial_options():
    config = toy_cube(n=2)
    config.algorithm.initial = {"kind": "skyrmion", "radius": 3.0}
    with pytest.raises(ConfigError):
        prepare(config)


@pytest.mark.slow
def test_skyrmion_relaxation_and_pulse_response():
    relax_run = prepare(skyrmion_disk(n_radial=3, max_steps=2000))
    relaxed = project_pair(minimize(relax_run.initial, relax_run.params, relax_run.flow).pair)
    space = relaxed.space
    alignment = float(space.lumped @ np.einsum("ij,ij->i", relaxed.m1, relaxed.m2)) / space.volume
    assert alignment <= -0.9
    center = int(np.argmin(np.hypot(space.mesh.vertices[:, 0], space.mesh.vertices[:, 1])))
    assert relaxed.m1[center, 2] * relaxed.m2[center, 2] < 0.0

    pulse_run = prepare(skyrmion_pulse(n_radial=3, T=10e-12))
    start = SublatticePair(pulse_run.space, relaxed.m1, relaxed.m2)
    traj = evolve(start, pulse_run.params, pulse_run.llg, pulse_run.schedule, pulse_run.T,
                  pulse_run.flow.tau, snapshot_every=1000, solver=pulse_run.solver)
    before = average_mx(start, pulse_run.params)[2]
    peak = max(d.avg_mx[2] for d in traj.trace)
    # the in-plane field along e1 cants both sublattices towards +e1
    assert peak > before + 1e-5
    assert weak_energy_check(traj, pulse_run.params, pulse_run.llg).passed
