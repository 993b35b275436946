"""
Tests for the tangent plane LLG scheme, trajectories and energy checks
"""

import numpy as np
import pytest

from afmflow.energy import energy
from afmflow.errors import TrajectoryError
from afmflow.experiments import toy_minimizer
from afmflow.fields import project_pair
from afmflow.gradient_flow import flow_step
from afmflow.llg import (evolve, llg_step, params_at, reconstruct, relax, skew_operator,
                         weak_energy_check)
from afmflow.models.material import FieldSchedule, LLGParams
from afmflow.models.scheme import FlowConfig, Metric, SolverConfig

TIGHT = SolverConfig(tol=1e-12)


def test_skew_operator_applies_cross_product():
    rng = np.random.default_rng(0)
    m = rng.normal(size=(4, 3))
    v = rng.normal(size=(4, 3))
    w = np.array([1.0, 2.0, 0.5, 3.0])
    expected = w[:, None] * np.cross(m, v)
    np.testing.assert_allclose((skew_operator(w, m) @ v.ravel()).reshape(-1, 3), expected)


def test_params_at_adds_scheduled_field(material):
    schedule = FieldSchedule.constant([0.0, 1.0, 0.0])
    shifted = params_at(material, schedule, 0.3)
    np.testing.assert_allclose(shifted.h_ext, material.h_ext + [0.0, 1.0, 0.0])
    assert params_at(material, None, 0.3) is material


def test_step_is_tangent_and_satisfies_energy_law(material, pair):
    llg = LLGParams(eta1=1.0, eta2=1.5, alpha1=0.2, alpha2=0.1)
    result = llg_step(pair, material, llg, None, 0.0, 1e-3, TIGHT)
    d = result.diagnostics
    np.testing.assert_allclose(np.einsum("ij,ij->i", result.v1, pair.m1), 0.0, atol=1e-12)
    assert d.energy_law_residual < 1e-8
    assert d.skew_term < 1e-12
    assert d.time == pytest.approx(1e-3)


def test_step_without_precession_matches_lumped_gradient_flow(material, pair, unit_llg):
    tau = 2e-3
    dynamic = llg_step(pair, material, unit_llg, None, 0.0, tau, TIGHT, include_precession=False)
    config = FlowConfig.preset("decoupled", metric=Metric.LUMPED_L2, tau=tau, solver=TIGHT)
    static = flow_step(pair, material, config)
    np.testing.assert_allclose(dynamic.v1, static.v1, atol=1e-9)
    np.testing.assert_allclose(dynamic.v2, static.v2, atol=1e-9)


def test_minimizer_is_stationary_in_time(toy, space, unit_llg):
    start = toy_minimizer(space)
    traj = evolve(start, toy, unit_llg, None, T=5e-3, tau=1e-3, snapshot_every=1)
    np.testing.assert_allclose(traj.final.m1, start.m1, atol=1e-10)
    np.testing.assert_allclose(traj.final.m2, start.m2, atol=1e-10)


def test_snapshot_cadence(material, pair, unit_llg):
    traj = evolve(pair, material, unit_llg, None, T=1e-2, tau=1e-3, snapshot_every=4)
    assert traj.n_steps == 10
    assert traj.snapshot_steps == [0, 4, 8, 10]
    assert traj.times == pytest.approx([0.0, 4e-3, 8e-3, 1e-2])
    assert traj.snapshot(0) is pair
    with pytest.raises(TrajectoryError):
        traj.snapshot(5)
    assert len(traj.stability_sums) == 11
    assert traj.max_stability_sum >= traj.stability_sums[0]


def test_evolve_rejects_bad_time(material, pair, unit_llg):
    with pytest.raises(TrajectoryError):
        evolve(pair, material, unit_llg, None, T=0.0, tau=1e-3)
    with pytest.raises(TrajectoryError):
        evolve(pair, material, unit_llg, None, T=1e-2, tau=1e-3, snapshot_every=0)


def test_reconstructions(material, pair, unit_llg):
    tau = 1e-3
    traj = evolve(pair, material, unit_llg, None, T=4 * tau, tau=tau, snapshot_every=1)
    lo, hi = traj.snapshot(2), traj.snapshot(3)
    mid = reconstruct(traj, 2.5 * tau)
    np.testing.assert_allclose(mid.m1, 0.5 * (lo.m1 + hi.m1))
    assert reconstruct(traj, 2.5 * tau, "left") is lo
    assert reconstruct(traj, 2.5 * tau, "right") is hi
    for kind in ("affine", "left", "right"):
        assert reconstruct(traj, 3 * tau, kind) is hi
    with pytest.raises(TrajectoryError):
        reconstruct(traj, 5 * tau)
    with pytest.raises(TrajectoryError):
        reconstruct(traj, tau, "midpoint")


def test_reconstruction_between_dropped_snapshots(material, pair, unit_llg):
    traj = evolve(pair, material, unit_llg, None, T=4e-3, tau=1e-3, snapshot_every=2)
    with pytest.raises(TrajectoryError):
        reconstruct(traj, 1.5e-3)


def test_weak_energy_check_passes(material, pair):
    llg = LLGParams(1.0, 1.0, 0.5, 0.5)
    traj = evolve(pair, material, llg, None, T=1e-2, tau=1e-3, solver=TIGHT)
    report = weak_energy_check(traj, material, llg)
    assert report.passed
    assert report.dissipation > 0
    assert report.energy_end == pytest.approx(traj.trace[-1].energy_after.total)
    assert report.to_dict()["passed"] is True


def test_weak_energy_check_with_field_pulse(material, pair):
    llg = LLGParams(1.0, 1.0, 0.5, 0.5)
    schedule = FieldSchedule.pulse(0.5, 2e-3, 4e-3, 6e-3, direction=(1.0, 0.0, 0.0))
    traj = evolve(pair, material, llg, schedule, T=8e-3, tau=1e-3, solver=TIGHT)
    assert weak_energy_check(traj, material, llg).passed


def test_callback_and_diagnostics(material, pair, unit_llg):
    seen = []
    evolve(pair, material, unit_llg, None, T=3e-3, tau=1e-3, callback=seen.append)
    assert [d.step for d in seen] == [0, 1, 2]
    assert all(d.stability_sum is not None for d in seen)


def test_relax_reaches_toy_minimum(toy, toy_initial, unit_llg):
    result = relax(toy_initial, toy, unit_llg, tau=1e-3, eps=1e-2, max_steps=5000)
    assert result.converged
    assert energy(project_pair(result.pair), toy).total == pytest.approx(-100.0, abs=1e-2)
    assert result.advisory.get("llg: tau < 2*max(alpha)/|a0|").passed
