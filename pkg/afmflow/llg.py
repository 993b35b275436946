"""
Landau-Lifshitz-Gilbert Dynamics
Projection-free tangent plane scheme for the coupled sublattice system,
trajectory recording, time reconstructions and dynamic energy checks
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
import scipy.sparse as sp

from .energy import energy, exchange_rhs, lower_order_rhs
from .errors import NumericalError, TrajectoryError
from .fields import SublatticePair
from .gradient_flow import (FlowResult, StepResult, step_diagnostics,
                            step_size_advisory, update_norms)
from .models.diagnostics import EnergyBreakdown, StepDiagnostics
from .models.material import FieldSchedule, LLGParams, MaterialParams
from .models.scheme import FlowConfig, Metric, SolverConfig, ThetaScheme
from .tangent_solver import build_frames, reduce, solve_many

logger = logging.getLogger(__name__)

I3 = sp.identity(3, format="csr")
SKEW_TOLERANCE = 1e-14


def skew_operator(weights: np.ndarray, m: np.ndarray) -> sp.csr_matrix:
    """Block-diagonal 3N x 3N matrix of v -> w(z) m(z) x v(z)"""
    n = len(m)
    blocks = np.zeros((n, 3, 3))
    blocks[:, 0, 1], blocks[:, 0, 2] = -m[:, 2], m[:, 1]
    blocks[:, 1, 0], blocks[:, 1, 2] = m[:, 2], -m[:, 0]
    blocks[:, 2, 0], blocks[:, 2, 1] = -m[:, 1], m[:, 0]
    blocks *= weights[:, None, None]
    return sp.block_diag(list(blocks), format="csr")


def params_at(params: MaterialParams, schedule: Optional[FieldSchedule], t: float) -> MaterialParams:
    """Material parameters with the scheduled field added at time t"""
    if schedule is None:
        return params
    return params.with_field(params.h_ext + schedule.field_at(t))


def _diagnostics_config(tau: float, eps: float = 1.0, solver: SolverConfig = None) -> FlowConfig:
    return FlowConfig(theta=ThetaScheme.decoupled(), metric=Metric.LUMPED_L2, tau=tau, eps=eps,
                      solver=solver or SolverConfig())


def skew_term(pair: SublatticePair, v1: np.ndarray, v2: np.ndarray) -> float:
    """Relative size of <m x v, v>_h, zero up to rounding"""
    w = pair.space.lumped
    value = scale = 0.0
    for m, v in ((pair.m1, v1), (pair.m2, v2)):
        value += abs(float(np.sum(w[:, None] * np.cross(m, v) * v)))
        scale += float(np.sum(w * np.linalg.norm(m, axis=1) * np.einsum("ij,ij->i", v, v)))
    return value / scale if scale > 0 else 0.0


def llg_step(pair: SublatticePair, params: MaterialParams, llg: LLGParams,
             schedule: Optional[FieldSchedule], t: float, tau: float,
             solver: SolverConfig = None, include_precession: bool = True,
             step: int = 0) -> StepResult:
    """
    One tangent plane step: for each sublattice solve
    alpha <v, phi>_h + <m x v, phi>_h + eta a tau <grad v, grad phi> = eta rhs(phi)
    on the tangent space, then set m <- m + tau v. The applied field is taken at t.
    """
    solver = solver or SolverConfig()
    space = pair.space
    current = params_at(params, schedule, t)
    low = (lower_order_rhs(1, pair, current), lower_order_rhs(2, pair, current))

    systems, frames = [], []
    for ell in (1, 2):
        m = pair.m(ell)
        frame = build_frames(m)
        eta, alpha = llg.eta(ell), llg.alpha(ell)
        A = sp.kron(alpha * space.lumped_matrix
                    + eta * current.exchange(ell) * tau * space.stiffness, I3, format="csr")
        if include_precession:
            A = (A + skew_operator(space.lumped, m)).tocsr()
        rhs = eta * (exchange_rhs(ell, pair, current) + low[ell - 1])
        systems.append(reduce(A, rhs.ravel(), frame, symmetric=not include_precession))
        frames.append(frame)

    results = solve_many(systems, solver)
    v1, v2 = frames[0].lift(results[0].x), frames[1].lift(results[1].x)
    after = pair.updated(v1, v2, tau)

    config = _diagnostics_config(tau, solver=solver)
    diag = step_diagnostics(pair, after, v1, v2, current, config, step, None, low,
                            sum(r.iterations for r in results),
                            all(r.converged for r in results),
                            alpha_over_eta=(llg.alpha1 / llg.eta1, llg.alpha2 / llg.eta2))
    diag.time = t + tau
    if include_precession:
        diag.skew_term = skew_term(pair, v1, v2)
        if diag.skew_term > SKEW_TOLERANCE:
            logger.warning("Skew term <m x v, v>_h = %.3e (relative) at step %d",
                           diag.skew_term, step)
    return StepResult(v1, v2, after, diag)


@dataclass
class Trajectory:
    """Snapshots at a fixed cadence plus the full per-step diagnostics"""
    tau: float
    snapshot_steps: List[int] = field(default_factory=list)
    snapshots: List[SublatticePair] = field(default_factory=list)
    trace: List[StepDiagnostics] = field(default_factory=list)
    initial_energy: Optional[EnergyBreakdown] = None
    stability_sums: List[float] = field(default_factory=list)

    @property
    def times(self) -> List[float]:
        return [k * self.tau for k in self.snapshot_steps]

    @property
    def n_steps(self) -> int:
        return len(self.trace)

    @property
    def final(self) -> SublatticePair:
        return self.snapshots[-1]

    @property
    def max_stability_sum(self) -> float:
        return max(self.stability_sums) if self.stability_sums else 0.0

    def record(self, step: int, pair: SublatticePair):
        if not self.snapshot_steps or self.snapshot_steps[-1] != step:
            self.snapshot_steps.append(step)
            self.snapshots.append(pair)

    def snapshot(self, step: int) -> SublatticePair:
        try:
            return self.snapshots[self.snapshot_steps.index(step)]
        except ValueError:
            raise TrajectoryError(f"snapshot of step {step} was not retained") from None


def h1_norm_sq(pair: SublatticePair) -> float:
    space = pair.space
    return sum(space.norm_sq(Metric.H1, m) for m in (pair.m1, pair.m2))


def evolve(initial: SublatticePair, params: MaterialParams, llg: LLGParams,
           schedule: Optional[FieldSchedule], T: float, tau: float, snapshot_every: int = 50,
           solver: SolverConfig = None, include_precession: bool = True,
           callback: Optional[Callable[[StepDiagnostics], None]] = None) -> Trajectory:
    """
    Run ceil(T/tau) tangent plane steps. Snapshots are kept every
    snapshot_every steps plus the first and last; the stability sum
    sum ||m^j||_H1^2 + tau sum ||v||_h^2 + tau^2 sum ||grad v||^2 is tracked.
    """
    if not T > 0:
        raise TrajectoryError("final time T must be positive")
    if snapshot_every < 1:
        raise TrajectoryError("snapshot_every must be at least 1")
    advisory = step_size_advisory(params, _diagnostics_config(tau), llg=llg)
    check = advisory.get("llg: tau < 2*max(alpha)/|a0|")
    if check.status == "fail":
        logger.warning("tau = %g violates tau < 2*max(alpha)/|a0| = %.4g", tau, check.bound)

    n_steps = math.ceil(T / tau - 1e-9)
    traj = Trajectory(tau=tau)
    traj.initial_energy = energy(initial, params_at(params, schedule, 0.0))
    traj.record(0, initial)
    traj.stability_sums.append(h1_norm_sq(initial))
    logger.info("LLG evolve: %d steps of tau=%g, alpha=(%g, %g), eta=(%g, %g)", n_steps, tau,
                llg.alpha1, llg.alpha2, llg.eta1, llg.eta2)

    pair = initial
    dissipated = 0.0
    try:
        for i in range(n_steps):
            result = llg_step(pair, params, llg, schedule, i * tau, tau, solver,
                              include_precession, step=i)
            pair = result.pair
            d = result.diagnostics
            dissipated += tau * sum(d.metric_norm_sq) + tau ** 2 * sum(d.grad_norm_sq)
            d.stability_sum = h1_norm_sq(pair) + dissipated
            traj.stability_sums.append(d.stability_sum)
            traj.trace.append(d)
            if (i + 1) % snapshot_every == 0 or i + 1 == n_steps:
                traj.record(i + 1, pair)
            if callback is not None:
                callback(d)
    except NumericalError as e:
        logger.error("LLG run aborted at step %d: %s", len(traj.trace), e)
        e.trajectory = traj
        raise
    return traj


def reconstruct(traj: Trajectory, t: float, kind: str = "affine") -> SublatticePair:
    """
    Time reconstructions of the iterates: 'affine' interpolates linearly,
    'left' is m^i on [t_i, t_{i+1}) and 'right' is m^{i+1} on (t_i, t_{i+1}].
    All three agree with the iterate at grid points.
    """
    if kind not in ("affine", "left", "right"):
        raise TrajectoryError(f"unknown reconstruction '{kind}'")
    tau = traj.tau
    t_end = traj.snapshot_steps[-1] * tau
    if t < -1e-12 * tau or t > t_end + 1e-12 * tau:
        raise TrajectoryError(f"t = {t:g} outside recorded span [0, {t_end:g}]")
    s = t / tau
    i = int(round(s))
    if abs(s - i) <= 1e-9:
        return traj.snapshot(i)
    i = int(math.floor(s))
    if kind == "left":
        return traj.snapshot(i)
    if kind == "right":
        return traj.snapshot(i + 1)
    lo, hi = traj.snapshot(i), traj.snapshot(i + 1)
    theta = s - i
    return SublatticePair(lo.space, (1 - theta) * lo.m1 + theta * hi.m1,
                          (1 - theta) * lo.m2 + theta * hi.m2)


@dataclass
class WeakEnergyReport:
    value: float           # E(T) + sum (alpha/eta) tau sum ||v||_h^2 - E(0)
    budget: float          # accumulated positive part of the unsigned terms
    dissipation: float
    energy_start: float
    energy_end: float

    @property
    def passed(self) -> bool:
        return self.value <= self.budget + 1e-8

    def to_dict(self):
        return {"value": self.value, "budget": self.budget, "dissipation": self.dissipation,
                "energy_start": self.energy_start, "energy_end": self.energy_end,
                "passed": self.passed}


def weak_energy_check(traj: Trajectory, params: MaterialParams, llg: LLGParams) -> WeakEnergyReport:
    """
    Discrete energy inequality. Energy changes are telescoped from the steps,
    so a time-dependent field is evaluated at each step's left endpoint.
    """
    ratio = (llg.alpha1 / llg.eta1, llg.alpha2 / llg.eta2)
    dissipation = change = budget = 0.0
    for d in traj.trace:
        dissipation += traj.tau * (ratio[0] * d.metric_norm_sq[0] + ratio[1] * d.metric_norm_sq[1])
        step_change = d.energy_after.total - d.energy_before.total
        change += step_change
        lower = d.energy_after.lower_order - d.energy_before.lower_order
        budget += max(0.0, d.unsigned_terms + d.explicit_work + lower)
    start = traj.initial_energy.total if traj.initial_energy else 0.0
    report = WeakEnergyReport(change + dissipation, budget, dissipation, start, start + change)
    if not report.passed:
        logger.warning("Discrete energy inequality violated: %.4e > budget %.4e",
                       report.value, report.budget)
    return report


def relax(initial: SublatticePair, params: MaterialParams, llg: LLGParams, tau: float,
          eps: float, max_steps: int = 100000, solver: SolverConfig = None,
          include_precession: bool = True) -> FlowResult:
    """
    Minimization by damped dynamics: tangent plane steps without applied
    schedule until max_l ||v_l||_h^2 + tau ||grad v_l||^2 <= eps^2 |Omega|
    """
    space = initial.space
    threshold = eps ** 2 * space.volume
    config = _diagnostics_config(tau, eps, solver)
    pair = initial
    initial_energy = energy(pair, params)
    trace: List[StepDiagnostics] = []
    reason, stop = "max_steps", float("inf")
    for i in range(max_steps + 1):
        result = llg_step(pair, params, llg, None, i * tau, tau, solver, include_precession, i)
        metric_sq, grad_sq = update_norms(space, Metric.LUMPED_L2, result.v1, result.v2)
        stop = max(metric_sq[k] + tau * grad_sq[k] for k in range(2))
        if stop <= threshold:
            reason = "converged"
            break
        if i == max_steps:
            break
        trace.append(result.diagnostics)
        pair = result.pair
    logger.info("LLG relaxation: %s after %d step(s)", reason, len(trace))
    return FlowResult(pair, trace, reason, len(trace), stop, initial_energy,
                      step_size_advisory(params, config, llg=llg))
