"""
Discrete Gradient Flows
General theta-scheme with the coupled and decoupled presets, the three
metrics, stopping logic and per-step energy-law verification
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from .energy import energy, exchange_rhs, lower_order_rhs
from .errors import ConfigError, NumericalError
from .fields import SublatticePair, constraint_report
from .models.diagnostics import (AdvisoryReport, EnergyBreakdown, MeshStats, StepDiagnostics)
from .models.material import LLGParams, MaterialParams
from .models.scheme import FlowConfig, Metric, StopAggregation, validate_theta
from .tangent_solver import build_frames, reduce, solve, solve_many

logger = logging.getLogger(__name__)

I3 = sp.identity(3, format="csr")


@dataclass
class StepResult:
    v1: np.ndarray
    v2: np.ndarray
    pair: SublatticePair
    diagnostics: StepDiagnostics


@dataclass
class FlowResult:
    pair: SublatticePair
    trace: List[StepDiagnostics]
    reason: str
    steps: int
    stop_quantity: float
    initial_energy: EnergyBreakdown
    advisory: AdvisoryReport = field(default_factory=AdvisoryReport)

    @property
    def converged(self) -> bool:
        return self.reason == "converged"


def stop_quantity(values: Tuple[float, float], aggregation: StopAggregation) -> float:
    if aggregation is StopAggregation.SUM:
        return float(sum(values))
    return float(max(values))


def step_operator_blocks(space, params: MaterialParams, config: FlowConfig):
    """Scalar N x N blocks (A11, A22, A12) of the theta-scheme operator"""
    th1, th2, th3 = config.theta.as_tuple()
    tau = config.tau
    H = space.metric_operator(config.metric)
    K, M = space.stiffness, space.mass
    A11 = (H + params.a11 * th1 * tau * K).tocsr()
    A22 = (H + params.a22 * th1 * tau * K).tocsr()
    A12 = (params.a12 * th2 * tau * K - params.a0 * th3 * tau * M).tocsr()
    return A11, A22, A12


def solve_updates(pair: SublatticePair, params: MaterialParams, config: FlowConfig,
                  rhs: Tuple[np.ndarray, np.ndarray]):
    """
    Tangent updates (v1, v2) of one theta-scheme step for given full-space
    right-hand sides. Returns v1, v2, total solver iterations and convergence.
    """
    space = pair.space
    A11, A22, A12 = step_operator_blocks(space, params, config)
    frames = (build_frames(pair.m1), build_frames(pair.m2))

    if config.theta.is_decoupled:
        systems = [reduce(sp.kron(A, I3, format="csr"), b.ravel(), f, symmetric=True)
                   for A, b, f in zip((A11, A22), rhs, frames)]
        results = solve_many(systems, config.solver)
        v1 = frames[0].lift(results[0].x)
        v2 = frames[1].lift(results[1].x)
        iters = sum(r.iterations for r in results)
        converged = all(r.converged for r in results)
    else:
        A = sp.bmat([[sp.kron(A11, I3), sp.kron(A12, I3)],
                     [sp.kron(A12, I3), sp.kron(A22, I3)]], format="csr")
        b = np.concatenate([rhs[0].ravel(), rhs[1].ravel()])
        result = solve(reduce(A, b, list(frames), symmetric=True), config.solver)
        half = 2 * space.n
        v1 = frames[0].lift(result.x[:half])
        v2 = frames[1].lift(result.x[half:])
        iters, converged = result.iterations, result.converged
    return v1, v2, iters, converged


def update_norms(space, metric: Metric, v1: np.ndarray, v2: np.ndarray):
    metric_sq = (space.norm_sq(metric, v1), space.norm_sq(metric, v2))
    grad_sq = (space.grad_inner(v1, v1), space.grad_inner(v2, v2))
    return metric_sq, grad_sq


def nodal_identity_error(before: SublatticePair, after: SublatticePair, v1, v2, tau) -> float:
    """max over vertices of ||m^{i+1}|^2 - |m^i|^2 - tau^2 |v|^2|"""
    err = 0.0
    for m0, m1, v in ((before.m1, after.m1, v1), (before.m2, after.m2, v2)):
        d = (np.einsum("ij,ij->i", m1, m1) - np.einsum("ij,ij->i", m0, m0)
             - tau ** 2 * np.einsum("ij,ij->i", v, v))
        err = max(err, float(np.abs(d).max()))
    return err


def average_mx(pair: SublatticePair, params: MaterialParams,
               direction=(1.0, 0.0, 0.0)) -> Tuple[float, float, float]:
    e = np.asarray(direction, dtype=float)
    space = pair.space
    m1 = float(space.average(pair.m1) @ e)
    m2 = float(space.average(pair.m2) @ e)
    return m1, m2, params.eta_s1 * m1 + params.eta_s2 * m2


def check_energy(e: EnergyBreakdown, step: int):
    if not np.isfinite(e.total):
        raise NumericalError(f"non-finite energy at step {step}")


def flow_step(pair: SublatticePair, params: MaterialParams, config: FlowConfig, step: int = 0,
              energy_before: Optional[EnergyBreakdown] = None) -> StepResult:
    """
    One theta-scheme step m^{i+1} = m^i + tau v with v tangent at every vertex.
    The energy-law residual compares independently evaluated exchange energies
    with the identity, including the work of the explicit lower-order terms,
    relative to max(1, |E_before|).
    """
    low = (lower_order_rhs(1, pair, params), lower_order_rhs(2, pair, params))
    rhs = (exchange_rhs(1, pair, params) + low[0], exchange_rhs(2, pair, params) + low[1])
    v1, v2, iters, converged = solve_updates(pair, params, config, rhs)
    after = pair.updated(v1, v2, config.tau)
    return StepResult(v1, v2, after, step_diagnostics(
        pair, after, v1, v2, params, config, step, energy_before, low, iters, converged))


def step_diagnostics(pair, after, v1, v2, params, config, step, energy_before, low, iters,
                     converged, alpha_over_eta=None) -> StepDiagnostics:
    """
    Measure a step. With alpha_over_eta the dissipation uses the lumped
    metric weighted per sublattice and all interlattice terms are explicit.
    """
    space = pair.space
    tau = config.tau
    if energy_before is None:
        energy_before = energy(pair, params)
    energy_after = energy(after, params)
    check_energy(energy_after, step)

    metric = Metric.LUMPED_L2 if alpha_over_eta is not None else config.metric
    metric_sq, grad_sq = update_norms(space, metric, v1, v2)
    cross_grad = space.grad_inner(v1, v2)
    cross_l2 = space.inner(Metric.L2, v1, v2)
    work = tau * float(np.sum(low[0] * v1) + np.sum(low[1] * v2))

    if alpha_over_eta is None:
        th1, th2, th3 = config.theta.as_tuple()
        signed = (-tau * sum(metric_sq)
                  - 0.5 * (2 * th1 - 1) * tau ** 2 * (params.a11 * grad_sq[0]
                                                      + params.a22 * grad_sq[1]))
        unsigned = (-params.a12 * (2 * th2 - 1) * tau ** 2 * cross_grad
                    + params.a0 * (2 * th3 - 1) * tau ** 2 * cross_l2)
    else:
        signed = (-tau * (alpha_over_eta[0] * metric_sq[0] + alpha_over_eta[1] * metric_sq[1])
                  - 0.5 * tau ** 2 * (params.a11 * grad_sq[0] + params.a22 * grad_sq[1]))
        unsigned = params.a12 * tau ** 2 * cross_grad - params.a0 * tau ** 2 * cross_l2
    actual = energy_after.exchange - energy_before.exchange
    residual = abs(actual - signed - unsigned - work) / max(1.0, abs(energy_before.total))

    stop = stop_quantity(tuple(metric_sq[k] + tau * grad_sq[k] for k in range(2)),
                         config.stop_aggregation)
    return StepDiagnostics(
        step=step,
        time=(step + 1) * tau,
        energy_before=energy_before,
        energy_after=energy_after,
        metric_norm_sq=metric_sq,
        grad_norm_sq=grad_sq,
        stop_quantity=stop,
        energy_law_residual=residual,
        explicit_work=work,
        constraint=constraint_report(after),
        solver_iters=iters,
        solver_converged=converged,
        nodal_identity_error=nodal_identity_error(pair, after, v1, v2, tau),
        avg_mx=average_mx(after, params),
        unsigned_terms=unsigned,
    )


def minimize(initial: SublatticePair, params: MaterialParams, config: FlowConfig,
             callback: Optional[Callable[[StepDiagnostics], None]] = None) -> FlowResult:
    """
    Iterate the theta-scheme until the aggregated stopping quantity
    ||v||_H^2 + tau ||grad v||^2 falls below eps^2 |Omega| or max_steps is
    reached. The returned pair is the iterate whose update met the criterion.
    """
    errors = validate_theta(config.theta, params.a11, params.a22, params.a12)
    if errors:
        raise ConfigError.from_errors("theta scheme is not well-posed", errors)
    if not config.theta.supported:
        logger.warning("theta1 = %g < 1/2 is unsupported; stability needs tau = O(h^2)",
                       config.theta.theta1)
    advisory = step_size_advisory(params, config)
    for check in advisory.failures:
        logger.warning("Advisory condition '%s' fails (value %.4g, bound %.4g)",
                       check.name, check.value, check.bound)

    space = initial.space
    threshold = config.eps ** 2 * space.volume
    pair = initial
    e_current = energy(pair, params)
    check_energy(e_current, 0)
    initial_energy = e_current
    logger.info("Gradient flow: theta=%s metric=%s tau=%g eps=%g, initial energy %.10g",
                config.theta.as_tuple(), config.metric.value, config.tau, config.eps,
                e_current.total)

    trace: List[StepDiagnostics] = []
    stop = float("inf")
    reason = "max_steps"
    for i in range(config.max_steps + 1):
        low = (lower_order_rhs(1, pair, params), lower_order_rhs(2, pair, params))
        rhs = (exchange_rhs(1, pair, params) + low[0], exchange_rhs(2, pair, params) + low[1])
        v1, v2, iters, converged = solve_updates(pair, params, config, rhs)
        metric_sq, grad_sq = update_norms(space, config.metric, v1, v2)
        stop = stop_quantity(tuple(metric_sq[k] + config.tau * grad_sq[k] for k in range(2)),
                             config.stop_aggregation)
        if stop <= threshold:
            reason = "converged"
            break
        if i == config.max_steps:
            break
        after = pair.updated(v1, v2, config.tau)
        diag = step_diagnostics(pair, after, v1, v2, params, config, i, e_current, low, iters,
                                converged)
        logger.debug("step %d: E=%.12g stop=%.3e iters=%d residual=%.2e", i,
                     diag.energy_after.total, diag.stop_quantity, iters, diag.energy_law_residual)
        trace.append(diag)
        if callback is not None:
            callback(diag)
        pair, e_current = after, diag.energy_after

    if reason == "max_steps":
        logger.warning("Gradient flow stopped after max_steps=%d (stop quantity %.3e > %.3e)",
                       config.max_steps, stop, threshold)
    else:
        logger.info("Gradient flow converged after %d step(s), energy %.10g",
                    len(trace), e_current.total)
    return FlowResult(pair, trace, reason, len(trace), stop, initial_energy, advisory)


def step_size_advisory(params: MaterialParams, config: FlowConfig,
                       mesh_stats: Optional[MeshStats] = None,
                       llg: Optional[LLGParams] = None) -> AdvisoryReport:
    """
    Evaluate the sufficient conditions for well-posedness, energy decay and
    stability with the metric constant c_H. Conditions that need the
    mesh-dependent constants are reported as not computable.
    """
    th1, th2, th3 = config.theta.as_tuple()
    c2 = config.metric.c_metric ** 2
    a0, tau = abs(params.a0), config.tau
    lhs_theta = params.a11 * params.a22
    report = AdvisoryReport()

    report.add("wellposed: theta1 > 0", th1, 0.0, th1 > 0)
    report.add("wellposed: a11*a22*theta1^2 > a12^2*theta2^2", lhs_theta * th1 ** 2,
               params.a12 ** 2 * th2 ** 2, lhs_theta * th1 ** 2 > params.a12 ** 2 * th2 ** 2)
    value = c2 * a0 * th3 * tau
    report.add("wellposed: c_H^2*|a0|*theta3*tau < 1", value, 1.0, value < 1.0)

    report.add("decay: theta1 >= 1/2", th1, 0.5, th1 >= 0.5)
    lhs, rhs = lhs_theta * (2 * th1 - 1) ** 2, params.a12 ** 2 * (2 * th2 - 1) ** 2
    report.add("decay: a11*a22*(2theta1-1)^2 >= a12^2*(2theta2-1)^2", lhs, rhs, lhs >= rhs)
    value = c2 * a0 * abs(2 * th3 - 1) * tau
    report.add("decay: c_H^2*|a0|*|2theta3-1|*tau <= 2", value, 2.0, value <= 2.0)

    report.add("stability: theta1 > 1/2", th1, 0.5, th1 > 0.5)
    report.add("stability: a11*a22*(2theta1-1)^2 > a12^2*(2theta2-1)^2", lhs, rhs, lhs > rhs)
    report.add("stability: c_H^2*|a0|*|2theta3-1|*tau < 2", value, 2.0, value < 2.0)
    note = "depends on the shape-regularity constant"
    if mesh_stats is not None:
        note += f" (mesh shape regularity {mesh_stats.shape_regularity:.3g})"
    report.add("stability: tau < tau_0", tau, None, None, note)
    report.add("constraint: err_L1 <= T*tau^2*sum ||v||^2", None, None, None, note)

    if llg is not None:
        bound = 2.0 * max(llg.alpha1, llg.alpha2) / a0 if a0 else float("inf")
        report.add("llg: tau < 2*max(alpha)/|a0|", tau, bound, tau < bound)
    return report
