"""
Invariant Suites
Self-checks of the discretization run by `afmflow verify`: energy laws,
norm equivalence, nodal constraint recursion, effective-field consistency,
interpolant energy recovery and the LLG/gradient-flow equivalence
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from .energy import effective_field_rhs, energy
from .errors import ConfigError
from .experiments import toy_material
from .fem_core import FESpace
from .fields import SublatticePair, constant_pair, random_pair
from .gradient_flow import flow_step, minimize
from .llg import llg_step
from .mesh import generate_box_mesh, mesh_stats
from .models.material import LLGParams, MaterialParams
from .models.scheme import FlowConfig, Metric, SolverConfig, ThetaScheme
from .tangent_solver import build_frames

logger = logging.getLogger(__name__)

TIGHT_SOLVER = SolverConfig(tol=1e-12, restart=200)


@dataclass
class CheckResult:
    name: str
    value: float
    bound: float
    passed: bool

    def to_dict(self) -> Dict:
        return {"name": self.name, "value": self.value, "bound": self.bound,
                "passed": self.passed}


@dataclass
class SuiteResult:
    name: str
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def check(self, name: str, value: float, bound: float, passed: Optional[bool] = None):
        if passed is None:
            passed = value <= bound
        result = CheckResult(name, float(value), float(bound), bool(passed))
        self.checks.append(result)
        level = logging.INFO if result.passed else logging.WARNING
        logger.log(level, "[%s] %s: %.3e (bound %.3e) %s", self.name, name, value, bound,
                   "ok" if result.passed else "FAILED")
        return result

    def to_dict(self) -> Dict:
        return {"name": self.name, "passed": self.passed,
                "checks": [c.to_dict() for c in self.checks]}


def full_material() -> MaterialParams:
    """Toy coefficients with DMI and an applied field so every term is active"""
    D = np.array([[0.0, -1.5, 0.0], [1.5, 0.0, 0.0], [0.0, 0.0, 0.0]])
    base = toy_material()
    return MaterialParams(a11=base.a11, a22=base.a22, a12=base.a12, a0=base.a0, q1=base.q1,
                          q2=base.q2, axis1=base.axis1, axis2=base.axis2, dmi1=D, dmi2=0.5 * D,
                          h_ext=[0.3, -0.2, 0.5], eta_s1=1.0, eta_s2=0.8)


def energy_laws(n_states: int = 200, n: int = 2, seed: int = 0) -> SuiteResult:
    """One step of every preset from random admissible states"""
    suite = SuiteResult("energy-laws")
    space = FESpace(generate_box_mesh(n, n, n))
    params = full_material()
    presets = {
        "coupled": ThetaScheme.coupled(),
        "decoupled": ThetaScheme.decoupled(),
        "general-theta": ThetaScheme(1.0, 0.25, 0.75),
    }
    llg = LLGParams(eta1=1.0, eta2=0.7, alpha1=0.5, alpha2=1.0)
    worst = {name: 0.0 for name in list(presets) + ["llg"]}
    rng = np.random.default_rng(seed)
    for k in range(n_states):
        pair = random_pair(space, int(rng.integers(2 ** 31)))
        metric = list(Metric)[k % 3]
        for name, theta in presets.items():
            config = FlowConfig(theta=theta, metric=metric, tau=1e-3, solver=TIGHT_SOLVER)
            d = flow_step(pair, params, config, step=k).diagnostics
            worst[name] = max(worst[name], d.energy_law_residual)
        d = llg_step(pair, params, llg, None, 0.0, 1e-3, TIGHT_SOLVER, step=k).diagnostics
        worst["llg"] = max(worst["llg"], d.energy_law_residual)
    for name, value in worst.items():
        suite.check(f"{name} energy-law residual", value, 1e-9)
    return suite


def effective_field(n_directions: int = 100, n: int = 3, seed: int = 1,
                    s: float = 1e-4) -> SuiteResult:
    """Central differences of the energy against the effective-field dual vector"""
    suite = SuiteResult("effective-field")
    space = FESpace(generate_box_mesh(n, n, n))
    params = full_material()
    pair = random_pair(space, seed)
    rng = np.random.default_rng(seed)
    rhs = (effective_field_rhs(1, pair, params), effective_field_rhs(2, pair, params))
    worst = 0.0
    for _ in range(n_directions):
        d1, d2 = rng.standard_normal((space.n, 3)), rng.standard_normal((space.n, 3))
        # tangent directions
        d1 -= np.einsum("ij,ij->i", d1, pair.m1)[:, None] * pair.m1
        d2 -= np.einsum("ij,ij->i", d2, pair.m2)[:, None] * pair.m2
        plus = SublatticePair(space, pair.m1 + s * d1, pair.m2 + s * d2)
        minus = SublatticePair(space, pair.m1 - s * d1, pair.m2 - s * d2)
        fd = (energy(plus, params).total - energy(minus, params).total) / (2 * s)
        exact = -float(np.sum(rhs[0] * d1) + np.sum(rhs[1] * d2))
        worst = max(worst, abs(fd - exact) / max(abs(exact), 1e-300))
    suite.check("relative derivative mismatch", worst, 1e-5)
    return suite


def _smooth_field(points: np.ndarray) -> np.ndarray:
    x, y, z = points.T
    return np.column_stack([np.sin(np.pi * x) * np.cos(y), np.exp(z) * y, np.cos(2 * x + z)])


def norm_equivalence(n_fields: int = 1000, sizes=(2, 4, 8), seed: int = 2) -> SuiteResult:
    """
    ||phi|| <= ||phi||_h <= sqrt(5) ||phi|| for random P1 fields, and a stable
    fitted constant C in |<phi,psi> - <phi,psi>_h| <= C h^2 ||grad phi|| ||grad psi||
    """
    suite = SuiteResult("norm-equivalence")
    rng = np.random.default_rng(seed)
    lower = upper = 0.0
    constants = []
    for n in sizes:
        space = FESpace(generate_box_mesh(n, n, n))
        for _ in range(max(1, n_fields // len(sizes))):
            phi = rng.standard_normal((space.n, 3))
            l2 = space.norm_sq(Metric.L2, phi)
            lumped = space.norm_sq(Metric.LUMPED_L2, phi)
            lower = max(lower, (l2 - lumped) / lumped)
            upper = max(upper, (lumped - 5.0 * l2) / lumped)
        h = mesh_stats(space.mesh).h_max
        phi = space.interpolate(_smooth_field)
        psi = space.interpolate(lambda p: _smooth_field(p[:, ::-1]))
        gap = abs(space.inner(Metric.L2, phi, psi) - space.inner(Metric.LUMPED_L2, phi, psi))
        scale = h ** 2 * math.sqrt(space.grad_inner(phi, phi) * space.grad_inner(psi, psi))
        constants.append(gap / scale)
    suite.check("||phi|| <= ||phi||_h (relative excess)", lower, 1e-12)
    suite.check("||phi||_h <= sqrt(5)||phi|| (relative excess)", upper, 1e-12)
    spread = (max(constants[-2:]) - min(constants[-2:])) / max(constants[-2:])
    suite.check("variation of fitted lumping constant", spread, 0.25)
    return suite


def constraint_recursion(n: int = 4, steps: int = 100, taus=(1e-3, 5e-4, 2.5e-4),
                         t_end: float = 0.05) -> SuiteResult:
    """
    Nodal identity |m^{i+1}|^2 = |m^i|^2 + tau^2 |v|^2 along a toy run and
    first-order decrease of the constraint error in tau
    """
    suite = SuiteResult("constraint-recursion")
    space = FESpace(generate_box_mesh(n, n, n))
    params = toy_material()
    initial = constant_pair(space, (1.0, 0.0, 0.0), (0.0, 1.0, 0.0))

    config = FlowConfig(tau=1e-3, eps=1e-12, max_steps=steps)
    result = minimize(initial, params, config)
    worst = max((d.nodal_identity_error for d in result.trace), default=0.0)
    suite.check("nodal identity error", worst, 1e-12)

    errors = []
    for tau in taus:
        config = FlowConfig(tau=tau, eps=1e-12, max_steps=int(round(t_end / tau)))
        run = minimize(initial, params, config)
        errors.append(run.trace[-1].constraint.max_L1)
    for k in range(len(errors) - 1):
        ratio = errors[k] / errors[k + 1]
        suite.check(f"err_L1 ratio tau={taus[k]:g}/{taus[k + 1]:g}", ratio, 2.5,
                    1.5 <= ratio <= 2.5)
    return suite


def gamma_recovery(sizes=(2, 4, 8)) -> SuiteResult:
    """
    Nodal interpolants of the unit-length pair m1 = (cos kx, sin kx, 0) = -m2
    have zero constraint error and energies converging to the exact value
    """
    suite = SuiteResult("gamma-recovery")
    k = math.pi / 2
    base = toy_material()
    e3 = np.array([0.0, 0.0, 1.0])
    params = MaterialParams(a11=base.a11, a22=base.a22, a12=base.a12, a0=base.a0, q1=base.q1,
                            q2=base.q2, axis1=e3, axis2=e3)
    exact = (0.5 * (params.a11 + params.a22) * k ** 2 - params.a12 * k ** 2 + params.a0
             + 0.5 * (params.q1 ** 2 + params.q2 ** 2))

    def m1(points):
        x = points[:, 0]
        return np.column_stack([np.cos(k * x), np.sin(k * x), np.zeros_like(x)])

    errors, constraint = [], 0.0
    for n in sizes:
        space = FESpace(generate_box_mesh(n, n, n))
        f = space.interpolate(m1)
        pair = SublatticePair(space, f, -f)
        constraint = max(constraint, float(np.abs(np.linalg.norm(f, axis=1) - 1.0).max()))
        errors.append(abs(energy(pair, params).total - exact))
    suite.check("nodal constraint error of interpolants", constraint, 1e-14)
    for j in range(len(errors) - 1):
        order = math.log2(errors[j] / errors[j + 1])
        suite.check(f"energy error order h={1 / sizes[j]:g}", order, 1.0, order >= 1.0)
    return suite


def llg_equivalence(n: int = 3, steps: int = 50, tau: float = 1e-3) -> SuiteResult:
    """
    With eta = alpha = 1 and no precession the tangent plane step equals the
    decoupled lumped-L2 gradient-flow step
    """
    suite = SuiteResult("llg-equivalence")
    solver = SolverConfig(tol=1e-10)
    space = FESpace(generate_box_mesh(n, n, n))
    params = toy_material()
    llg = LLGParams(1.0, 1.0, 1.0, 1.0)
    config = FlowConfig(theta=ThetaScheme.decoupled(), metric=Metric.LUMPED_L2, tau=tau,
                        solver=solver)
    a = b = constant_pair(space, (1.0, 0.0, 0.0), (0.0, 1.0, 0.0))
    worst = 0.0
    for i in range(steps):
        flow = flow_step(a, params, config, step=i)
        dyn = llg_step(b, params, llg, None, i * tau, tau, solver, include_precession=False,
                       step=i)
        # both updates in the reduced coordinates of the gradient-flow state
        frames = (build_frames(a.m1), build_frames(a.m2))
        x_flow = [f.restrict(v) for f, v in zip(frames, (flow.v1, flow.v2))]
        x_dyn = [f.restrict(v) for f, v in zip(frames, (dyn.v1, dyn.v2))]
        scale = max([1.0] + [float(np.abs(x).max()) for x in x_flow])
        worst = max([worst] + [float(np.abs(p - q).max()) / scale for p, q in zip(x_flow, x_dyn)])
        a, b = flow.pair, dyn.pair
    suite.check("max relative reduced-coordinate difference", worst, 10 * solver.tol)
    return suite


SUITES: Dict[str, Callable[..., SuiteResult]] = {
    "energy-laws": energy_laws,
    "effective-field": effective_field,
    "norm-equivalence": norm_equivalence,
    "constraint-recursion": constraint_recursion,
    "gamma-recovery": gamma_recovery,
    "llg-equivalence": llg_equivalence,
}

QUICK_OPTIONS = {
    "energy-laws": {"n_states": 10},
    "effective-field": {"n_directions": 10},
    "norm-equivalence": {"n_fields": 60},
    "constraint-recursion": {"steps": 20},
}


def run_suite(name: str, quick: bool = False) -> SuiteResult:
    if name not in SUITES:
        raise ConfigError(f"unknown verify suite '{name}' (available: {', '.join(SUITES)})")
    options = QUICK_OPTIONS.get(name, {}) if quick else {}
    logger.info("Running verify suite %s%s", name, " (quick)" if quick else "")
    return SUITES[name](**options)


def run_all(names: Optional[List[str]] = None, quick: bool = False) -> List[SuiteResult]:
    return [run_suite(name, quick) for name in (names or list(SUITES))]
