"""
Diagnostics Data Models
Records produced by meshes, energy evaluation and time stepping
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple


@dataclass(frozen=True)
class MeshStats:
    """Geometric quantities of a tetrahedral mesh"""
    h_max: float
    h_min: float
    shape_regularity: float   # max diameter / inradius
    n_vertices: int
    n_elements: int
    total_volume: float

    def to_dict(self) -> Dict:
        return {
            "h_max": self.h_max,
            "h_min": self.h_min,
            "shape_regularity": self.shape_regularity,
            "n_vertices": self.n_vertices,
            "n_elements": self.n_elements,
            "total_volume": self.total_volume,
        }


@dataclass(frozen=True)
class EnergyBreakdown:
    """Named contributions of the dimensionless energy"""
    intra_exchange: float = 0.0
    inter_inhomogeneous: float = 0.0
    inter_homogeneous: float = 0.0
    anisotropy: float = 0.0
    dmi: float = 0.0
    zeeman: float = 0.0

    @property
    def exchange(self) -> float:
        return self.intra_exchange + self.inter_inhomogeneous + self.inter_homogeneous

    @property
    def lower_order(self) -> float:
        return self.anisotropy + self.dmi + self.zeeman

    @property
    def total(self) -> float:
        return self.exchange + self.lower_order

    def to_dict(self) -> Dict:
        return {
            "intra_exchange": self.intra_exchange,
            "inter_inhomogeneous": self.inter_inhomogeneous,
            "inter_homogeneous": self.inter_homogeneous,
            "anisotropy": self.anisotropy,
            "dmi": self.dmi,
            "zeeman": self.zeeman,
            "total": self.total,
        }


@dataclass(frozen=True)
class ConstraintReport:
    """Unit-length constraint violation of both sublattices"""
    err_L1: Tuple[float, float]
    err_Linf: Tuple[float, float]

    @property
    def max_L1(self) -> float:
        return max(self.err_L1)

    @property
    def max_Linf(self) -> float:
        return max(self.err_Linf)

    def to_dict(self) -> Dict:
        return {"err_L1": list(self.err_L1), "err_Linf": list(self.err_Linf)}


@dataclass
class StepDiagnostics:
    """Everything measured during one accepted step"""
    step: int
    time: float
    energy_before: EnergyBreakdown
    energy_after: EnergyBreakdown
    metric_norm_sq: Tuple[float, float]
    grad_norm_sq: Tuple[float, float]
    stop_quantity: float
    energy_law_residual: float
    explicit_work: float
    constraint: ConstraintReport
    solver_iters: int
    solver_converged: bool = True
    nodal_identity_error: float = 0.0
    avg_mx: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    unsigned_terms: float = 0.0
    skew_term: Optional[float] = None
    stability_sum: Optional[float] = None

    def to_row(self) -> Dict:
        """Flat row matching the CSV trace columns"""
        e = self.energy_after
        return {
            "step": self.step,
            "time": self.time,
            "E_total": e.total,
            "E_intra": e.intra_exchange,
            "E_inter_inhom": e.inter_inhomogeneous,
            "E_inter_hom": e.inter_homogeneous,
            "E_ani": e.anisotropy,
            "E_dmi": e.dmi,
            "E_zeeman": e.zeeman,
            "stop_quantity": self.stop_quantity,
            "err_L1_m1": self.constraint.err_L1[0],
            "err_L1_m2": self.constraint.err_L1[1],
            "err_Linf_m1": self.constraint.err_Linf[0],
            "err_Linf_m2": self.constraint.err_Linf[1],
            "energy_law_residual": self.energy_law_residual,
            "solver_iters": self.solver_iters,
            "avg_mx_m1": self.avg_mx[0],
            "avg_mx_m2": self.avg_mx[1],
            "avg_mx_total": self.avg_mx[2],
        }


TRACE_COLUMNS = [
    "step", "time", "E_total", "E_intra", "E_inter_inhom", "E_inter_hom", "E_ani",
    "E_dmi", "E_zeeman", "stop_quantity", "err_L1_m1", "err_L1_m2", "err_Linf_m1",
    "err_Linf_m2", "energy_law_residual", "solver_iters", "avg_mx_m1", "avg_mx_m2",
    "avg_mx_total",
]


@dataclass(frozen=True)
class AdvisoryCheck:
    """One sufficient condition evaluated for a run"""
    name: str
    status: str          # pass | fail | not computable
    value: Optional[float] = None
    bound: Optional[float] = None
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> Dict:
        return {"name": self.name, "status": self.status, "value": self.value,
                "bound": self.bound, "note": self.note}


@dataclass
class AdvisoryReport:
    checks: List[AdvisoryCheck] = field(default_factory=list)

    def add(self, name: str, value: Optional[float], bound: Optional[float], ok=None,
            note: str = "") -> AdvisoryCheck:
        if ok is None:
            status = "not computable"
        else:
            status = "pass" if ok else "fail"
        check = AdvisoryCheck(name, status, value, bound, note)
        self.checks.append(check)
        return check

    def get(self, name: str) -> AdvisoryCheck:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    @property
    def failures(self) -> List[AdvisoryCheck]:
        return [c for c in self.checks if c.status == "fail"]

    def to_dict(self) -> Dict:
        return {"checks": [c.to_dict() for c in self.checks]}
