# Models package
from .diagnostics import (AdvisoryCheck, AdvisoryReport, ConstraintReport, EnergyBreakdown,
                          MeshStats, StepDiagnostics, TRACE_COLUMNS)
from .material import FieldSchedule, LLGParams, MaterialParams, PhysicalParams, MU0
from .scheme import FlowConfig, Metric, Preset, SolverConfig, StopAggregation, ThetaScheme
from .run_config import (AlgorithmSection, MaterialSection, MeshSection, OutputSection,
                         RunConfig)
