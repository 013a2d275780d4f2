"""Amplitude-level simulator of a linear-optical programmable quantum router.

A polarization qubit enters one spatial mode and is routed into a coherent
superposition of two output modes by heralded programmable phase gates whose
program phases set the splitting ratio (and, with the optional phase block,
the inter-output phase), while the polarization state itself is preserved.
The package provides the state-register core, Jones-calculus component
models, the heralded gate channel, the router circuits with their closed-form
verification oracle, a small experiment file format and a CLI.
"""

from .register import (
    ALGEBRA_TOL,
    INPUT_NORM_TOL,
    DIAGONAL,
    HORIZONTAL,
    VERTICAL,
    JonesVector,
    OperatorKind,
    RegisterState,
    SquareOperator,
    apply,
    canonical_phase,
    fidelity,
    max_abs_difference,
    max_aligned_difference,
    project_path,
    tensor,
)
from .elements import (
    PbsWiring,
    WavePlateAngle,
    hwp_matrix,
    pbs_apply,
    pbs_operator,
    phase_shifter,
    polarization_in_path,
)
from .phase_gate import (
    BranchOutcome,
    GateModel,
    GatePlacement,
    ProgramPhase,
    explicit_branches,
    fire_pipeline,
    kraus_pair,
    program_state,
)
from .router import (
    AnalyticMap,
    CircuitSpec,
    RouterConfig,
    RouterVariant,
    RoutingResult,
    analytic,
    build_basic,
    build_phase_block,
    build_router,
    compare,
    run,
    run_circuit,
    run_detailed,
    transmissivity_law,
)
from .sweeps import SweepAxis, SweepRow, render_csv, render_json, run_sweep
from .dsl import ExperimentSpec, ParseDiagnostic, ParseResult, parse, serialize

__version__ = "0.1.0"

__all__ = [
    "ALGEBRA_TOL",
    "INPUT_NORM_TOL",
    "DIAGONAL",
    "HORIZONTAL",
    "VERTICAL",
    "JonesVector",
    "OperatorKind",
    "RegisterState",
    "SquareOperator",
    "apply",
    "canonical_phase",
    "fidelity",
    "max_abs_difference",
    "max_aligned_difference",
    "project_path",
    "tensor",
    "PbsWiring",
    "WavePlateAngle",
    "hwp_matrix",
    "pbs_apply",
    "pbs_operator",
    "phase_shifter",
    "polarization_in_path",
    "BranchOutcome",
    "GateModel",
    "GatePlacement",
    "ProgramPhase",
    "explicit_branches",
    "fire_pipeline",
    "kraus_pair",
    "program_state",
    "AnalyticMap",
    "CircuitSpec",
    "RouterConfig",
    "RouterVariant",
    "RoutingResult",
    "analytic",
    "build_basic",
    "build_phase_block",
    "build_router",
    "compare",
    "run",
    "run_circuit",
    "run_detailed",
    "transmissivity_law",
    "SweepAxis",
    "SweepRow",
    "render_csv",
    "render_json",
    "run_sweep",
    "ExperimentSpec",
    "ParseDiagnostic",
    "ParseResult",
    "parse",
    "serialize",
    "__version__",
]
