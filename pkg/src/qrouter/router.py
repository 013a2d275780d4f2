"""Programmable-router circuits, the pipeline runner and the closed-form law.

Three variants are built from the same parts:

* ``basic``: splitter PBS1 fans path 0 into two arms, each arm holds a
  Hadamard plate, a programmable phase gate and another Hadamard plate,
  PBS2 recombines, and correction plates (0 deg on output 0, 45 deg on
  output 1) restore the polarization.  Two gates, all-success probability
  1/4.  Post-selected on success the device acts as a programmable beam
  splitter: amplitudes A1 = (1 + e^{i phi1})/2 into output 0 and
  A2 = (1 - e^{i phi1})/2 into output 1, i.e. transmissivity
  T = (1 + cos phi1)/2 with a fixed -pi/2 phase between the outputs.

* ``full``: the basic router plus a phase block on output 1: PBS3 fans the
  output into an H sub-arm (two 45 deg plates around a gate) and a V sub-arm
  (a bare gate), PBS4 recombines.  The block multiplies output 1 by
  e^{i phi3}, making the inter-output phase programmable (phi3 - pi/2) at
  the cost of an all-success probability of 1/16.

* ``generalized``: the full topology with all four program phases free,
  giving per-polarization splitting ratios (signal-dependent routing).

Internal path indices are zero-based; outputs "1"/"2" in result field names
map to path indices 0/1, with path 2 the phase block's auxiliary arm.  Stage
checkpoints (renormalized all-success states) are exposed so intermediate
interferometer states can be asserted directly, not just end to end.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .elements import PbsWiring, hwp_matrix, pbs_operator, phase_shifter, polarization_in_path
from .phase_gate import (
    FAILURE,
    SUCCESS,
    BranchOutcome,
    GatePlacement,
    ProgramPhase,
    kraus_pair,
)
from .register import (
    ABSENT_WEIGHT,
    ALGEBRA_TOL,
    JonesVector,
    RegisterState,
    SquareOperator,
    apply,
    project_path,
)

CHECK_AFTER_SPLIT = "after_input_split"
CHECK_AFTER_GATES = "after_gate_stage"
CHECK_AFTER_RECOMBINE = "after_recombine"
CHECK_AFTER_CORRECTIONS = "after_corrections"
CHECK_AFTER_BLOCK = "after_phase_block"

PHASE_UNDEFINED_WEIGHT = 1e-14


class RouterVariant(enum.Enum):
    BASIC = "basic"
    FULL = "full"
    GENERALIZED = "generalized"

    @classmethod
    def from_name(cls, name: str) -> "RouterVariant":
        try:
            return cls(name)
        except ValueError:
            valid = ", ".join(v.value for v in cls)
            raise ValueError(f"unknown router variant {name!r} (expected one of: {valid})") from None


_FREE_PARAMETERS = {
    RouterVariant.BASIC: ("phi1",),
    RouterVariant.FULL: ("phi1", "phi3"),
    RouterVariant.GENERALIZED: ("phi1", "phi2", "phi3", "phi4"),
}


def _coerce_phase(value) -> ProgramPhase | None:
    if value is None or isinstance(value, ProgramPhase):
        return value
    return ProgramPhase(float(value))


@dataclass(frozen=True)
class RouterConfig:
    """Variant plus program phases; tied phases resolve to their defaults.

    basic ties phi2 = phi1 and has no phase block; full additionally ties
    phi4 = phi3; generalized leaves all four free (phi2 defaults to phi1 and
    phi4 to phi3 when omitted).  ``i_on_reflect`` switches the splitter
    reflection bookkeeping for sensitivity experiments.
    """

    variant: RouterVariant
    phi1: ProgramPhase = ProgramPhase(0.0)
    phi2: ProgramPhase | None = None
    phi3: ProgramPhase | None = None
    phi4: ProgramPhase | None = None
    i_on_reflect: bool = False

    def __post_init__(self) -> None:
        variant = self.variant
        if isinstance(variant, str):
            variant = RouterVariant.from_name(variant)
            object.__setattr__(self, "variant", variant)
        phi1 = _coerce_phase(self.phi1) or ProgramPhase(0.0)
        phi2 = _coerce_phase(self.phi2)
        phi3 = _coerce_phase(self.phi3)
        phi4 = _coerce_phase(self.phi4)

        if variant is RouterVariant.BASIC:
            if phi3 is not None or phi4 is not None:
                raise ValueError("phi3/phi4 are not valid for the basic variant")
            phi2 = phi2 if phi2 is not None else phi1
            if phi2 != phi1:
                raise ValueError("basic variant requires phi2 = phi1")
        else:
            phi3 = phi3 if phi3 is not None else ProgramPhase(0.0)
            phi4 = phi4 if phi4 is not None else phi3
            phi2 = phi2 if phi2 is not None else phi1
            if variant is RouterVariant.FULL:
                if phi2 != phi1:
                    raise ValueError("full variant requires phi2 = phi1")
                if phi4 != phi3:
                    raise ValueError("full variant requires phi4 = phi3")

        object.__setattr__(self, "phi1", phi1)
        object.__setattr__(self, "phi2", phi2)
        object.__setattr__(self, "phi3", phi3)
        object.__setattr__(self, "phi4", phi4)

    @property
    def gate_count(self) -> int:
        return 2 if self.variant is RouterVariant.BASIC else 4

    def free_parameters(self) -> tuple[str, ...]:
        return _FREE_PARAMETERS[self.variant]

    def free_values(self) -> dict[str, ProgramPhase]:
        return {name: getattr(self, name) for name in self.free_parameters()}


@dataclass(frozen=True, eq=False)
class UnitaryStep:
    op: SquareOperator
    targets: tuple[int, ...]
    checkpoint: str | None = None


@dataclass(frozen=True, eq=False)
class GateStep:
    gate: GatePlacement
    checkpoint: str | None = None


CircuitStep = UnitaryStep | GateStep


@dataclass(frozen=True, eq=False)
class CircuitSpec:
    """Ordered optical elements over a fixed-size path register."""

    path_dim: int
    steps: tuple[CircuitStep, ...]

    @property
    def gate_count(self) -> int:
        return sum(1 for step in self.steps if isinstance(step, GateStep))

    def gates(self) -> list[GatePlacement]:
        return [step.gate for step in self.steps if isinstance(step, GateStep)]


def _hwp_step(theta: float, path: int, path_dim: int, checkpoint: str | None = None) -> UnitaryStep:
    return UnitaryStep(polarization_in_path(hwp_matrix(theta), path, path_dim), (0, 1), checkpoint)


def _main_stage_steps(cfg: RouterConfig, path_dim: int) -> list[CircuitStep]:
    """Splitter, gate sandwiches, recombiner and correction plates on paths 0/1."""
    conv = cfg.i_on_reflect
    split = PbsWiring(in_a=0, in_b=1, out_a=0, out_b=1)
    hadamard = math.pi / 8
    return [
        UnitaryStep(pbs_operator(split, path_dim, i_on_reflect=conv), (0, 1), CHECK_AFTER_SPLIT),
        _hwp_step(hadamard, 0, path_dim),
        _hwp_step(hadamard, 1, path_dim),
        GateStep(GatePlacement(0, cfg.phi1)),
        GateStep(GatePlacement(1, cfg.phi2)),
        _hwp_step(hadamard, 0, path_dim),
        _hwp_step(hadamard, 1, path_dim, CHECK_AFTER_GATES),
        UnitaryStep(pbs_operator(split, path_dim, i_on_reflect=conv), (0, 1), CHECK_AFTER_RECOMBINE),
        _hwp_step(0.0, 0, path_dim),
        _hwp_step(math.pi / 4, 1, path_dim, CHECK_AFTER_CORRECTIONS),
    ]


def build_basic(cfg: RouterConfig) -> CircuitSpec:
    """Two-gate router on a two-path register."""
    if cfg.variant is not RouterVariant.BASIC:
        raise ValueError("build_basic requires the basic variant")
    return CircuitSpec(2, tuple(_main_stage_steps(cfg, 2)))


def build_phase_block(cfg: RouterConfig) -> CircuitSpec:
    """Phase block alone, wired to path 1 with path 2 as the auxiliary arm.

    PBS3 sends the V component of path 1 into the auxiliary arm; the H
    sub-arm (still path 1) swaps to V, picks up phi3 in its gate and swaps
    back; the V sub-arm picks up phi4 bare; PBS4 recombines into path 1.
    Under the i-on-reflect bookkeeping the double reflection of the V route
    nets -1, so an interferometer-trim pi shifter is inserted in the
    auxiliary arm to model the same calibrated apparatus.
    """
    if cfg.variant is RouterVariant.BASIC:
        raise ValueError("the basic variant has no phase block")
    conv = cfg.i_on_reflect
    path_dim = 3
    fan_out = PbsWiring(in_a=1, in_b=2, out_a=1, out_b=2)
    fan_in = PbsWiring(in_a=2, in_b=1, out_a=2, out_b=1)
    steps: list[CircuitStep] = [
        UnitaryStep(pbs_operator(fan_out, path_dim, i_on_reflect=conv), (0, 1)),
        _hwp_step(math.pi / 4, 1, path_dim),
        GateStep(GatePlacement(1, cfg.phi3)),
        GateStep(GatePlacement(2, cfg.phi4)),
        _hwp_step(math.pi / 4, 1, path_dim),
    ]
    if conv:
        steps.append(UnitaryStep(phase_shifter(math.pi, 2, path_dim), (0,)))
    steps.append(
        UnitaryStep(pbs_operator(fan_in, path_dim, i_on_reflect=conv), (0, 1), CHECK_AFTER_BLOCK)
    )
    return CircuitSpec(path_dim, tuple(steps))


def build_router(cfg: RouterConfig) -> CircuitSpec:
    """Complete circuit for the configured variant."""
    if cfg.variant is RouterVariant.BASIC:
        return build_basic(cfg)
    main = _main_stage_steps(cfg, 3)
    block = build_phase_block(cfg)
    return CircuitSpec(3, tuple(main) + block.steps)


def run_circuit(
    initial: RegisterState, circuit: CircuitSpec
) -> tuple[list[BranchOutcome], dict[str, RegisterState]]:
    """Evolve a register through a circuit, branching at every gate.

    Returns all 2^n heralding branches (all-success first, labels in firing
    order) and the renormalized all-success state recorded at each stage
    checkpoint.
    """
    if initial.dims[0] != circuit.path_dim:
        raise ValueError(
            f"register has {initial.dims[0]} paths but the circuit needs {circuit.path_dim}"
        )
    branches: list[tuple[tuple[str, ...], RegisterState]] = [((), initial)]
    checkpoints: dict[str, RegisterState] = {}
    for step in circuit.steps:
        if isinstance(step, UnitaryStep):
            branches = [(labels, apply(state, step.op, step.targets)) for labels, state in branches]
        else:
            k_success, k_failure = kraus_pair(step.gate, circuit.path_dim)
            grown: list[tuple[tuple[str, ...], RegisterState]] = []
            for labels, state in branches:
                grown.append((labels + (SUCCESS,), apply(state, k_success, (0, 1))))
                grown.append((labels + (FAILURE,), apply(state, k_failure, (0, 1))))
            branches = grown
        if step.checkpoint is not None:
            checkpoints[step.checkpoint] = branches[0][1].renormalized()
    outcomes = [BranchOutcome(labels, state.squared_norm, state) for labels, state in branches]
    return outcomes, checkpoints


@dataclass(frozen=True)
class RoutingResult:
    """Post-selected routing observables.

    Amplitudes are those of the renormalized all-success state; ``arm1`` is
    path 0 and ``arm2`` path 1.  ``inter_arm_phase`` and the per-arm
    fidelities are None when an arm carries (or overlaps) no weight; a
    silent zero would corrupt sweep tables.
    """

    amp_h1: complex
    amp_v1: complex
    amp_h2: complex
    amp_v2: complex
    transmissivity: float
    reflectivity: float
    inter_arm_phase: float | None
    fidelity_arm1: float | None
    fidelity_arm2: float | None
    success_probability: float


@dataclass(frozen=True, eq=False)
class RouterRun:
    result: RoutingResult
    checkpoints: Mapping[str, RegisterState]
    branches: tuple[BranchOutcome, ...]

    @property
    def post_selected(self) -> RegisterState:
        return self.branches[0].conditional_state()


def wrap_angle(value: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    wrapped = (value + math.pi) % (2.0 * math.pi) - math.pi
    if wrapped == -math.pi:
        return math.pi
    return wrapped


def run_detailed(signal: JonesVector, cfg: RouterConfig, *, circuit: CircuitSpec | None = None) -> RouterRun:
    """Run the router and keep branches and stage checkpoints."""
    if circuit is None:
        circuit = build_router(cfg)
    initial = RegisterState.from_jones(signal, circuit.path_dim, path=0)
    branches, checkpoints = run_circuit(initial, circuit)

    top = branches[0]
    if set(top.labels) != {SUCCESS}:
        raise RuntimeError("branch ordering violated: first branch is not all-success")
    expected = 0.5 ** circuit.gate_count
    if abs(top.probability - expected) > ALGEBRA_TOL:
        raise RuntimeError(
            f"all-success probability {top.probability!r} deviates from {expected!r}"
        )
    post = top.conditional_state()
    if circuit.path_dim > 2:
        aux = post.amps[4:]
        leak = float(np.vdot(aux, aux).real)
        if leak > 1e-12:
            raise RuntimeError(f"auxiliary arm retains weight {leak:.3e} after recombination")

    weight1, cond1 = project_path(post, 0)
    weight2, cond2 = project_path(post, 1)
    signal_arr = signal.as_array()

    def arm_fidelity(cond: JonesVector | None) -> float | None:
        if cond is None:
            return None
        return min(float(abs(np.vdot(signal_arr, cond.as_array())) ** 2), 1.0)

    phase: float | None = None
    if weight1 >= PHASE_UNDEFINED_WEIGHT and weight2 >= PHASE_UNDEFINED_WEIGHT:
        overlap1 = complex(np.vdot(signal_arr, cond1.as_array()))
        overlap2 = complex(np.vdot(signal_arr, cond2.as_array()))
        if abs(overlap1) >= PHASE_UNDEFINED_WEIGHT and abs(overlap2) >= PHASE_UNDEFINED_WEIGHT:
            phase = wrap_angle(cmath.phase(overlap2) - cmath.phase(overlap1))

    result = RoutingResult(
        amp_h1=complex(post.amps[0]),
        amp_v1=complex(post.amps[1]),
        amp_h2=complex(post.amps[2]),
        amp_v2=complex(post.amps[3]),
        transmissivity=weight1,
        reflectivity=weight2,
        inter_arm_phase=phase,
        fidelity_arm1=arm_fidelity(cond1),
        fidelity_arm2=arm_fidelity(cond2),
        success_probability=top.probability,
    )
    return RouterRun(result, checkpoints, tuple(branches))


def run(signal: JonesVector, cfg: RouterConfig, *, circuit: CircuitSpec | None = None) -> RoutingResult:
    """Run the router and post-select the all-success branch."""
    return run_detailed(signal, cfg, circuit=circuit).result


@dataclass(frozen=True)
class AnalyticMap:
    """Closed-form per-polarization output amplitudes (path 0, path 1)."""

    h_out: tuple[complex, complex]
    v_out: tuple[complex, complex]

    def output_amplitudes(self, signal: JonesVector) -> np.ndarray:
        """Predicted post-selected amplitudes, order (H1, V1, H2, V2)."""
        return np.array(
            [
                signal.amp_h * self.h_out[0],
                signal.amp_v * self.v_out[0],
                signal.amp_h * self.h_out[1],
                signal.amp_v * self.v_out[1],
            ],
            dtype=np.complex128,
        )


def transmissivity_law(phi: float) -> float:
    """Programmable-splitter transmissivity T = (1 + cos phi)/2."""
    return 0.5 * (1.0 + math.cos(phi))


def analytic(cfg: RouterConfig) -> AnalyticMap:
    """Closed-form output map the simulation is verified against.

    basic/full use the exact amplitude pair A1 = (1 + e^{i phi1})/2 and
    A2 = (1 - e^{i phi1})/2 (full multiplies the path-1 amplitude by
    e^{i phi3}).  generalized uses the half-angle form
    e^{i phiN/2} (sqrt(T_N), sqrt(R_N) e^{i (phi_block - pi/2)}), which
    matches the exact pair wherever cos(phiN/2) >= 0, i.e. phiN in [0, pi].
    Under i-on-reflect bookkeeping every path-1 amplitude carries one net
    reflection factor i.
    """
    conv = 1j if cfg.i_on_reflect else 1.0

    if cfg.variant is RouterVariant.GENERALIZED:
        def half_angle_pair(phi_split: float, phi_block: float) -> tuple[complex, complex]:
            prefactor = cmath.exp(0.5j * phi_split)
            stay = prefactor * math.sqrt(transmissivity_law(phi_split))
            move = (
                prefactor
                * math.sqrt(1.0 - transmissivity_law(phi_split))
                * cmath.exp(1j * (phi_block - 0.5 * math.pi))
            )
            return stay, conv * move

        return AnalyticMap(
            half_angle_pair(cfg.phi1.phi, cfg.phi3.phi),
            half_angle_pair(cfg.phi2.phi, cfg.phi4.phi),
        )

    stay = 0.5 * (1.0 + cmath.exp(1j * cfg.phi1.phi))
    move = 0.5 * (1.0 - cmath.exp(1j * cfg.phi1.phi))
    if cfg.variant is RouterVariant.FULL:
        move *= cmath.exp(1j * cfg.phi3.phi)
    pair = (stay, conv * move)
    return AnalyticMap(pair, pair)


def compare(signal: JonesVector, cfg: RouterConfig, *, circuit: CircuitSpec | None = None) -> float:
    """Max amplitude discrepancy between simulation and the closed form.

    Both states are compared after global-phase alignment (overlap-phase
    rule); a configuration is considered verified when this is below 1e-10.
    """
    post = run_detailed(signal, cfg, circuit=circuit).post_selected
    simulated = post.amps[:4]
    predicted = analytic(cfg).output_amplitudes(signal)
    predicted = predicted / np.linalg.norm(predicted)
    overlap = np.vdot(predicted, simulated)
    if abs(overlap) > ABSENT_WEIGHT:
        simulated = simulated * cmath.exp(-1j * cmath.phase(complex(overlap)))
    return float(np.max(np.abs(simulated - predicted)))
