"""Heralded programmable phase gate, as a Kraus channel and as an explicit
two-qubit model.

The gate imprints onto the signal's V component a phase programmed into a
control ("program") qubit, succeeding with probability 1/2 on a heralding
measurement.  Two interchangeable fidelities are provided:

* The Kraus model drives router pipelines.  The success element scales the
  whole register by 1/sqrt(2) and applies diag(1, e^{i phi}) to polarization
  inside the gate's arm only; the failure element does the same with
  e^{-i phi}.  Heralding statistics are therefore independent of the signal
  state, the unique trace-preserving assignment that keeps path
  superpositions coherent and yields an all-success probability of (1/2)^n.
  This idealizes the empty-arm case: a gate heralds with the same statistics
  whether or not its arm carries amplitude.

* The explicit model adjoins the physical program state, entangles it with
  a signal-controlled polarization flip and measures the program qubit,
  for standalone validation of the channel.  It is deliberately restricted
  to a definitely-present signal photon; firing it inside a path-superposed
  register is rejected at the API level.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .register import (
    OperatorKind,
    JonesVector,
    RegisterState,
    SquareOperator,
    apply,
)

SQRT_HALF = math.sqrt(0.5)

SUCCESS = "S"
FAILURE = "F"


@dataclass(frozen=True)
class ProgramPhase:
    """Phase phi written into a program qubit; canonical range [0, 2*pi)."""

    phi: float

    def __post_init__(self) -> None:
        phi = float(self.phi)
        if not math.isfinite(phi):
            raise ValueError("program phase must be finite")
        object.__setattr__(self, "phi", phi % (2.0 * math.pi))


class GateModel(enum.Enum):
    KRAUS = "kraus"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class GatePlacement:
    """One programmable phase gate sitting in a path of a host circuit."""

    arm: int
    phase: ProgramPhase
    model: GateModel = GateModel.KRAUS

    def __post_init__(self) -> None:
        if self.arm < 0:
            raise ValueError("gate arm must be a valid path index")


@dataclass(frozen=True)
class BranchOutcome:
    """One heralding pattern with its probability and unnormalized state."""

    labels: tuple[str, ...]
    probability: float
    state: RegisterState

    def conditional_state(self) -> RegisterState:
        return self.state.renormalized()


def program_state(phase: ProgramPhase) -> JonesVector:
    """Program qubit (|H> + e^{i phi} |V>) / sqrt(2)."""
    return JonesVector(SQRT_HALF, SQRT_HALF * cmath.exp(1j * phase.phi))


def kraus_pair(placement: GatePlacement, path_dim: int) -> tuple[SquareOperator, SquareOperator]:
    """Success/failure Kraus elements over the (path, polarization) block.

    Satisfies completeness K_s^dag K_s + K_f^dag K_f = I exactly and gives
    each heralding branch probability 1/2 for any input.
    """
    if placement.model is not GateModel.KRAUS:
        raise ValueError("kraus_pair requires a kraus-model placement")
    if not 0 <= placement.arm < path_dim:
        raise IndexError(f"gate arm {placement.arm} out of range for {path_dim} paths")
    elements = []
    for sign in (+1.0, -1.0):
        full = np.eye(2 * path_dim, dtype=np.complex128)
        full[2 * placement.arm + 1, 2 * placement.arm + 1] = cmath.exp(sign * 1j * placement.phase.phi)
        elements.append(SquareOperator(SQRT_HALF * full, OperatorKind.KRAUS))
    return elements[0], elements[1]


def explicit_branches(signal: JonesVector, phase: ProgramPhase) -> list[BranchOutcome]:
    """Enumerate both heralding branches of the standalone two-qubit gate.

    The register is (path=1, signal polarization, program qubit); the signal
    polarization controls a flip of the program qubit, and the program qubit
    is then measured in the (H, V) basis.  Outcome H heralds success and
    leaves alpha |H> + e^{i phi} beta |V>; outcome V heralds failure and
    leaves alpha |H> + e^{-i phi} beta |V> (global phase canonicalized to
    match the Kraus failure element).  Both branches carry probability 1/2
    regardless of the signal.
    """
    program = program_state(phase)
    joint = np.kron(signal.as_array(), program.as_array())
    state = RegisterState((1, 2, 2), joint)
    controlled_flip = SquareOperator(
        np.array(
            [
                [1, 0, 0, 0],
                [0, 1, 0, 0],
                [0, 0, 0, 1],
                [0, 0, 1, 0],
            ],
            dtype=np.complex128,
        ),
        OperatorKind.UNITARY,
    )
    entangled = apply(state, controlled_flip, (1, 2)).amps.reshape(1, 2, 2)

    branches = []
    for outcome, label in ((0, SUCCESS), (1, FAILURE)):
        projected = np.ascontiguousarray(entangled[:, :, outcome]).reshape(-1)
        if label == FAILURE:
            projected = projected * cmath.exp(-1j * phase.phi)
        branch_state = RegisterState((1, 2), projected)
        branches.append(BranchOutcome((label,), branch_state.squared_norm, branch_state))
    return branches


def fire_pipeline(state: RegisterState, gates: list[GatePlacement]) -> list[BranchOutcome]:
    """Fire a sequence of Kraus-model gates, enumerating every heralding pattern.

    Returns 2^n branches in lexicographic label order with the all-success
    branch first; that branch is the post-selected pipeline output.  Branch
    probabilities sum to one for a normalized input.
    """
    if len(state.dims) < 2 or state.dims[1] != 2:
        raise ValueError(f"register must be (path, polarization, ...), got dims {state.dims}")
    path_dim = state.dims[0]
    for gate in gates:
        if gate.model is not GateModel.KRAUS:
            raise ValueError(
                "explicit-model gates cannot fire inside a register pipeline; "
                "the explicit gate is only defined for a definitely-present photon"
            )
        if not 0 <= gate.arm < path_dim:
            raise IndexError(f"gate arm {gate.arm} outside the register's path range")

    branches: list[tuple[tuple[str, ...], RegisterState]] = [((), state)]
    for gate in gates:
        k_success, k_failure = kraus_pair(gate, path_dim)
        grown: list[tuple[tuple[str, ...], RegisterState]] = []
        for labels, current in branches:
            grown.append((labels + (SUCCESS,), apply(current, k_success, (0, 1))))
            grown.append((labels + (FAILURE,), apply(current, k_failure, (0, 1))))
        branches = grown
    return [
        BranchOutcome(labels, branch_state.squared_norm, branch_state)
        for labels, branch_state in branches
    ]


def completeness_defect(placement: GatePlacement, path_dim: int) -> float:
    """Max-entry deviation of K_s^dag K_s + K_f^dag K_f from the identity."""
    k_success, k_failure = kraus_pair(placement, path_dim)
    total = (
        k_success.matrix.conj().T @ k_success.matrix
        + k_failure.matrix.conj().T @ k_failure.matrix
    )
    return float(np.max(np.abs(total - np.eye(2 * path_dim))))
