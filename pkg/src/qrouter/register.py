"""Dense complex state registers and generic operator application.

A :class:`RegisterState` holds the amplitudes of a pure state over an ordered
tuple of subsystem dimensions.  The package-wide ordering convention is

    dims = (path, polarization, extra control qubits ...)

with the path subsystem first and slowest-varying, so the flat amplitude index
of a (path, polarization) register is ``path * 2 + pol``.  Polarization uses
basis order (H, V).

All values are immutable and every operation is a pure function returning a
new object, so states can be evaluated in parallel freely.  Heralded-gate
branches leave registers sub-normalized, hence the squared norm is only
bounded above by one.

Tolerances: ``ALGEBRA_TOL`` (1e-12) for algebraic identities in double
precision, ``INPUT_NORM_TOL`` (1e-9) for normalized user inputs.  States are
compared either through :func:`fidelity` or through amplitude comparison
after global-phase alignment; relative phases between components are always
meaningful, the overall phase never is.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

ALGEBRA_TOL = 1e-12
INPUT_NORM_TOL = 1e-9
ABSENT_WEIGHT = 1e-14
DEFAULT_AMPLITUDE_CAP = 2**20

H = 0
V = 1


class OperatorKind(enum.Enum):
    UNITARY = "unitary"
    KRAUS = "kraus-element"


def _as_complex_vector(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.complex128).reshape(-1).copy()
    if not np.all(np.isfinite(arr.view(np.float64))):
        raise ValueError("amplitudes must be finite")
    return arr


@dataclass(frozen=True)
class JonesVector:
    """Normalized polarization qubit, amplitudes in the (H, V) basis."""

    amp_h: complex
    amp_v: complex

    def __post_init__(self) -> None:
        object.__setattr__(self, "amp_h", complex(self.amp_h))
        object.__setattr__(self, "amp_v", complex(self.amp_v))
        for a in (self.amp_h, self.amp_v):
            if not (math.isfinite(a.real) and math.isfinite(a.imag)):
                raise ValueError("polarization amplitudes must be finite")
        norm_sq = abs(self.amp_h) ** 2 + abs(self.amp_v) ** 2
        if abs(norm_sq - 1.0) > INPUT_NORM_TOL:
            raise ValueError(
                f"polarization state must be normalized within {INPUT_NORM_TOL:g}, "
                f"got squared norm {norm_sq!r}"
            )

    def as_array(self) -> np.ndarray:
        return np.array([self.amp_h, self.amp_v], dtype=np.complex128)


HORIZONTAL = JonesVector(1.0, 0.0)
VERTICAL = JonesVector(0.0, 1.0)
DIAGONAL = JonesVector(math.sqrt(0.5), math.sqrt(0.5))


@dataclass(frozen=True, eq=False)
class SquareOperator:
    """Dense square operator; unitarity is checked at construction."""

    matrix: np.ndarray
    kind: OperatorKind = OperatorKind.UNITARY

    def __post_init__(self) -> None:
        mat = np.asarray(self.matrix, dtype=np.complex128).copy()
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"operator matrix must be square, got shape {mat.shape}")
        if not np.all(np.isfinite(mat.view(np.float64))):
            raise ValueError("operator entries must be finite")
        if self.kind is OperatorKind.UNITARY:
            gram = mat.conj().T @ mat
            defect = np.max(np.abs(gram - np.eye(mat.shape[0])))
            if defect > ALGEBRA_TOL:
                raise ValueError(
                    f"operator marked unitary fails U^dag U = I by {defect:.3e}"
                )
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dagger(self) -> "SquareOperator":
        return SquareOperator(self.matrix.conj().T, self.kind)


@dataclass(frozen=True, eq=False)
class RegisterState:
    """Amplitude vector over an ordered tuple of subsystem dimensions."""

    dims: tuple[int, ...]
    amps: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise ValueError(f"subsystem dimensions must be positive, got {dims}")
        amps = _as_complex_vector(self.amps)
        if amps.size != math.prod(dims):
            raise ValueError(
                f"amplitude vector of length {amps.size} does not match dims {dims}"
            )
        norm_sq = float(np.vdot(amps, amps).real)
        if norm_sq > 1.0 + 1e-12:
            raise ValueError(f"squared norm {norm_sq!r} exceeds 1")
        amps.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_jones(cls, jones: JonesVector, path_dim: int = 1, path: int = 0) -> "RegisterState":
        """Place a polarization qubit in one path of a (path, pol) register."""
        if not 0 <= path < path_dim:
            raise IndexError(f"path index {path} out of range for {path_dim} paths")
        amps = np.zeros(2 * path_dim, dtype=np.complex128)
        amps[2 * path + H] = jones.amp_h
        amps[2 * path + V] = jones.amp_v
        return cls((path_dim, 2), amps)

    @property
    def squared_norm(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    @property
    def norm(self) -> float:
        return math.sqrt(self.squared_norm)

    def renormalized(self) -> "RegisterState":
        n = self.norm
        if n < ABSENT_WEIGHT:
            raise ValueError("cannot renormalize a vanishing state")
        return RegisterState(self.dims, self.amps / n)

    def __repr__(self) -> str:  # amplitudes elided, they can be long
        return f"RegisterState(dims={self.dims}, squared_norm={self.squared_norm:.6g})"


def tensor(a: RegisterState, b: RegisterState, cap: int = DEFAULT_AMPLITUDE_CAP) -> RegisterState:
    """Kronecker product of two registers; dims concatenate, a is slowest."""
    total = math.prod(a.dims) * math.prod(b.dims)
    if total > cap:
        raise ValueError(f"tensor product needs {total} amplitudes, exceeding the cap of {cap}")
    return RegisterState(a.dims + b.dims, np.kron(a.amps, b.amps))


def apply(state: RegisterState, op: SquareOperator, targets: Sequence[int]) -> RegisterState:
    """Apply ``op`` on the target subsystems, identity elsewhere.

    ``targets`` are subsystem indices into ``state.dims``; the product of the
    target dimensions must equal ``op.dim``.  Targets need not be adjacent.
    """
    targets = tuple(int(t) for t in targets)
    if not targets:
        raise ValueError("at least one target subsystem is required")
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate target index in {targets}")
    for t in targets:
        if not 0 <= t < len(state.dims):
            raise ValueError(f"target index {t} out of range for dims {state.dims}")
    target_dims = tuple(state.dims[t] for t in targets)
    if math.prod(target_dims) != op.dim:
        raise ValueError(
            f"dimension mismatch: operator dim {op.dim} vs target dims {target_dims}"
        )
    psi = state.amps.reshape(state.dims)
    front = np.moveaxis(psi, targets, range(len(targets)))
    rest_shape = front.shape[len(targets):]
    mat = front.reshape(op.dim, -1)
    out = op.matrix @ mat
    out_nd = out.reshape(target_dims + rest_shape)
    back = np.moveaxis(out_nd, range(len(targets)), targets)
    return RegisterState(state.dims, back.reshape(-1))


def fidelity(a: RegisterState, b: RegisterState) -> float:
    """Squared overlap |<a|b>|^2 of two normalized equal-shape registers."""
    if a.dims != b.dims:
        raise ValueError(f"dimension mismatch: {a.dims} vs {b.dims}")
    for s in (a, b):
        if abs(s.squared_norm - 1.0) > INPUT_NORM_TOL:
            raise ValueError("fidelity requires normalized states")
    value = abs(np.vdot(a.amps, b.amps)) ** 2
    return min(float(value), 1.0)


def project_path(state: RegisterState, path: int) -> tuple[float, JonesVector | None]:
    """Weight of one path and the renormalized polarization state found there.

    The register must be exactly (path, polarization).  Returns the squared
    amplitude weight in ``path`` and the conditional Jones vector, or None
    when the weight is below ``ABSENT_WEIGHT``.
    """
    if len(state.dims) != 2 or state.dims[1] != 2:
        raise ValueError(f"register must be (path, polarization), got dims {state.dims}")
    if not 0 <= path < state.dims[0]:
        raise IndexError(f"path index {path} out of range for {state.dims[0]} paths")
    block = state.amps[2 * path: 2 * path + 2]
    prob = float(np.vdot(block, block).real)
    if prob < ABSENT_WEIGHT:
        return prob, None
    scale = math.sqrt(prob)
    return prob, JonesVector(block[0] / scale, block[1] / scale)


def canonical_phase(state: RegisterState) -> RegisterState:
    """Fix global phase so the largest-magnitude amplitude is real positive."""
    idx = int(np.argmax(np.abs(state.amps)))
    pivot = state.amps[idx]
    if abs(pivot) < ABSENT_WEIGHT:
        return state
    return RegisterState(state.dims, state.amps * cmath.exp(-1j * cmath.phase(pivot)))


def max_abs_difference(a: RegisterState, b: RegisterState) -> float:
    """Largest entrywise amplitude difference, no phase alignment."""
    if a.dims != b.dims:
        raise ValueError(f"dimension mismatch: {a.dims} vs {b.dims}")
    return float(np.max(np.abs(a.amps - b.amps)))


def max_aligned_difference(reference: RegisterState, state: RegisterState) -> float:
    """Largest entrywise difference after removing the global phase of ``state``.

    The phase is estimated from the overlap <reference|state>, which is the
    least-squares optimal alignment and is stable under magnitude ties (a
    largest-amplitude pivot rule is not).
    """
    if reference.dims != state.dims:
        raise ValueError(f"dimension mismatch: {reference.dims} vs {state.dims}")
    overlap = np.vdot(reference.amps, state.amps)
    if abs(overlap) < ABSENT_WEIGHT:
        return float(np.max(np.abs(state.amps - reference.amps)))
    aligned = state.amps * cmath.exp(-1j * cmath.phase(overlap))
    return float(np.max(np.abs(aligned - reference.amps)))
