"""Jones-calculus models of the passive optical elements.

Half-wave plates act on polarization alone and are modeled by the real
symmetric matrix [[cos 2t, sin 2t], [sin 2t, -cos 2t]]; the physical overall
-i factor is a global phase and is dropped so that interferometer checkpoints
can be compared against the closed-form algebra literally.  Useful settings:
22.5 deg is a Hadamard, 45 deg swaps H and V, 0 deg puts a pi phase between
them.

Polarizing beam splitters transmit H and reflect V, coupling polarization to
path.  Reflection bookkeeping (default): V going from port a to port b
carries +1, the reverse direction carries -1.  This antisymmetric real
convention is the one under which the router's printed transformation laws
hold with the stated correction plates and the phase block needs no
compensation.  A common alternative that puts +i on every reflection is
available behind ``i_on_reflect`` for sensitivity experiments; note that a
double pass then nets -1 on V exactly like the default, so circuits built
for one convention differ from the other only by arm-common phases once the
phase block carries its interferometer trim (see router.build_phase_block).

A consequence worth knowing: a splitter followed by its mirror wiring is the
identity on H but leaves a -1 on the doubly reflected V component (under
either convention), which is precisely why the router's first output needs a
0 deg half-wave plate.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .register import OperatorKind, RegisterState, SquareOperator, apply, H, V


@dataclass(frozen=True)
class WavePlateAngle:
    """Rotation of a wave plate's optical axis from horizontal, radians.

    Canonicalized to [0, pi); a half-wave plate is pi-periodic in its axis.
    """

    theta: float

    def __post_init__(self) -> None:
        theta = float(self.theta)
        if not math.isfinite(theta):
            raise ValueError("wave plate angle must be finite")
        object.__setattr__(self, "theta", theta % math.pi)


@dataclass(frozen=True)
class PbsWiring:
    """Explicit port assignment of a polarizing beam splitter.

    H is transmitted: in_a -> out_a and in_b -> out_b.
    V is reflected:   in_a -> out_b (+1) and in_b -> out_a (-1 by default,
    +i under ``i_on_reflect``).  Orientation matters: swapping the a/b roles
    moves the -1 to the other reflection.
    """

    in_a: int
    in_b: int
    out_a: int
    out_b: int

    def __post_init__(self) -> None:
        if self.in_a == self.in_b:
            raise ValueError("input ports must be distinct")
        if self.out_a == self.out_b:
            raise ValueError("output ports must be distinct")
        if {self.in_a, self.in_b} != {self.out_a, self.out_b}:
            raise ValueError("output ports must relabel the same pair of paths")

    def mirrored(self) -> "PbsWiring":
        """Wiring of the same splitter traversed backwards."""
        return PbsWiring(self.out_a, self.out_b, self.in_a, self.in_b)


def hwp_matrix(angle: WavePlateAngle | float) -> SquareOperator:
    """Half-wave plate Jones matrix at the given axis angle."""
    theta = angle.theta if isinstance(angle, WavePlateAngle) else WavePlateAngle(angle).theta
    c = math.cos(2.0 * theta)
    s = math.sin(2.0 * theta)
    return SquareOperator(np.array([[c, s], [s, -c]]), OperatorKind.UNITARY)


def phase_shifter(phi: float, path: int, path_dim: int) -> SquareOperator:
    """Multiply all amplitudes in one path by e^{i phi}; identity elsewhere."""
    if not 0 <= path < path_dim:
        raise IndexError(f"path index {path} out of range for {path_dim} paths")
    diag = np.ones(path_dim, dtype=np.complex128)
    diag[path] = cmath.exp(1j * float(phi))
    return SquareOperator(np.diag(diag), OperatorKind.UNITARY)


def polarization_in_path(op: SquareOperator, path: int, path_dim: int) -> SquareOperator:
    """Embed a 2x2 polarization operator into one path of a (path, pol) block.

    Every other path gets the identity, so the result acts on the combined
    (path, polarization) subsystems (dimension 2 * path_dim).
    """
    if op.dim != 2:
        raise ValueError(f"expected a 2x2 polarization operator, got dim {op.dim}")
    if not 0 <= path < path_dim:
        raise IndexError(f"path index {path} out of range for {path_dim} paths")
    full = np.eye(2 * path_dim, dtype=np.complex128)
    full[2 * path: 2 * path + 2, 2 * path: 2 * path + 2] = op.matrix
    return SquareOperator(full, op.kind)


def pbs_operator(wiring: PbsWiring, path_dim: int, *, i_on_reflect: bool = False) -> SquareOperator:
    """Polarizing-beam-splitter operator on the (path, polarization) block."""
    for port in (wiring.in_a, wiring.in_b, wiring.out_a, wiring.out_b):
        if not 0 <= port < path_dim:
            raise IndexError(f"wired path index {port} out of range for {path_dim} paths")
    refl_ab = 1j if i_on_reflect else 1.0
    refl_ba = 1j if i_on_reflect else -1.0
    full = np.zeros((2 * path_dim, 2 * path_dim), dtype=np.complex128)
    wired = {wiring.in_a, wiring.in_b}
    for p in range(path_dim):
        if p not in wired:
            full[2 * p + H, 2 * p + H] = 1.0
            full[2 * p + V, 2 * p + V] = 1.0
    full[2 * wiring.out_a + H, 2 * wiring.in_a + H] = 1.0
    full[2 * wiring.out_b + H, 2 * wiring.in_b + H] = 1.0
    full[2 * wiring.out_b + V, 2 * wiring.in_a + V] = refl_ab
    full[2 * wiring.out_a + V, 2 * wiring.in_b + V] = refl_ba
    return SquareOperator(full, OperatorKind.UNITARY)


def pbs_apply(state: RegisterState, wiring: PbsWiring, *, i_on_reflect: bool = False) -> RegisterState:
    """Route a register through a polarizing beam splitter."""
    if len(state.dims) < 2 or state.dims[1] != 2:
        raise ValueError(f"register must be (path, polarization, ...), got dims {state.dims}")
    op = pbs_operator(wiring, state.dims[0], i_on_reflect=i_on_reflect)
    return apply(state, op, (0, 1))
