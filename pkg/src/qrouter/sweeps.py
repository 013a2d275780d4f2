"""Parameter-sweep grids and their CSV/JSON renderings.

A sweep varies one or two free program phases of a router configuration over
inclusive linear grids (outer axis major) and records one row of routing
observables per grid point.  Rows are rendered with 12 significant digits;
the JSON rendering carries exactly the values a reader of the CSV would
parse back, so the two formats are numerically identical.  Undefined
quantities (a tied/absent phase parameter, the inter-arm phase or a fidelity
of an empty arm) render as an empty CSV field and a JSON null.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .phase_gate import ProgramPhase
from .register import JonesVector
from .router import RouterConfig, RoutingResult, run

MAX_STEPS_PER_AXIS = 1_000_000
MAX_GRID_ROWS = 1_048_576

COLUMNS = (
    "phi1",
    "phi2",
    "phi3",
    "phi4",
    "T",
    "R",
    "successProb",
    "fidelity1",
    "fidelity2",
    "reA1",
    "imA1",
    "reA2",
    "imA2",
    "interArmPhase",
)


@dataclass(frozen=True)
class SweepAxis:
    """Inclusive linear grid over one free program phase."""

    parameter: str
    start: float
    stop: float
    steps: int

    def __post_init__(self) -> None:
        if self.parameter not in ("phi1", "phi2", "phi3", "phi4"):
            raise ValueError(f"unknown sweep parameter {self.parameter!r}")
        if self.steps < 2:
            raise ValueError("a sweep needs at least 2 steps")
        if self.steps > MAX_STEPS_PER_AXIS:
            raise ValueError(f"sweep steps capped at {MAX_STEPS_PER_AXIS}")
        for bound in (self.start, self.stop):
            if not math.isfinite(bound):
                raise ValueError("sweep bounds must be finite")

    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)


@dataclass(frozen=True)
class SweepRow:
    """One grid point: set phases, observables and arm overlap amplitudes.

    A1/A2 are the projections of the post-selected output onto the input
    polarization in each arm; for the basic and full variants these are the
    programmable-splitter amplitudes themselves.
    """

    phi1: float | None
    phi2: float | None
    phi3: float | None
    phi4: float | None
    transmissivity: float
    reflectivity: float
    success_probability: float
    fidelity1: float | None
    fidelity2: float | None
    re_a1: float
    im_a1: float
    re_a2: float
    im_a2: float
    inter_arm_phase: float | None

    def values(self) -> tuple[float | None, ...]:
        return (
            self.phi1,
            self.phi2,
            self.phi3,
            self.phi4,
            self.transmissivity,
            self.reflectivity,
            self.success_probability,
            self.fidelity1,
            self.fidelity2,
            self.re_a1,
            self.im_a1,
            self.re_a2,
            self.im_a2,
            self.inter_arm_phase,
        )


def format_value(value: float) -> str:
    return f"{value:.12g}"


def _row_from_result(signal: JonesVector, cfg: RouterConfig, result: RoutingResult) -> SweepRow:
    free = cfg.free_parameters()
    overlap1 = signal.amp_h.conjugate() * result.amp_h1 + signal.amp_v.conjugate() * result.amp_v1
    overlap2 = signal.amp_h.conjugate() * result.amp_h2 + signal.amp_v.conjugate() * result.amp_v2
    return SweepRow(
        phi1=cfg.phi1.phi if "phi1" in free else None,
        phi2=cfg.phi2.phi if "phi2" in free else None,
        phi3=cfg.phi3.phi if "phi3" in free else None,
        phi4=cfg.phi4.phi if "phi4" in free else None,
        transmissivity=result.transmissivity,
        reflectivity=result.reflectivity,
        success_probability=result.success_probability,
        fidelity1=result.fidelity_arm1,
        fidelity2=result.fidelity_arm2,
        re_a1=overlap1.real,
        im_a1=overlap1.imag,
        re_a2=overlap2.real,
        im_a2=overlap2.imag,
        inter_arm_phase=result.inter_arm_phase,
    )


def _config_at(base: RouterConfig, assignments: dict[str, float]) -> RouterConfig:
    kwargs: dict[str, ProgramPhase] = dict(base.free_values())
    for name, value in assignments.items():
        kwargs[name] = ProgramPhase(value)
    return RouterConfig(base.variant, i_on_reflect=base.i_on_reflect, **kwargs)


def validate_axes(cfg: RouterConfig, axes: Sequence[SweepAxis]) -> None:
    if len(axes) > 2:
        raise ValueError("at most 2 simultaneous sweep axes are supported")
    names = [axis.parameter for axis in axes]
    if len(set(names)) != len(names):
        raise ValueError("swept parameters must be distinct")
    free = cfg.free_parameters()
    for name in names:
        if name not in free:
            raise ValueError(f"{name} is not a free parameter of the {cfg.variant.value} variant")
    rows = math.prod(axis.steps for axis in axes) if axes else 1
    if rows > MAX_GRID_ROWS:
        raise ValueError(f"sweep grid of {rows} rows exceeds the cap of {MAX_GRID_ROWS}")


def run_sweep(signal: JonesVector, cfg: RouterConfig, axes: Sequence[SweepAxis]) -> list[SweepRow]:
    """Evaluate the router over the grid; outer axis varies slowest."""
    validate_axes(cfg, axes)
    rows: list[SweepRow] = []
    if not axes:
        rows.append(_row_from_result(signal, cfg, run(signal, cfg)))
        return rows
    if len(axes) == 1:
        points = [{axes[0].parameter: float(v)} for v in axes[0].grid()]
    else:
        points = [
            {axes[0].parameter: float(outer), axes[1].parameter: float(inner)}
            for outer in axes[0].grid()
            for inner in axes[1].grid()
        ]
    for assignment in points:
        point_cfg = _config_at(cfg, assignment)
        rows.append(_row_from_result(signal, point_cfg, run(signal, point_cfg)))
    return rows


def render_csv(rows: Sequence[SweepRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow("" if v is None else format_value(v) for v in row.values())
    return buffer.getvalue()


def render_json(rows: Sequence[SweepRow]) -> str:
    """JSON document with a "rows" array mirroring the CSV columns."""
    payload = {
        "rows": [
            {
                column: (None if value is None else float(format_value(value)))
                for column, value in zip(COLUMNS, row.values())
            }
            for row in rows
        ]
    }
    return json.dumps(payload, indent=2) + "\n"
