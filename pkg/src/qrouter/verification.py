"""Built-in verification suite: closed-form reproduction and property checks.

Every check compares the simulator against an independent oracle (the
closed-form routing laws, hand-expanded interferometer stage states, dense
full-register matrix evolution, or exhaustive branch enumeration) at a fixed
tolerance, and reports a named pass/fail result.  ``run_all`` executes the
whole suite; the CLI ``verify`` command prints one line per check.

Conventions: phase-sensitive checks state their bounds under the default
splitter bookkeeping; with ``i_on_reflect`` toggled the second output arm
carries one net reflection factor i, so those checks add the documented
+pi/2 arm-common offset (amplitude oracles carry the same factor).  The
``phase_fault`` option is a fault-injection hook that offsets the first
gate's phase in every simulated circuit (never in the oracles), so a fresh
build passes and a perturbed one visibly fails.
"""

from __future__ import annotations

import cmath
import math
import random
from dataclasses import dataclass, replace

import numpy as np

from . import dsl, sweeps
from .phase_gate import (
    GatePlacement,
    ProgramPhase,
    completeness_defect,
    explicit_branches,
    fire_pipeline,
    kraus_pair,
)
from .register import JonesVector, RegisterState, max_abs_difference
from .router import (
    CHECK_AFTER_GATES,
    CHECK_AFTER_RECOMBINE,
    CircuitSpec,
    GateStep,
    RouterConfig,
    RouterVariant,
    UnitaryStep,
    build_router,
    compare,
    run_circuit,
    run_detailed,
    transmissivity_law,
    wrap_angle,
)

ARM_WEIGHT_FLOOR = 1e-6


@dataclass(frozen=True)
class VerifyOptions:
    i_on_reflect: bool = False
    phase_fault: float = 0.0
    parser_fuzz_cases: int = 100_000
    seed: int = 20240811


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    bound: float
    detail: str

    def render(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<32} measured={self.measured:.3e}  bound={self.bound:.1e}  {self.detail}"


def _result(name: str, measured: float, bound: float, detail: str) -> CheckResult:
    return CheckResult(name, measured <= bound, float(measured), float(bound), detail)


def _rng(opts: VerifyOptions, salt: int) -> np.random.Generator:
    return np.random.default_rng(opts.seed + salt)


def _random_jones(rng: np.random.Generator) -> JonesVector:
    parts = rng.normal(size=4)
    vec = np.array([parts[0] + 1j * parts[1], parts[2] + 1j * parts[3]])
    vec = vec / np.linalg.norm(vec)
    return JonesVector(vec[0], vec[1])


def _cfg(opts: VerifyOptions, variant: RouterVariant, **phis) -> RouterConfig:
    return RouterConfig(variant, i_on_reflect=opts.i_on_reflect, **phis)


def _circuit(cfg: RouterConfig, opts: VerifyOptions) -> CircuitSpec | None:
    """None means the unmodified circuit; otherwise the fault-injected one."""
    if not opts.phase_fault:
        return None
    circuit = build_router(cfg)
    steps = list(circuit.steps)
    for i, step in enumerate(steps):
        if isinstance(step, GateStep):
            shifted = ProgramPhase(step.gate.phase.phi + opts.phase_fault)
            steps[i] = GateStep(replace(step.gate, phase=shifted), step.checkpoint)
            break
    return CircuitSpec(circuit.path_dim, tuple(steps))


def _run(signal: JonesVector, cfg: RouterConfig, opts: VerifyOptions):
    return run_detailed(signal, cfg, circuit=_circuit(cfg, opts))


def _compare(signal: JonesVector, cfg: RouterConfig, opts: VerifyOptions) -> float:
    return compare(signal, cfg, circuit=_circuit(cfg, opts))


def _phase_offset(opts: VerifyOptions) -> float:
    return 0.5 * math.pi if opts.i_on_reflect else 0.0


def _arm2_factor(opts: VerifyOptions) -> complex:
    return 1j if opts.i_on_reflect else 1.0


# half-period grid: the closed-form half-angle prefactors and the fixed
# -pi/2 phase hold literally where cos(phi/2) >= 0; it still covers the
# whole transmissivity range and both endpoint checks.
PHI_GRID = np.linspace(0.0, math.pi, 64)


def check_basic_amplitude_map(opts: VerifyOptions) -> CheckResult:
    rng = _rng(opts, 1)
    signals = [_random_jones(rng) for _ in range(20)]
    worst = 0.0
    for phi in PHI_GRID:
        cfg = _cfg(opts, RouterVariant.BASIC, phi1=float(phi))
        for signal in signals:
            worst = max(worst, _compare(signal, cfg, opts))
    return _result(
        "basic-amplitude-map",
        worst,
        1e-10,
        "post-selected amplitudes vs closed-form splitter pair, 64 phases x 20 signals",
    )


def check_transmissivity_law(opts: VerifyOptions) -> CheckResult:
    rng = _rng(opts, 2)
    signals = [_random_jones(rng) for _ in range(5)]
    worst = 0.0
    for phi in PHI_GRID:
        cfg = _cfg(opts, RouterVariant.BASIC, phi1=float(phi))
        expected_t = transmissivity_law(float(phi))
        for signal in signals:
            res = _run(signal, cfg, opts).result
            worst = max(
                worst,
                abs(res.transmissivity - expected_t),
                abs(res.reflectivity - (1.0 - expected_t)),
                abs(res.transmissivity + res.reflectivity - 1.0),
            )
    for phi, endpoint in ((0.0, 1.0), (math.pi, 0.0)):
        res = _run(signals[0], _cfg(opts, RouterVariant.BASIC, phi1=phi), opts).result
        worst = max(worst, abs(res.transmissivity - endpoint))
    return _result(
        "splitter-transmissivity-law",
        worst,
        1e-12,
        "T=(1+cos phi1)/2 and R=1-T over the grid, endpoints pinned",
    )


def check_fixed_inter_arm_phase(opts: VerifyOptions) -> CheckResult:
    rng = _rng(opts, 3)
    signals = [_random_jones(rng) for _ in range(5)]
    expected = wrap_angle(-0.5 * math.pi + _phase_offset(opts))
    worst = 0.0
    evaluated = 0
    for phi in PHI_GRID:
        cfg = _cfg(opts, RouterVariant.BASIC, phi1=float(phi))
        for signal in signals:
            res = _run(signal, cfg, opts).result
            if min(res.transmissivity, res.reflectivity) < ARM_WEIGHT_FLOOR:
                continue
            assert res.inter_arm_phase is not None
            evaluated += 1
            worst = max(worst, abs(wrap_angle(res.inter_arm_phase - expected)))
    detail = f"inter-arm phase fixed at {expected:+.6f} rad on {evaluated} two-arm grid points"
    return _result("fixed-inter-arm-phase", worst, 1e-10, detail)


def check_success_probability(opts: VerifyOptions) -> CheckResult:
    rng = _rng(opts, 4)
    worst = 0.0
    for _ in range(500):
        signal = _random_jones(rng)
        phi = float(rng.uniform(0.0, 2.0 * math.pi))
        res = _run(signal, _cfg(opts, RouterVariant.BASIC, phi1=phi), opts).result
        worst = max(worst, abs(res.success_probability - 0.25))
    for _ in range(500):
        signal = _random_jones(rng)
        phi1 = float(rng.uniform(0.0, 2.0 * math.pi))
        phi3 = float(rng.uniform(0.0, 2.0 * math.pi))
        res = _run(signal, _cfg(opts, RouterVariant.FULL, phi1=phi1, phi3=phi3), opts).result
        worst = max(worst, abs(res.success_probability - 0.0625))
    return _result(
        "heralding-success-probability",
        worst,
        1e-12,
        "all-success probability 1/4 (basic) and 1/16 (full), 1000 random cases",
    )


def check_polarization_preservation(opts: VerifyOptions) -> CheckResult:
    rng = _rng(opts, 5)
    signals = [_random_jones(rng) for _ in range(5)]
    worst = 0.0
    arms = 0

    def track(res) -> None:
        nonlocal worst, arms
        for weight, fid in (
            (res.transmissivity, res.fidelity_arm1),
            (res.reflectivity, res.fidelity_arm2),
        ):
            if weight < ARM_WEIGHT_FLOOR:
                continue
            assert fid is not None
            arms += 1
            worst = max(worst, abs(1.0 - fid))

    for phi in np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False):
        cfg = _cfg(opts, RouterVariant.BASIC, phi1=float(phi))
        for signal in signals:
            track(_run(signal, cfg, opts).result)
    for phi1 in np.linspace(0.2, 2.9, 8):
        for phi3 in np.linspace(0.0, 2.0 * math.pi, 8, endpoint=False):
            cfg = _cfg(opts, RouterVariant.FULL, phi1=float(phi1), phi3=float(phi3))
            for signal in signals[:2]:
                track(_run(signal, cfg, opts).result)
    return _result(
        "polarization-preservation",
        worst,
        1e-10,
        f"conditional output fidelity 1 in {arms} populated arms (basic and full)",
    )


def check_phase_block_law(opts: VerifyOptions) -> CheckResult:
    rng = _rng(opts, 6)
    signal = _random_jones(rng)
    offset = _phase_offset(opts)
    worst = 0.0
    for phi1 in np.linspace(0.0, math.pi, 18)[1:-1]:
        for phi3 in np.linspace(0.0, 2.0 * math.pi, 16, endpoint=False):
            cfg = _cfg(opts, RouterVariant.FULL, phi1=float(phi1), phi3=float(phi3))
            res = _run(signal, cfg, opts).result
            assert res.inter_arm_phase is not None
            expected = wrap_angle(float(phi3) - 0.5 * math.pi + offset)
            worst = max(worst, abs(wrap_angle(res.inter_arm_phase - expected)))
    return _result(
        "phase-block-law",
        worst,
        1e-10,
        "full-router inter-arm phase equals phi3 - pi/2 (mod 2pi) on a 16x16 grid",
    )


def check_generalized_map(opts: VerifyOptions) -> CheckResult:
    rng = _rng(opts, 7)
    worst = 0.0
    for _ in range(200):
        cfg = _cfg(
            opts,
            RouterVariant.GENERALIZED,
            phi1=float(rng.uniform(0.0, math.pi)),
            phi2=float(rng.uniform(0.0, math.pi)),
            phi3=float(rng.uniform(0.0, 2.0 * math.pi)),
            phi4=float(rng.uniform(0.0, 2.0 * math.pi)),
        )
        worst = max(worst, _compare(_random_jones(rng), cfg, opts))
    return _result(
        "generalized-routing-map",
        worst,
        1e-10,
        "per-polarization output map vs half-angle closed form, 200 random samples",
    )


def expected_after_gate_stage(signal: JonesVector, phi: float, arm2_factor: complex) -> RegisterState:
    """Hand-expanded state after both gate sandwiches, before recombination."""
    alpha, beta = signal.amp_h, signal.amp_v
    plus = 0.5 * (1.0 + cmath.exp(1j * phi))
    minus = 0.5 * (1.0 - cmath.exp(1j * phi))
    return RegisterState(
        (2, 2),
        [alpha * plus, alpha * minus, arm2_factor * beta * minus, arm2_factor * beta * plus],
    )


def expected_after_recombine(signal: JonesVector, phi: float, arm2_factor: complex) -> RegisterState:
    """Hand-expanded state after the recombining splitter, before corrections."""
    alpha, beta = signal.amp_h, signal.amp_v
    plus = 0.5 * (1.0 + cmath.exp(1j * phi))
    minus = 0.5 * (1.0 - cmath.exp(1j * phi))
    return RegisterState(
        (2, 2),
        [alpha * plus, -beta * plus, arm2_factor * beta * minus, arm2_factor * alpha * minus],
    )


def check_stage_checkpoints(opts: VerifyOptions) -> CheckResult:
    rng = _rng(opts, 8)
    signals = [_random_jones(rng) for _ in range(3)]
    factor = _arm2_factor(opts)
    worst = 0.0
    for phi in np.linspace(0.0, 2.0 * math.pi, 8, endpoint=False):
        cfg = _cfg(opts, RouterVariant.BASIC, phi1=float(phi))
        for signal in signals:
            checkpoints = _run(signal, cfg, opts).checkpoints
            worst = max(
                worst,
                max_abs_difference(
                    expected_after_gate_stage(signal, float(phi), factor),
                    checkpoints[CHECK_AFTER_GATES],
                ),
                max_abs_difference(
                    expected_after_recombine(signal, float(phi), factor),
                    checkpoints[CHECK_AFTER_RECOMBINE],
                ),
            )
    return _result(
        "interferometer-stage-checkpoints",
        worst,
        1e-12,
        "gate-stage and recombiner states vs hand-expanded forms at 8 phases",
    )


def _dense_embed(matrix: np.ndarray, dims: tuple[int, ...], targets: tuple[int, ...]) -> np.ndarray:
    """Independent full-register embedding via explicit digit arithmetic."""
    total = math.prod(dims)
    target_dims = tuple(dims[t] for t in targets)
    block = math.prod(target_dims)
    full = np.zeros((total, total), dtype=np.complex128)
    for col in range(total):
        digits = list(np.unravel_index(col, dims))
        col_block = int(np.ravel_multi_index([digits[t] for t in targets], target_dims))
        for row_block in range(block):
            coeff = matrix[row_block, col_block]
            if coeff == 0:
                continue
            replacement = np.unravel_index(row_block, target_dims)
            row_digits = list(digits)
            for t, d in zip(targets, replacement):
                row_digits[t] = int(d)
            row = int(np.ravel_multi_index(row_digits, dims))
            full[row, col] += coeff
    return full


def check_dense_oracle(opts: VerifyOptions) -> CheckResult:
    rng = _rng(opts, 9)
    signals = [_random_jones(rng) for _ in range(2)]
    configs = [
        _cfg(opts, RouterVariant.BASIC, phi1=0.7),
        _cfg(opts, RouterVariant.FULL, phi1=0.7, phi3=1.1),
        _cfg(opts, RouterVariant.GENERALIZED, phi1=0.4, phi2=1.9, phi3=2.3, phi4=5.1),
    ]
    worst = 0.0
    for cfg in configs:
        circuit = build_router(cfg)
        effective = _circuit(cfg, opts) or circuit
        dims = (effective.path_dim, 2)
        gate_steps = [s for s in effective.steps if isinstance(s, GateStep)]
        n = len(gate_steps)
        for signal in signals:
            initial = RegisterState.from_jones(signal, effective.path_dim, 0)
            branches, _ = run_circuit(initial, effective)
            for branch in branches:
                vector = initial.amps.copy()
                gate_cursor = 0
                for step in effective.steps:
                    if isinstance(step, UnitaryStep):
                        vector = _dense_embed(step.op.matrix, dims, step.targets) @ vector
                    else:
                        pick = branch.labels[gate_cursor]
                        k_success, k_failure = kraus_pair(step.gate, effective.path_dim)
                        chosen = k_success if pick == "S" else k_failure
                        vector = _dense_embed(chosen.matrix, dims, (0, 1)) @ vector
                        gate_cursor += 1
                worst = max(worst, float(np.max(np.abs(vector - branch.state.amps))))
            assert len(branches) == 2**n
    return _result(
        "dense-evolution-oracle",
        worst,
        1e-12,
        "structured application vs dense matrix chains on every branch of all variants",
    )


def check_channel_sanity(opts: VerifyOptions) -> CheckResult:
    rng = _rng(opts, 10)
    worst = 0.0
    for path_dim in (1, 2, 3):
        for arm in range(path_dim):
            for phi in np.linspace(0.0, 2.0 * math.pi, 9, endpoint=False):
                placement = GatePlacement(arm, ProgramPhase(float(phi)))
                worst = max(worst, completeness_defect(placement, path_dim))
    for _ in range(50):
        signal = _random_jones(rng)
        phi1 = float(rng.uniform(0.0, 2.0 * math.pi))
        phi3 = float(rng.uniform(0.0, 2.0 * math.pi))
        for cfg in (
            _cfg(opts, RouterVariant.BASIC, phi1=phi1),
            _cfg(opts, RouterVariant.FULL, phi1=phi1, phi3=phi3),
        ):
            branches = _run(signal, cfg, opts).branches
            worst = max(worst, abs(sum(b.probability for b in branches) - 1.0))
    for _ in range(50):
        signal = _random_jones(rng)
        phase = ProgramPhase(float(rng.uniform(0.0, 2.0 * math.pi)))
        explicit_s = explicit_branches(signal, phase)[0]
        kraus_s = fire_pipeline(
            RegisterState.from_jones(signal, 1, 0), [GatePlacement(0, phase)]
        )[0]
        worst = max(worst, max_abs_difference(explicit_s.state, kraus_s.state))
        worst = max(worst, abs(explicit_s.probability - 0.5), abs(kraus_s.probability - 0.5))
    return _result(
        "kraus-channel-sanity",
        worst,
        1e-12,
        "completeness, branch probability sums, explicit vs Kraus success branch",
    )


def generate_experiment_spec(rng: np.random.Generator) -> dsl.ExperimentSpec:
    """Random valid experiment spec; shared by round-trip checks and tests."""
    variants = list(RouterVariant)
    variant = variants[int(rng.integers(len(variants)))]
    free = dict(
        basic=("phi1",), full=("phi1", "phi3"), generalized=("phi1", "phi2", "phi3", "phi4")
    )[variant.value]
    assigned = {
        name: float(rng.uniform(0.0, 2.0 * math.pi)) for name in free if rng.random() < 0.6
    }
    candidates = [name for name in free if name not in assigned]
    axis_count = min(int(rng.integers(0, 3)), len(candidates))
    order = list(rng.permutation(len(candidates)))
    axes = tuple(
        sweeps.SweepAxis(
            candidates[order[i]],
            float(rng.uniform(-10.0, 10.0)),
            float(rng.uniform(-10.0, 10.0)),
            int(rng.integers(2, 13)),
        )
        for i in range(axis_count)
    )
    emit_formats = [fmt for fmt in ("csv", "json") if rng.random() < 0.5]
    emits = tuple(dsl.EmitTarget(fmt, f"out_{i}.{fmt}") for i, fmt in enumerate(emit_formats))
    signal = _random_jones(rng)
    config = RouterConfig(variant, **assigned)
    return dsl.ExperimentSpec(signal, config, axes, emits)


def check_dsl_round_trip(opts: VerifyOptions) -> CheckResult:
    rng = _rng(opts, 11)
    failures = 0
    for _ in range(500):
        spec = generate_experiment_spec(rng)
        parsed = dsl.parse(dsl.serialize(spec))
        if parsed.spec != spec or parsed.errors():
            failures += 1
    return _result(
        "dsl-round-trip", float(failures), 0.0, "parse(serialize(spec)) identity on 500 random specs"
    )


_FUZZ_ALPHABET = (
    "signal router phi sweep emit from to steps csv json basic full generalized "
    "alpha beta = 0123456789 .+-eE pi rad deg i # \t \n \r\n \x00 é 世 \\ : , ( )"
).split(" ")


def check_parser_totality(opts: VerifyOptions) -> CheckResult:
    rng = random.Random(opts.seed + 12)
    failures = 0
    for _ in range(opts.parser_fuzz_cases):
        pieces = rng.choices(_FUZZ_ALPHABET, k=rng.randint(0, 24))
        text = " ".join(pieces) if rng.random() < 0.7 else "".join(pieces)
        try:
            result = dsl.parse(text)
        except Exception:
            failures += 1
            continue
        lines = text.splitlines() or [""]
        for diag in result.diagnostics:
            if not 1 <= diag.line <= max(1, len(lines)):
                failures += 1
            elif diag.column < 1 or diag.column > len(lines[diag.line - 1]) + 2:
                failures += 1
        if result.spec is None and not result.errors():
            failures += 1
    return _result(
        "dsl-parser-totality",
        float(failures),
        0.0,
        f"no crashes and valid diagnostic positions on {opts.parser_fuzz_cases} fuzz inputs",
    )


def check_emit_parity(opts: VerifyOptions) -> CheckResult:
    import csv as csv_module
    import io
    import json

    rng = _rng(opts, 13)
    signal = _random_jones(rng)
    runs = [
        (
            _cfg(opts, RouterVariant.BASIC),
            [sweeps.SweepAxis("phi1", 0.0, 2.0 * math.pi, 9)],
        ),
        (
            _cfg(opts, RouterVariant.FULL),
            [
                sweeps.SweepAxis("phi1", 0.1, 3.0, 5),
                sweeps.SweepAxis("phi3", 0.0, 6.0, 5),
            ],
        ),
    ]
    failures = 0
    for cfg, axes in runs:
        rows = sweeps.run_sweep(signal, cfg, axes)
        csv_text = sweeps.render_csv(rows)
        json_rows = json.loads(sweeps.render_json(rows))["rows"]
        reader = list(csv_module.reader(io.StringIO(csv_text)))
        header, body = reader[0], reader[1:]
        if tuple(header) != sweeps.COLUMNS or len(body) != len(json_rows):
            failures += 1
            continue
        for csv_row, json_row in zip(body, json_rows):
            for column, cell in zip(header, csv_row):
                json_value = json_row[column]
                if cell == "":
                    if json_value is not None:
                        failures += 1
                elif json_value is None or float(cell) != json_value:
                    failures += 1
    return _result(
        "emit-format-parity", float(failures), 0.0, "CSV and JSON sweeps carry identical numbers"
    )


def check_convention_invariance(opts: VerifyOptions) -> CheckResult:
    """Observables must not depend on the splitter reflection bookkeeping."""
    rng = _rng(opts, 14)
    signals = [_random_jones(rng) for _ in range(3)]
    worst = 0.0

    def gap(base_cfg: RouterConfig, signal: JonesVector) -> float:
        toggled_cfg = replace(base_cfg, i_on_reflect=not base_cfg.i_on_reflect)
        a = run_detailed(signal, base_cfg).result
        b = run_detailed(signal, toggled_cfg).result
        deltas = [
            abs(a.transmissivity - b.transmissivity),
            abs(a.reflectivity - b.reflectivity),
            abs(a.success_probability - b.success_probability),
        ]
        for amp_a, amp_b in (
            ((a.amp_h1, a.amp_v1), (b.amp_h1, b.amp_v1)),
            ((a.amp_h2, a.amp_v2), (b.amp_h2, b.amp_v2)),
        ):
            weight = abs(amp_a[0]) ** 2 + abs(amp_a[1]) ** 2
            if weight < ARM_WEIGHT_FLOOR:
                continue
            overlap = amp_a[0].conjugate() * amp_b[0] + amp_a[1].conjugate() * amp_b[1]
            deltas.append(abs(1.0 - abs(overlap) / weight))  # in-arm ratios match up to a common phase
        for fid_a, fid_b in ((a.fidelity_arm1, b.fidelity_arm1), (a.fidelity_arm2, b.fidelity_arm2)):
            if fid_a is not None and fid_b is not None:
                deltas.append(abs(fid_a - fid_b))
        return max(deltas)

    for phi in np.linspace(0.0, 2.0 * math.pi, 16, endpoint=False):
        for signal in signals:
            worst = max(worst, gap(RouterConfig(RouterVariant.BASIC, phi1=float(phi)), signal))
    for phi1 in np.linspace(0.3, 2.8, 6):
        for phi3 in np.linspace(0.0, 6.0, 6):
            worst = max(
                worst,
                gap(RouterConfig(RouterVariant.FULL, phi1=float(phi1), phi3=float(phi3)), signals[0]),
            )
    return _result(
        "reflection-convention-invariance",
        worst,
        1e-12,
        "T, R, success probability and in-arm amplitude ratios match across conventions",
    )


ALL_CHECKS = (
    check_basic_amplitude_map,
    check_transmissivity_law,
    check_fixed_inter_arm_phase,
    check_success_probability,
    check_polarization_preservation,
    check_phase_block_law,
    check_generalized_map,
    check_stage_checkpoints,
    check_dense_oracle,
    check_channel_sanity,
    check_dsl_round_trip,
    check_parser_totality,
    check_emit_parity,
    check_convention_invariance,
)


def run_all(opts: VerifyOptions | None = None) -> list[CheckResult]:
    opts = opts or VerifyOptions()
    return [check(opts) for check in ALL_CHECKS]
