"""Command-line front end: route, sweep, verify and run.

Exit codes are a stable contract: 0 success, 1 verification or runtime
failure, 2 usage or parse error.  Angle flags accept the same literals as
experiment files (0.5pi, 90deg, 1.2rad or bare radians) and amplitude flags
the same complex literals, so flag and file forms are interchangeable.
Output is deterministic; running the same command twice produces
byte-identical bytes.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import dsl, sweeps, verification
from .register import JonesVector
from .router import RouterConfig, RouterVariant, RoutingResult, run
from .sweeps import SweepAxis, format_value

_VARIANT_PARAMETERS = {
    RouterVariant.BASIC: ("phi1",),
    RouterVariant.FULL: ("phi1", "phi3"),
    RouterVariant.GENERALIZED: ("phi1", "phi2", "phi3", "phi4"),
}


def _angle_flag(text: str) -> float:
    try:
        return dsl.parse_angle_text(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _complex_flag(text: str) -> complex:
    try:
        return dsl.parse_complex_text(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _sweep_flag(text: str) -> SweepAxis:
    parts = text.split(":")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(
            f"{text!r} is not a sweep (expected phiN:from:to:steps, e.g. phi1:0:2pi:65)"
        )
    name, start_text, stop_text, steps_text = parts
    try:
        start = dsl.parse_angle_text(start_text)
        stop = dsl.parse_angle_text(stop_text)
        steps = int(steps_text)
        return SweepAxis(name, start, stop, steps)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_signal_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=_complex_flag, required=True, help="H amplitude (a, a+bi or a-bi)")
    parser.add_argument("--beta", type=_complex_flag, required=True, help="V amplitude")


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--variant", required=True, choices=[v.value for v in RouterVariant], help="router variant"
    )
    for name in ("phi1", "phi2", "phi3", "phi4"):
        parser.add_argument(f"--{name}", type=_angle_flag, default=None, help=f"program phase {name}")
    parser.add_argument(
        "--i-on-reflect",
        action="store_true",
        help="use the +i-on-reflection splitter bookkeeping (sensitivity experiments)",
    )


def _signal_from_args(args: argparse.Namespace, parser: argparse.ArgumentParser) -> JonesVector:
    signal, deviation = dsl.normalize_signal(args.alpha, args.beta)
    if signal is None:
        parser.error(
            f"--alpha/--beta are not normalizable (norm off by {deviation:.3g}, "
            f"limit {dsl.RENORMALIZE_REJECT:g})"
        )
    if deviation > dsl.RENORMALIZE_WARN:
        print(f"warning: signal renormalized (norm was off by {deviation:.3g})", file=sys.stderr)
    return signal


def _config_from_args(args: argparse.Namespace, parser: argparse.ArgumentParser) -> RouterConfig:
    variant = RouterVariant.from_name(args.variant)
    allowed = _VARIANT_PARAMETERS[variant]
    phases = {}
    for name in ("phi1", "phi2", "phi3", "phi4"):
        value = getattr(args, name)
        if value is None:
            continue
        if name not in allowed:
            parser.error(f"argument --{name}: not valid for variant '{variant.value}'")
        phases[name] = value
    return RouterConfig(variant, i_on_reflect=args.i_on_reflect, **phases)


def _render_route_table(cfg: RouterConfig, result: RoutingResult) -> str:
    def cell(value: float | None) -> str:
        return "" if value is None else format_value(value)

    rows = [("variant", cfg.variant.value)]
    for name in ("phi1", "phi2", "phi3", "phi4"):
        if name in cfg.free_parameters():
            rows.append((name, format_value(getattr(cfg, name).phi)))
    rows += [
        ("T", format_value(result.transmissivity)),
        ("R", format_value(result.reflectivity)),
        ("successProb", format_value(result.success_probability)),
        ("fidelity1", cell(result.fidelity_arm1)),
        ("fidelity2", cell(result.fidelity_arm2)),
        ("interArmPhase", cell(result.inter_arm_phase)),
    ]
    for label, amp in (
        ("ampH1", result.amp_h1),
        ("ampV1", result.amp_v1),
        ("ampH2", result.amp_h2),
        ("ampV2", result.amp_v2),
    ):
        sign = "-" if amp.imag < 0 else "+"
        rows.append((label, f"{format_value(amp.real)}{sign}{format_value(abs(amp.imag))}i"))
    width = max(len(label) for label, _ in rows)
    return "\n".join(f"{label:<{width}}  {value}" for label, value in rows) + "\n"


def _render_route_json(cfg: RouterConfig, result: RoutingResult) -> str:
    def num(value: float | None):
        return None if value is None else float(format_value(value))

    payload: dict = {"variant": cfg.variant.value}
    for name in ("phi1", "phi2", "phi3", "phi4"):
        payload[name] = num(getattr(cfg, name).phi) if name in cfg.free_parameters() else None
    payload.update(
        {
            "T": num(result.transmissivity),
            "R": num(result.reflectivity),
            "successProb": num(result.success_probability),
            "fidelity1": num(result.fidelity_arm1),
            "fidelity2": num(result.fidelity_arm2),
            "interArmPhase": num(result.inter_arm_phase),
        }
    )
    for label, amp in (
        ("ampH1", result.amp_h1),
        ("ampV1", result.amp_v1),
        ("ampH2", result.amp_h2),
        ("ampV2", result.amp_v2),
    ):
        payload[label] = {"re": num(amp.real), "im": num(amp.imag)}
    return json.dumps(payload, indent=2) + "\n"


def _cmd_route(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    signal = _signal_from_args(args, parser)
    cfg = _config_from_args(args, parser)
    result = run(signal, cfg)
    if args.format == "json":
        sys.stdout.write(_render_route_json(cfg, result))
    else:
        sys.stdout.write(_render_route_table(cfg, result))
    return 0


def _cmd_sweep(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    signal = _signal_from_args(args, parser)
    cfg = _config_from_args(args, parser)
    axes = args.sweep or []
    try:
        sweeps.validate_axes(cfg, axes)
    except ValueError as exc:
        parser.error(str(exc))
    rows = sweeps.run_sweep(signal, cfg, axes)
    text = sweeps.render_json(rows) if args.format == "json" else sweeps.render_csv(rows)
    if args.output:
        try:
            with open(args.output, "w", encoding="utf-8", newline="") as handle:
                handle.write(text)
        except OSError as exc:
            print(f"error: cannot write {args.output}: {exc}", file=sys.stderr)
            return 1
    else:
        sys.stdout.write(text)
    return 0


def _cmd_verify(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    opts = verification.VerifyOptions(
        i_on_reflect=args.i_on_reflect,
        phase_fault=args.inject_phase_fault,
        parser_fuzz_cases=args.fuzz_cases,
    )
    results = verification.run_all(opts)
    for result in results:
        print(result.render())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0


def _cmd_run(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    try:
        with open(args.path, "rb") as handle:
            source = handle.read().decode("utf-8", errors="replace")
    except OSError as exc:
        print(f"error: cannot read {args.path}: {exc}", file=sys.stderr)
        return 1
    parsed = dsl.parse(source)
    for diagnostic in parsed.diagnostics:
        print(f"{args.path}:{diagnostic.render()}", file=sys.stderr)
    if parsed.spec is None:
        return 2
    spec = parsed.spec
    rows = sweeps.run_sweep(spec.signal, spec.config, spec.sweeps)
    if not spec.emits:
        sys.stdout.write(sweeps.render_csv(rows))
        return 0
    for emit in spec.emits:
        text = sweeps.render_json(rows) if emit.format == "json" else sweeps.render_csv(rows)
        try:
            with open(emit.path, "w", encoding="utf-8", newline="") as handle:
                handle.write(text)
        except OSError as exc:
            print(f"error: cannot write {emit.path}: {exc}", file=sys.stderr)
            return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qrouter",
        description="Simulate a linear-optical programmable quantum router at the amplitude level.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    route = commands.add_parser("route", help="run one configuration and print the routing result")
    _add_signal_flags(route)
    _add_config_flags(route)
    route.add_argument("--format", choices=("table", "json"), default="table")
    route.set_defaults(handler=_cmd_route)

    sweep = commands.add_parser("sweep", help="sweep one or two program phases, emit CSV or JSON")
    _add_signal_flags(sweep)
    _add_config_flags(sweep)
    sweep.add_argument(
        "--sweep",
        action="append",
        type=_sweep_flag,
        metavar="phiN:from:to:steps",
        help="sweep axis (repeat for a second, outer-major axis)",
    )
    sweep.add_argument("--format", choices=("csv", "json"), default="csv")
    sweep.add_argument("--output", default=None, help="write to a file instead of stdout")
    sweep.set_defaults(handler=_cmd_sweep)

    verify = commands.add_parser("verify", help="run the built-in verification suite")
    verify.add_argument(
        "--i-on-reflect",
        action="store_true",
        help="run the suite under the +i-on-reflection bookkeeping (phase checks use the documented offset)",
    )
    verify.add_argument(
        "--inject-phase-fault",
        type=_angle_flag,
        default=0.0,
        help="fault-injection hook: offset the first gate phase of every simulated circuit",
    )
    verify.add_argument(
        "--fuzz-cases",
        type=int,
        default=100_000,
        help="number of parser fuzz inputs (default 100000)",
    )
    verify.set_defaults(handler=_cmd_verify)

    run_cmd = commands.add_parser("run", help="execute a .qrt experiment file")
    run_cmd.add_argument("path", help="experiment file (UTF-8, LF or CRLF)")
    run_cmd.set_defaults(handler=_cmd_run)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args, parser)
    except SystemExit as exc:  # argparse has already written the diagnostic
        code = exc.code
        if code is None:
            return 0
        return code if isinstance(code, int) else 2


if __name__ == "__main__":
    sys.exit(main())
