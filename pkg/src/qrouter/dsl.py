"""Line-oriented experiment files (.qrt) and their parser.

Grammar, one statement per line, ``#`` starts a comment, blank lines are
ignored (UTF-8, LF or CRLF):

    signal alpha=<complex> beta=<complex>
    router basic|full|generalized
    phi<N> = <angle>
    sweep phi<N> from <angle> to <angle> steps <int>
    emit csv|json <path>

Complex literals are ``a``, ``a+bi`` or ``a-bi``.  Angle literals are a
number with an optional unit suffix: ``pi`` (multiples of pi), ``deg`` or
``rad``; a bare number means radians.  The signal pair is renormalized
silently when its norm is within 1e-6 of one, renormalized with a warning
when off by up to 1e-2, and rejected beyond that.  Only the free parameters
of the declared variant may be assigned or swept (phi2/phi4 are tied for
basic/full), a parameter cannot be both assigned and swept, at most two
sweep axes are allowed and swept parameters must be distinct.

Parsing is total: any input yields either a spec or positioned diagnostics,
never an exception.  ``parse(serialize(spec)) == spec`` for every valid
spec; angles serialize in ``pi`` units whenever multiplying the mantissa
back by pi reproduces the float exactly, otherwise in ``rad`` with full
repr precision.  Diagnostics for missing declarations anchor at line 1,
column 1.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .register import INPUT_NORM_TOL, JonesVector
from .router import RouterConfig, RouterVariant
from .sweeps import MAX_GRID_ROWS, MAX_STEPS_PER_AXIS, SweepAxis

RENORMALIZE_WARN = 1e-6
RENORMALIZE_REJECT = 1e-2

_NUMBER = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_ANGLE_RE = re.compile(rf"^({_NUMBER})(pi|rad|deg)?$")
_COMPLEX_RE = re.compile(rf"^(?P<re>{_NUMBER})(?:(?P<sign>[+-])(?P<im>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)i)?$")
_KEYWORD_RE = re.compile(r"\s*(\S+)")
_SIGNAL_RE = re.compile(r"^\s*signal\s+alpha\s*=\s*(\S+)\s+beta\s*=\s*(\S+)\s*$")
_ROUTER_RE = re.compile(r"^\s*router\s+(\S+)\s*$")
_PHI_RE = re.compile(r"^\s*(phi\d+)\s*=\s*(\S+)\s*$")
_SWEEP_RE = re.compile(r"^\s*sweep\s+(\S+)\s+from\s+(\S+)\s+to\s+(\S+)\s+steps\s+(\S+)\s*$")
_EMIT_RE = re.compile(r"^\s*emit\s+(\S+)\s+(\S+)\s*$")
_STEPS_RE = re.compile(r"^\d+$")

EMIT_FORMATS = ("csv", "json")


@dataclass(frozen=True)
class ParseDiagnostic:
    """A positioned parser message; columns and lines are 1-based."""

    line: int
    column: int
    message: str
    severity: str  # "error" or "warning"

    def render(self) -> str:
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


@dataclass(frozen=True)
class EmitTarget:
    format: str
    path: str


@dataclass(frozen=True)
class ExperimentSpec:
    """A fully resolved experiment: signal, router config, sweeps, outputs."""

    signal: JonesVector
    config: RouterConfig
    sweeps: tuple[SweepAxis, ...]
    emits: tuple[EmitTarget, ...]


@dataclass(frozen=True)
class ParseResult:
    spec: ExperimentSpec | None
    diagnostics: tuple[ParseDiagnostic, ...]

    @property
    def ok(self) -> bool:
        return self.spec is not None

    def errors(self) -> tuple[ParseDiagnostic, ...]:
        return tuple(d for d in self.diagnostics if d.severity == "error")

    def warnings(self) -> tuple[ParseDiagnostic, ...]:
        return tuple(d for d in self.diagnostics if d.severity == "warning")


def parse_angle_text(text: str) -> float:
    """Angle literal -> radians; raises ValueError on malformed input."""
    match = _ANGLE_RE.match(text)
    if not match:
        raise ValueError(
            f"{text!r} is not an angle literal (expected e.g. 0.5pi, 90deg, 1.2rad or a bare number in radians)"
        )
    value = float(match.group(1))
    unit = match.group(2)
    if unit == "pi":
        value *= math.pi
    elif unit == "deg":
        value = math.radians(value)
    if not math.isfinite(value):
        raise ValueError(f"angle literal {text!r} is out of range")
    return value


def parse_complex_text(text: str) -> complex:
    """Complex literal (a, a+bi, a-bi) -> complex; raises ValueError."""
    match = _COMPLEX_RE.match(text)
    if not match:
        raise ValueError(f"{text!r} is not a complex literal (expected a, a+bi or a-bi)")
    real = float(match.group("re"))
    imag = 0.0
    if match.group("im") is not None:
        imag = float(match.group("im"))
        if match.group("sign") == "-":
            imag = -imag
    value = complex(real, imag)
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise ValueError(f"complex literal {text!r} is out of range")
    return value


def normalize_signal(alpha: complex, beta: complex) -> tuple[JonesVector | None, float]:
    """Renormalize a raw amplitude pair; None when rejected.

    Returns the Jones vector (or None when the norm is off by more than
    RENORMALIZE_REJECT or vanishes) and the norm deviation |norm - 1| that
    callers use to decide whether a warning is due.  Pairs already within
    the construction tolerance are stored bit-exactly, which is what makes
    parse/serialize a strict round trip.
    """
    norm = math.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
    deviation = abs(norm - 1.0)
    if norm < RENORMALIZE_REJECT or deviation > RENORMALIZE_REJECT:
        return None, deviation
    if deviation <= INPUT_NORM_TOL:
        return JonesVector(alpha, beta), deviation
    return JonesVector(alpha / norm, beta / norm), deviation


def angle_to_text(value: float) -> str:
    """Canonical angle rendering: exact pi multiples as <m>pi, else <x>rad."""
    mantissa = value / math.pi
    if mantissa * math.pi == value:
        return f"{mantissa!r}pi"
    return f"{value!r}rad"


def complex_to_text(value: complex) -> str:
    sign = "-" if value.imag < 0 else "+"
    return f"{value.real!r}{sign}{abs(value.imag)!r}i"


def serialize(spec: ExperimentSpec) -> str:
    """Canonical text form; parse(serialize(spec)) == spec."""
    swept = {axis.parameter for axis in spec.sweeps}
    lines = [
        f"signal alpha={complex_to_text(spec.signal.amp_h)} beta={complex_to_text(spec.signal.amp_v)}",
        f"router {spec.config.variant.value}",
    ]
    for name in ("phi1", "phi2", "phi3", "phi4"):
        if name in spec.config.free_parameters() and name not in swept:
            lines.append(f"{name}={angle_to_text(getattr(spec.config, name).phi)}")
    for axis in spec.sweeps:
        lines.append(
            f"sweep {axis.parameter} from {angle_to_text(axis.start)} "
            f"to {angle_to_text(axis.stop)} steps {axis.steps}"
        )
    for emit in spec.emits:
        lines.append(f"emit {emit.format} {emit.path}")
    return "\n".join(lines) + "\n"


class _Collector:
    """Accumulates statements with their positions plus diagnostics."""

    def __init__(self) -> None:
        self.diagnostics: list[ParseDiagnostic] = []
        self.signal: tuple[complex, complex] | None = None
        self.signal_pos = (1, 1)
        self.variant: RouterVariant | None = None
        self.router_pos = (1, 1)
        self.phis: dict[str, float] = {}
        self.phi_pos: dict[str, tuple[int, int]] = {}
        self.sweeps: list[SweepAxis] = []
        self.sweep_pos: list[tuple[int, int]] = []
        self.emits: list[EmitTarget] = []

    def error(self, line: int, column: int, message: str) -> None:
        self.diagnostics.append(ParseDiagnostic(line, column, message, "error"))

    def warning(self, line: int, column: int, message: str) -> None:
        self.diagnostics.append(ParseDiagnostic(line, column, message, "warning"))

    def errors_present(self) -> bool:
        return any(d.severity == "error" for d in self.diagnostics)


def _column(match: re.Match, group: int) -> int:
    return match.start(group) + 1

def _parse_phi_name(name: str) -> str | None:
    index = int(name[3:])
    return name if 1 <= index <= 4 else None


def _scan_line(lineno: int, text: str, out: _Collector) -> None:
    head = _KEYWORD_RE.match(text)
    if head is None:
        return
    keyword = head.group(1)
    keyword_col = _column(head, 1)

    if keyword == "signal":
        match = _SIGNAL_RE.match(text)
        if not match:
            out.error(lineno, keyword_col, "malformed signal statement (expected: signal alpha=<complex> beta=<complex>)")
            return
        if out.signal is not None:
            out.error(lineno, keyword_col, "duplicate signal declaration")
            return
        values = []
        for group in (1, 2):
            try:
                values.append(parse_complex_text(match.group(group)))
            except ValueError as exc:
                out.error(lineno, _column(match, group), str(exc))
                return
        out.signal = (values[0], values[1])
        out.signal_pos = (lineno, keyword_col)
        return

    if keyword == "router":
        match = _ROUTER_RE.match(text)
        if not match:
            out.error(lineno, keyword_col, "malformed router statement (expected: router basic|full|generalized)")
            return
        if out.variant is not None:
            out.error(lineno, keyword_col, "duplicate router declaration")
            return
        try:
            out.variant = RouterVariant.from_name(match.group(1))
        except ValueError as exc:
            out.error(lineno, _column(match, 1), str(exc))
            return
        out.router_pos = (lineno, keyword_col)
        return

    if keyword.startswith("phi"):
        match = _PHI_RE.match(text)
        if not match:
            out.error(lineno, keyword_col, "malformed phase assignment (expected: phi<N> = <angle>)")
            return
        name = _parse_phi_name(match.group(1))
        if name is None:
            out.error(lineno, _column(match, 1), f"{match.group(1)} is not a valid parameter (phi index must be 1..4)")
            return
        if name in out.phis:
            out.error(lineno, _column(match, 1), f"duplicate assignment of {name}")
            return
        try:
            out.phis[name] = parse_angle_text(match.group(2))
        except ValueError as exc:
            out.error(lineno, _column(match, 2), str(exc))
            return
        out.phi_pos[name] = (lineno, _column(match, 1))
        return

    if keyword == "sweep":
        match = _SWEEP_RE.match(text)
        if not match:
            out.error(lineno, keyword_col, "malformed sweep statement (expected: sweep phi<N> from <angle> to <angle> steps <int>)")
            return
        raw_name = match.group(1)
        name = _parse_phi_name(raw_name) if re.fullmatch(r"phi\d+", raw_name) else None
        if name is None:
            out.error(lineno, _column(match, 1), f"{raw_name} is not a valid sweep parameter (expected phi1..phi4)")
            return
        try:
            start = parse_angle_text(match.group(2))
            stop = parse_angle_text(match.group(3))
        except ValueError as exc:
            out.error(lineno, _column(match, 2), str(exc))
            return
        if not _STEPS_RE.match(match.group(4)):
            out.error(lineno, _column(match, 4), f"{match.group(4)!r} is not a valid step count")
            return
        steps = int(match.group(4))
        if steps < 2:
            out.error(lineno, _column(match, 4), "a sweep needs at least 2 steps")
            return
        if steps > MAX_STEPS_PER_AXIS:
            out.error(lineno, _column(match, 4), f"sweep steps capped at {MAX_STEPS_PER_AXIS}")
            return
        out.sweeps.append(SweepAxis(name, start, stop, steps))
        out.sweep_pos.append((lineno, _column(match, 1)))
        return

    if keyword == "emit":
        match = _EMIT_RE.match(text)
        if not match:
            out.error(lineno, keyword_col, "malformed emit statement (expected: emit csv|json <path>)")
            return
        fmt = match.group(1)
        if fmt not in EMIT_FORMATS:
            out.error(lineno, _column(match, 1), f"unknown emit format {fmt!r} (expected csv or json)")
            return
        out.emits.append(EmitTarget(fmt, match.group(2)))
        return

    out.error(lineno, keyword_col, f"unknown keyword {keyword!r}")


def parse(source: str) -> ParseResult:
    """Parse experiment text into a spec or a list of positioned diagnostics."""
    out = _Collector()
    for lineno, raw in enumerate(source.splitlines(), start=1):
        text = raw.split("#", 1)[0]
        if text.strip():
            _scan_line(lineno, text, out)

    if out.signal is None:
        out.error(1, 1, "missing signal declaration")
    if out.variant is None:
        out.error(1, 1, "missing router declaration")

    signal: JonesVector | None = None
    if out.signal is not None:
        signal, deviation = normalize_signal(*out.signal)
        if signal is None:
            out.error(
                out.signal_pos[0],
                out.signal_pos[1],
                f"signal amplitudes are not normalizable (norm off by {deviation:.3g}, limit {RENORMALIZE_REJECT:g})",
            )
        elif deviation > RENORMALIZE_WARN:
            out.warning(
                out.signal_pos[0],
                out.signal_pos[1],
                f"signal renormalized (norm was off by {deviation:.3g})",
            )

    config: RouterConfig | None = None
    if out.variant is not None:
        free = _FREE_BY_VARIANT[out.variant]
        for name, pos in out.phi_pos.items():
            if name not in free:
                out.error(pos[0], pos[1], f"{name} not valid for {out.variant.value}")
        swept: set[str] = set()
        for axis, pos in zip(out.sweeps, out.sweep_pos):
            if axis.parameter not in free:
                out.error(pos[0], pos[1], f"{axis.parameter} not valid for {out.variant.value}")
            elif axis.parameter in out.phis:
                out.error(pos[0], pos[1], f"{axis.parameter} is both assigned and swept")
            elif axis.parameter in swept:
                out.error(pos[0], pos[1], f"{axis.parameter} swept more than once")
            else:
                swept.add(axis.parameter)
        if len(out.sweeps) > 2:
            pos = out.sweep_pos[2]
            out.error(pos[0], pos[1], "at most 2 simultaneous sweep axes are supported")
        rows = math.prod(axis.steps for axis in out.sweeps[:2]) if out.sweeps else 1
        if rows > MAX_GRID_ROWS:
            pos = out.sweep_pos[0]
            out.error(pos[0], pos[1], f"sweep grid of {rows} rows exceeds the cap of {MAX_GRID_ROWS}")
        if not out.errors_present():
            try:
                config = RouterConfig(out.variant, **out.phis)
            except ValueError as exc:  # backstop; front-end checks should cover this
                out.error(out.router_pos[0], out.router_pos[1], str(exc))

    if out.errors_present() or signal is None or config is None:
        return ParseResult(None, tuple(out.diagnostics))
    spec = ExperimentSpec(signal, config, tuple(out.sweeps), tuple(out.emits))
    return ParseResult(spec, tuple(out.diagnostics))


_FREE_BY_VARIANT = {
    RouterVariant.BASIC: ("phi1",),
    RouterVariant.FULL: ("phi1", "phi3"),
    RouterVariant.GENERALIZED: ("phi1", "phi2", "phi3", "phi4"),
}
