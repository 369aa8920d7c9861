"""Line-oriented circuit files.

    qubits 2
    segment duration=0.785398 global_phase=0.785398 ramp=tent
    term 1.0 XX
    term 1.0 YY
    cycles 1/2

``#`` starts a comment. Terms belong to the most recent segment.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

from .evolution import Schedule, ScheduleError, Segment, resolve_ramp
from .pauli import MAX_QUBITS, HamiltonianSpec, PauliError

_FLOAT = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?\Z")
_INT = re.compile(r"\d+\Z")
_RATIONAL = re.compile(r"\d+(?:/\d+)?\Z")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_.-]*\Z")
_PAULI = re.compile(r"[IXYZ]+\Z")


class CircuitError(ValueError):
    def __init__(self, line: int, column: int, message: str):
        self.line = line
        self.column = column
        self.message = message
        super().__init__(f"line {line}, column {column}: {message}")


@dataclass
class _Token:
    text: str
    column: int


def _tokens(line: str) -> list[_Token]:
    return [_Token(m.group(), m.start() + 1) for m in re.finditer(r"\S+", line)]


def _float(tok: _Token, lineno: int, what: str) -> float:
    if not _FLOAT.match(tok.text):
        raise CircuitError(lineno, tok.column, f"{what} {tok.text!r} is not a decimal number")
    value = float(tok.text)
    if not math.isfinite(value):
        raise CircuitError(lineno, tok.column, f"{what} {tok.text!r} overflows a double")
    return value


@dataclass
class _SegmentDraft:
    duration: float
    global_phase: float
    ramp: object
    terms: list
    line: int


def parse(text: str, sidecar_dir=None) -> Schedule:
    qubits = None
    cycles = None
    cycles_pos = (1, 1)
    drafts: list[_SegmentDraft] = []
    lines = text.split("\n")
    for lineno, raw in enumerate(lines, 1):
        body = raw.split("#", 1)[0]
        toks = _tokens(body)
        if not toks:
            continue
        key = toks[0]
        if qubits is None and key.text != "qubits":
            raise CircuitError(lineno, key.column, f"expected header 'qubits N' before {key.text!r}")
        if key.text == "qubits":
            if qubits is not None:
                raise CircuitError(lineno, key.column, "duplicate 'qubits' header")
            if len(toks) != 2 or not _INT.match(toks[1].text):
                col = toks[1].column if len(toks) > 1 else key.column + len(key.text)
                raise CircuitError(lineno, col, "header must be 'qubits N' with an integer N")
            qubits = int(toks[1].text)
            if not 1 <= qubits <= MAX_QUBITS:
                raise CircuitError(lineno, toks[1].column, f"qubit count must be in [1, {MAX_QUBITS}]")
        elif key.text == "segment":
            fields = {}
            for tok in toks[1:]:
                name, eq, value = tok.text.partition("=")
                if not eq or name not in ("duration", "global_phase", "ramp"):
                    raise CircuitError(lineno, tok.column, f"unknown segment field {tok.text!r}")
                if name in fields:
                    raise CircuitError(lineno, tok.column, f"duplicate segment field {name!r}")
                fields[name] = _Token(value, tok.column + len(name) + 1)
            if "duration" not in fields:
                raise CircuitError(lineno, key.column, "segment needs duration=FLOAT")
            duration = _float(fields["duration"], lineno, "duration")
            if duration <= 0:
                raise CircuitError(lineno, fields["duration"].column, "duration must be positive")
            phase = _float(fields["global_phase"], lineno, "global_phase") if "global_phase" in fields else 0.0
            ramp = None
            if "ramp" in fields:
                tok = fields["ramp"]
                if not _IDENT.match(tok.text):
                    raise CircuitError(lineno, tok.column, f"ramp name {tok.text!r} is not an identifier")
                try:
                    ramp = resolve_ramp(tok.text, sidecar_dir)
                except (ScheduleError, OSError) as exc:
                    raise CircuitError(lineno, tok.column, str(exc)) from None
            drafts.append(_SegmentDraft(duration, phase, ramp, [], lineno))
        elif key.text == "term":
            if not drafts:
                raise CircuitError(lineno, key.column, "term before any segment")
            if len(toks) != 3:
                raise CircuitError(lineno, key.column, "term must be 'term FLOAT PAULI'")
            coeff = _float(toks[1], lineno, "coefficient")
            pauli = toks[2]
            if not _PAULI.match(pauli.text):
                raise CircuitError(lineno, pauli.column, f"Pauli string {pauli.text!r} may only contain I, X, Y, Z")
            if len(pauli.text) != qubits:
                raise CircuitError(
                    lineno, pauli.column, f"Pauli string {pauli.text!r} has length {len(pauli.text)}, expected {qubits}"
                )
            drafts[-1].terms.append((coeff, pauli.text))
        elif key.text == "cycles":
            if cycles is not None:
                raise CircuitError(lineno, key.column, "duplicate 'cycles' line")
            if len(toks) != 2 or not _RATIONAL.match(toks[1].text):
                col = toks[1].column if len(toks) > 1 else key.column
                raise CircuitError(lineno, col, "cycles must be a positive integer or fraction like 1/2")
            try:
                cycles = Fraction(toks[1].text)
            except ZeroDivisionError:
                raise CircuitError(lineno, toks[1].column, "cycles has a zero denominator") from None
            if cycles <= 0:
                raise CircuitError(lineno, toks[1].column, "cycles must be positive")
            cycles_pos = (lineno, toks[1].column)
        else:
            raise CircuitError(lineno, key.column, f"unknown keyword {key.text!r}")
    if qubits is None:
        raise CircuitError(1, 1, "empty circuit: missing 'qubits N' header")
    if not drafts:
        raise CircuitError(len(lines), 1, "circuit has no segments")
    segments = []
    for d in drafts:
        if not d.terms:
            raise CircuitError(d.line, 1, "segment has no terms")
        try:
            h = HamiltonianSpec(qubits, tuple(d.terms))
            segments.append(Segment(h, d.duration, d.global_phase, d.ramp))
        except (PauliError, ScheduleError) as exc:
            raise CircuitError(d.line, 1, str(exc)) from None
    try:
        return Schedule(qubits, tuple(segments), cycles if cycles is not None else Fraction(1))
    except ScheduleError as exc:
        raise CircuitError(cycles_pos[0], cycles_pos[1], str(exc)) from None


def parse_bytes(data: bytes, sidecar_dir=None) -> Schedule:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        before = data[: exc.start]
        line = before.count(b"\n") + 1
        col = exc.start - (before.rfind(b"\n") + 1) + 1
        raise CircuitError(line, col, "file is not valid UTF-8") from None
    return parse(text, sidecar_dir)


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def serialize(schedule: Schedule) -> str:
    out = [f"qubits {schedule.qubits}"]
    for seg in schedule.segments:
        head = f"segment duration={fmt_float(seg.duration)}"
        if seg.global_phase != 0.0:
            head += f" global_phase={fmt_float(seg.global_phase)}"
        if seg.ramp is not None:
            head += f" ramp={seg.ramp.name}"
        out.append(head)
        terms = list(seg.hamiltonian.terms)
        if seg.hamiltonian.identity_coefficient != 0.0 or not terms:
            terms.append((seg.hamiltonian.identity_coefficient, "I" * schedule.qubits))
        for coeff, pauli in sorted(terms, key=lambda t: (t[1], t[0])):
            out.append(f"term {fmt_float(coeff)} {pauli}")
    out.append(f"cycles {schedule.cycles}")
    return "\n".join(out) + "\n"


def canonical(text: str, sidecar_dir=None) -> str:
    return serialize(parse(text, sidecar_dir))
