"""Command-line entry point: ``qgtop <command> ...``.

Exit codes: 0 success, 1 input error, 2 consistency failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import gates
from .circuit import CircuitError, parse_bytes
from .evolution import DEFAULT_STEPS, ScheduleError, StepControlError, evolve_state, propagate
from .linalg import LinalgError
from .pauli import PauliError, nu_h
from .phase import SIGMA_CONV, PhaseError, geometric_phase, sum_rule, winding_number
from .report import complex_list, emit_report, emit_sweep, phase_entry, sum_rule_record
from .schmidt import concurrence, schmidt_decompose

EXIT_OK, EXIT_INPUT, EXIT_CONSISTENCY = 0, 1, 2


class InputError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage mistakes are input errors too
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def load_circuit(path: str):
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        return parse_bytes(data, sidecar_dir=os.path.dirname(os.path.abspath(path)))
    except CircuitError as exc:
        raise InputError(f"{path}:{exc.line}:{exc.column}: {exc.message}") from None


def parse_range(text: str) -> list[float]:
    """LO:HI:STEP (inclusive of HI when it lies on the grid) or a single value."""
    parts = text.split(":")
    try:
        nums = [float(p) for p in parts]
    except ValueError:
        raise InputError(f"bad range {text!r}: expected LO:HI:STEP") from None
    if len(nums) == 1:
        return nums
    if len(nums) != 3 or nums[2] <= 0 or nums[1] < nums[0]:
        raise InputError(f"bad range {text!r}: expected LO:HI:STEP with STEP > 0 and HI >= LO")
    lo, hi, step = nums
    n = int(math.floor((hi - lo) / step + 1e-9))
    return [lo + k * step for k in range(n + 1)]


def parse_state(text: str) -> tuple[np.ndarray, str | None]:
    try:
        amps = np.array([complex(p.strip().replace(" ", "")) for p in text.split(",")])
    except ValueError:
        raise InputError(f"bad state {text!r}: expected comma-separated complex literals like 0.6+0.1j") from None
    norm = float(np.linalg.norm(amps))
    if norm == 0.0 or not math.isfinite(norm):
        raise InputError("state has zero or non-finite norm")
    warning = None
    if abs(norm - 1.0) > 1e-10:
        warning = f"state normalised (norm was {norm:.12g})"
        amps = amps / norm
    return amps, warning


def _write(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_nu_h(args) -> int:
    sched = load_circuit(args.circuit)
    rows = []
    for i, seg in enumerate(sched.segments):
        r = nu_h(seg.effective(), zero_tol=args.zero_tol)
        rows.append(
            {
                "segment": i,
                "nu_h": str(r.value),
                "n_plus": r.n_plus,
                "n_minus": r.n_minus,
                "n_zero": r.n_zero,
                "stripped_identity": r.stripped_identity,
                "warnings": list(r.warnings),
            }
        )
    _write(emit_report({"nu_h_per_segment": rows}), args.out)
    return EXIT_OK


def cmd_nu_u(args) -> int:
    sched = load_circuit(args.circuit)
    if args.bare:
        sched = sched.bare()
    traj = propagate(sched, args.steps)
    w = winding_number(traj, args.branch)
    record = {
        "nu_u": w.nu_u,
        "raw_winding": w.raw_winding,
        "residual": w.residual,
        "nu_u_det": w.nu_u_det,
        "nu_u_trace_log": w.nu_u_trace_log,
        "eigenphases": [float(x) for x in w.eigenphases],
        "conventions": {
            "global_phase_included": not args.bare,
            "cycles": str(sched.cycles),
            "branch": args.branch,
            "sigma_conv": SIGMA_CONV,
        },
    }
    _write(emit_report(record), args.out)
    return EXIT_OK


def cmd_sumrule(args) -> int:
    sched = load_circuit(args.circuit)
    rule = sum_rule(sched, args.steps, bare=args.bare, branch=args.branch)
    _write(emit_report(sum_rule_record(rule, sched)), args.out)
    return EXIT_OK if rule.consistent else EXIT_CONSISTENCY


def cmd_phase(args) -> int:
    sched = load_circuit(args.circuit)
    if args.bare:
        sched = sched.bare()
    psi, warning = parse_state(args.state)
    if warning:
        print(f"warning: {warning}", file=sys.stderr)
    if psi.size != sched.dim:
        raise InputError(f"state has {psi.size} amplitudes, circuit needs {sched.dim}")
    traj = evolve_state(sched, psi, args.steps)
    rep = geometric_phase(traj)
    final = traj.states[-1]
    record = phase_entry(args.state, rep)
    record["cyclic"] = bool(abs(abs(np.vdot(psi, final)) - 1.0) < 1e-8)
    record["final_state"] = complex_list(final)
    if sched.dim == 4:
        form = schmidt_decompose(psi)
        record["concurrence"] = concurrence(psi)
        record["schmidt"] = {"alpha": form.alpha, "beta": form.beta}
    _write(emit_report(record), args.out)
    return EXIT_OK


def cmd_table1(args) -> int:
    entries = gates.table1(args.steps)
    rows = [
        {
            "gate": e.gate,
            "global_phase_included": not e.bare,
            "cycles": str(e.cycles),
            "basis_gammas": list(e.basis_gammas),
            "basis_gauge_corrections": list(e.basis_corrections),
            "basis_cyclic": list(e.basis_cyclic),
            "basis_sum_over_2pi": e.basis_sum_over_2pi,
            "gamma_sum_over_2pi": e.gamma_sum_over_2pi,
            "nu_u": e.nu_u,
            "nu_u_det": e.nu_u_det,
            "consistent": e.consistent,
            "matches_anchor": e.matches_anchor,
        }
        for e in entries
    ]
    anchors = {
        g: [{"global_phase_included": not b, "cycles": str(m)} for b, m in combos]
        for g, combos in gates.anchor_conventions(entries).items()
    }
    _write(emit_report({"rows": rows, "anchor_conventions": anchors}), args.out)
    return EXIT_OK if all(e.consistent for e in entries) else EXIT_CONSISTENCY


def cmd_sweep(args) -> int:
    rows = gates.sweep(args.gate, args.family, parse_range(args.alpha0), parse_range(args.beta0), args.steps)
    _emit_rows(rows, gates.SWEEP_COLUMNS, args.out)
    return EXIT_OK


def cmd_noise(args) -> int:
    rows = gates.noise_sweep(parse_range(args.b_over_lambda), parse_range(args.alpha0), steps=args.steps)
    _emit_rows(rows, gates.NOISE_COLUMNS, args.out)
    return EXIT_OK


def _emit_rows(rows, columns, out) -> None:
    if out:
        _write(emit_sweep(rows, columns), out)
    else:
        _write(emit_report({"columns": list(columns), "rows": rows}), None)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qgtop", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def circuit_cmd(name, func, help_text, bare=True, branch=True):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--circuit", required=True, metavar="FILE")
        sp.add_argument("--steps", type=int, default=DEFAULT_STEPS, help="minimum samples per segment")
        if bare:
            sp.add_argument("--bare", action="store_true", help="strip global-phase gauges")
        if branch:
            sp.add_argument("--branch", choices=("trace-log", "det"), default="trace-log")
        sp.add_argument("--out", metavar="PATH")
        sp.set_defaults(func=func)
        return sp

    sp = sub.add_parser("nu-h", help="sign imbalance of each segment Hamiltonian")
    sp.add_argument("--circuit", required=True, metavar="FILE")
    sp.add_argument("--zero-tol", type=float, default=1e-9)
    sp.add_argument("--out", metavar="PATH")
    sp.set_defaults(func=cmd_nu_h)

    circuit_cmd("nu-u", cmd_nu_u, "winding number of det U(t)")
    circuit_cmd("sumrule", cmd_sumrule, "eigenbasis phases against the winding number")
    sp = circuit_cmd("phase", cmd_phase, "geometric phase of one initial state", branch=False)
    sp.add_argument("--state", required=True, help="comma-separated amplitudes, basis |00>,|01>,|10>,|11>")

    sp = sub.add_parser("table1", help="computational-basis phases under each convention")
    sp.add_argument("--steps", type=int, default=DEFAULT_STEPS)
    sp.add_argument("--out", metavar="PATH")
    sp.set_defaults(func=cmd_table1)

    sp = sub.add_parser("sweep", help="numeric vs closed-form phases on an (alpha0, beta0) grid")
    sp.add_argument("--gate", required=True, choices=("swap1sq", "swap2sq", "cnot1sq", "cnot2sq"))
    sp.add_argument("--family", required=True, choices=("sym", "asym"))
    sp.add_argument("--alpha0", default="0:1.5707963267948966:0.19634954084936207", metavar="LO:HI:STEP")
    sp.add_argument("--beta0", default="0", metavar="LO:HI:STEP")
    sp.add_argument("--steps", type=int, default=DEFAULT_STEPS)
    sp.add_argument("--out", metavar="PATH")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("noise", help="phase shift from a parasitic field on qubit 1")
    sp.add_argument("--b-over-lambda", required=True, metavar="LO:HI:STEP")
    sp.add_argument("--alpha0", required=True, metavar="LO:HI:STEP")
    sp.add_argument("--steps", type=int, default=DEFAULT_STEPS)
    sp.add_argument("--out", metavar="PATH")
    sp.set_defaults(func=cmd_noise)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except gates.RecipeMismatch as exc:
        print(f"consistency failure: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except (InputError, CircuitError, ScheduleError, PauliError, LinalgError, gates.GateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (PhaseError, StepControlError) as exc:
        print(f"consistency failure: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
