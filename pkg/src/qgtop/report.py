"""JSON reports and CSV sweep tables."""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from .evolution import Schedule
from .pauli import DegenerateSpectrumError, nu_h
from .phase import SIGMA_CONV, TWO_PI, PhaseReport, SumRule


def _fraction_str(value) -> str:
    return str(value)


def nu_h_per_segment(schedule: Schedule) -> list:
    out = []
    for seg in schedule.segments:
        try:
            out.append(_fraction_str(nu_h(seg.effective()).value))
        except DegenerateSpectrumError:
            out.append(None)
    return out


def phase_entry(label: str, rep: PhaseReport) -> dict:
    return {
        "state": label,
        "connection_integral": rep.connection_integral,
        "closing_arg": rep.closing_arg,
        "gauge_correction": rep.gauge_correction,
        "gamma": rep.gamma,
    }


def complex_list(v) -> list[list[float]]:
    return [[float(np.real(z)), float(np.imag(z))] for z in np.asarray(v).reshape(-1)]


def sum_rule_record(rule: SumRule, schedule: Schedule) -> dict:
    gammas = []
    for j, rep in enumerate(rule.gammas):
        entry = phase_entry(f"w{j}", rep)
        entry["eigenphase"] = float(rule.winding.eigenphases[j])
        entry["amplitudes"] = complex_list(rule.states[:, j])
        gammas.append(entry)
    return {
        "nu_u": rule.nu_u,
        "nu_h_per_segment": nu_h_per_segment(schedule),
        "gamma_sum_over_2pi": rule.gamma_sum_over_2pi,
        "consistent": rule.consistent,
        "gammas": gammas,
        "conventions": {
            "global_phase_included": not rule.bare,
            "cycles": str(rule.cycles),
            "branch": rule.winding.branch,
            "sigma_conv": SIGMA_CONV,
        },
        "residuals": {
            "winding": rule.winding.residual,
            "sum_rule": abs(rule.gamma_sum_over_2pi - rule.nu_u),
        },
        "nu_u_det": rule.winding.nu_u_det,
        "gauge": {
            "basis_correction": rule.basis_correction,
            "nu_u_corrected": rule.nu_u_corrected,
            "state_correction_sum_over_2pi": rule.state_correction_sum / TWO_PI,
            "literal_nu_u_shift": rule.literal_nu_u_shift,
        },
    }


def _clean(obj):
    """Replace non-finite floats with None so the output is strict JSON."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def emit_report(record: dict) -> str:
    return json.dumps(_clean(record), indent=2) + "\n"


def fmt12(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(x)
    return format(float(x), ".12g")


def emit_sweep(rows, columns) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt12(row[c]) for c in columns])
    return buf.getvalue()
