"""JSON forms of states, operators, frames and bounds reports.

Complex numbers are ``[re, im]`` pairs; matrices are row-major lists of rows.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .lhv import LhvBounds
from .quantum import MeasurementFrame, StateVector


def complex_to_pairs(values) -> list:
    arr = np.asarray(values, dtype=complex)
    if arr.ndim == 1:
        return [[float(z.real), float(z.imag)] for z in arr]
    return [complex_to_pairs(row) for row in arr]


def pairs_to_complex(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.shape[-1] != 2:
        raise ValidationError("expected [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def state_to_json(state: StateVector) -> dict:
    return {"n": state.n, "amplitudes": complex_to_pairs(state.amplitudes)}


def state_from_json(data) -> StateVector:
    amps = data["amplitudes"] if isinstance(data, dict) else data
    return StateVector(pairs_to_complex(amps))


def operator_to_json(op) -> dict:
    a = np.asarray(op, dtype=complex)
    return {"dim": a.shape[0], "entries": complex_to_pairs(a)}


def operator_from_json(data) -> np.ndarray:
    entries = data["entries"] if isinstance(data, dict) else data
    a = pairs_to_complex(entries)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError("operator entries must form a square matrix")
    return a


def frame_to_json(frame: MeasurementFrame) -> dict:
    return {"unprimed": frame.unprimed.tolist(), "primed": frame.primed.tolist()}


def frame_from_json(data) -> MeasurementFrame:
    return MeasurementFrame(data["unprimed"], data["primed"])


def bounds_record(member_label: str, bounds: LhvBounds) -> dict:
    return {
        "member": member_label,
        "min": bounds.min,
        "max": bounds.max,
        "min_witness": bounds.min_witness.to_bitstring(),
        "max_witness": bounds.max_witness.to_bitstring(),
    }


def sig9(value):
    """Round floats (recursively) to 9 significant digits for report output."""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        if not math.isfinite(value) or value == 0.0:
            return value
        return float(f"{value:.9g}")
    if isinstance(value, (np.floating,)):
        return sig9(float(value))
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, dict):
        return {k: sig9(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [sig9(v) for v in value]
    return value


def dumps(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def load_json(path) -> dict:
    return json.loads(Path(path).read_text())


def save_json(path, data):
    Path(path).write_text(dumps(data))
