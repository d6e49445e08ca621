"""File formats and the JSON result envelope.

CSV schemas (headers are exact, required, and lowercase):

    two-tone trace : pump_freq_hz,response,unit     unit: linear|db
    complex trace  : freq_hz,s11_re,s11_im
    dc resistances : stack_count,resistance_ohm
    peak list      : peak_freq_hz,prominence        prominence optional

Floats are written with 17 significant digits so a write/read round trip
is exact in double precision.

Every CLI run emits one envelope:

    {"schema_version": "1",
     "inputs_digest": "<sha256 hex of the input file bytes, or of the
                        canonical parameter JSON for file-less runs>",
     "parameters": {...},    # every effective setting, defaults included
     "payload": {...}}

Envelopes are serialized with sorted keys and fixed separators and carry
no timestamps or hostnames, so identical inputs give byte-identical
output. Non-finite numbers (e.g. an infinite Q for a lossless fit) become
JSON null.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math

import numpy as np

from .errors import FileFormatError
from .peaks import PeakList, TwoToneTrace

SCHEMA_VERSION = "1"


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def _read_rows(path, expected_header):
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise FileFormatError(f"{path}: empty file") from None
            rows = [row for row in reader if row]
    except OSError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc
    header = [h.strip().lower() for h in header]
    required = list(expected_header)
    if header != required and header != required[:len(header)]:
        raise FileFormatError(
            f"{path}: expected header {','.join(required)!r}, got {','.join(header)!r}"
        )
    if not rows:
        raise FileFormatError(f"{path}: no data rows")
    return header, rows


def _parse_float(path, row_no, name, text):
    try:
        return float(text)
    except ValueError:
        raise FileFormatError(
            f"{path}: row {row_no}: {name} is not a number: {text!r}"
        ) from None


def read_two_tone(path) -> TwoToneTrace:
    _, rows = _read_rows(path, ["pump_freq_hz", "response", "unit"])
    freqs, resp, units = [], [], set()
    for i, row in enumerate(rows, start=2):
        if len(row) != 3:
            raise FileFormatError(f"{path}: row {i}: expected 3 columns, got {len(row)}")
        freqs.append(_parse_float(path, i, "pump_freq_hz", row[0]))
        resp.append(_parse_float(path, i, "response", row[1]))
        units.add(row[2].strip().lower())
    if len(units) != 1:
        raise FileFormatError(f"{path}: unit column must be constant, saw {sorted(units)}")
    unit = units.pop()
    try:
        return TwoToneTrace(np.array(freqs), np.array(resp), unit)
    except ValueError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc


def write_two_tone(path, trace: TwoToneTrace) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pump_freq_hz", "response", "unit"])
        for f, y in zip(trace.pump_freq_hz, trace.response):
            writer.writerow([format_float(f), format_float(y), trace.unit])


def read_complex_trace(path):
    """-> (freq_hz ndarray, s11 complex ndarray)"""
    _, rows = _read_rows(path, ["freq_hz", "s11_re", "s11_im"])
    f, re, im = [], [], []
    for i, row in enumerate(rows, start=2):
        if len(row) != 3:
            raise FileFormatError(f"{path}: row {i}: expected 3 columns, got {len(row)}")
        f.append(_parse_float(path, i, "freq_hz", row[0]))
        re.append(_parse_float(path, i, "s11_re", row[1]))
        im.append(_parse_float(path, i, "s11_im", row[2]))
    return np.array(f), np.array(re) + 1j * np.array(im)


def write_complex_trace(path, freq_hz, s11) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["freq_hz", "s11_re", "s11_im"])
        for f, s in zip(freq_hz, s11):
            writer.writerow([format_float(f), format_float(s.real), format_float(s.imag)])


def read_resistances(path):
    """-> list of (stack_count int, resistance_ohm float)"""
    _, rows = _read_rows(path, ["stack_count", "resistance_ohm"])
    points = []
    for i, row in enumerate(rows, start=2):
        if len(row) != 2:
            raise FileFormatError(f"{path}: row {i}: expected 2 columns, got {len(row)}")
        count = _parse_float(path, i, "stack_count", row[0])
        if count != int(count):
            raise FileFormatError(f"{path}: row {i}: stack_count must be an integer")
        points.append((int(count), _parse_float(path, i, "resistance_ohm", row[1])))
    return points


def write_resistances(path, points) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["stack_count", "resistance_ohm"])
        for k, r in points:
            writer.writerow([str(int(k)), format_float(r)])


def read_peaks(path) -> PeakList:
    header, rows = _read_rows(path, ["peak_freq_hz", "prominence"])
    freqs, proms = [], []
    for i, row in enumerate(rows, start=2):
        freqs.append(_parse_float(path, i, "peak_freq_hz", row[0]))
        if len(row) > 1 and row[1].strip():
            proms.append(_parse_float(path, i, "prominence", row[1]))
        else:
            proms.append(math.nan)
    order = np.argsort(freqs)
    f = np.asarray(freqs)[order]
    try:
        return PeakList(f, np.asarray(proms)[order], (f[0], f[-1]))
    except ValueError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc


def write_peaks(path, peaks: PeakList) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["peak_freq_hz", "prominence"])
        for f, p in zip(peaks.freq_hz, peaks.prominences):
            writer.writerow([format_float(f), format_float(p)])


# ----------------------------- envelope -----------------------------


def sanitize(obj):
    """Make a payload JSON-ready: arrays to lists, numpy scalars to
    Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [sanitize(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def digest_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def digest_file(path) -> str:
    with open(path, "rb") as fh:
        return digest_bytes(fh.read())


def digest_parameters(parameters: dict) -> str:
    canonical = json.dumps(sanitize(parameters), sort_keys=True, separators=(",", ":"))
    return digest_bytes(canonical.encode())


def make_envelope(parameters: dict, payload: dict, inputs_digest: str) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "inputs_digest": inputs_digest,
        "parameters": sanitize(parameters),
        "payload": sanitize(payload),
    }


def envelope_json(envelope: dict) -> str:
    return json.dumps(envelope, sort_keys=True, separators=(",", ":"), allow_nan=False)
