"""Reading and writing hysteresis traces as delimited text.

Format: optional ``# key=value`` metadata lines, then a header row
``strain,force_N,voltage_V,branch`` and one sample per row.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .errors import InvariantViolation, ParseError
from .types import BRANCHES, HysteresisTrace

TRACE_COLUMNS = ("strain", "force_N", "voltage_V", "branch")


def format_number(value: float) -> str:
    return f"{value:.9g}"


def dumps_trace(trace: HysteresisTrace, include_metadata: bool = False) -> str:
    buf = io.StringIO()
    if include_metadata:
        for key in sorted(trace.metadata):
            buf.write(f"# {key}={trace.metadata[key]}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for eps, f, v, b in zip(trace.strain, trace.force, trace.voltage, trace.branch):
        writer.writerow([format_number(eps), format_number(f), format_number(v), b])
    return buf.getvalue()


def write_trace(trace: HysteresisTrace, path, include_metadata: bool = False) -> Path:
    path = Path(path)
    path.write_text(dumps_trace(trace, include_metadata))
    return path


def parse_trace(text: str, source: str | None = None) -> HysteresisTrace:
    metadata = {}
    rows = []
    header = None
    header_line = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, value = body.split("=", 1)
                metadata[key.strip()] = value.strip()
            continue
        cells = [c.strip() for c in next(csv.reader([line]))]
        if header is None:
            header, header_line = cells, lineno
            missing = [c for c in TRACE_COLUMNS if c not in header]
            if missing:
                raise ParseError(f"header is missing column(s) {', '.join(missing)}",
                                 line=lineno, path=source)
            idx = [header.index(c) for c in TRACE_COLUMNS]
            continue
        if len(cells) != len(header):
            raise ParseError(f"expected {len(header)} fields, found {len(cells)}",
                             line=lineno, path=source)
        try:
            eps, f, v = (float(cells[i]) for i in idx[:3])
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno, path=source) from None
        branch = cells[idx[3]].lower()
        if branch not in BRANCHES:
            raise ParseError(f"branch must be one of {BRANCHES}, got '{cells[idx[3]]}'",
                             line=lineno, path=source)
        rows.append((eps, f, v, branch))
    if header is None:
        raise ParseError("no header row", line=1, path=source)
    if not rows:
        raise ParseError("trace has no samples", line=header_line, path=source)
    strain, force, voltage, branch = zip(*rows)
    if "n_layers" in metadata:
        try:
            metadata["n_layers"] = int(metadata["n_layers"])
        except ValueError:
            raise ParseError("metadata n_layers must be an integer", path=source) from None
    trace = HysteresisTrace(np.array(strain), np.array(force), np.array(voltage),
                            np.array(branch, dtype=object), metadata)
    try:
        return trace.validate()
    except InvariantViolation as exc:
        where = f"{source}: " if source else ""
        raise InvariantViolation(f"{where}{exc}") from None


def load_trace(path) -> HysteresisTrace:
    path = Path(path)
    return parse_trace(path.read_text(), source=str(path))
