"""Trace files and report CSVs.

Trace format, version 1. A header of '# key=value' lines carries the
constellation (points, labels, probs), the sample count, and free-form
'meta.*' provenance strings. The body is one sample per row, index
first: 'i,y_1,...,y_D'. Floats are written with 17 significant digits,
so a write/read round trip is bit-exact. A '.bin' extension selects the
binary sibling: identical header, then N * (1 + D) little-endian float64
values in row order (indices stored as exact floats).
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Sequence

import numpy as np

from .channels import Trace
from .constellation import Constellation
from .errors import PrefecError, TraceFormatError
from .recipes import MetricReport

__all__ = ["FORMAT_VERSION", "write_trace", "read_trace", "write_report"]

FORMAT_VERSION = 1


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _is_binary_path(path) -> bool:
    return Path(path).suffix == ".bin"


def _header_lines(trace: Trace, body: str) -> list[str]:
    c = trace.constellation
    lines = [
        f"# format_version={FORMAT_VERSION}",
        f"# body={body}",
        f"# M={c.M}",
        f"# D={c.D}",
        f"# N={trace.N}",
        "# points=" + ",".join(_fmt(v) for v in c.points.ravel()),
        "# labels=" + ",".join(c.label_strings()),
        "# probs=" + ",".join(_fmt(v) for v in c.probs),
    ]
    for key in sorted(trace.meta):
        lines.append(f"# meta.{key}={trace.meta[key]}")
    lines.append("# end_header")
    return lines


def write_trace(trace: Trace, path) -> None:
    """Write a trace; '.bin' extension selects the binary body."""
    path = Path(path)
    binary = _is_binary_path(path)
    header = "\n".join(_header_lines(trace, "binary" if binary else "text")) + "\n"
    if binary:
        block = np.empty((trace.N, 1 + trace.constellation.D), dtype="<f8")
        block[:, 0] = trace.tx_indices
        block[:, 1:] = trace.rx
        with open(path, "wb") as f:
            f.write(header.encode("ascii"))
            f.write(block.tobytes())
        return
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write(header)
        for i in range(trace.N):
            row = trace.rx[i]
            f.write(f"{trace.tx_indices[i]}," + ",".join(_fmt(v) for v in row) + "\n")


def _parse_header(raw: bytes, path) -> tuple[dict, dict, int, int]:
    """Returns (fields, meta, header_line_count, body_offset_bytes)."""
    fields: dict[str, tuple[str, int]] = {}
    meta: dict[str, str] = {}
    offset = 0
    lineno = 0
    while True:
        nl = raw.find(b"\n", offset)
        if nl < 0:
            raise TraceFormatError("unterminated header", line=lineno + 1, path=path)
        line_bytes = raw[offset:nl]
        lineno += 1
        try:
            line = line_bytes.decode("ascii")
        except UnicodeDecodeError:
            raise TraceFormatError("non-ascii header line", line=lineno, path=path)
        offset = nl + 1
        if not line.startswith("# "):
            raise TraceFormatError(
                f"expected '# key=value' header line, got {line!r}", line=lineno, path=path
            )
        body = line[2:]
        if body == "end_header":
            return fields, meta, lineno, offset
        if "=" not in body:
            raise TraceFormatError(f"malformed header line {line!r}", line=lineno, path=path)
        key, _, value = body.partition("=")
        if key.startswith("meta."):
            meta[key[5:]] = value
        else:
            fields[key] = (value, lineno)


def _field(fields: dict, key: str, path) -> tuple[str, int]:
    if key not in fields:
        raise TraceFormatError(f"missing header field {key!r}", path=path)
    return fields[key]


def _int_field(fields: dict, key: str, path) -> tuple[int, int]:
    value, lineno = _field(fields, key, path)
    try:
        return int(value), lineno
    except ValueError:
        raise TraceFormatError(f"field {key} must be an integer, got {value!r}", line=lineno, path=path)


def _float_list(value: str, lineno: int, path, key: str) -> np.ndarray:
    try:
        arr = np.array([float(v) for v in value.split(",")], dtype=np.float64)
    except ValueError:
        raise TraceFormatError(f"field {key} contains a non-numeric entry", line=lineno, path=path)
    if not np.all(np.isfinite(arr)):
        raise TraceFormatError(f"field {key} contains a non-finite entry", line=lineno, path=path)
    return arr


def read_trace(path) -> Trace:
    """Read a trace written by write_trace. Raises TraceFormatError on damage."""
    path = Path(path)
    raw = path.read_bytes()
    fields, meta, header_lines, body_offset = _parse_header(raw, path)

    version, lineno = _int_field(fields, "format_version", path)
    if version != FORMAT_VERSION:
        raise TraceFormatError(f"unsupported format_version {version}", line=lineno, path=path)
    body_kind, body_line = _field(fields, "body", path)
    if body_kind not in ("text", "binary"):
        raise TraceFormatError(f"body must be text or binary, got {body_kind!r}", line=body_line, path=path)
    m_count, m_line = _int_field(fields, "M", path)
    d_count, _ = _int_field(fields, "D", path)
    n_count, n_line = _int_field(fields, "N", path)

    points_value, points_line = _field(fields, "points", path)
    points = _float_list(points_value, points_line, path, "points")
    if points.size != m_count * d_count:
        raise TraceFormatError(
            f"points holds {points.size} values, expected M*D = {m_count * d_count}",
            line=points_line,
            path=path,
        )
    points = points.reshape(m_count, d_count)

    labels_value, labels_line = _field(fields, "labels", path)
    label_strs = labels_value.split(",")
    m_bits = max(m_count.bit_length() - 1, 1)
    if len(label_strs) != m_count or any(
        len(s) != m_bits or set(s) - {"0", "1"} for s in label_strs
    ):
        raise TraceFormatError(
            f"labels must be {m_count} strings of {m_bits} bits", line=labels_line, path=path
        )
    labels = np.array([[int(ch) for ch in s] for s in label_strs], dtype=np.uint8)

    probs_value, probs_line = _field(fields, "probs", path)
    probs = _float_list(probs_value, probs_line, path, "probs")
    if probs.size != m_count:
        raise TraceFormatError(
            f"probs holds {probs.size} values, expected M = {m_count}", line=probs_line, path=path
        )

    try:
        constellation = Constellation(points, labels, probs)
    except PrefecError as exc:
        raise TraceFormatError(f"invalid constellation in header: {exc}", path=path)

    if body_kind == "binary":
        idx, rx = _read_binary_body(raw, body_offset, n_count, d_count, m_count, path)
    else:
        idx, rx = _read_text_body(raw, body_offset, header_lines, n_count, d_count, m_count, path)

    try:
        return Trace(constellation, idx, rx, meta)
    except PrefecError as exc:
        raise TraceFormatError(f"invalid trace body: {exc}", path=path)


def _read_binary_body(raw, offset, n, d, m_count, path):
    body = raw[offset:]
    expected = n * (1 + d) * 8
    if len(body) != expected:
        raise TraceFormatError(
            f"binary body holds {len(body)} bytes, expected {expected} for N={n}, D={d}",
            path=path,
        )
    block = np.frombuffer(body, dtype="<f8").reshape(n, 1 + d)
    idx_f = block[:, 0]
    if not np.all(np.isfinite(block)):
        raise TraceFormatError("binary body contains a non-finite value", path=path)
    if np.any(idx_f != np.floor(idx_f)):
        raise TraceFormatError("binary body contains a non-integer symbol index", path=path)
    idx = idx_f.astype(np.int64)
    if idx.size and (idx.min() < 1 or idx.max() > m_count):
        raise TraceFormatError(f"symbol index outside [1, {m_count}]", path=path)
    return idx, np.ascontiguousarray(block[:, 1:])


def _read_text_body(raw, offset, header_lines, n, d, m_count, path):
    try:
        text = raw[offset:].decode("ascii")
    except UnicodeDecodeError:
        raise TraceFormatError("non-ascii text body", path=path)
    idx = np.empty(n, dtype=np.int64)
    rx = np.empty((n, d), dtype=np.float64)
    row = 0
    lineno = header_lines
    for line in text.splitlines():
        lineno += 1
        if not line:
            continue
        if row >= n:
            raise TraceFormatError(f"more than the declared N={n} data rows", line=lineno, path=path)
        parts = line.split(",")
        if len(parts) != 1 + d:
            raise TraceFormatError(
                f"expected {1 + d} comma-separated fields, got {len(parts)}", line=lineno, path=path
            )
        try:
            i = int(parts[0])
        except ValueError:
            raise TraceFormatError(f"bad symbol index {parts[0]!r}", line=lineno, path=path)
        if not 1 <= i <= m_count:
            raise TraceFormatError(f"symbol index {i} outside [1, {m_count}]", line=lineno, path=path)
        try:
            vals = [float(v) for v in parts[1:]]
        except ValueError:
            raise TraceFormatError("bad received value", line=lineno, path=path)
        if not all(math.isfinite(v) for v in vals):
            raise TraceFormatError("non-finite received value", line=lineno, path=path)
        idx[row] = i
        rx[row] = vals
        row += 1
    if row != n:
        raise TraceFormatError(
            f"body holds {row} data rows, header declares N={n}", line=lineno, path=path
        )
    return idx, rx


def write_report(reports: Sequence[MetricReport], path) -> None:
    """Write metric reports as CSV: metric,value,units, then sorted provenance columns."""
    prov_keys: list[str] = sorted({k for r in reports for k in r.config})
    with open(path, "w", encoding="ascii", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["metric", "value", "units", *prov_keys])
        for r in reports:
            writer.writerow(
                [r.name, repr(r.value), r.units, *[r.config.get(k, "") for k in prov_keys]]
            )
