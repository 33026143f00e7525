"""CSV ingestion and report writing."""

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .errors import ParseError

SCHEMA_VERSION = "1.0"


def _is_number(cell):
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _resolve(spec, header):
    if isinstance(spec, int) or (isinstance(spec, str) and spec.strip().lstrip("-").isdigit()):
        return int(spec)
    if header is None:
        raise ParseError(f"column {spec!r} selected by name but the file has no header")
    try:
        return header.index(spec)
    except ValueError:
        raise ParseError(f"no column named {spec!r}; available: {', '.join(header)}") from None


def read_columns(path, cols=(0, 1), extra=()):
    """Read numeric columns from a CSV file.

    Parameters
    ----------
    path : str or Path
    cols : pair of (str or int)
        Column names, or 0-based indices, of the two variables.
    extra : sequence of (str or int)
        Additional columns returned as strings (e.g. a grouping label).

    Returns
    -------
    data : ndarray, shape (n, 2)
    extras : dict
        Maps each requested extra column to a list of strings.
    header : list of str or None

    Raises
    ------
    ParseError
        With the line number of the first non-numeric or short record.
    """
    text = Path(path).read_text(encoding="utf-8-sig")
    reader = csv.reader(io.StringIO(text))
    rows = []
    for record in reader:
        if record and any(cell.strip() for cell in record):
            rows.append((reader.line_num, [cell.strip() for cell in record]))
    if not rows:
        raise ParseError(f"{path}: no data rows")
    first = rows[0][1]
    named = any(not (isinstance(c, int) or str(c).strip().lstrip("-").isdigit())
                for c in (*cols, *extra))
    header = None
    if named or not all(_is_number(cell) for cell in first if cell):
        header = first
        rows = rows[1:]
    idx = [_resolve(c, header) for c in cols]
    extra_idx = [_resolve(c, header) for c in extra]
    label = (lambda i: header[i] if header and i < len(header) else str(i))
    values = np.empty((len(rows), len(idx)))
    extras = {c: [] for c in extra}
    for r, (line, record) in enumerate(rows):
        for k, i in enumerate(idx):
            if i >= len(record) or i < -len(record):
                raise ParseError("record is too short", line=line, column=label(i))
            try:
                value = float(record[i])
            except ValueError:
                raise ParseError(f"non-numeric value {record[i]!r}", line=line,
                                 column=label(i)) from None
            if not math.isfinite(value):
                raise ParseError(f"non-finite value {record[i]!r}", line=line, column=label(i))
            values[r, k] = value
        for c, i in zip(extra, extra_idx):
            if i >= len(record):
                raise ParseError("record is too short", line=line, column=label(i))
            extras[c].append(record[i])
    return values, extras, header


def write_columns(path, data, names=("x", "y")):
    """Write an ``(n, 2)`` array as CSV with a header, round-trip exact."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for row in np.asarray(data):
            writer.writerow([repr(float(v)) for v in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps_json(payload):
    payload = {"schema_version": SCHEMA_VERSION, **_jsonable(payload)}
    return json.dumps(payload, indent=2, sort_keys=False) + "\n"


def dumps_csv(rows, fields=None):
    """Render a list of flat dicts as CSV text."""
    if not rows:
        return ""
    fields = fields or list(rows[0])
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _format_cell(row.get(k)) for k in fields})
    return buf.getvalue()


def _format_cell(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    return value
