"""Deterministic CSV/JSON emission and the matching readers.

CSV layout::

    # metadata: {"config": ..., "seed": 0, "version": "0.1.0", ...}
    col_a,col_b
    1.0000000000000000e+00,true

Floats are written with 17 significant digits so that reading them back
recovers the exact binary value. Booleans are ``true``/``false``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any

from .bus_protocol import ProtocolTrace

_META_PREFIX = "# metadata: "


@dataclass
class Table:
    columns: list[str]
    rows: list[list[Any]]
    metadata: dict[str, Any] = field(default_factory=dict)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.16e}"
    return str(v)


def _parse(cell: str):
    if cell == "true":
        return True
    if cell == "false":
        return False
    try:
        return int(cell)
    except ValueError:
        pass
    try:
        return float(cell)
    except ValueError:
        return cell


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def table_to_csv(t: Table) -> str:
    buf = io.StringIO()
    buf.write(_META_PREFIX + json.dumps(t.metadata, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(t.columns)
    for row in t.rows:
        if len(row) != len(t.columns):
            raise ValueError(f"row has {len(row)} cells, expected {len(t.columns)}")
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def table_to_json(t: Table) -> str:
    rows = [[float(v) if isinstance(v, float) else v for v in r] for r in t.rows]
    return _dumps({"metadata": t.metadata, "columns": list(t.columns), "rows": rows})


def read_csv_table(text: str) -> Table:
    meta: dict[str, Any] = {}
    body = []
    for line in text.splitlines():
        if line.startswith(_META_PREFIX):
            meta = json.loads(line[len(_META_PREFIX):])
        elif not line.startswith("#"):
            body.append(line)
    reader = csv.reader(body)
    try:
        columns = next(reader)
    except StopIteration:
        raise ValueError("CSV has no header row") from None
    return Table(columns, [[_parse(c) for c in r] for r in reader], meta)


def read_json_table(text: str) -> Table:
    d = json.loads(text)
    return Table(list(d["columns"]), [list(r) for r in d["rows"]], d.get("metadata", {}))


def read_table(text: str) -> Table:
    return read_json_table(text) if text.lstrip().startswith("{") else read_csv_table(text)


def trace_to_json(trace: ProtocolTrace, metadata: dict[str, Any]) -> str:
    d = trace.to_dict()
    d["metadata"] = metadata
    return _dumps(d)


def read_trace_json(text: str) -> tuple[ProtocolTrace, dict[str, Any]]:
    d = json.loads(text)
    meta = d.pop("metadata", {})
    return ProtocolTrace.from_dict(d), meta


def trace_to_csv(trace: ProtocolTrace, metadata: dict[str, Any]) -> str:
    """Flat step listing for protocol runs; the JSON form is the lossless one."""
    cols = ["step", "op", "flux_id", "pair", "outcome", "probability", "splitting", "correction", "flags"]
    rows = []
    for k, s in enumerate(trace.steps):
        rows.append([
            k,
            s.op,
            "" if s.flux_id is None else s.flux_id,
            "" if s.pair is None else " ".join(map(str, s.pair)),
            "" if s.outcome is None else s.outcome,
            "" if s.probability is None else float(s.probability),
            "" if s.splitting is None else float(s.splitting),
            s.correction or "",
            ";".join(s.flags),
        ])
    meta = dict(metadata)
    meta["fidelity"] = trace.fidelity
    meta["final_state"] = trace.to_dict()["final_state"]
    return table_to_csv(Table(cols, rows, meta))
