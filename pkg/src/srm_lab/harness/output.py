"""Experiment records and their CSV / JSON serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import astuple, dataclass, field, fields
from pathlib import Path
from typing import Literal


@dataclass(frozen=True)
class ConsistencyRow:
    n: int
    trial: int
    chosen_j: int
    empirical_risk: float
    true_risk: float
    excess_risk: float
    penalty_regime: str


@dataclass(frozen=True)
class CoverageRow:
    n: int
    eta: float
    trials: int
    violations: int
    violation_rate: float
    epsilon: float
    mean_sup_deviation: float


ROW_TYPES = {"consistency": ConsistencyRow, "coverage": CoverageRow}


@dataclass
class ExperimentResult:
    kind: Literal["consistency", "coverage"]
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def row_type(self):
        return ROW_TYPES[self.kind]

    @property
    def columns(self) -> list[str]:
        return [f.name for f in fields(self.row_type)]

    def records(self) -> list[dict]:
        return [dict(zip(self.columns, astuple(r))) for r in self.rows]


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(result.columns)
    for r in result.rows:
        w.writerow([_fmt(v) for v in astuple(r)])
    return buf.getvalue()


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def to_json(result: ExperimentResult) -> str:
    recs = [{k: _json_safe(v) for k, v in rec.items()} for rec in result.records()]
    return json.dumps(recs, indent=2) + "\n"


def emit(result: ExperimentResult, path: str | Path | None, format: str = "csv") -> str:
    """Serialize ``result``; writes to ``path`` unless it is ``None``. Returns the text."""
    if format == "csv":
        text = to_csv(result)
    elif format == "json":
        text = to_json(result)
    else:
        raise ValueError(f"unknown format {format!r}")
    if path is not None:
        Path(path).write_text(text)
    return text


def _convert(row_type, rec: dict):
    out = {}
    for f in fields(row_type):
        v = rec[f.name]
        if f.type in ("int", int):
            out[f.name] = int(v)
        elif f.type in ("float", float):
            out[f.name] = float(v)
        else:
            out[f.name] = str(v)
    return row_type(**out)


def load_result(path: str | Path, format: str = "csv", kind: str | None = None) -> ExperimentResult:
    text = Path(path).read_text()
    if format == "csv":
        reader = csv.DictReader(io.StringIO(text))
        header = reader.fieldnames or []
        recs = list(reader)
    elif format == "json":
        recs = json.loads(text)
        header = list(recs[0]) if recs else []
    else:
        raise ValueError(f"unknown format {format!r}")
    if kind is None:
        matches = [k for k, t in ROW_TYPES.items() if [f.name for f in fields(t)] == list(header)]
        if not matches:
            raise ValueError("cannot infer the result kind; pass kind=")
        kind = matches[0]
    row_type = ROW_TYPES[kind]
    return ExperimentResult(kind, [_convert(row_type, r) for r in recs])
