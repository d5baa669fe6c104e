"""
Bound reports: one record per (bound, level) with a Monte Carlo error flag.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np

SCHEMA_VERSION = 1
MC_SE_MULTIPLIER = 3.0
# absolute floor on the violation threshold so exact ties do not flag on rounding
ROUNDING_FLOOR = 1e-10


def _clean(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return [_clean(v) for v in x.tolist()]
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


@dataclass(frozen=True)
class BoundRecord:
    """``slack`` is oriented so that the proven inequality means ``slack >= 0``."""

    bound: str
    level: float
    lhs: float
    rhs: float
    slack: float
    mc_standard_error: float

    @property
    def threshold(self) -> float:
        scale = 1.0 + max(abs(self.lhs), abs(self.rhs))
        return MC_SE_MULTIPLIER * self.mc_standard_error + ROUNDING_FLOOR * scale

    @property
    def violated(self) -> bool:
        return bool(self.slack < -self.threshold)

    def to_dict(self) -> dict:
        d = _clean(asdict(self))
        d["violated"] = self.violated
        return d


def upper_bound_record(bound, level, lhs, rhs, se) -> BoundRecord:
    """Record for a claim ``lhs <= rhs``."""
    return BoundRecord(bound, float(level), float(lhs), float(rhs), float(rhs - lhs), float(se))


def lower_bound_record(bound, level, lhs, rhs, se) -> BoundRecord:
    """Record for a claim ``lhs >= rhs``."""
    return BoundRecord(bound, float(level), float(lhs), float(rhs), float(lhs - rhs), float(se))


@dataclass
class BoundReport:
    command: str
    records: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def any_violated(self) -> bool:
        return any(r.violated for r in self.records)

    def by_bound(self, name: str) -> list:
        return [r for r in self.records if r.bound == name]

    def get(self, name: str, level: float) -> BoundRecord:
        for r in self.records:
            if r.bound == name and abs(r.level - level) < 1e-12:
                return r
        raise KeyError((name, level))

    def extend(self, other: "BoundReport") -> "BoundReport":
        self.records.extend(other.records)
        for k, v in other.metadata.items():
            self.metadata.setdefault(k, v)
        return self

    def to_dict(self) -> dict:
        meta = {"command": self.command, "schema_version": SCHEMA_VERSION}
        meta.update(_clean(self.metadata))
        return {"metadata": meta, "results": [r.to_dict() for r in self.records]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = ["bound", "level", "lhs", "rhs", "slack", "mc_standard_error", "violated"]
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in self.records:
            d = r.to_dict()
            w.writerow([d["bound"]] + [_fmt(d[c]) for c in cols[1:-1]] + [str(d["violated"]).lower()])
        return buf.getvalue()


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def digest(obj) -> str:
    """Stable SHA-256 of a JSON-serializable object."""
    blob = json.dumps(_clean(obj), sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


@dataclass
class TableReport:
    """Per-level rows that are estimates rather than bound checks."""

    command: str
    columns: tuple
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    any_violated = False

    def to_dict(self) -> dict:
        meta = {"command": self.command, "schema_version": SCHEMA_VERSION}
        meta.update(_clean(self.metadata))
        return {"metadata": meta, "results": [_clean(r) for r in self.rows]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_fmt(r[c]) if isinstance(r[c], (float, np.floating)) else r[c] for c in self.columns])
        return buf.getvalue()
