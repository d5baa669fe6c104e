"""
CSV ingestion of externally estimated CATEs, curve emission and config loading.
"""
from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import BadConfig, BadHeader, DuplicateGroupId, MissingFile, NonFiniteValue, NonPositiveWeight

CATE_HEADER = ("group_id", "tau_hat")
DRAWS_HEADER = ("group_id", "tau")


@dataclass(frozen=True)
class CateTable:
    """Group-level estimates; ``weights`` sum to one."""

    group_ids: tuple
    tau_hat: np.ndarray
    weights: np.ndarray

    @property
    def K(self) -> int:
        return len(self.group_ids)


def _read_rows(path, base_header):
    if not os.path.isfile(path):
        raise MissingFile(f"no such file: {path}")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise BadHeader(f"{path}: empty file, expected header {','.join(base_header)}[,weight]")
    header = tuple(h.strip() for h in rows[0])
    if header not in (base_header, base_header + ("weight",)):
        raise BadHeader(f"{path}: header {','.join(header)!r}, expected {','.join(base_header)}[,weight]")
    body = [(i + 2, r) for i, r in enumerate(rows[1:]) if any(c.strip() for c in r)]
    if not body:
        raise BadHeader(f"{path}: no data rows")
    return len(header) == 3, body


def _parse_float(text, path, line, name):
    try:
        v = float(text)
    except ValueError:
        raise NonFiniteValue(f"{path}, line {line}: {name}={text!r} is not a number") from None
    if not math.isfinite(v):
        raise NonFiniteValue(f"{path}, line {line}: {name}={text!r} is not finite")
    return v


def _parse_body(path, body, has_weight, value_name):
    gids, vals, ws = [], [], []
    width = 3 if has_weight else 2
    for line, r in body:
        if len(r) != width:
            raise BadHeader(f"{path}, line {line}: expected {width} fields, found {len(r)}")
        gids.append(r[0].strip())
        vals.append(_parse_float(r[1].strip(), path, line, value_name))
        if has_weight:
            w = _parse_float(r[2].strip(), path, line, "weight")
            if w <= 0:
                raise NonPositiveWeight(f"{path}, line {line}: weight={w!r} must be positive")
            ws.append(w)
    w = np.array(ws) if has_weight else np.ones(len(vals))
    return gids, np.array(vals), w / w.sum()


def ingest_cate_csv(path) -> CateTable:
    """Read ``group_id,tau_hat[,weight]``; weights default to uniform and are
    normalized to sum to one.

    Raises
    ------
    MissingFile, BadHeader, NonFiniteValue, NonPositiveWeight, DuplicateGroupId
    """
    path = os.fspath(path)
    has_w, body = _read_rows(path, CATE_HEADER)
    gids, tau, w = _parse_body(path, body, has_w, "tau_hat")
    seen = {}
    for (line, _), g in zip(body, gids):
        if g in seen:
            raise DuplicateGroupId(f"{path}, line {line}: group_id {g!r} already given on line {seen[g]}")
        seen[g] = line
    return CateTable(tuple(gids), tau, w)


def ingest_draws_csv(path):
    """Read individual-level draws ``group_id,tau[,weight]`` (group ids repeat).

    Returns integer group codes (in order of first appearance), the group
    labels, values and normalized weights.
    """
    path = os.fspath(path)
    has_w, body = _read_rows(path, DRAWS_HEADER)
    gids, tau, w = _parse_body(path, body, has_w, "tau")
    labels, codes = [], {}
    for g in gids:
        codes.setdefault(g, len(codes))
    labels = list(codes)
    return np.array([codes[g] for g in gids]), labels, tau, w


def write_cate_csv(path, group_ids, tau_hat, weights=None):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CATE_HEADER + (("weight",) if weights is not None else ()))
        for i, (g, t) in enumerate(zip(group_ids, tau_hat)):
            row = [g, format(float(t), ".17g")]
            if weights is not None:
                row.append(format(float(weights[i]), ".17g"))
            w.writerow(row)


def curve_text(levels, values, fmt: str = "csv") -> str:
    levels = np.asarray(levels, dtype=float).ravel()
    values = np.asarray(values, dtype=float).ravel()
    if levels.size == 0:
        raise BadConfig("empty level grid")
    if levels.size != values.size:
        raise BadConfig("levels and values differ in length")
    if fmt == "csv":
        lines = ["level,value"] + [f"{a:.17g},{b:.17g}" for a, b in zip(levels, values)]
        return "\n".join(lines) + "\n"
    if fmt == "json":
        return json.dumps([{"level": float(a), "value": float(b)} for a, b in zip(levels, values)], indent=2) + "\n"
    raise BadConfig(f"unknown format {fmt!r}")


def emit_curve(levels, values, path, fmt: str = "csv") -> None:
    """Write a superquantile curve as CSV ``level,value`` or a JSON array of
    ``{level, value}`` objects. Validation happens before the file is opened."""
    text = curve_text(levels, values, fmt)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def read_curve_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if tuple(rows[0]) != ("level", "value"):
        raise BadHeader(f"{path}: expected header level,value")
    a = np.array([[float(x) for x in r] for r in rows[1:]])
    return a[:, 0], a[:, 1]


def load_config(path) -> dict:
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise MissingFile(f"no such file: {path}")
    with open(path) as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as e:
            raise BadConfig(f"{path}: invalid JSON ({e})") from None
    if not isinstance(cfg, dict):
        raise BadConfig(f"{path}: top level must be an object")
    return cfg
