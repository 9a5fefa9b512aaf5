"""CSV and JSON output for coupling fields and link sweeps.

A CSV file is a ``#`` metadata preamble (``# key: value`` lines), one header
row and one row per grid point in traversal order. Floats are written in
shortest round-trip form; absent points are ``nan`` in CSV and ``null`` in
JSON. Grid coordinates are rounded to 12 significant digits in mm.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import ConfigError
from .sweep import CouplingField

SCHEMA_VERSION = 1

# keys the field carries as attributes, not as provenance
_STRUCTURAL = ("kind", "schema", "solver_version", "labels", "moving_coil", "shape")


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[list[float]]
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError("every row must match the header length")

    def to_csv(self) -> str:
        lines = [f"# {k}: {v}" for k, v in self.metadata.items()]
        lines.append(",".join(self.columns))
        lines.extend(",".join(_num(v) for v in row) for row in self.rows)
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = {
            "schema": SCHEMA_VERSION,
            "metadata": self.metadata,
            "columns": self.columns,
            "rows": [[None if _isnan(v) else v for v in row] for row in self.rows],
        }
        return json.dumps(doc, indent=1, allow_nan=False) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "ResultTable":
        metadata: dict[str, str] = {}
        columns = None
        rows = []
        for no, line in enumerate(text.splitlines(), start=1):
            if not line:
                continue
            if line.startswith("#"):
                key, sep, value = line[1:].strip().partition(":")
                if not sep:
                    raise ConfigError("malformed metadata line", no)
                metadata[key.strip()] = value.strip()
            elif columns is None:
                columns = line.split(",")
            else:
                try:
                    rows.append([float(v) for v in line.split(",")])
                except ValueError:
                    raise ConfigError("non-numeric value in data row", no) from None
        if columns is None:
            raise ConfigError("CSV has no header row")
        return cls(columns, rows, metadata)


def _isnan(v) -> bool:
    return isinstance(v, float) and math.isnan(v)


def _num(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    return "nan" if math.isnan(v) else repr(v)


def _coord_mm(x_m: float) -> float:
    return float(f"{x_m * 1000.0:.12g}")


def _base_metadata(kind: str, timestamp: str | None = None) -> dict[str, str]:
    # no wall-clock stamp by default: outputs must be byte-reproducible
    meta = {"kind": kind, "schema": str(SCHEMA_VERSION), "solver_version": __version__}
    timestamp = timestamp or os.environ.get("SOURCE_DATE_EPOCH")
    if timestamp:
        meta["timestamp"] = str(timestamp)
    return meta


def field_table(f: CouplingField) -> ResultTable:
    pairs = f.pairs()
    columns = ["x_mm", "y_mm", "z_mm"]
    for i, j in pairs:
        columns += [f"k_{i + 1}_{j + 1}", f"absk_{i + 1}_{j + 1}"]
    rows = []
    for idx in range(f.n_points):
        row = [_coord_mm(c) for c in f.points[idx]]
        for i, j in pairs:
            k = float(f.coupling[idx, i, j])
            row += [k, abs(k)]
        rows.append(row)
    meta = _base_metadata("coupling_field", f.provenance.get("timestamp"))
    meta["labels"] = ",".join(f.labels)
    meta["moving_coil"] = f.moving_coil
    meta["shape"] = "x".join(str(s) for s in f.shape)
    for key in sorted(f.provenance):
        if key not in meta:
            meta[key] = str(f.provenance[key])
    return ResultTable(columns, rows, meta)


def write_field_csv(f: CouplingField) -> str:
    return field_table(f).to_csv()


def write_field_json(f: CouplingField) -> str:
    return field_table(f).to_json()


def read_field_csv(text: str) -> CouplingField:
    """Inverse of write_field_csv (inductance values are not stored in CSV)."""
    table = ResultTable.from_csv(text)
    meta = table.metadata
    try:
        labels = tuple(meta["labels"].split(","))
        moving = meta["moving_coil"]
        shape = tuple(int(s) for s in meta["shape"].split("x"))
    except KeyError as exc:
        raise ConfigError(f"CSV metadata lacks {exc.args[0]!r}") from None
    n = len(labels)
    data = np.asarray(table.rows, dtype=float).reshape(len(table.rows), len(table.columns))
    points = data[:, :3] / 1000.0
    K = np.full((len(data), n, n), np.nan)
    col = 3
    for i in range(n):
        for j in range(i + 1, n):
            K[:, i, j] = K[:, j, i] = data[:, col]
            col += 2
    present = ~np.any(np.isnan(data[:, 3:]), axis=1)
    for i in range(n):
        K[present, i, i] = 1.0
    provenance = {k: v for k, v in meta.items() if k not in _STRUCTURAL}
    return CouplingField(labels, moving, shape, points, K, None, provenance)


def link_table(f: CouplingField, reports, metadata: dict | None = None) -> ResultTable:
    columns = ["x_mm", "y_mm", "z_mm"]
    for lbl in f.labels:
        columns += [f"I_{lbl}_A", f"I_{lbl}_deg", f"P_{lbl}_W"]
    columns += ["emf_V", "emf_deg", "pin_W", "pdl_W", "pte"]
    rows = []
    width = len(columns) - 3
    for idx, rep in enumerate(reports):
        row = [_coord_mm(c) for c in f.points[idx]]
        if rep is None:
            row += [math.nan] * width
        else:
            for i in range(len(f.labels)):
                row += [float(abs(rep.currents[i])), float(np.degrees(np.angle(rep.currents[i]))), float(rep.dissipated[i])]
            row += [abs(rep.emf), math.degrees(math.atan2(rep.emf.imag, rep.emf.real)), rep.input_power, rep.pdl, rep.pte]
        rows.append(row)
    meta = _base_metadata("link_sweep")
    meta["labels"] = ",".join(f.labels)
    for key in sorted(metadata or {}):
        meta.setdefault(key, str(metadata[key]))
    return ResultTable(columns, rows, meta)
