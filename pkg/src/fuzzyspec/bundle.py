"""Result bundles: one JSON document per run plus flat CSV tables."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1
TABLES = ("spectra", "hausdorff", "action", "calculus", "mk")


def to_builtin(obj):
    """Recursively turn numpy scalars/arrays and complex numbers into JSON-able values."""
    if isinstance(obj, dict):
        return {str(k): to_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_builtin(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return {"re": to_builtin(obj.real.tolist()), "im": to_builtin(obj.imag.tolist())}
        return to_builtin(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


@dataclass
class ResultBundle:
    schema_version: int = SCHEMA_VERSION
    metadata: dict = field(default_factory=dict)
    spectra: list = field(default_factory=list)
    tracking: dict = field(default_factory=dict)
    hausdorff: list = field(default_factory=list)
    action: list = field(default_factory=list)
    calculus: list = field(default_factory=list)
    mk: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(to_builtin(asdict(self)), sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "ResultBundle":
        doc = json.loads(text)
        version = doc.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {version!r}")
        names = {f.name for f in fields(cls)}
        unknown = set(doc) - names
        if unknown:
            raise ValueError(f"unknown bundle keys {sorted(unknown)}")
        return cls(**doc)

    def merge(self, other: "ResultBundle") -> "ResultBundle":
        out = ResultBundle(metadata={**self.metadata, **other.metadata})
        for name in TABLES:
            setattr(out, name, list(getattr(self, name)) + list(getattr(other, name)))
        out.tracking = {**self.tracking, **other.tracking}
        return out

    def write(self, directory: str | Path) -> list[Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        written = [directory / "bundle.json"]
        written[0].write_text(self.to_json() + "\n", encoding="utf-8")
        for name in TABLES:
            rows = getattr(self, name)
            if rows:
                path = directory / f"{name}.csv"
                write_csv(path, rows)
                written.append(path)
        return written


def _cell(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        if math.isinf(v) or math.isnan(v):
            return repr(v)
        return f"{v:.12g}"
    if isinstance(v, (list, dict)):
        return json.dumps(to_builtin(v), sort_keys=True)
    return "" if v is None else str(v)


def write_csv(path: Path, rows: list[dict]) -> None:
    rows = to_builtin(rows)
    header: list[str] = []
    for row in rows:
        for key in row:
            if key not in header:
                header.append(key)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(row.get(k)) for k in header])
