"""Run configuration: defaults, TOML config files and dotted command-line overrides."""
from __future__ import annotations

import dataclasses
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


@dataclass
class RunConfig:
    n_list: list[int] = field(default_factory=lambda: [4, 8, 16])
    window_radius: float = 3.0
    cluster_tol: float | None = None
    index_max: int | None = None
    track_indices: int = 4
    function_kind: str = "gaussian"
    function_width: float = 1.0
    scales: list[float] = field(default_factory=lambda: [1.0])
    calculus_eps: float = 1e-3
    mk_n_list: list[int] = field(default_factory=lambda: [2])
    mk_states: list[str] = field(default_factory=lambda: ["basis:0", "basis:1", "mixed"])
    mk_restarts: int = 8
    mk_max_iter: int = 1500
    mk_oracle_samples: int = 20000
    seed: int = 0
    out_dir: str = "results"
    cache: bool = True
    cache_dir: str | None = None
    record_timestamp: bool = False
    workers: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not self.n_list:
            raise ValueError("n_list must be nonempty")
        if any(int(n) != n or n < 1 for n in self.n_list):
            raise ValueError("n_list entries must be positive integers")
        if list(self.n_list) != sorted(set(self.n_list)):
            raise ValueError("n_list must be strictly ascending")
        for name in ("window_radius", "function_width", "calculus_eps"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.cluster_tol is not None and self.cluster_tol <= 0:
            raise ValueError("cluster_tol must be positive")
        if not self.scales or any(s <= 0 for s in self.scales):
            raise ValueError("scales must be positive")
        if any(n > 8 for n in self.mk_n_list):
            raise ValueError("MK distances are supported for n <= 8")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


# dotted name -> RunConfig attribute
DOTTED = {
    "spectrum.n_list": "n_list",
    "spectrum.window_radius": "window_radius",
    "spectrum.cluster_tol": "cluster_tol",
    "spectrum.index_max": "index_max",
    "spectrum.track_indices": "track_indices",
    "function.kind": "function_kind",
    "function.width": "function_width",
    "action.scales": "scales",
    "calculus.eps": "calculus_eps",
    "mk.n_list": "mk_n_list",
    "mk.states": "mk_states",
    "mk.restarts": "mk_restarts",
    "mk.max_iter": "mk_max_iter",
    "mk.oracle_samples": "mk_oracle_samples",
    "run.seed": "seed",
    "run.workers": "workers",
    "output.dir": "out_dir",
    "output.cache": "cache",
    "output.cache_dir": "cache_dir",
    "output.record_timestamp": "record_timestamp",
}

_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def parse_value(attr: str, raw: Any) -> Any:
    """Coerce a string (from the command line) or TOML value to the field type."""
    kind = _FIELD_TYPES[attr]
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    if text.lower() in ("none", "null", "") and "None" in kind:
        return None
    if kind.startswith("list[int]"):
        return [int(x) for x in text.split(",") if x.strip()]
    if kind.startswith("list[float]"):
        return [float(x) for x in text.split(",") if x.strip()]
    if kind.startswith("list[str]"):
        return [x.strip() for x in text.split(";") if x.strip()]
    if kind == "bool":
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if kind.startswith("int"):
        return int(text)
    if kind.startswith("float"):
        return float(text)
    return text


def _flatten(doc: dict, prefix: str = "") -> dict[str, Any]:
    out = {}
    for key, val in doc.items():
        name = f"{prefix}.{key}" if prefix else key
        if isinstance(val, dict):
            out.update(_flatten(val, name))
        else:
            out[name] = val
    return out


def load_config(path: str | Path | None = None, overrides: dict[str, Any] | None = None) -> RunConfig:
    """Defaults, then the TOML file, then dotted overrides."""
    values: dict[str, Any] = {}
    if path is not None:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
        for name, val in _flatten(doc).items():
            if name not in DOTTED:
                raise ValueError(f"unknown config key {name!r}")
            values[DOTTED[name]] = parse_value(DOTTED[name], val)
    for name, val in (overrides or {}).items():
        attr = DOTTED.get(name, name)
        if attr not in _FIELD_TYPES:
            raise ValueError(f"unknown option {name!r}")
        values[attr] = parse_value(attr, val)
    return RunConfig(**values)
