"""Experiment configuration: JSON documents with strictly checked keys."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, asdict
from typing import Optional

import numpy as np

from .errors import InvalidArgument


class ConfigError(InvalidArgument):
    pass


@dataclass
class GridSection:
    x_min: float = -10.0
    x_max: float = 10.0
    n: int = 2001


@dataclass
class EvolutionSection:
    t_start: float = 0.0
    t_end: float = 0.1
    dt: float = 1e-4
    boundary_mode: str = "constant_farfield"
    farfield_value: float = 1.0
    newton_tol: float = 1e-12
    newton_max_iter: int = 50
    output_times: Optional[list] = None
    n_outputs: int = 10


@dataclass
class InitialDataSection:
    kind: str = "measure"  # measure | soliton | constant
    background: float = 1.0
    line_mass: float = 1.0
    mollifier_width: float = 0.05
    mollifier_kind: str = "gaussian"
    value: float = 1.0


@dataclass
class ChecksSection:
    tol_scale: float = 0.05
    alpha: float = 1.0
    t_origin: Optional[float] = None
    window_start: Optional[float] = None


@dataclass
class DistanceSection:
    window: list = field(default_factory=lambda: [-1.5, 1.5, -1.5, 1.5])
    h: float = 0.02
    stencil_order: int = 2
    n_pairs: int = 50
    pair_box: list = field(default_factory=lambda: [-1.0, 1.0, -1.0, 1.0])
    volume_center: list = field(default_factory=lambda: [0.0, 0.0])
    volume_radii: list = field(default_factory=lambda: [0.25, 0.5, 1.0])


@dataclass
class Pic1Section:
    samples: int = 2000
    refine_iters: int = 10
    restarts: int = 6
    tol: float = 1e-8


@dataclass
class OutputSection:
    trajectory: Optional[str] = None
    summary: Optional[str] = None
    distance_table: Optional[str] = None
    volume_table: Optional[str] = None


@dataclass
class ExperimentConfig:
    seed: int = 0
    grid: GridSection = field(default_factory=GridSection)
    evolution: EvolutionSection = field(default_factory=EvolutionSection)
    initial_data: InitialDataSection = field(default_factory=InitialDataSection)
    checks: ChecksSection = field(default_factory=ChecksSection)
    distance: DistanceSection = field(default_factory=DistanceSection)
    pic1: Pic1Section = field(default_factory=Pic1Section)
    output: OutputSection = field(default_factory=OutputSection)

    def as_dict(self):
        return asdict(self)

    def output_times(self):
        ev = self.evolution
        if ev.output_times is not None:
            return tuple(float(t) for t in ev.output_times)
        if ev.n_outputs < 1:
            raise ConfigError("evolution.n_outputs must be >= 1")
        ts = ev.t_start + (ev.t_end - ev.t_start) * np.arange(1, ev.n_outputs + 1) / ev.n_outputs
        ts[-1] = ev.t_end
        return tuple(float(t) for t in ts)


_SECTION_TYPES = {
    "grid": GridSection, "evolution": EvolutionSection, "initial_data": InitialDataSection,
    "checks": ChecksSection, "distance": DistanceSection, "pic1": Pic1Section,
    "output": OutputSection,
}


def _section(cls, doc, name):
    if not isinstance(doc, dict):
        raise ConfigError(f"section {name!r} must be an object")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise ConfigError(f"unknown key(s) in section {name!r}: {unknown}")
    return cls(**doc)


def config_from_dict(doc: dict) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(doc) - set(_SECTION_TYPES) - {"seed"})
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {unknown}")
    kwargs = {name: _section(cls, doc[name], name) for name, cls in _SECTION_TYPES.items() if name in doc}
    if "seed" in doc:
        kwargs["seed"] = int(doc["seed"])
    return ExperimentConfig(**kwargs)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return config_from_dict(doc)


def defaults_text() -> str:
    """Human-readable listing of every section and its defaults, for --help."""
    lines = ["config defaults (JSON, unknown keys rejected):", "  seed = 0"]
    for name, cls in _SECTION_TYPES.items():
        lines.append(f"  [{name}]")
        for k, v in asdict(cls()).items():
            lines.append(f"    {k} = {json.dumps(v)}")
    return "\n".join(lines)
