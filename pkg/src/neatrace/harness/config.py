"""Trial configuration: defaults, YAML loading, validation.

Config file keys (all optional except map and output)::

    map: oval                 # bundled map name or a file path
    output: runs/oval-s1
    starts: [A, B]
    generations: 1000
    workers: 1
    seed: 1
    checkpoint_interval: 25
    trace: never              # never | best-per-generation | top-k-per-species
    trace_top_k: 3
    evolution: {population_size: 200, ...}      # EvolutionConfig fields
    physics: {frames_per_second: 16, ...}        # PhysicsConfig fields
    sensors: {max_range: 500.0, ...}             # SensorConfig fields
    fitness: {time_limit: 120.0, ...}            # FitnessConfig fields

fitness.baseline_time may be omitted; the map's embedded baseline is used,
or a scripted pre-trial lap measures one.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..evaluation import FitnessConfig
from ..geometry import Vec2
from ..neat.evolution import EvolutionConfig
from ..physics import PhysicsConfig
from ..sensors import SensorConfig

TRACE_POLICIES = ("never", "best-per-generation", "top-k-per-species")


class ConfigError(ValueError):
    """Bad trial configuration (unknown key, wrong type, missing file)."""


@dataclass(frozen=True, slots=True)
class TrialConfig:
    map: str
    output: str
    starts: tuple[str, ...] = ("A", "B")
    generations: int = 1000
    workers: int = 1
    seed: int = 0
    checkpoint_interval: int = 25
    trace: str = "never"
    trace_top_k: int = 3
    evolution: EvolutionConfig = field(default_factory=EvolutionConfig)
    physics: PhysicsConfig = field(default_factory=PhysicsConfig)
    sensors: SensorConfig = field(default_factory=SensorConfig)
    fitness: FitnessConfig = field(default_factory=FitnessConfig)

    def __post_init__(self):
        if self.generations < 1:
            raise ConfigError("generations must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.checkpoint_interval < 1:
            raise ConfigError("checkpoint_interval must be >= 1")
        if self.trace not in TRACE_POLICIES:
            raise ConfigError(f"trace must be one of {TRACE_POLICIES}")
        if not self.starts:
            raise ConfigError("starts must not be empty")
        if len(set(self.starts)) != len(self.starts):
            raise ConfigError("duplicate start labels")


def _build_dataclass(dc_type, data: dict, where: str):
    names = {f.name for f in dataclasses.fields(dc_type)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    kwargs = dict(data)
    if dc_type is PhysicsConfig and "gravity" in kwargs:
        g = kwargs["gravity"]
        if not (isinstance(g, list) and len(g) == 2):
            raise ConfigError(f"{where}.gravity: expected [x, y]")
        kwargs["gravity"] = Vec2(float(g[0]), float(g[1]))
    if dc_type is EvolutionConfig:
        for tup in ("compat_coeffs", "hidden_layers"):
            if tup in kwargs:
                kwargs[tup] = tuple(kwargs[tup])
    try:
        return dc_type(**kwargs)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{where}: {e}") from None


def trial_config_from_dict(doc: dict) -> TrialConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping")
    known = {"map", "output", "starts", "generations", "workers", "seed",
             "checkpoint_interval", "trace", "trace_top_k",
             "evolution", "physics", "sensors", "fitness"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    for required in ("map", "output"):
        if required not in doc:
            raise ConfigError(f"config is missing required key {required!r}")

    kwargs = {k: v for k, v in doc.items()
              if k in known - {"evolution", "physics", "sensors", "fitness", "starts"}}
    if "starts" in doc:
        kwargs["starts"] = tuple(str(s) for s in doc["starts"])
    kwargs["evolution"] = _build_dataclass(EvolutionConfig,
                                           doc.get("evolution") or {}, "evolution")
    kwargs["physics"] = _build_dataclass(PhysicsConfig,
                                         doc.get("physics") or {}, "physics")
    kwargs["sensors"] = _build_dataclass(SensorConfig,
                                         doc.get("sensors") or {}, "sensors")
    kwargs["fitness"] = _build_dataclass(FitnessConfig,
                                         doc.get("fitness") or {}, "fitness")
    try:
        return TrialConfig(**kwargs)
    except TypeError as e:
        raise ConfigError(str(e)) from None


def load_trial_config(path) -> TrialConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        raise ConfigError(f"config is not valid YAML: {e}") from None
    return trial_config_from_dict(doc or {})
