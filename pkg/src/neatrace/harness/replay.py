"""Deterministic re-run of a saved genome with trace recording."""

from __future__ import annotations

import json
from pathlib import Path

from ..evaluation import EpisodeResult, FitnessConfig, run_episode
from ..neat.genes import genome_from_dict
from ..neat.network import build_network
from ..physics import PhysicsConfig
from ..sensors import SensorConfig
from ..track import Track


def load_genome_file(path):
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ValueError(f"cannot read genome file {path}: {e}") from None
    return genome_from_dict(doc)


def replay(genome_path, track: Track, start_label: str,
           physics_cfg: PhysicsConfig, sensor_cfg: SensorConfig,
           fit_cfg: FitnessConfig) -> EpisodeResult:
    """Re-run one episode with the trace enabled. Same inputs, same bytes."""
    genome = load_genome_file(genome_path)
    if start_label not in track.starts:
        raise ValueError(f"map {track.name!r} has no start {start_label!r} "
                         f"(has {sorted(track.starts)})")
    net = build_network(genome)
    return run_episode(net, track, track.starts[start_label],
                       physics_cfg, sensor_cfg, fit_cfg, record_trace=True)
