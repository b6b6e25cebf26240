"""The generational loop: seeded evaluation, logging, checkpointing, resume.

Determinism: the whole fitness log is a pure function of the trial config.
Episode evaluation has no randomness at all; reproduction randomness comes
from Generators seeded per generation as (seed, 1, generation), so neither
worker count nor interrupt/resume can reorder a single draw. Evaluation
results are reduced in genome index order.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from multiprocessing import get_context
from pathlib import Path
from typing import Callable, NamedTuple, Optional

import numpy as np
import yaml

from .. import __version__
from ..evaluation import FitnessConfig, run_episode, total_fitness
from ..neat.evolution import (EvolutionConfig, Species, initial_innovation_table,
                              initial_population, reproduce, speciate)
from ..neat.genes import Genome, genome_to_dict
from ..neat.network import build_network
from ..physics import PhysicsConfig
from ..sensors import SensorConfig
from ..track import StartPoint, Track, load_track_file, bundled_map_path
from .baseline import measure_baseline
from .checkpoint import (RunState, checkpoint_path, latest_checkpoint,
                         load_checkpoint, save_checkpoint)
from .config import TrialConfig
from .tracefile import write_trace

LOG_SCHEMA = "neatrace-log v1"


class EpisodeSummary(NamedTuple):
    label: str
    completion: float
    speed_bonus: float
    lap_time: Optional[float]
    termination: str


@dataclass(frozen=True, slots=True)
class GenerationRecord:
    generation: int
    best_fitness: float
    mean_fitness: float
    species_count: int
    best_lap: dict[str, Optional[float]]        # per start, this generation
    first_completion: dict[str, bool]           # true on the first finishing gen


@dataclass(frozen=True, slots=True)
class GenerationView:
    """Snapshot handed to on_generation/stop_when callbacks."""

    generation: int
    population: list[Genome]
    species: list[Species]
    summaries: list[list[EpisodeSummary]]       # per genome, per start
    record: GenerationRecord
    first_completion: dict[str, Optional[int]]  # label -> generation or None


@dataclass(frozen=True, slots=True)
class EvalContext:
    track: Track
    starts: tuple[StartPoint, ...]
    physics: PhysicsConfig
    sensors: SensorConfig
    fitness: FitnessConfig


_WORKER_CTX: Optional[EvalContext] = None


def _worker_init(ctx: EvalContext) -> None:
    global _WORKER_CTX
    _WORKER_CTX = ctx


def _eval_batch(batch, ctx: Optional[EvalContext] = None):
    ctx = ctx or _WORKER_CTX
    out = []
    for idx, genome in batch:
        net = build_network(genome)
        results = [run_episode(net, ctx.track, s, ctx.physics, ctx.sensors,
                               ctx.fitness) for s in ctx.starts]
        fit = total_fitness(results, ctx.fitness)
        out.append((idx, fit,
                    [EpisodeSummary(r.start_label, r.completion, r.speed_bonus,
                                    r.lap_time, r.termination)
                     for r in results]))
    return out


def resolve_map_path(spec: str) -> Path:
    """A bundled map name ('oval') or a filesystem path."""
    p = Path(spec)
    if p.is_file():
        return p
    if "/" not in spec and "\\" not in spec and not spec.endswith(".map"):
        return Path(str(bundled_map_path(spec)))
    raise FileNotFoundError(f"map not found: {spec}")


def resolve_fitness(cfg: TrialConfig, track: Track) -> FitnessConfig:
    """Fill in baseline_time: config override, map metadata, or a fresh
    scripted measurement, in that order."""
    if cfg.fitness.baseline_time is not None:
        return cfg.fitness
    if track.baseline_time is not None:
        return replace(cfg.fitness, baseline_time=track.baseline_time)
    return replace(cfg.fitness,
                   baseline_time=measure_baseline(track, cfg.physics))


def run_trial(cfg: TrialConfig,
              on_generation: Optional[Callable[[GenerationView], None]] = None,
              stop_when: Optional[Callable[[GenerationView], bool]] = None,
              resume: bool = False) -> Path:
    """Execute (or resume) one trial; returns the run directory.

    The run directory holds manifest.yaml, log.csv, checkpoints/, traces/
    (per trace policy), and best_genome.json.
    """
    run_dir = Path(cfg.output)
    (run_dir / "checkpoints").mkdir(parents=True, exist_ok=True)
    if cfg.trace != "never":
        (run_dir / "traces").mkdir(exist_ok=True)

    map_path = resolve_map_path(cfg.map)
    track = load_track_file(map_path)
    missing = [l for l in cfg.starts if l not in track.starts]
    if missing:
        raise ValueError(f"map {track.name!r} has no start labels {missing}")
    starts = tuple(track.starts[l] for l in cfg.starts)
    fit_cfg = resolve_fitness(cfg, track)
    ctx = EvalContext(track, starts, cfg.physics, cfg.sensors, fit_cfg)

    if resume:
        found = latest_checkpoint(run_dir)
        if found is None:
            raise FileNotFoundError(f"no checkpoint to resume in {run_dir}")
        state = load_checkpoint(found, expect_seed=cfg.seed)
        _truncate_log(run_dir, state.generation, cfg)
    else:
        table = initial_innovation_table(cfg.evolution)
        rng0 = np.random.default_rng(np.random.SeedSequence((cfg.seed, 0)))
        state = RunState(
            generation=0,
            population=initial_population(cfg.evolution, rng0, table),
            species=[], table=table, next_species_id=1,
            first_completion={l: None for l in cfg.starts})
        _write_manifest(run_dir, cfg, track, fit_cfg)
        _fresh_log(run_dir, cfg)

    pool = None
    if cfg.workers > 1:
        pool = ProcessPoolExecutor(
            max_workers=cfg.workers, mp_context=get_context("fork"),
            initializer=_worker_init, initargs=(ctx,))
    try:
        with open(run_dir / "log.csv", "a", encoding="utf-8", newline="") as log:
            writer = csv.writer(log)
            for gen in range(state.generation, cfg.generations):
                fits, summaries = _evaluate(state.population, ctx, pool, cfg.workers)
                for genome, fit in zip(state.population, fits):
                    genome.fitness = fit
                assert len(state.population) == cfg.evolution.population_size

                species = speciate(state.population, state.species, cfg.evolution,
                                   next_species_id=state.next_species_id)
                state.next_species_id = max(
                    state.next_species_id,
                    max(s.id for s in species) + 1)

                record = _make_record(gen, fits, summaries, species, state, cfg)
                writer.writerow(_record_row(record, cfg))
                log.flush()

                champ = int(np.argmax(fits))
                if fits[champ] > state.best_fitness:
                    state.best_fitness = float(fits[champ])
                    state.best_genome = state.population[champ].copy()
                _write_traces(run_dir, gen, state, summaries, species, ctx, cfg)

                view = GenerationView(gen, state.population, species,
                                      summaries, record,
                                      dict(state.first_completion))
                if on_generation is not None:
                    on_generation(view)
                stop = stop_when is not None and stop_when(view)

                next_pop, survivors = reproduce(
                    species, cfg.evolution, state.table,
                    np.random.default_rng(np.random.SeedSequence((cfg.seed, 1, gen))))
                state.generation = gen + 1
                state.population = next_pop
                state.species = survivors

                if (state.generation % cfg.checkpoint_interval == 0
                        or state.generation == cfg.generations or stop):
                    save_checkpoint(checkpoint_path(run_dir, state.generation),
                                    state, cfg.seed)
                    _export_best(run_dir, state)
                if stop:
                    break
    finally:
        if pool is not None:
            pool.shutdown()
    save_checkpoint(checkpoint_path(run_dir, state.generation), state, cfg.seed)
    _export_best(run_dir, state)
    return run_dir


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _evaluate(population, ctx, pool, workers):
    indexed = list(enumerate(population))
    if pool is None:
        results = _eval_batch(indexed, ctx)
    else:
        chunks = [indexed[i::workers] for i in range(workers)]
        results = []
        for fut in [pool.submit(_eval_batch, c) for c in chunks if c]:
            results.extend(fut.result())
        results.sort(key=lambda r: r[0])
    fits = [r[1] for r in results]
    summaries = [r[2] for r in results]
    return fits, summaries


def _make_record(gen, fits, summaries, species, state, cfg) -> GenerationRecord:
    best_lap: dict[str, Optional[float]] = {}
    first: dict[str, bool] = {}
    for li, label in enumerate(cfg.starts):
        laps = [s[li].lap_time for s in summaries if s[li].lap_time is not None]
        best_lap[label] = min(laps) if laps else None
        newly = bool(laps) and state.first_completion[label] is None
        if newly:
            state.first_completion[label] = gen
        first[label] = newly
    return GenerationRecord(
        generation=gen,
        best_fitness=float(max(fits)),
        mean_fitness=float(sum(fits) / len(fits)),
        species_count=len(species),
        best_lap=best_lap,
        first_completion=first)


def _record_row(r: GenerationRecord, cfg) -> list:
    row = [r.generation, repr(r.best_fitness), repr(r.mean_fitness),
           r.species_count]
    for label in cfg.starts:
        lap = r.best_lap[label]
        row.append("" if lap is None else repr(lap))
        row.append(int(r.first_completion[label]))
    return row


def _log_header(cfg) -> list[str]:
    cols = ["generation", "best_fitness", "mean_fitness", "species_count"]
    for label in cfg.starts:
        cols += [f"best_lap_{label}", f"first_completion_{label}"]
    return cols


def _fresh_log(run_dir: Path, cfg) -> None:
    with open(run_dir / "log.csv", "w", encoding="utf-8", newline="") as f:
        f.write(f"# {LOG_SCHEMA}\n")
        csv.writer(f).writerow(_log_header(cfg))


def _truncate_log(run_dir: Path, generation: int, cfg) -> None:
    """Drop any rows at or past the resume generation."""
    path = run_dir / "log.csv"
    if not path.is_file():
        _fresh_log(run_dir, cfg)
        return
    kept = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.startswith("#") or line.startswith("generation"):
            kept.append(line)
            continue
        if line and int(line.split(",", 1)[0]) < generation:
            kept.append(line)
    path.write_text("\n".join(kept) + "\n", encoding="utf-8")


def parse_log(path) -> list[dict]:
    """Read log.csv back into dicts with proper types."""
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        first = f.readline().strip()
        if first != f"# {LOG_SCHEMA}":
            raise ValueError(f"unrecognized log schema line {first!r}")
        for row in csv.DictReader(f):
            parsed: dict = {
                "generation": int(row["generation"]),
                "best_fitness": float(row["best_fitness"]),
                "mean_fitness": float(row["mean_fitness"]),
                "species_count": int(row["species_count"]),
            }
            for key, val in row.items():
                if key.startswith("best_lap_"):
                    parsed[key] = float(val) if val else None
                elif key.startswith("first_completion_"):
                    parsed[key] = bool(int(val))
            rows.append(parsed)
    return rows


def _write_manifest(run_dir: Path, cfg: TrialConfig, track: Track,
                    fit_cfg: FitnessConfig) -> None:
    def plain(obj):
        if hasattr(obj, "__dataclass_fields__"):
            out = {}
            for name in obj.__dataclass_fields__:
                out[name] = plain(getattr(obj, name))
            return out
        if isinstance(obj, (tuple, list)):
            return [plain(v) for v in obj]
        return obj

    doc = {
        "format": "neatrace-run",
        "version": 1,
        "package_version": __version__,
        "map": str(cfg.map),
        "map_name": track.name,
        "starts": list(cfg.starts),
        "generations": cfg.generations,
        "workers": cfg.workers,
        "seed": cfg.seed,
        "checkpoint_interval": cfg.checkpoint_interval,
        "trace": cfg.trace,
        "evolution": plain(cfg.evolution),
        "physics": plain(cfg.physics),
        "sensors": plain(cfg.sensors),
        "fitness": plain(fit_cfg),
    }
    (run_dir / "manifest.yaml").write_text(
        yaml.safe_dump(doc, sort_keys=False), encoding="utf-8")


def _export_best(run_dir: Path, state: RunState) -> None:
    if state.best_genome is None:
        return
    doc = genome_to_dict(state.best_genome)
    doc["fitness"] = state.best_fitness
    (run_dir / "best_genome.json").write_text(json.dumps(doc), encoding="utf-8")


def _write_traces(run_dir, gen, state, summaries, species, ctx, cfg) -> None:
    if cfg.trace == "never":
        return
    targets: list[tuple[str, Genome]] = []
    if cfg.trace == "best-per-generation":
        champ = max(range(len(state.population)),
                    key=lambda i: (state.population[i].fitness, -i))
        targets.append((f"gen_{gen:05d}_best", state.population[champ]))
    else:  # top-k-per-species
        for s in species:
            ranked = sorted(enumerate(s.members),
                            key=lambda iv: (-iv[1].fitness, iv[0]))
            for rank, (_, member) in enumerate(ranked[:cfg.trace_top_k]):
                targets.append((f"gen_{gen:05d}_s{s.id:03d}_r{rank}", member))
    for stem, genome in targets:
        net = build_network(genome)
        for start in ctx.starts:
            result = run_episode(net, ctx.track, start, ctx.physics,
                                 ctx.sensors, ctx.fitness, record_trace=True)
            write_trace(run_dir / "traces" / f"{stem}_{start.label}.csv",
                        result.trace)
