"""Versioned JSON checkpoints: population, species carry-over, innovation
history, and run progress flags. Round-trip exact (floats keep their bits),
so resuming from a checkpoint reproduces an uninterrupted run record for
record."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..neat.evolution import Species
from ..neat.genes import (Genome, InnovationTable, genome_from_dict,
                          genome_to_dict)

CHECKPOINT_FORMAT = "neatrace-checkpoint"
CHECKPOINT_VERSION = 1


class CheckpointError(RuntimeError):
    pass


@dataclass(slots=True)
class RunState:
    """Everything the generational loop needs to continue from generation N."""

    generation: int
    population: list[Genome]
    species: list[Species]
    table: InnovationTable
    next_species_id: int
    first_completion: dict[str, Optional[int]]
    best_genome: Optional[Genome] = None
    best_fitness: float = float("-inf")


def _species_to_dict(s: Species) -> dict:
    return {
        "id": s.id,
        "representative": genome_to_dict(s.representative),
        "best_fitness_ever": s.best_fitness_ever,
        "generations_since_improvement": s.generations_since_improvement,
    }


def _species_from_dict(d: dict) -> Species:
    return Species(d["id"], genome_from_dict(d["representative"]),
                   [], d["best_fitness_ever"],
                   d["generations_since_improvement"])


def save_checkpoint(path: Path, state: RunState, seed: int) -> None:
    doc = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "seed": seed,
        "generation": state.generation,
        "population": [genome_to_dict(g) for g in state.population],
        "species": [_species_to_dict(s) for s in state.species],
        "next_species_id": state.next_species_id,
        "innovations": state.table.to_dict(),
        "first_completion": state.first_completion,
        "best_genome": (genome_to_dict(state.best_genome)
                        if state.best_genome is not None else None),
        "best_fitness": state.best_fitness,
    }
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(doc), encoding="utf-8")
    tmp.replace(path)


def load_checkpoint(path: Path, expect_seed: Optional[int] = None) -> RunState:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from None
    if doc.get("format") != CHECKPOINT_FORMAT or doc.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(f"{path} is not a recognized checkpoint")
    gen = doc.get("generation", "?")
    try:
        if expect_seed is not None and doc["seed"] != expect_seed:
            raise CheckpointError(
                f"checkpoint at generation {gen} was written with seed "
                f"{doc['seed']}, config says {expect_seed}")
        best = doc["best_genome"]
        return RunState(
            generation=doc["generation"],
            population=[genome_from_dict(g) for g in doc["population"]],
            species=[_species_from_dict(s) for s in doc["species"]],
            table=InnovationTable.from_dict(doc["innovations"]),
            next_species_id=doc["next_species_id"],
            first_completion=dict(doc["first_completion"]),
            best_genome=genome_from_dict(best) if best is not None else None,
            best_fitness=doc["best_fitness"],
        )
    except CheckpointError:
        raise
    except (KeyError, ValueError, TypeError) as e:
        raise CheckpointError(
            f"corrupt checkpoint {path} (generation {gen}): {e}") from None


def checkpoint_path(run_dir: Path, generation: int) -> Path:
    return Path(run_dir) / "checkpoints" / f"gen_{generation:06d}.json"


def latest_checkpoint(run_dir: Path) -> Optional[Path]:
    folder = Path(run_dir) / "checkpoints"
    if not folder.is_dir():
        return None
    found = sorted(folder.glob("gen_*.json"))
    return found[-1] if found else None
