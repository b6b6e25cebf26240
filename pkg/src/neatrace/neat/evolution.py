"""Population-level NEAT machinery: init, mutation, crossover, speciation,
stagnation, elitism, reproduction.

Determinism contract: every operator draws from the Generator it is handed
in a fixed order (collections are iterated sorted), so a run is a pure
function of its seeds. The innovation table is the only cross-genome mutable
state; use these functions single-threaded per generation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .genes import (BIAS_ID, ConnectionGene, FIRST_HIDDEN_ID, Genome,
                    HIDDEN_ACTIVATION, InnovationTable, NodeGene, NUM_INPUTS,
                    THRUST_ID, TURN_ID, creates_cycle, mandatory_nodes)

_ADD_CONNECTION_ATTEMPTS = 20


@dataclass(frozen=True, slots=True)
class EvolutionConfig:
    """Evolution hyperparameters.

    min_species_floor is the least number of species stagnation removal may
    leave alive (the best species plus three more, by default), and the
    species holding the all-time best genome is always exempt so elitism can
    keep the champion.
    """

    population_size: int = 200
    stagnation_limit: int = 50
    elitism: int = 4
    min_species_floor: int = 4
    compatibility_threshold: float = 3.0
    compat_coeffs: tuple[float, float, float] = (1.0, 1.0, 0.4)
    weight_mutate_prob: float = 0.8
    weight_sigma: float = 0.5
    weight_replace_prob: float = 0.1
    weight_clamp: float = 8.0
    add_connection_prob: float = 0.05
    add_node_prob: float = 0.03
    toggle_prob: float = 0.01
    initial_connection_density: float = 0.5
    hidden_layers: tuple[int, ...] = (12, 8)
    tournament_size: int = 3

    def __post_init__(self):
        for name in ("weight_mutate_prob", "weight_replace_prob",
                     "add_connection_prob", "add_node_prob", "toggle_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if not 0.0 < self.initial_connection_density <= 1.0:
            raise ValueError("initial_connection_density must be in (0, 1]")
        if self.population_size < self.elitism * self.min_species_floor:
            raise ValueError(
                "population_size must cover elitism for the species floor")
        if any(w < 1 for w in self.hidden_layers) or not self.hidden_layers:
            raise ValueError("hidden_layers must be positive widths")
        if self.tournament_size < 1:
            raise ValueError("tournament_size must be >= 1")


@dataclass(slots=True)
class Species:
    id: int
    representative: Genome
    members: list[Genome] = field(default_factory=list)
    best_fitness_ever: float = float("-inf")
    generations_since_improvement: int = 0


# ---------------------------------------------------------------------------
# initial population
# ---------------------------------------------------------------------------

def _layer_ids(cfg: EvolutionConfig) -> list[list[int]]:
    """Node ids of the initial layered topology: inputs+bias, hidden, outputs."""
    layers = [list(range(NUM_INPUTS)) + [BIAS_ID]]
    nid = FIRST_HIDDEN_ID
    for width in cfg.hidden_layers:
        layers.append(list(range(nid, nid + width)))
        nid += width
    layers.append([TURN_ID, THRUST_ID])
    return layers


def initial_innovation_table(cfg: EvolutionConfig) -> InnovationTable:
    """Table pre-registering every initial-layer edge, in enumeration order.

    All genomes sample the same candidate edges, so identical structures
    share innovation numbers from the start.
    """
    layers = _layer_ids(cfg)
    first_free = layers[-2][-1] + 1 if cfg.hidden_layers else FIRST_HIDDEN_ID
    table = InnovationTable(next_node_id=max(first_free, FIRST_HIDDEN_ID))
    for src, dst in _candidate_edges(layers):
        table.connection_innovation(src, dst)
    return table


def _candidate_edges(layers: list[list[int]]):
    """Layer-to-next-layer edges; the bias also feeds every later layer."""
    for li in range(len(layers) - 1):
        for src in layers[li]:
            for dst in layers[li + 1]:
                yield src, dst
    for li in range(2, len(layers)):
        for dst in layers[li]:
            yield BIAS_ID, dst


def initial_population(cfg: EvolutionConfig, rng: np.random.Generator,
                       table: InnovationTable) -> list[Genome]:
    """population_size genomes with the layered start topology.

    Each candidate edge is present independently with probability
    initial_connection_density, weights uniform in [-1, 1]. Genomes whose
    outputs are unreachable from the inputs are re-rolled.
    """
    layers = _layer_ids(cfg)
    edges = list(_candidate_edges(layers))
    base_nodes = mandatory_nodes()
    for layer in layers[1:-1]:
        for nid in layer:
            base_nodes[nid] = NodeGene(nid, "hidden", HIDDEN_ACTIVATION)

    population = []
    while len(population) < cfg.population_size:
        conns: dict[int, ConnectionGene] = {}
        for src, dst in edges:
            if rng.random() < cfg.initial_connection_density:
                innov = table.connection_innovation(src, dst)
                conns[innov] = ConnectionGene(
                    src, dst, float(rng.uniform(-1.0, 1.0)), True, innov)
        genome = Genome(dict(base_nodes), conns)
        if _outputs_reachable(genome):
            population.append(genome)
    return population


def _outputs_reachable(genome: Genome) -> bool:
    adj: dict[int, list[int]] = {}
    for c in genome.connections.values():
        if c.enabled:
            adj.setdefault(c.in_node, []).append(c.out_node)
    seen = set(range(NUM_INPUTS))
    stack = list(range(NUM_INPUTS))
    while stack:
        n = stack.pop()
        for nxt in adj.get(n, ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return TURN_ID in seen and THRUST_ID in seen


# ---------------------------------------------------------------------------
# mutation
# ---------------------------------------------------------------------------

def mutate(genome: Genome, table: InnovationTable, cfg: EvolutionConfig,
           rng: np.random.Generator) -> Genome:
    """Mutated copy: weight perturb/replace, add-connection, add-node, toggle.

    Mutations that would create a cycle or duplicate a connection are
    skipped. Identical new structures get identical innovation numbers via
    the shared table.
    """
    g = genome.copy()
    g.fitness = None

    if g.connections and rng.random() < cfg.weight_mutate_prob:
        for innov in sorted(g.connections):
            c = g.connections[innov]
            if rng.random() < cfg.weight_replace_prob:
                c.weight = float(rng.uniform(-1.0, 1.0))
            else:
                w = c.weight + float(rng.normal(0.0, cfg.weight_sigma))
                c.weight = max(-cfg.weight_clamp, min(cfg.weight_clamp, w))

    if rng.random() < cfg.add_connection_prob:
        _mutate_add_connection(g, table, rng)

    if rng.random() < cfg.add_node_prob:
        _mutate_add_node(g, table, rng)

    if g.connections and rng.random() < cfg.toggle_prob:
        _mutate_toggle(g, rng)

    return g


def _mutate_add_connection(g: Genome, table: InnovationTable,
                           rng: np.random.Generator) -> None:
    sources = sorted(nid for nid, n in g.nodes.items()
                     if n.kind in ("input", "bias", "hidden"))
    targets = sorted(nid for nid, n in g.nodes.items()
                     if n.kind in ("hidden", "output"))
    enabled = g.enabled_edges()
    for _ in range(_ADD_CONNECTION_ATTEMPTS):
        src = sources[int(rng.integers(len(sources)))]
        dst = targets[int(rng.integers(len(targets)))]
        if src == dst or g.has_edge(src, dst):
            continue
        if creates_cycle(enabled, (src, dst)):
            continue
        innov = table.connection_innovation(src, dst)
        g.connections[innov] = ConnectionGene(
            src, dst, float(rng.uniform(-1.0, 1.0)), True, innov)
        return


def _mutate_add_node(g: Genome, table: InnovationTable,
                     rng: np.random.Generator) -> None:
    enabled = sorted(innov for innov, c in g.connections.items() if c.enabled)
    if not enabled:
        return
    innov = enabled[int(rng.integers(len(enabled)))]
    old = g.connections[innov]
    node_id, innov_in, innov_out = table.node_split(innov, g.nodes.keys())
    old.enabled = False
    g.nodes[node_id] = NodeGene(node_id, "hidden", HIDDEN_ACTIVATION)
    g.connections[innov_in] = ConnectionGene(
        old.in_node, node_id, 1.0, True, innov_in)
    g.connections[innov_out] = ConnectionGene(
        node_id, old.out_node, old.weight, True, innov_out)


def _mutate_toggle(g: Genome, rng: np.random.Generator) -> None:
    innovs = sorted(g.connections)
    innov = innovs[int(rng.integers(len(innovs)))]
    c = g.connections[innov]
    if c.enabled:
        c.enabled = False
    else:
        # Re-enabling must not close a cycle formed since it was disabled.
        if not creates_cycle(g.enabled_edges(), (c.in_node, c.out_node)):
            c.enabled = True


# ---------------------------------------------------------------------------
# crossover and compatibility
# ---------------------------------------------------------------------------

def crossover(parent_a: Genome, parent_b: Genome,
              rng: np.random.Generator) -> Genome:
    """Offspring of two evaluated parents.

    Matching genes (same innovation) are chosen randomly per gene;
    disjoint and excess genes come from the fitter parent, or from both on
    an exact fitness tie. Any inherited gene that would close a cycle in the
    child is kept but disabled, preserving history without breaking the
    feed-forward invariant.
    """
    if parent_a.fitness is None or parent_b.fitness is None:
        raise ValueError("crossover requires evaluated parents")
    fit_a, fit_b = parent_a.fitness, parent_b.fitness

    keys_a = set(parent_a.connections)
    keys_b = set(parent_b.connections)
    chosen: list[tuple[ConnectionGene, Genome]] = []
    for innov in sorted(keys_a | keys_b):
        in_a = innov in keys_a
        in_b = innov in keys_b
        if in_a and in_b:
            src = parent_a if rng.random() < 0.5 else parent_b
        elif in_a:
            if fit_a < fit_b:
                continue
            src = parent_a
        else:
            if fit_b < fit_a:
                continue
            src = parent_b
        chosen.append((src.connections[innov].copy(), src))

    nodes = mandatory_nodes()
    child_conns: dict[int, ConnectionGene] = {}
    enabled_edges: list[tuple[int, int]] = []
    for gene, src in chosen:
        for nid in (gene.in_node, gene.out_node):
            if nid not in nodes:
                nodes[nid] = src.nodes[nid]
        if gene.enabled:
            if creates_cycle(enabled_edges, (gene.in_node, gene.out_node)):
                gene.enabled = False
            else:
                enabled_edges.append((gene.in_node, gene.out_node))
        child_conns[gene.innovation] = gene
    return Genome(nodes, child_conns)


def compatibility(a: Genome, b: Genome,
                  coeffs: tuple[float, float, float]) -> float:
    """c1*E/N + c2*D/N + c3*meanWeightDiff; N = 1 when both genomes are small."""
    c1, c2, c3 = coeffs
    keys_a = sorted(a.connections)
    keys_b = sorted(b.connections)
    if not keys_a and not keys_b:
        return 0.0
    max_a = keys_a[-1] if keys_a else -1
    max_b = keys_b[-1] if keys_b else -1
    cutoff = min(max_a, max_b)
    set_a, set_b = set(keys_a), set(keys_b)
    matching = set_a & set_b
    excess = disjoint = 0
    for k in set_a ^ set_b:
        if k > cutoff:
            excess += 1
        else:
            disjoint += 1
    n = max(len(keys_a), len(keys_b))
    if len(keys_a) < 20 and len(keys_b) < 20:
        n = 1
    w = 0.0
    if matching:
        w = sum(abs(a.connections[k].weight - b.connections[k].weight)
                for k in matching) / len(matching)
    return c1 * excess / n + c2 * disjoint / n + c3 * w


# ---------------------------------------------------------------------------
# speciation
# ---------------------------------------------------------------------------

def speciate(population: list[Genome], previous_species: list[Species],
             cfg: EvolutionConfig, *,
             next_species_id: Optional[int] = None) -> list[Species]:
    """Partition an evaluated population into species.

    Each genome joins the first previous-generation species whose
    representative lies within the compatibility threshold, else founds a
    new species. Afterwards each species' representative becomes its first
    member and its stagnation statistics are updated, so the returned list
    is ready to be both reproduced from and passed as previous_species next
    generation.
    """
    if next_species_id is None:
        next_species_id = max((s.id for s in previous_species), default=0) + 1

    species = [Species(s.id, s.representative, [],
                       s.best_fitness_ever, s.generations_since_improvement)
               for s in previous_species]
    for genome in population:
        for s in species:
            if compatibility(genome, s.representative,
                             cfg.compat_coeffs) < cfg.compatibility_threshold:
                s.members.append(genome)
                break
        else:
            species.append(Species(next_species_id, genome, [genome]))
            next_species_id += 1

    alive = [s for s in species if s.members]
    for s in alive:
        s.representative = s.members[0]
        best = max(m.fitness for m in s.members)
        if best > s.best_fitness_ever:
            s.best_fitness_ever = best
            s.generations_since_improvement = 0
        elif s.id in {p.id for p in previous_species}:
            s.generations_since_improvement += 1
    return alive


# ---------------------------------------------------------------------------
# reproduction
# ---------------------------------------------------------------------------

def reproduce(species_list: list[Species], cfg: EvolutionConfig,
              table: InnovationTable, rng: np.random.Generator
              ) -> tuple[list[Genome], list[Species]]:
    """Produce the next population of exactly population_size genomes.

    Stagnant species (generations_since_improvement >= stagnation_limit) are
    removed, except that the species holding the all-time best genome always
    survives and at least min_species_floor species are kept when available
    (retained in best-fitness order). Offspring quotas are proportional to
    each species' mean adjusted fitness (fitness shared by species size);
    each species' top genomes are copied unchanged (elitism) and the rest
    come from crossover plus mutation of tournament-selected parents.

    Returns (next_population, surviving_species); feed the latter to the
    next generation's speciate().
    """
    if not species_list:
        raise ValueError("cannot reproduce an empty species list")
    ranked = sorted(species_list,
                    key=lambda s: (-s.best_fitness_ever, s.id))
    survivors = [s for i, s in enumerate(ranked)
                 if i == 0 or s.generations_since_improvement < cfg.stagnation_limit]
    if len(survivors) < cfg.min_species_floor:
        extinct = [s for s in ranked if s not in survivors]
        survivors += extinct[:cfg.min_species_floor - len(survivors)]
        survivors.sort(key=lambda s: (-s.best_fitness_ever, s.id))

    quotas = _offspring_quotas(survivors, cfg)

    next_population: list[Genome] = []
    for s, quota in zip(survivors, quotas):
        if quota == 0:
            continue
        members = sorted(enumerate(s.members),
                         key=lambda iv: (-iv[1].fitness, iv[0]))
        members = [m for _, m in members]
        n_elite = min(cfg.elitism, len(members), quota)
        for elite in members[:n_elite]:
            keeper = elite.copy()
            keeper.fitness = None
            next_population.append(keeper)
        for _ in range(quota - n_elite):
            pa = _tournament(s.members, cfg.tournament_size, rng)
            pb = _tournament(s.members, cfg.tournament_size, rng)
            child = mutate(crossover(pa, pb, rng), table, cfg, rng)
            next_population.append(child)

    assert len(next_population) == cfg.population_size
    return next_population, survivors


def _offspring_quotas(survivors: list[Species], cfg: EvolutionConfig) -> list[int]:
    """Largest-remainder allocation proportional to mean adjusted fitness.

    The champion species (first in the ranked survivor list) is guaranteed a
    quota of at least 1 so elitism can carry the best genome forward.
    """
    shares = []
    for s in survivors:
        mean_adjusted = (sum(m.fitness for m in s.members)
                         / (len(s.members) ** 2))
        shares.append(mean_adjusted)
    total_share = sum(shares)
    pop = cfg.population_size
    if total_share <= 0.0:
        shares = [1.0] * len(survivors)
        total_share = float(len(survivors))

    raw = [pop * sh / total_share for sh in shares]
    quotas = [int(q) for q in raw]
    remainders = sorted(range(len(raw)),
                        key=lambda i: (-(raw[i] - quotas[i]), i))
    for i in range(pop - sum(quotas)):  # at most one extra per species
        quotas[remainders[i]] += 1

    if quotas[0] == 0:
        donor = max(range(len(quotas)), key=lambda i: (quotas[i], -i))
        quotas[donor] -= 1
        quotas[0] += 1
    return quotas


def _tournament(members: list[Genome], size: int,
                rng: np.random.Generator) -> Genome:
    best = None
    best_key = None
    for _ in range(min(size, len(members))):
        i = int(rng.integers(len(members)))
        key = (-members[i].fitness, i)
        if best is None or key < best_key:
            best = members[i]
            best_key = key
    return best
