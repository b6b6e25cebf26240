"""Genome representation: node genes, connection genes, innovation history.

The controller interface is fixed: 23 input nodes (ids 0..22, matching the
sensor contract), one bias node (id 23), and two output nodes (id 24 turn,
id 25 thrust). Hidden node ids start above those. Connection genes are keyed
by innovation number; the innovation table guarantees one number per
structural signature for the whole run, so homologous genes always align in
crossover and a (in_node, out_node) pair can never appear twice in a genome.

Genomes are feed-forward: no directed cycle may exist among enabled
connections. Operators that could create one must check first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

NUM_INPUTS = 23
NUM_OUTPUTS = 2
BIAS_ID = NUM_INPUTS                 # 23
TURN_ID = NUM_INPUTS + 1             # 24
THRUST_ID = NUM_INPUTS + 2           # 25
FIRST_HIDDEN_ID = NUM_INPUTS + 3     # 26

HIDDEN_ACTIVATION = "steep_sigmoid"
OUTPUT_ACTIVATIONS = {TURN_ID: "tanh", THRUST_ID: "logistic"}

ACTIVATION_CODES = {"identity": 0, "steep_sigmoid": 1, "tanh": 2, "logistic": 3}


class InvalidGenomeError(ValueError):
    """A genome violated a structural invariant (cycle, missing node, ...)."""


@dataclass(frozen=True, slots=True)
class NodeGene:
    id: int
    kind: str          # input | hidden | output | bias
    activation: str    # identity | steep_sigmoid | tanh | logistic


@dataclass(slots=True)
class ConnectionGene:
    in_node: int
    out_node: int
    weight: float
    enabled: bool
    innovation: int

    def copy(self) -> "ConnectionGene":
        return ConnectionGene(self.in_node, self.out_node, self.weight,
                              self.enabled, self.innovation)


@dataclass(slots=True)
class Genome:
    """One evolvable controller: nodes by id, connections by innovation."""

    nodes: dict[int, NodeGene]
    connections: dict[int, ConnectionGene]
    fitness: Optional[float] = None

    def copy(self) -> "Genome":
        return Genome(dict(self.nodes),
                      {k: c.copy() for k, c in self.connections.items()},
                      self.fitness)

    def sorted_connections(self) -> list[ConnectionGene]:
        return [self.connections[k] for k in sorted(self.connections)]

    def enabled_edges(self) -> list[tuple[int, int]]:
        return [(c.in_node, c.out_node)
                for c in self.connections.values() if c.enabled]

    def has_edge(self, in_node: int, out_node: int) -> bool:
        return any(c.in_node == in_node and c.out_node == out_node
                   for c in self.connections.values())

    def validate(self) -> None:
        """Raise InvalidGenomeError on any structural invariant breach."""
        for i in range(NUM_INPUTS):
            if self.nodes.get(i, None) is None or self.nodes[i].kind != "input":
                raise InvalidGenomeError(f"missing input node {i}")
        if BIAS_ID not in self.nodes or self.nodes[BIAS_ID].kind != "bias":
            raise InvalidGenomeError("missing bias node")
        for oid in (TURN_ID, THRUST_ID):
            if oid not in self.nodes or self.nodes[oid].kind != "output":
                raise InvalidGenomeError(f"missing output node {oid}")
        seen_pairs = set()
        for innov, c in self.connections.items():
            if c.innovation != innov:
                raise InvalidGenomeError("connection keyed by wrong innovation")
            if c.in_node not in self.nodes or c.out_node not in self.nodes:
                raise InvalidGenomeError(
                    f"connection {innov} references a missing node")
            pair = (c.in_node, c.out_node)
            if pair in seen_pairs:
                raise InvalidGenomeError(f"duplicate connection {pair}")
            seen_pairs.add(pair)
        if has_cycle(self.enabled_edges()):
            raise InvalidGenomeError("enabled connections form a cycle")


def mandatory_nodes() -> dict[int, NodeGene]:
    nodes = {i: NodeGene(i, "input", "identity") for i in range(NUM_INPUTS)}
    nodes[BIAS_ID] = NodeGene(BIAS_ID, "bias", "identity")
    nodes[TURN_ID] = NodeGene(TURN_ID, "output", OUTPUT_ACTIVATIONS[TURN_ID])
    nodes[THRUST_ID] = NodeGene(THRUST_ID, "output", OUTPUT_ACTIVATIONS[THRUST_ID])
    return nodes


def has_cycle(edges: list[tuple[int, int]]) -> bool:
    """Cycle test over a directed edge list (iterative DFS, colors)."""
    adj: dict[int, list[int]] = {}
    for a, b in edges:
        adj.setdefault(a, []).append(b)
    state: dict[int, int] = {}  # 1 = on stack, 2 = done
    for root in adj:
        if state.get(root):
            continue
        stack = [(root, iter(adj.get(root, ())))]
        state[root] = 1
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                s = state.get(nxt)
                if s == 1:
                    return True
                if s is None:
                    state[nxt] = 1
                    stack.append((nxt, iter(adj.get(nxt, ()))))
                    advanced = True
                    break
            if not advanced:
                state[node] = 2
                stack.pop()
    return False


def creates_cycle(edges: list[tuple[int, int]], new_edge: tuple[int, int]) -> bool:
    """Would adding new_edge to the enabled edge set create a cycle?"""
    src, dst = new_edge
    if src == dst:
        return True
    # Cycle iff src is reachable from dst.
    adj: dict[int, list[int]] = {}
    for a, b in edges:
        adj.setdefault(a, []).append(b)
    stack = [dst]
    seen = {dst}
    while stack:
        n = stack.pop()
        if n == src:
            return True
        for nxt in adj.get(n, ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return False


class InnovationTable:
    """Run-long registry assigning innovation numbers and split node ids.

    Structurally identical new genes receive identical numbers, within a
    generation and across the whole run. The table is the only mutable state
    shared across genomes; use it single-threaded per generation.
    """

    def __init__(self, next_innovation: int = 0, next_node_id: int = FIRST_HIDDEN_ID):
        self.next_innovation = next_innovation
        self.next_node_id = next_node_id
        self._conn: dict[tuple[int, int], int] = {}
        # conn innovation -> list of (node_id, innov_in, innov_out); a genome
        # re-splitting the same connection takes the first id it lacks.
        self._splits: dict[int, list[tuple[int, int, int]]] = {}

    def connection_innovation(self, in_node: int, out_node: int) -> int:
        key = (in_node, out_node)
        got = self._conn.get(key)
        if got is None:
            got = self.next_innovation
            self.next_innovation += 1
            self._conn[key] = got
        return got

    def node_split(self, conn_innovation: int,
                   existing_node_ids) -> tuple[int, int, int]:
        """Split registration: returns (node_id, innov_in, innov_out)."""
        for entry in self._splits.setdefault(conn_innovation, []):
            if entry[0] not in existing_node_ids:
                return entry
        node_id = self.next_node_id
        self.next_node_id += 1
        conn = self._conn_for(conn_innovation)
        innov_in = self.connection_innovation(conn[0], node_id)
        innov_out = self.connection_innovation(node_id, conn[1])
        entry = (node_id, innov_in, innov_out)
        self._splits[conn_innovation].append(entry)
        return entry

    def _conn_for(self, innovation: int) -> tuple[int, int]:
        for pair, innov in self._conn.items():
            if innov == innovation:
                return pair
        raise KeyError(f"unknown connection innovation {innovation}")

    # -- serialization (checkpoints) ------------------------------------

    def to_dict(self) -> dict:
        return {
            "next_innovation": self.next_innovation,
            "next_node_id": self.next_node_id,
            "connections": [[a, b, innov] for (a, b), innov in self._conn.items()],
            "splits": [[conn, list(e)] for conn, entries in self._splits.items()
                       for e in entries],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "InnovationTable":
        table = cls(d["next_innovation"], d["next_node_id"])
        for a, b, innov in d["connections"]:
            table._conn[(a, b)] = innov
        for conn, entry in d["splits"]:
            table._splits.setdefault(conn, []).append(tuple(entry))
        return table


# -- genome serialization ----------------------------------------------

GENOME_FORMAT = "neatrace-genome"
GENOME_VERSION = 1


def genome_to_dict(genome: Genome) -> dict:
    return {
        "format": GENOME_FORMAT,
        "version": GENOME_VERSION,
        "num_inputs": NUM_INPUTS,
        "num_outputs": NUM_OUTPUTS,
        "nodes": [[n.id, n.kind, n.activation]
                  for n in (genome.nodes[k] for k in sorted(genome.nodes))],
        "connections": [[c.innovation, c.in_node, c.out_node, c.weight, c.enabled]
                        for c in genome.sorted_connections()],
        "fitness": genome.fitness,
    }


def genome_from_dict(d: dict) -> Genome:
    if d.get("format") != GENOME_FORMAT or d.get("version") != GENOME_VERSION:
        raise InvalidGenomeError("not a recognized genome document")
    if d.get("num_inputs") != NUM_INPUTS or d.get("num_outputs") != NUM_OUTPUTS:
        raise InvalidGenomeError(
            f"genome arity mismatch: expected {NUM_INPUTS} inputs / "
            f"{NUM_OUTPUTS} outputs")
    nodes = {nid: NodeGene(nid, kind, act) for nid, kind, act in d["nodes"]}
    conns = {innov: ConnectionGene(i, o, float(w), bool(e), innov)
             for innov, i, o, w, e in d["connections"]}
    g = Genome(nodes, conns, d.get("fitness"))
    g.validate()
    return g
