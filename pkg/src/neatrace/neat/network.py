"""Phenotype construction and activation for feed-forward genomes."""

from __future__ import annotations

import heapq
import math
from typing import Sequence

import numpy as np

from .. import _kernels
from .genes import (ACTIVATION_CODES, BIAS_ID, Genome, InvalidGenomeError,
                    NUM_INPUTS, THRUST_ID, TURN_ID)


class Phenotype:
    """Compiled evaluator over value slots.

    Slots 0..22 hold the sensor inputs, slot 23 the bias (1.0), and every
    evaluated node (hidden and output) gets one slot in topological order.
    The CSR arrays feed the shared activate kernel, which is also what the
    fused episode loop runs, so both paths produce identical floats.
    """

    __slots__ = ("order", "in_ptr", "in_src", "in_w", "act_code",
                 "n_slots", "turn_slot", "thrust_slot")

    def __init__(self, order, in_ptr, in_src, in_w, act_code,
                 n_slots, turn_slot, thrust_slot):
        self.order = order
        self.in_ptr = in_ptr
        self.in_src = in_src
        self.in_w = in_w
        self.act_code = act_code
        self.n_slots = n_slots
        self.turn_slot = turn_slot
        self.thrust_slot = thrust_slot

    def activate(self, inputs: Sequence[float]) -> tuple[float, float]:
        return activate(self, inputs)


def build_network(genome: Genome) -> Phenotype:
    """Topologically ordered feed-forward evaluator over enabled connections.

    Rejects genomes whose enabled connections contain a cycle.
    """
    genome.validate()

    slots = {i: i for i in range(NUM_INPUTS)}
    slots[BIAS_ID] = NUM_INPUTS
    evaluated = sorted(nid for nid, n in genome.nodes.items()
                       if n.kind in ("hidden", "output"))

    incoming: dict[int, list] = {nid: [] for nid in evaluated}
    dependents: dict[int, list[int]] = {nid: [] for nid in evaluated}
    indegree = {nid: 0 for nid in evaluated}
    for c in genome.sorted_connections():
        if not c.enabled:
            continue
        incoming[c.out_node].append(c)
        if c.in_node in indegree:  # edges from inputs/bias add no ordering
            dependents[c.in_node].append(c.out_node)
            indegree[c.out_node] += 1

    # Kahn's algorithm with a min-heap on node id for a deterministic order.
    ready = [nid for nid in evaluated if indegree[nid] == 0]
    heapq.heapify(ready)
    topo = []
    while ready:
        nid = heapq.heappop(ready)
        topo.append(nid)
        for nxt in dependents[nid]:
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                heapq.heappush(ready, nxt)
    if len(topo) != len(evaluated):
        raise InvalidGenomeError("enabled connections form a cycle")

    next_slot = NUM_INPUTS + 1
    for nid in topo:
        slots[nid] = next_slot
        next_slot += 1

    in_ptr = np.zeros(len(topo) + 1, dtype=np.int64)
    srcs = []
    weights = []
    for i, nid in enumerate(topo):
        for c in incoming[nid]:
            srcs.append(slots[c.in_node])
            weights.append(c.weight)
        in_ptr[i + 1] = len(srcs)

    return Phenotype(
        order=np.array([slots[nid] for nid in topo], dtype=np.int64),
        in_ptr=in_ptr,
        in_src=np.array(srcs, dtype=np.int64),
        in_w=np.array(weights, dtype=np.float64),
        act_code=np.array([ACTIVATION_CODES[genome.nodes[nid].activation]
                           for nid in topo], dtype=np.int64),
        n_slots=next_slot,
        turn_slot=slots[TURN_ID],
        thrust_slot=slots[THRUST_ID],
    )


def activate(phenotype: Phenotype, inputs: Sequence[float]) -> tuple[float, float]:
    """Map 23 finite inputs to (turn in [-1, 1], thrust in [0, 1])."""
    if len(inputs) != NUM_INPUTS:
        raise ValueError(f"expected {NUM_INPUTS} inputs, got {len(inputs)}")
    values = np.zeros(phenotype.n_slots, dtype=np.float64)
    for i, v in enumerate(inputs):
        f = float(v)
        if not math.isfinite(f):
            raise ValueError(f"input {i} is not finite")
        values[i] = f
    values[NUM_INPUTS] = 1.0  # bias
    _kernels.activate_kernel(values, phenotype.order, phenotype.in_ptr,
                             phenotype.in_src, phenotype.in_w,
                             phenotype.act_code)
    return float(values[phenotype.turn_slot]), float(values[phenotype.thrust_slot])
