"""Complete NEAT implementation: genomes, innovation history, structural and
weight mutation, crossover, speciation with stagnation and elitism, and
feed-forward phenotype compilation."""

from .genes import (BIAS_ID, ConnectionGene, Genome, InnovationTable,
                    InvalidGenomeError, NodeGene, NUM_INPUTS, NUM_OUTPUTS,
                    THRUST_ID, TURN_ID, genome_from_dict, genome_to_dict)
from .network import Phenotype, activate, build_network
from .evolution import (EvolutionConfig, Species, compatibility, crossover,
                        initial_innovation_table, initial_population, mutate,
                        reproduce, speciate)
