"""Network intrusion detection with GA-evolved fuzzy cellular automata."""
from .dataset import Label, Mode
from .engine import (AttractorResult, BasinId, EvolutionParams, basin_fingerprint,
                     evolve_to_attractor, step)
from .ga import FitnessScore, GaConfig, crossover, evolve_population, fitness, mutate, \
    random_chromosome
from .rules import Chromosome, RuleId, RuleVector, build_dependency_matrix, rule_next_state
from .tree import TreeConfig, TreeNode, Verdict, anomaly_score, build_tree, classify, \
    classify_many, distribute, malicious_index

__version__ = "0.1.0"
