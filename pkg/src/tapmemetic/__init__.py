"""Static task assignment on heterogeneous processors.

A genetic algorithm with particle-swarm local search (the memetic solver), a
plain genetic algorithm baseline, and exhaustive verification oracles.
"""

from .encoding import Bounds, compute_bounds, decode, encode
from .ga import GAConfig, RunResult, run_ga
from .memetic import MemeticConfig, compare, run_memetic
from .model import (
    Assignment,
    FitnessWeights,
    MetricsReport,
    ProblemInstance,
    QueueThreshold,
    ValidationError,
    evaluate,
)
from .oracle import exhaustive_best, naive_evaluate
from .pso import PSOConfig, local_search

__all__ = [
    "Assignment",
    "Bounds",
    "FitnessWeights",
    "GAConfig",
    "MemeticConfig",
    "MetricsReport",
    "PSOConfig",
    "ProblemInstance",
    "QueueThreshold",
    "RunResult",
    "ValidationError",
    "compare",
    "compute_bounds",
    "decode",
    "encode",
    "evaluate",
    "exhaustive_best",
    "local_search",
    "naive_evaluate",
    "run_ga",
    "run_memetic",
]
