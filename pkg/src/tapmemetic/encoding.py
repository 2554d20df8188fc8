"""Chromosomes, particles and the bridge between them.

A chromosome is an integer vector ``genes`` with ``genes[i]`` the processor of
task ``i``. A particle coordinate lives in ``[-s_max, s_max]``; that interval
is cut into ``m`` equal buckets and coordinate ``i`` decodes to the bucket it
falls in.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ProblemInstance, ValidationError

Chromosome = np.ndarray


@dataclass(frozen=True)
class Bounds:
    s_max: float
    v_max: float

    def __post_init__(self):
        if not (self.s_max > 0 and self.v_max > 0):
            raise ValidationError(f"bounds must be positive, got s_max={self.s_max}, v_max={self.v_max}")


@dataclass
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    pbest_position: np.ndarray
    pbest_fitness: float


def compute_bounds(instance: ProblemInstance, v_max_factor: float = 0.5) -> Bounds:
    """Position bound = serial execution time when every task takes its slowest processor."""
    s_max = float(instance.exec_time.max(axis=1).sum())
    return Bounds(s_max=s_max, v_max=v_max_factor * s_max)


def decode(position: np.ndarray, bounds: Bounds, m: int) -> Chromosome:
    """Map positions (any leading shape) to processor indices.

    Coordinates outside the bounds are clipped first, so the map is total.
    """
    s = bounds.s_max
    pos = np.clip(np.asarray(position, dtype=float), -s, s)
    genes = np.floor((pos + s) / (2 * s) * m).astype(np.int64)
    return np.minimum(genes, m - 1)


def encode(chromosome: Chromosome, bounds: Bounds, m: int) -> np.ndarray:
    """Center of each gene's bucket; ``decode(encode(c)) == c``."""
    genes = np.asarray(chromosome)
    s = bounds.s_max
    return (genes + 0.5) / m * (2 * s) - s


def task_order(instance: ProblemInstance, chromosome: Chromosome) -> list[list[int]]:
    """Queue of each processor: its tasks by descending execution time, ties by index."""
    genes = np.asarray(chromosome)
    queues = []
    for p in range(instance.num_processors):
        tasks = np.flatnonzero(genes == p)
        times = instance.exec_time[tasks, p]
        queues.append([int(t) for t in tasks[np.lexsort((tasks, -times))]])
    return queues


def random_chromosome(n: int, m: int, rng: np.random.Generator) -> Chromosome:
    if n < 1 or m < 1:
        raise ValidationError(f"need n, m >= 1, got n={n}, m={m}")
    return rng.integers(0, m, size=n)
