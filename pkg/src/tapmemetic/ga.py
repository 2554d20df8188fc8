"""Generational genetic algorithm over task-to-processor chromosomes.

Tournament selection, single-point crossover, per-gene uniform mutation and
elitism. This is both the baseline solver and the outer loop of the memetic
solver.
"""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import model
from .encoding import Chromosome, random_chromosome
from .model import (
    DEFAULT_THRESHOLD,
    DEFAULT_WEIGHTS,
    MetricsReport,
    ProblemInstance,
    ValidationError,
)


@dataclass(frozen=True)
class GAConfig:
    population_size: int = 50
    generations: int = 100
    crossover_rate: float = 0.9
    mutation_rate: float | None = None  # None resolves to 1/n
    tournament_size: int = 2
    elite_count: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 1:
            raise ValidationError(f"population_size must be >= 1, got {self.population_size}")
        if self.generations < 0:
            raise ValidationError(f"generations must be >= 0, got {self.generations}")
        if not 0 <= self.crossover_rate <= 1:
            raise ValidationError(f"crossover_rate must be in [0, 1], got {self.crossover_rate}")
        if self.mutation_rate is not None and not 0 <= self.mutation_rate <= 1:
            raise ValidationError(f"mutation_rate must be in [0, 1], got {self.mutation_rate}")
        if self.tournament_size < 2:
            raise ValidationError(f"tournament_size must be >= 2, got {self.tournament_size}")
        if not 1 <= self.elite_count <= self.population_size:
            raise ValidationError(
                f"elite_count must be in [1, population_size], got {self.elite_count}"
            )

    def resolved(self, n: int) -> "GAConfig":
        if self.mutation_rate is not None:
            return self
        return dataclasses.replace(self, mutation_rate=1.0 / n)


@dataclass
class RunResult:
    best_chromosome: Chromosome
    best_report: MetricsReport
    fitness_trace: list[float]
    evaluations_used: int
    config: dict = field(default_factory=dict)
    wall_time_ms: float = 0.0

    @property
    def best_fitness(self) -> float:
        return self.best_report.fitness


def ga_stream(seed: int) -> np.random.Generator:
    """Random stream driving initialization and the genetic operators."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))


def init_population(instance: ProblemInstance, config: GAConfig, rng: np.random.Generator) -> np.ndarray:
    n, m = instance.num_tasks, instance.num_processors
    return np.stack([random_chromosome(n, m, rng) for _ in range(config.population_size)])


def select(population: np.ndarray, fitness: np.ndarray, config: GAConfig, rng: np.random.Generator) -> Chromosome:
    """Tournament selection with replacement; ties go to the earlier draw."""
    entrants = rng.integers(0, len(population), size=config.tournament_size)
    winner = entrants[np.argmax(fitness[entrants])]
    return population[winner]


def crossover(parent_a, parent_b, rng: np.random.Generator, rate: float = 1.0, cut: int | None = None):
    """Single-point crossover; children swap suffixes starting at ``cut``.

    With probability ``1 - rate`` (or when n == 1) the children are copies.
    """
    a = np.asarray(parent_a)
    b = np.asarray(parent_b)
    if a.shape != b.shape:
        raise ValidationError(f"parents differ in length: {a.shape} vs {b.shape}")
    n = len(a)
    if cut is None:
        if n < 2 or rng.random() >= rate:
            return a.copy(), b.copy()
        cut = int(rng.integers(1, n))
    elif not 1 <= cut <= n - 1:
        raise ValidationError(f"cut must be in [1, {n - 1}], got {cut}")
    return np.concatenate([a[:cut], b[cut:]]), np.concatenate([b[:cut], a[cut:]])


def mutate(chromosome, mutation_rate: float, m: int, rng: np.random.Generator) -> Chromosome:
    genes = np.array(chromosome)
    hit = rng.random(len(genes)) < mutation_rate
    genes[hit] = rng.integers(0, m, size=int(hit.sum()))
    return genes


def elite_indices(fitness: np.ndarray, k: int) -> np.ndarray:
    """Indices of the ``k`` fittest individuals; stable, so ties keep population order."""
    return np.argsort(-fitness, kind="stable")[:k]


def ga_step(population: np.ndarray, fitness: np.ndarray, instance: ProblemInstance,
            config: GAConfig, rng: np.random.Generator) -> np.ndarray:
    """Build the next population from an evaluated one.

    The elites are copied unchanged and the remaining slots are filled with
    offspring from select, crossover and mutate.
    """
    config = config.resolved(instance.num_tasks)
    size = len(population)
    m = instance.num_processors
    nxt = [population[i].copy() for i in elite_indices(fitness, config.elite_count)]
    while len(nxt) < size:
        a = select(population, fitness, config, rng)
        b = select(population, fitness, config, rng)
        for child in crossover(a, b, rng, rate=config.crossover_rate):
            if len(nxt) < size:
                nxt.append(mutate(child, config.mutation_rate, m, rng))
    return np.stack(nxt)


Refiner = Callable[[np.ndarray, np.ndarray, int], int]


def evolve(instance: ProblemInstance, weights, threshold, config: GAConfig,
           refine: Refiner | None = None, stagnation_limit: int = 0) -> tuple:
    """Generational loop shared by the GA and memetic solvers.

    ``refine(population, fitness, generation)`` may improve individuals in
    place after each generation is bred and evaluated; it returns the number
    of fitness evaluations it spent. Returns ``(best, trace, evaluations)``.
    """
    rng = ga_stream(config.seed)
    population = init_population(instance, config, rng)
    fitness = model.batch_fitness(instance, population, weights, threshold)
    evaluations = len(population)
    best_idx = int(np.argmax(fitness))
    best, best_fit = population[best_idx].copy(), fitness[best_idx]
    trace = [float(best_fit)]
    stale = 0
    for generation in range(1, config.generations + 1):
        population = ga_step(population, fitness, instance, config, rng)
        fitness = model.batch_fitness(instance, population, weights, threshold)
        evaluations += len(population)
        if refine is not None:
            evaluations += refine(population, fitness, generation)
        idx = int(np.argmax(fitness))
        if fitness[idx] > best_fit:
            best, best_fit = population[idx].copy(), fitness[idx]
            stale = 0
        else:
            stale += 1
        trace.append(float(best_fit))
        if stagnation_limit and stale >= stagnation_limit:
            break
    return best, trace, evaluations


def finish(instance, best, weights, threshold, trace, evaluations, config, started) -> RunResult:
    return RunResult(
        best_chromosome=best.copy(),
        best_report=model.evaluate(instance, best, weights, threshold),
        fitness_trace=trace,
        evaluations_used=evaluations,
        config=config,
        wall_time_ms=(time.perf_counter() - started) * 1000.0,
    )


def run_ga(instance: ProblemInstance, weights=DEFAULT_WEIGHTS, threshold=DEFAULT_THRESHOLD,
           config: GAConfig = GAConfig()) -> RunResult:
    started = time.perf_counter()
    config = config.resolved(instance.num_tasks)
    best, trace, evaluations = evolve(instance, weights, threshold, config)
    return finish(instance, best, weights, threshold, trace, evaluations,
                  {"solver": "ga", "ga": dataclasses.asdict(config)}, started)
