"""Genetic algorithm with particle-swarm local search on the best offspring."""

from __future__ import annotations

import dataclasses
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .ga import GAConfig, RunResult, elite_indices, evolve, finish, run_ga
from .model import DEFAULT_THRESHOLD, DEFAULT_WEIGHTS, ProblemInstance, ValidationError
from .pso import PSOConfig, local_search

BUDGET_MODES = ("equal-generations", "equal-evaluations")


@dataclass(frozen=True)
class MemeticConfig:
    ga: GAConfig = field(default_factory=GAConfig)
    pso: PSOConfig = field(default_factory=PSOConfig)
    local_search_fraction: float = 0.1
    stagnation_limit: int = 0

    def __post_init__(self):
        if not 0 < self.local_search_fraction <= 1:
            raise ValidationError(
                f"local_search_fraction must be in (0, 1], got {self.local_search_fraction}"
            )
        if self.stagnation_limit < 0:
            raise ValidationError(f"stagnation_limit must be >= 0, got {self.stagnation_limit}")

    @property
    def refined_per_generation(self) -> int:
        return math.ceil(self.local_search_fraction * self.ga.population_size)

    def as_dict(self) -> dict:
        return {
            "ga": dataclasses.asdict(self.ga),
            "pso": self.pso.as_dict(),
            "local_search_fraction": self.local_search_fraction,
            "stagnation_limit": self.stagnation_limit,
        }


def local_search_stream(seed: int, generation: int, slot: int) -> np.random.Generator:
    """Independent stream for one local-search call.

    Keyed by (generation, slot) so it never draws from the GA stream and does
    not depend on the order the calls run in.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1, generation, slot)))


def run_memetic(instance: ProblemInstance, weights=DEFAULT_WEIGHTS, threshold=DEFAULT_THRESHOLD,
                config: MemeticConfig = MemeticConfig()) -> RunResult:
    started = time.perf_counter()
    ga_config = config.ga.resolved(instance.num_tasks)
    pso_config = config.pso.for_instance(instance)
    k = config.refined_per_generation

    def refine(population, fitness, generation):
        spent = 0
        for slot, idx in enumerate(elite_indices(fitness, k)):
            rng = local_search_stream(ga_config.seed, generation, slot)
            res = local_search(population[idx], instance, weights, threshold, pso_config, rng)
            population[idx] = res.chromosome
            fitness[idx] = res.fitness
            spent += res.evaluations
        return spent

    # no iterations means no search at all: skip the hook so nothing is spent
    hook = refine if pso_config.iterations > 0 else None
    best, trace, evaluations = evolve(instance, weights, threshold, ga_config, hook, config.stagnation_limit)
    cfg = dataclasses.replace(config, ga=ga_config)
    return finish(instance, best, weights, threshold, trace, evaluations,
                  {"solver": "memetic", **cfg.as_dict()}, started)


@dataclass
class Comparison:
    memetic: RunResult
    ga: RunResult
    budget_mode: str
    declared_budget: int

    def summary(self) -> dict:
        out = {"budget_mode": self.budget_mode, "declared_budget": self.declared_budget}
        for name, res in (("memetic", self.memetic), ("ga", self.ga)):
            out[name] = {
                "best_fitness": res.best_report.fitness,
                "makespan": res.best_report.makespan,
                "ave_utilization": res.best_report.ave_utilization,
                "evaluations_used": res.evaluations_used,
                "generations_run": len(res.fitness_trace) - 1,
            }
        return out


def matched_ga_config(ga_config: GAConfig, evaluations: int) -> GAConfig:
    """GA config whose evaluation count is the smallest multiple of the
    population size that reaches ``evaluations``."""
    generations = max(0, math.ceil(evaluations / ga_config.population_size) - 1)
    return dataclasses.replace(ga_config, generations=generations)


def compare(instance: ProblemInstance, weights=DEFAULT_WEIGHTS, threshold=DEFAULT_THRESHOLD,
            memetic_config: MemeticConfig = MemeticConfig(), ga_config: GAConfig = GAConfig(),
            budget_mode: str = "equal-evaluations") -> Comparison:
    """Run both solvers on one instance under the chosen budget parity.

    ``equal-generations`` runs both for the memetic config's generation count.
    ``equal-evaluations`` runs the memetic solver first and then gives the
    GA as many generations as it takes to spend at least the same number of
    fitness evaluations.
    """
    if budget_mode not in BUDGET_MODES:
        raise ValidationError(f"budget_mode must be one of {BUDGET_MODES}, got {budget_mode!r}")
    mem = run_memetic(instance, weights, threshold, memetic_config)
    if budget_mode == "equal-evaluations":
        ga_config = matched_ga_config(ga_config, mem.evaluations_used)
        declared = mem.evaluations_used
    else:
        ga_config = dataclasses.replace(ga_config, generations=memetic_config.ga.generations)
        declared = memetic_config.ga.generations
    ga = run_ga(instance, weights, threshold, ga_config)
    return Comparison(memetic=mem, ga=ga, budget_mode=budget_mode, declared_budget=declared)
