"""Particle swarm search over decoded task assignments.

The swarm is held as stacked arrays (one row per particle) so a whole
iteration is a handful of numpy operations and one batched fitness call.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from . import model
from .encoding import Bounds, Chromosome, Particle, compute_bounds, decode, encode
from .model import DEFAULT_THRESHOLD, DEFAULT_WEIGHTS, ProblemInstance, ValidationError


@dataclass(frozen=True)
class PSOConfig:
    """Swarm hyperparameters.

    ``bounds`` is normally left as None and derived per instance, with
    ``v_max = v_max_factor * s_max``. ``seed_radius`` is the half-width of the
    box, in bucket widths, around the incumbent where the other particles
    start; ``velocity_radius`` is the same for their initial velocities.
    """

    swarm_size: int = 10
    iterations: int = 20
    inertia: float = 0.72
    c1: float = 1.49
    c2: float = 1.49
    v_max_factor: float = 0.5
    seed_radius: float = 0.5
    velocity_radius: float = 0.5
    bounds: Bounds | None = None

    def __post_init__(self):
        if self.swarm_size < 1:
            raise ValidationError(f"swarm_size must be >= 1, got {self.swarm_size}")
        if self.iterations < 0:
            raise ValidationError(f"iterations must be >= 0, got {self.iterations}")
        if self.inertia < 0:
            raise ValidationError(f"inertia must be >= 0, got {self.inertia}")
        if self.c1 < 0 or self.c2 < 0:
            raise ValidationError("c1 and c2 must be non-negative")
        if self.v_max_factor <= 0:
            raise ValidationError(f"v_max_factor must be positive, got {self.v_max_factor}")
        if self.seed_radius < 0 or self.velocity_radius < 0:
            raise ValidationError("seed_radius and velocity_radius must be >= 0")

    def for_instance(self, instance: ProblemInstance) -> "PSOConfig":
        if self.bounds is not None:
            return self
        return dataclasses.replace(self, bounds=compute_bounds(instance, self.v_max_factor))

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("bounds")
        return d


@dataclass
class Swarm:
    positions: np.ndarray
    velocities: np.ndarray
    pbest_positions: np.ndarray
    pbest_fitness: np.ndarray
    gbest_position: np.ndarray
    gbest_fitness: float

    @property
    def particles(self) -> list[Particle]:
        return [
            Particle(self.positions[k], self.velocities[k], self.pbest_positions[k], float(self.pbest_fitness[k]))
            for k in range(len(self.positions))
        ]

    def copy(self) -> "Swarm":
        return Swarm(
            self.positions.copy(), self.velocities.copy(), self.pbest_positions.copy(),
            self.pbest_fitness.copy(), self.gbest_position.copy(), self.gbest_fitness,
        )


class LocalSearchResult(NamedTuple):
    chromosome: Chromosome
    fitness: float
    evaluations: int


def _bounds(config: PSOConfig) -> Bounds:
    if config.bounds is None:
        raise ValidationError("PSOConfig.bounds is unset; call config.for_instance(instance) first")
    return config.bounds


def update_velocity(particle: Particle, gbest_position, config: PSOConfig, rng=None, rand1=None, rand2=None):
    """Inertia plus cognitive and social pulls, clamped to ``[-v_max, v_max]``.

    ``rand1``/``rand2`` replace the per-coordinate uniform draws when given.
    Works on a single particle or on stacked (k, n) arrays.
    """
    s = np.asarray(particle.position, dtype=float)
    if rand1 is None:
        rand1 = rng.random(s.shape)
    if rand2 is None:
        rand2 = rng.random(s.shape)
    v = (config.inertia * np.asarray(particle.velocity, dtype=float)
         + config.c1 * rand1 * (np.asarray(particle.pbest_position) - s)
         + config.c2 * rand2 * (np.asarray(gbest_position) - s))
    v_max = _bounds(config).v_max
    return np.clip(v, -v_max, v_max)


def update_position(particle: Particle, config: PSOConfig):
    """Move by the (already updated) velocity, clamped to ``[-s_max, s_max]``."""
    s_max = _bounds(config).s_max
    return np.clip(np.asarray(particle.position) + np.asarray(particle.velocity), -s_max, s_max)


def _evaluate(positions, instance, weights, threshold, config):
    genes = decode(positions, _bounds(config), instance.num_processors)
    return model.batch_fitness(instance, genes, weights, threshold)


def init_swarm(chromosome, instance: ProblemInstance, weights, threshold, config: PSOConfig,
               rng: np.random.Generator) -> Swarm:
    """Particle 0 sits at the incumbent's bucket centers with zero velocity.

    The others start within ``seed_radius`` bucket widths of it per
    coordinate (``s_max / m`` for the default half-bucket radius) and carry
    a random initial velocity.
    """
    bounds = _bounds(config)
    m = instance.num_processors
    center = encode(chromosome, bounds, m)
    k, n = config.swarm_size, len(center)
    width = 2 * bounds.s_max / m
    radius = config.seed_radius * width
    vradius = config.velocity_radius * width
    positions = np.empty((k, n))
    velocities = np.zeros((k, n))
    positions[0] = center
    if k > 1:
        positions[1:] = center + rng.uniform(-radius, radius, size=(k - 1, n))
        velocities[1:] = rng.uniform(-vradius, vradius, size=(k - 1, n))
    positions = np.clip(positions, -bounds.s_max, bounds.s_max)
    velocities = np.clip(velocities, -bounds.v_max, bounds.v_max)
    fit = _evaluate(positions, instance, weights, threshold, config)
    g = int(np.argmax(fit))
    return Swarm(positions, velocities, positions.copy(), fit, positions[g].copy(), float(fit[g]))


def pso_iteration(swarm: Swarm, instance: ProblemInstance, weights, threshold, config: PSOConfig,
                  rng: np.random.Generator) -> Swarm:
    """One synchronous move of every particle, then pbest and gbest refresh.

    A particle's pbest is replaced only on strict improvement.
    """
    stacked = Particle(swarm.positions, swarm.velocities, swarm.pbest_positions, 0.0)
    velocities = update_velocity(stacked, swarm.gbest_position, config, rng)
    stacked.velocity = velocities
    positions = update_position(stacked, config)
    fit = _evaluate(positions, instance, weights, threshold, config)
    better = fit > swarm.pbest_fitness
    pbest_positions = np.where(better[:, None], positions, swarm.pbest_positions)
    pbest_fitness = np.where(better, fit, swarm.pbest_fitness)
    g = int(np.argmax(pbest_fitness))
    return Swarm(positions, velocities, pbest_positions, pbest_fitness,
                 pbest_positions[g].copy(), float(pbest_fitness[g]))


def local_search(chromosome, instance: ProblemInstance, weights=DEFAULT_WEIGHTS, threshold=DEFAULT_THRESHOLD,
                 config: PSOConfig = PSOConfig(), rng: np.random.Generator | None = None,
                 observer: Callable[[Swarm], None] | None = None) -> LocalSearchResult:
    """Refine one chromosome with a swarm seeded around it.

    The decoded gbest is returned only if it strictly beats the input;
    otherwise the input comes back unchanged. ``observer`` sees the swarm
    after initialization and after every iteration.
    """
    genes = np.asarray(chromosome)
    if config.iterations == 0:
        return LocalSearchResult(genes.copy(), model.fitness(instance, genes, weights, threshold), 0)
    if rng is None:
        rng = np.random.default_rng()
    config = config.for_instance(instance)
    swarm = init_swarm(genes, instance, weights, threshold, config, rng)
    # particle 0 decodes to the input, so its initial pbest is the input's fitness
    start_fitness = float(swarm.pbest_fitness[0])
    if observer is not None:
        observer(swarm)
    for _ in range(config.iterations):
        swarm = pso_iteration(swarm, instance, weights, threshold, config, rng)
        if observer is not None:
            observer(swarm)
    evaluations = config.swarm_size * (config.iterations + 1)
    if swarm.gbest_fitness > start_fitness:
        best = decode(swarm.gbest_position, config.bounds, instance.num_processors)
        return LocalSearchResult(best, swarm.gbest_fitness, evaluations)
    return LocalSearchResult(genes.copy(), start_fitness, evaluations)
