"""Static task-assignment problem data and its evaluation metrics.

Processor and task indices are 0-based everywhere inside the package. The
file formats in :mod:`tapmemetic.harness.io` convert to and from 1-based
indices at the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ValidationError(ValueError):
    """Raised for malformed instances, assignments or configurations."""


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """Full input of a static task-assignment problem.

    Parameters
    ----------
    exec_time : ndarray of shape (n, m)
        ``exec_time[i, j]`` is the time to run task ``i`` on processor ``j``.
    comm_delay : ndarray of shape (m, m)
        Fixed delay rate for moving a task between two processors.
    comm_rate : ndarray of shape (m, m)
        Time to move one data unit between two processors.
    data_volume : ndarray of shape (n,)
        Data units that travel with a task when it runs remotely.
    origin : ndarray of shape (n,)
        Processor each task currently resides on.
    preexisting_load : ndarray of shape (m,)
        Execution time already queued on each processor.
    """

    exec_time: np.ndarray
    comm_delay: np.ndarray
    comm_rate: np.ndarray
    data_volume: np.ndarray
    origin: np.ndarray
    preexisting_load: np.ndarray

    def __post_init__(self):
        cast = {
            "exec_time": float,
            "comm_delay": float,
            "comm_rate": float,
            "data_volume": float,
            "origin": np.int64,
            "preexisting_load": float,
        }
        for name, dtype in cast.items():
            arr = np.array(getattr(self, name), dtype=dtype)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        self.validate()

    @property
    def num_tasks(self) -> int:
        return self.exec_time.shape[0]

    @property
    def num_processors(self) -> int:
        return self.exec_time.shape[1]

    def validate(self):
        a = self.exec_time
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise ValidationError(f"exec_time must be a non-empty n x m matrix, got shape {a.shape}")
        n, m = a.shape
        for name in ("comm_delay", "comm_rate"):
            mat = getattr(self, name)
            if mat.shape != (m, m):
                raise ValidationError(f"{name} must be {m}x{m}, got {mat.shape}")
            if np.any(mat < 0) or not np.all(np.isfinite(mat)):
                raise ValidationError(f"{name} entries must be finite and non-negative")
            if np.any(np.diag(mat) != 0):
                raise ValidationError(f"{name} must have a zero diagonal")
        if not np.all(np.isfinite(a)) or np.any(a <= 0):
            raise ValidationError("exec_time entries must be finite and strictly positive")
        if self.data_volume.shape != (n,):
            raise ValidationError(f"data_volume must have length {n}, got {self.data_volume.shape}")
        if np.any(self.data_volume < 0) or not np.all(np.isfinite(self.data_volume)):
            raise ValidationError("data_volume entries must be finite and non-negative")
        if self.origin.shape != (n,):
            raise ValidationError(f"origin must have length {n}, got {self.origin.shape}")
        if np.any(self.origin < 0) or np.any(self.origin >= m):
            raise ValidationError("origin entries must be valid processor indices")
        if self.preexisting_load.shape != (m,):
            raise ValidationError(f"preexisting_load must have length {m}, got {self.preexisting_load.shape}")
        if np.any(self.preexisting_load < 0) or not np.all(np.isfinite(self.preexisting_load)):
            raise ValidationError("preexisting_load entries must be finite and non-negative")

    def __eq__(self, other):
        if not isinstance(other, ProblemInstance):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, f), getattr(other, f))
            for f in ("exec_time", "comm_delay", "comm_rate", "data_volume", "origin", "preexisting_load")
        )


@dataclass(frozen=True, eq=False)
class Assignment:
    """Target processor for every task (0-based)."""

    target: np.ndarray

    def __post_init__(self):
        arr = np.array(self.target, dtype=np.int64)
        if arr.ndim != 1:
            raise ValidationError("assignment must be a 1-d vector")
        arr.setflags(write=False)
        object.__setattr__(self, "target", arr)

    @classmethod
    def from_one_based(cls, target) -> "Assignment":
        return cls(np.asarray(target, dtype=np.int64) - 1)

    def one_based(self) -> list[int]:
        return [int(g) + 1 for g in self.target]

    def __eq__(self, other):
        if not isinstance(other, Assignment):
            return NotImplemented
        return np.array_equal(self.target, other.target)

    def __len__(self):
        return len(self.target)


@dataclass(frozen=True)
class FitnessWeights:
    """Multipliers on makespan (alpha), communication cost (beta), average
    utilization (gamma) and accepted-queue ratio (theta).

    ``comm_floor`` guards the denominator: a communication cost below it is
    treated as equal to it, so keeping every task at home stays finite.
    """

    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    theta: float = 1.0
    comm_floor: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "theta"):
            w = getattr(self, name)
            if not 0 < w <= 1:
                raise ValidationError(f"weight {name}={w} must lie in (0, 1]")
        if not self.comm_floor > 0:
            raise ValidationError(f"comm_floor must be positive, got {self.comm_floor}")


@dataclass(frozen=True)
class QueueThreshold:
    """Acceptance band for a processor queue, as multiples of the mean load."""

    lower_factor: float = 0.5
    upper_factor: float = 1.5

    def __post_init__(self):
        if not 0 < self.lower_factor < self.upper_factor:
            raise ValidationError(
                f"need 0 < lower_factor < upper_factor, got {self.lower_factor}, {self.upper_factor}"
            )


@dataclass(frozen=True, eq=False)
class MetricsReport:
    per_processor_load: np.ndarray
    makespan: float
    comm_cost: float
    per_processor_utilization: np.ndarray
    ave_utilization: float
    accepted_queues: int
    ave_accepted_queues: float
    fitness: float

    def to_dict(self) -> dict:
        return {
            "per_processor_load": [float(x) for x in self.per_processor_load],
            "makespan": float(self.makespan),
            "comm_cost": float(self.comm_cost),
            "per_processor_utilization": [float(x) for x in self.per_processor_utilization],
            "ave_utilization": float(self.ave_utilization),
            "accepted_queues": int(self.accepted_queues),
            "ave_accepted_queues": float(self.ave_accepted_queues),
            "fitness": float(self.fitness),
        }


DEFAULT_WEIGHTS = FitnessWeights()
DEFAULT_THRESHOLD = QueueThreshold()


def _check_genes(instance: ProblemInstance, genes: np.ndarray) -> np.ndarray:
    genes = np.asarray(genes)
    if genes.ndim == 1:
        genes = genes[None, :]
    if genes.ndim != 2 or genes.shape[1] != instance.num_tasks:
        raise ValidationError(
            f"assignment must have {instance.num_tasks} entries, got shape {genes.shape[-1:]}"
        )
    if not np.issubdtype(genes.dtype, np.integer):
        raise ValidationError("assignment entries must be integers")
    if genes.size and (genes.min() < 0 or genes.max() >= instance.num_processors):
        raise ValidationError("assignment entries must be valid processor indices")
    return genes


def _as_genes(assignment) -> np.ndarray:
    if isinstance(assignment, Assignment):
        return assignment.target
    return np.asarray(assignment)


def batch_loads(instance: ProblemInstance, genes: np.ndarray) -> np.ndarray:
    """Per-processor loads for a (k, n) batch of assignments."""
    k, n = genes.shape
    m = instance.num_processors
    times = instance.exec_time[np.arange(n), genes]
    # bincount accumulates in input order, so each row sums tasks 0..n-1 sequentially
    flat = (genes + (np.arange(k) * m)[:, None]).ravel()
    assigned = np.bincount(flat, weights=times.ravel(), minlength=k * m).reshape(k, m)
    return instance.preexisting_load + assigned


def batch_comm_cost(instance: ProblemInstance, genes: np.ndarray) -> np.ndarray:
    c = instance.origin
    terms = instance.comm_delay[c, genes] + instance.comm_rate[c, genes] * instance.data_volume
    return np.cumsum(terms, axis=1)[:, -1]


def batch_metrics(instance, genes, weights=DEFAULT_WEIGHTS, threshold=DEFAULT_THRESHOLD) -> dict:
    """Every metric for a (k, n) batch of 0-based assignments, as arrays."""
    genes = _check_genes(instance, genes)
    m = instance.num_processors
    loads = batch_loads(instance, genes)
    makespan = loads.max(axis=1)
    if np.any(makespan <= 0):
        raise ValidationError("makespan is zero; utilization is undefined")
    util = loads / makespan[:, None]
    ave_u = np.cumsum(util, axis=1)[:, -1] / m
    mean_load = np.cumsum(loads, axis=1)[:, -1] / m
    lower = threshold.lower_factor * mean_load
    upper = threshold.upper_factor * mean_load
    accepted = ((loads >= lower[:, None]) & (loads <= upper[:, None])).sum(axis=1)
    ave_apq = accepted / m
    cc = batch_comm_cost(instance, genes)
    guarded = np.maximum(cc, weights.comm_floor)
    fit = (weights.gamma * ave_u) * (weights.theta * ave_apq) / (
        (weights.alpha * makespan) * (weights.beta * guarded)
    )
    return {
        "loads": loads,
        "makespan": makespan,
        "comm_cost": cc,
        "utilization": util,
        "ave_utilization": ave_u,
        "accepted_queues": accepted,
        "ave_accepted_queues": ave_apq,
        "fitness": fit,
    }


def batch_fitness(instance, genes, weights=DEFAULT_WEIGHTS, threshold=DEFAULT_THRESHOLD) -> np.ndarray:
    return batch_metrics(instance, genes, weights, threshold)["fitness"]


def _single(instance, assignment) -> np.ndarray:
    return _check_genes(instance, _as_genes(assignment))


def load(instance: ProblemInstance, assignment, p: int) -> float:
    """Pre-existing plus newly assigned execution time on processor ``p``."""
    if not 0 <= p < instance.num_processors:
        raise ValidationError(f"processor index {p} out of range")
    return float(batch_loads(instance, _single(instance, assignment))[0, p])


def makespan(instance: ProblemInstance, assignment) -> float:
    return float(batch_loads(instance, _single(instance, assignment))[0].max())


def comm_cost(instance: ProblemInstance, assignment) -> float:
    return float(batch_comm_cost(instance, _single(instance, assignment))[0])


def utilization(instance: ProblemInstance, assignment, p: int) -> float:
    if not 0 <= p < instance.num_processors:
        raise ValidationError(f"processor index {p} out of range")
    return float(batch_metrics(instance, _single(instance, assignment))["utilization"][0, p])


def ave_utilization(instance: ProblemInstance, assignment) -> float:
    return float(batch_metrics(instance, _single(instance, assignment))["ave_utilization"][0])


def accepted_queues(instance: ProblemInstance, assignment, threshold=DEFAULT_THRESHOLD) -> tuple[int, float]:
    """Count processors whose load falls inside the threshold band.

    Returns the count and the count divided by the number of processors.
    """
    res = batch_metrics(instance, _single(instance, assignment), threshold=threshold)
    return int(res["accepted_queues"][0]), float(res["ave_accepted_queues"][0])


def fitness(instance, assignment, weights=DEFAULT_WEIGHTS, threshold=DEFAULT_THRESHOLD) -> float:
    """Scalar fitness of one assignment; higher is better."""
    return float(batch_metrics(instance, _single(instance, assignment), weights, threshold)["fitness"][0])


def evaluate(instance, assignment, weights=DEFAULT_WEIGHTS, threshold=DEFAULT_THRESHOLD) -> MetricsReport:
    res = batch_metrics(instance, _single(instance, assignment), weights, threshold)
    return MetricsReport(
        per_processor_load=res["loads"][0],
        makespan=float(res["makespan"][0]),
        comm_cost=float(res["comm_cost"][0]),
        per_processor_utilization=res["utilization"][0],
        ave_utilization=float(res["ave_utilization"][0]),
        accepted_queues=int(res["accepted_queues"][0]),
        ave_accepted_queues=float(res["ave_accepted_queues"][0]),
        fitness=float(res["fitness"][0]),
    )
