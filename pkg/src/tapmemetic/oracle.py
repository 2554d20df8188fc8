"""Verification oracles: exhaustive search and a literal metric transcription.

``naive_evaluate`` deliberately shares no code with :mod:`tapmemetic.model`;
it is plain loops over Python floats, written straight from the metric
definitions, and exists only to cross-check the vectorized path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import model
from .model import (
    DEFAULT_THRESHOLD,
    DEFAULT_WEIGHTS,
    Assignment,
    MetricsReport,
    ProblemInstance,
    ValidationError,
)

DEFAULT_LIMIT = 2_000_000
TIE_TOLERANCE = 1e-12


class BudgetExceeded(ValidationError):
    """The search space is larger than the enumeration budget."""


@dataclass(frozen=True)
class OracleResult:
    best_assignment: Assignment
    best_fitness: float
    optima_count: int


def _lexicographic_block(start: int, stop: int, n: int, m: int) -> np.ndarray:
    """Rows ``start..stop-1`` of the base-m enumeration, most significant task first."""
    codes = np.arange(start, stop, dtype=np.int64)
    genes = np.empty((len(codes), n), dtype=np.int64)
    for i in range(n - 1, -1, -1):
        codes, genes[:, i] = np.divmod(codes, m)
    return genes


def exhaustive_best(instance: ProblemInstance, weights=DEFAULT_WEIGHTS, threshold=DEFAULT_THRESHOLD,
                    limit: int = DEFAULT_LIMIT, block: int = 65536) -> OracleResult:
    """Enumerate all ``m**n`` assignments and return the fittest.

    Ties go to the lexicographically smallest assignment vector.
    """
    n, m = instance.num_tasks, instance.num_processors
    total = m ** n  # exact Python integer, cannot overflow
    if total > limit:
        raise BudgetExceeded(f"search space m^n = {m}^{n} = {total} exceeds limit {limit}")
    fitness = np.empty(total)
    for start in range(0, total, block):
        stop = min(start + block, total)
        fitness[start:stop] = model.batch_fitness(
            instance, _lexicographic_block(start, stop, n, m), weights, threshold
        )
    best_code = int(np.argmax(fitness))
    best_fit = float(fitness[best_code])
    ties = int(np.count_nonzero(np.abs(fitness - best_fit) <= TIE_TOLERANCE))
    best = _lexicographic_block(best_code, best_code + 1, n, m)[0]
    return OracleResult(Assignment(best), best_fit, ties)


def naive_evaluate(instance: ProblemInstance, assignment, weights=DEFAULT_WEIGHTS,
                   threshold=DEFAULT_THRESHOLD) -> MetricsReport:
    n, m = instance.num_tasks, instance.num_processors
    a = instance.exec_time.tolist()
    r = instance.comm_delay.tolist()
    h = instance.comm_rate.tolist()
    d = instance.data_volume.tolist()
    c = [int(x) for x in instance.origin]
    pre = instance.preexisting_load.tolist()
    f = [int(x) for x in (assignment.target if isinstance(assignment, Assignment) else assignment)]
    if len(f) != n or any(not 0 <= x < m for x in f):
        raise ValidationError("assignment does not match the instance")

    loads = []
    for p in range(m):
        new = 0.0
        for i in range(n):
            if f[i] == p:
                new += a[i][p]
        loads.append(pre[p] + new)

    mk = loads[0]
    for p in range(1, m):
        if loads[p] > mk:
            mk = loads[p]
    if mk <= 0:
        raise ValidationError("makespan is zero; utilization is undefined")

    cc = 0.0
    for i in range(n):
        cc += r[c[i]][f[i]] + h[c[i]][f[i]] * d[i]

    util = [loads[p] / mk for p in range(m)]
    total_u = 0.0
    for u in util:
        total_u += u
    ave_u = total_u / m

    total_load = 0.0
    for x in loads:
        total_load += x
    mean_load = total_load / m
    lo = threshold.lower_factor * mean_load
    hi = threshold.upper_factor * mean_load
    accepted = 0
    for x in loads:
        if lo <= x <= hi:
            accepted += 1
    ave_apq = accepted / m

    cc_guarded = cc if cc > weights.comm_floor else weights.comm_floor
    fit = (weights.gamma * ave_u) * (weights.theta * ave_apq) / (
        (weights.alpha * mk) * (weights.beta * cc_guarded)
    )
    return MetricsReport(
        per_processor_load=np.array(loads),
        makespan=mk,
        comm_cost=cc,
        per_processor_utilization=np.array(util),
        ave_utilization=ave_u,
        accepted_queues=accepted,
        ave_accepted_queues=ave_apq,
        fitness=fit,
    )
