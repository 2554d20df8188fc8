"""Seeded random instance generation."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from ..model import ProblemInstance, ValidationError


@dataclass(frozen=True)
class GeneratorSpec:
    n: int = 50
    m: int = 8
    exec_time_range: tuple[float, float] = (1.0, 50.0)
    comm_delay_range: tuple[float, float] = (0.0, 10.0)
    comm_rate_range: tuple[float, float] = (0.0, 2.0)
    data_volume_range: tuple[float, float] = (0.0, 20.0)
    preload_range: tuple[float, float] = (0.0, 0.0)
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValidationError(f"need n, m >= 1, got n={self.n}, m={self.m}")
        for f in dataclasses.fields(self):
            if f.name.endswith("_range"):
                lo, hi = getattr(self, f.name)
                object.__setattr__(self, f.name, (float(lo), float(hi)))
                if not 0 <= lo <= hi:
                    raise ValidationError(f"{f.name} must satisfy 0 <= min <= max, got ({lo}, {hi})")
        if self.exec_time_range[0] <= 0:
            raise ValidationError("exec_time_range minimum must be positive")


def generate_instance(spec: GeneratorSpec) -> ProblemInstance:
    """Draw every entry uniformly from its range; comm diagonals are zeroed."""
    rng = np.random.default_rng(spec.seed)
    n, m = spec.n, spec.m
    exec_time = rng.uniform(*spec.exec_time_range, size=(n, m))
    comm_delay = rng.uniform(*spec.comm_delay_range, size=(m, m))
    comm_rate = rng.uniform(*spec.comm_rate_range, size=(m, m))
    np.fill_diagonal(comm_delay, 0.0)
    np.fill_diagonal(comm_rate, 0.0)
    data_volume = rng.uniform(*spec.data_volume_range, size=n)
    origin = rng.integers(0, m, size=n)
    preload = rng.uniform(*spec.preload_range, size=m)
    return ProblemInstance(exec_time, comm_delay, comm_rate, data_volume, origin, preload)
