"""Sweep experiments comparing the memetic solver against the plain GA.

Each (sweep value, repetition) point generates a fresh instance and runs both
solvers on it. Results go to two CSV files:

``detail.csv``
    one row per (sweep value, repetition, solver), columns ``DETAIL_COLUMNS``.
``summary.csv``
    per (sweep value, solver) mean and sample standard deviation of every
    metric column, columns ``SUMMARY_COLUMNS``.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..ga import GAConfig
from ..memetic import BUDGET_MODES, MemeticConfig, compare
from ..model import DEFAULT_THRESHOLD, DEFAULT_WEIGHTS, FitnessWeights, QueueThreshold, ValidationError
from . import io
from .generator import GeneratorSpec, generate_instance

KINDS = ("vary-tasks", "vary-population", "vary-generations")
SWEEP_PARAM = {"vary-tasks": "n", "vary-population": "population_size", "vary-generations": "generations"}
DEFAULT_SWEEPS = {
    "vary-tasks": list(range(20, 201, 20)),
    "vary-population": list(range(20, 101, 20)),
    "vary-generations": list(range(50, 501, 50)),
}
METRICS = ("best_fitness", "makespan", "ave_utilization", "comm_cost", "ave_accepted_queues", "evaluations_used")
DETAIL_COLUMNS = (
    "experiment", "sweep_param", "sweep_value", "repetition", "seed", "solver", *METRICS, "wall_time_ms",
)
SUMMARY_COLUMNS = (
    "experiment", "sweep_param", "sweep_value", "solver", "runs",
    *(f"{m}_{stat}" for m in METRICS for stat in ("mean", "std")),
)
SOLVERS = ("ga", "memetic")


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str = "vary-tasks"
    sweep: tuple = ()
    repetitions: int = 20
    generator: GeneratorSpec = field(default_factory=GeneratorSpec)
    memetic: MemeticConfig = field(default_factory=MemeticConfig)
    ga: GAConfig = field(default_factory=GAConfig)
    budget_mode: str = "equal-evaluations"
    weights: FitnessWeights = DEFAULT_WEIGHTS
    threshold: QueueThreshold = DEFAULT_THRESHOLD
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not self.sweep:
            object.__setattr__(self, "sweep", tuple(DEFAULT_SWEEPS[self.kind]))
        object.__setattr__(self, "sweep", tuple(int(v) for v in self.sweep))
        if self.repetitions < 1:
            raise ValidationError(f"repetitions must be >= 1, got {self.repetitions}")
        if self.budget_mode not in BUDGET_MODES:
            raise ValidationError(f"budget_mode must be one of {BUDGET_MODES}, got {self.budget_mode!r}")

    def point_seed(self, repetition: int) -> int:
        # shared across sweep values so every point sees the same repetition seeds
        return self.seed + repetition

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "sweep": list(self.sweep),
            "repetitions": self.repetitions,
            "generator": dataclasses.asdict(self.generator),
            "memetic": self.memetic.as_dict(),
            "ga": dataclasses.asdict(self.ga),
            "budget_mode": self.budget_mode,
            "weights": dataclasses.asdict(self.weights),
            "threshold": dataclasses.asdict(self.threshold),
            "seed": self.seed,
        }


def spec_from_dict(doc: dict) -> ExperimentSpec:
    doc = dict(doc)
    known = {f.name for f in dataclasses.fields(ExperimentSpec)}
    unknown = set(doc) - known
    if unknown:
        raise ValidationError(f"unknown experiment keys: {', '.join(sorted(unknown))}")
    gen = doc.pop("generator", None) or {}
    ga = io.ga_config_from_dict(doc.pop("ga", None))
    return ExperimentSpec(
        generator=io.build_config(GeneratorSpec, gen),
        ga=ga,
        memetic=io.memetic_config_from_dict(doc.pop("memetic", None), ga=ga),
        weights=io.weights_from_dict(doc.pop("weights", None)),
        threshold=io.threshold_from_dict(doc.pop("threshold", None)),
        **doc,
    )


def _point_configs(spec: ExperimentSpec, value: int, seed: int):
    gen = dataclasses.replace(spec.generator, seed=seed)
    mem_ga = dataclasses.replace(spec.memetic.ga, seed=seed)
    ga = dataclasses.replace(spec.ga, seed=seed)
    if spec.kind == "vary-tasks":
        gen = dataclasses.replace(gen, n=value)
    elif spec.kind == "vary-population":
        mem_ga = dataclasses.replace(mem_ga, population_size=value)
        ga = dataclasses.replace(ga, population_size=value)
    else:
        mem_ga = dataclasses.replace(mem_ga, generations=value)
        ga = dataclasses.replace(ga, generations=value)
    return gen, dataclasses.replace(spec.memetic, ga=mem_ga), ga


def run_point(spec: ExperimentSpec, value: int, repetition: int) -> list[dict]:
    """Both solvers on one freshly generated instance; one row per solver."""
    seed = spec.point_seed(repetition)
    gen, mem_cfg, ga_cfg = _point_configs(spec, value, seed)
    instance = generate_instance(gen)
    cmp = compare(instance, spec.weights, spec.threshold, mem_cfg, ga_cfg, spec.budget_mode)
    rows = []
    for solver in SOLVERS:
        res = getattr(cmp, solver)
        rep = res.best_report
        rows.append({
            "experiment": spec.kind,
            "sweep_param": SWEEP_PARAM[spec.kind],
            "sweep_value": value,
            "repetition": repetition,
            "seed": seed,
            "solver": solver,
            "best_fitness": rep.fitness,
            "makespan": rep.makespan,
            "ave_utilization": rep.ave_utilization,
            "comm_cost": rep.comm_cost,
            "ave_accepted_queues": rep.ave_accepted_queues,
            "evaluations_used": res.evaluations_used,
            "wall_time_ms": round(res.wall_time_ms, 3),
        })
    return rows


def _run_point_args(args):
    return run_point(*args)


def summarize(rows: list[dict]) -> list[dict]:
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault((row["experiment"], row["sweep_param"], row["sweep_value"], row["solver"]), []).append(row)
    out = []
    for (kind, param, value, solver), members in groups.items():
        summary = {"experiment": kind, "sweep_param": param, "sweep_value": value,
                   "solver": solver, "runs": len(members)}
        for metric in METRICS:
            vals = np.array([r[metric] for r in members], dtype=float)
            summary[f"{metric}_mean"] = float(vals.mean())
            summary[f"{metric}_std"] = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
        out.append(summary)
    return out


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return value


def write_csv(rows: list[dict], columns, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(row[k]) for k in columns})


def run_experiment(spec: ExperimentSpec, out_dir=None, workers: int = 1, progress=None) -> tuple[list[dict], list[dict]]:
    """Run every (sweep value, repetition) point and optionally write the CSVs.

    Rows come back sorted by sweep order, repetition, then solver, whatever
    order the worker pool finishes them in.
    """
    out = None
    if out_dir is not None:
        out = Path(out_dir)
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ValidationError(f"cannot create output directory {out}: {exc}") from exc
    jobs = [(spec, value, rep) for value in spec.sweep for rep in range(spec.repetitions)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_point_args, jobs))
    else:
        results = []
        for job in jobs:
            results.append(run_point(*job))
            if progress is not None:
                progress(job[1], job[2])
    order = {v: k for k, v in enumerate(spec.sweep)}
    rows = sorted((row for res in results for row in res),
                  key=lambda r: (order[r["sweep_value"]], r["repetition"], SOLVERS.index(r["solver"])))
    summary = summarize(rows)
    if out is not None:
        try:
            write_csv(rows, DETAIL_COLUMNS, out / "detail.csv")
            write_csv(summary, SUMMARY_COLUMNS, out / "summary.csv")
            (out / "experiment.json").write_text(json.dumps(spec.as_dict(), indent=1) + "\n")
        except OSError as exc:
            raise ValidationError(f"cannot write results to {out}: {exc}") from exc
    return rows, summary
