"""Command-line entry point: ``tapmemetic <subcommand> ...``.

Every subcommand prints its effective configuration (defaults resolved) as a
JSON line on stderr before doing any work.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from ..ga import run_ga
from ..memetic import compare, run_memetic
from ..model import Assignment, ValidationError, evaluate
from ..oracle import DEFAULT_LIMIT, exhaustive_best
from . import io
from .experiment import KINDS, run_experiment, spec_from_dict
from .generator import GeneratorSpec, generate_instance

BUDGET_FLAGS = {"generations": "equal-generations", "evaluations": "equal-evaluations"}

# flag -> (config section, field)
OVERRIDES = {
    "population": ("ga", "population_size"),
    "generations": ("ga", "generations"),
    "crossover_rate": ("ga", "crossover_rate"),
    "mutation_rate": ("ga", "mutation_rate"),
    "tournament_size": ("ga", "tournament_size"),
    "elites": ("ga", "elite_count"),
    "seed": ("ga", "seed"),
    "swarm_size": ("pso", "swarm_size"),
    "pso_iterations": ("pso", "iterations"),
    "inertia": ("pso", "inertia"),
    "c1": ("pso", "c1"),
    "c2": ("pso", "c2"),
    "v_max_factor": ("pso", "v_max_factor"),
    "ls_fraction": ("memetic", "local_search_fraction"),
    "stagnation_limit": ("memetic", "stagnation_limit"),
    "alpha": ("weights", "alpha"),
    "beta": ("weights", "beta"),
    "gamma": ("weights", "gamma"),
    "theta": ("weights", "theta"),
    "comm_floor": ("weights", "comm_floor"),
    "lower_factor": ("threshold", "lower_factor"),
    "upper_factor": ("threshold", "upper_factor"),
}


def _add_fitness_args(p):
    g = p.add_argument_group("fitness")
    for name in ("alpha", "beta", "gamma", "theta"):
        g.add_argument(f"--{name}", type=float, help=f"fitness weight {name} in (0, 1] (default 1)")
    g.add_argument("--comm-floor", type=float,
                   help="communication cost below this counts as this value in the fitness denominator (default 1)")
    g.add_argument("--lower-factor", type=float, help="accepted-queue band lower multiple of mean load (default 0.5)")
    g.add_argument("--upper-factor", type=float, help="accepted-queue band upper multiple of mean load (default 1.5)")


def _add_solver_args(p):
    p.add_argument("--config", help="JSON file with 'ga', 'pso', 'memetic', 'weights', 'threshold' sections")
    p.add_argument("--seed", type=int)
    g = p.add_argument_group("genetic algorithm")
    g.add_argument("--population", type=int)
    g.add_argument("--generations", type=int)
    g.add_argument("--crossover-rate", type=float)
    g.add_argument("--mutation-rate", type=float, help="per-gene rate (default 1/n)")
    g.add_argument("--tournament-size", type=int)
    g.add_argument("--elites", type=int)
    g = p.add_argument_group("particle swarm local search")
    g.add_argument("--swarm-size", type=int)
    g.add_argument("--pso-iterations", type=int)
    g.add_argument("--inertia", type=float)
    g.add_argument("--c1", type=float)
    g.add_argument("--c2", type=float)
    g.add_argument("--v-max-factor", type=float, help="velocity bound as a fraction of the position bound")
    g.add_argument("--ls-fraction", type=float, help="fraction of the population refined each generation")
    g.add_argument("--stagnation-limit", type=int, help="stop after this many generations without improvement (0 = off)")
    _add_fitness_args(p)


def _sections(args) -> dict:
    doc = io.read_json(args.config) if getattr(args, "config", None) else {}
    unknown = set(doc) - {"ga", "pso", "memetic", "weights", "threshold"}
    if unknown:
        raise ValidationError(f"unknown config sections: {', '.join(sorted(unknown))}")
    sections = {k: dict(doc.get(k) or {}) for k in ("ga", "pso", "memetic", "weights", "threshold")}
    for flag, (section, key) in OVERRIDES.items():
        value = getattr(args, flag, None)
        if value is not None:
            sections[section][key] = value
    return sections


def _resolve(args, instance=None):
    s = _sections(args)
    ga = io.ga_config_from_dict(s["ga"])
    if instance is not None:
        ga = ga.resolved(instance.num_tasks)
    memetic = io.memetic_config_from_dict({**s["memetic"], "pso": s["pso"]}, ga=ga)
    return {
        "ga": ga,
        "memetic": memetic,
        "weights": io.weights_from_dict(s["weights"]),
        "threshold": io.threshold_from_dict(s["threshold"]),
    }


def _announce(command: str, config: dict) -> None:
    def plain(v):
        if hasattr(v, "as_dict"):
            return v.as_dict()
        if dataclasses.is_dataclass(v):
            return dataclasses.asdict(v)
        return v
    print(json.dumps({"command": command, "effective_config": {k: plain(v) for k, v in config.items()}},
                     sort_keys=True), file=sys.stderr)


def _emit(doc, out=None) -> None:
    text = io.dumps_document(doc)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _result_doc(res) -> dict:
    return {
        "best_assignment": [int(g) + 1 for g in res.best_chromosome],
        "best_report": res.best_report.to_dict(),
        "fitness_trace": res.fitness_trace,
        "evaluations_used": res.evaluations_used,
        "config": res.config,
    }


def cmd_generate(args) -> int:
    fields = {"n": args.n, "m": args.m, "seed": args.seed}
    for name in ("exec_time", "comm_delay", "comm_rate", "data_volume", "preload"):
        value = getattr(args, name)
        if value is not None:
            fields[f"{name}_range"] = tuple(value)
    spec = GeneratorSpec(**{k: v for k, v in fields.items() if v is not None})
    _announce("generate", {"generator": spec})
    text = io.dumps_instance(generate_instance(spec))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_evaluate(args) -> int:
    instance = io.read_instance(args.instance)
    assignment = io.read_assignment(args.assignment)
    s = _sections(args)
    weights = io.weights_from_dict(s["weights"])
    threshold = io.threshold_from_dict(s["threshold"])
    _announce("evaluate", {"weights": weights, "threshold": threshold})
    _emit(io.report_to_dict(evaluate(instance, assignment, weights, threshold)), args.out)
    return 0


def cmd_solve(args) -> int:
    instance = io.read_instance(args.instance)
    cfg = _resolve(args, instance)
    if args.solver == "ga":
        _announce("solve", {"solver": "ga", "ga": cfg["ga"], "weights": cfg["weights"], "threshold": cfg["threshold"]})
        res = run_ga(instance, cfg["weights"], cfg["threshold"], cfg["ga"])
    else:
        _announce("solve", {"solver": "memetic", "memetic": cfg["memetic"],
                            "weights": cfg["weights"], "threshold": cfg["threshold"]})
        res = run_memetic(instance, cfg["weights"], cfg["threshold"], cfg["memetic"])
    assignment = Assignment(res.best_chromosome)
    if args.out:
        io.write_assignment(assignment, args.out)
    else:
        sys.stdout.write(io.dumps_assignment(assignment))
    if args.result:
        _emit(_result_doc(res), args.result)
    print(json.dumps({"best_fitness": res.best_fitness, "makespan": res.best_report.makespan,
                      "ave_utilization": res.best_report.ave_utilization,
                      "evaluations_used": res.evaluations_used}), file=sys.stderr)
    return 0


def cmd_compare(args) -> int:
    instance = io.read_instance(args.instance)
    cfg = _resolve(args, instance)
    budget = BUDGET_FLAGS[args.budget]
    _announce("compare", {**cfg, "budget_mode": budget})
    cmp = compare(instance, cfg["weights"], cfg["threshold"], cfg["memetic"], cfg["ga"], budget)
    doc = cmp.summary()
    doc["memetic"]["fitness_trace"] = cmp.memetic.fitness_trace
    doc["ga"]["fitness_trace"] = cmp.ga.fitness_trace
    _emit(doc, args.out)
    return 0


def cmd_oracle(args) -> int:
    instance = io.read_instance(args.instance)
    s = _sections(args)
    weights = io.weights_from_dict(s["weights"])
    threshold = io.threshold_from_dict(s["threshold"])
    _announce("oracle", {"weights": weights, "threshold": threshold, "limit": args.limit})
    res = exhaustive_best(instance, weights, threshold, limit=args.limit)
    _emit({
        "best_assignment": res.best_assignment.one_based(),
        "best_fitness": res.best_fitness,
        "optima_count": res.optima_count,
        "report": evaluate(instance, res.best_assignment, weights, threshold).to_dict(),
    }, args.out)
    return 0


def cmd_experiment(args) -> int:
    doc = io.read_json(args.spec) if args.spec else {}
    if args.kind:
        doc["kind"] = args.kind
    if args.repetitions is not None:
        doc["repetitions"] = args.repetitions
    if args.sweep:
        doc["sweep"] = args.sweep
    if args.budget:
        doc["budget_mode"] = BUDGET_FLAGS[args.budget]
    if args.seed is not None:
        doc["seed"] = args.seed
    spec = spec_from_dict(doc)
    print(json.dumps({"command": "experiment", "effective_config": spec.as_dict()}, sort_keys=True),
          file=sys.stderr)

    def progress(value, rep):
        if args.verbose:
            print(f"done {spec.kind} value={value} rep={rep}", file=sys.stderr)

    _, summary = run_experiment(spec, args.out, workers=args.workers, progress=progress)
    for row in summary:
        print(f"{row['sweep_param']}={row['sweep_value']:<5} {row['solver']:<8} "
              f"makespan={row['makespan_mean']:.3f} ave_u={row['ave_utilization_mean']:.4f} "
              f"fitness={row['best_fitness_mean']:.6g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tapmemetic",
                                     description="Static task assignment: memetic (GA + PSO) and GA solvers.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a random instance")
    p.add_argument("--n", type=int, help="number of tasks (default 50)")
    p.add_argument("--m", type=int, help="number of processors (default 8)")
    p.add_argument("--seed", type=int)
    for name, default in (("exec-time", "1 50"), ("comm-delay", "0 10"), ("comm-rate", "0 2"),
                          ("data-volume", "0 20"), ("preload", "0 0")):
        p.add_argument(f"--{name}", type=float, nargs=2, metavar=("MIN", "MAX"),
                       help=f"uniform range (default {default})")
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("evaluate", help="metrics of an assignment")
    p.add_argument("instance")
    p.add_argument("assignment")
    p.add_argument("--config")
    p.add_argument("--out")
    _add_fitness_args(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("solve", help="run one solver")
    p.add_argument("instance")
    p.add_argument("--solver", choices=("ga", "memetic"), default="memetic")
    p.add_argument("--out", help="assignment file (default stdout)")
    p.add_argument("--result", help="also write the full run result (trace, report, config) here")
    _add_solver_args(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("compare", help="run both solvers on one instance")
    p.add_argument("instance")
    p.add_argument("--budget", choices=tuple(BUDGET_FLAGS), default="evaluations")
    p.add_argument("--out")
    _add_solver_args(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("oracle", help="exhaustive optimum of a small instance")
    p.add_argument("instance")
    p.add_argument("--limit", type=int, default=DEFAULT_LIMIT, help="maximum m^n to enumerate")
    p.add_argument("--config")
    p.add_argument("--out")
    _add_fitness_args(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("experiment", help="run a sweep experiment and write CSVs")
    p.add_argument("spec", nargs="?", help="experiment JSON file (defaults used when omitted)")
    p.add_argument("--kind", choices=KINDS)
    p.add_argument("--sweep", type=int, nargs="+")
    p.add_argument("--repetitions", type=int)
    p.add_argument("--budget", choices=tuple(BUDGET_FLAGS))
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, OSError, TypeError) as exc:
        # TypeError: bad value types in a config document
        print(f"tapmemetic {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
