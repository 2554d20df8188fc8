import csv
import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from tapmemetic.ga import GAConfig
from tapmemetic.harness import io
from tapmemetic.harness.cli import main
from tapmemetic.harness.experiment import (
    DETAIL_COLUMNS,
    SUMMARY_COLUMNS,
    ExperimentSpec,
    run_experiment,
    spec_from_dict,
)
from tapmemetic.harness.generator import GeneratorSpec, generate_instance
from tapmemetic.memetic import MemeticConfig
from tapmemetic.model import Assignment, ValidationError
from tapmemetic.pso import PSOConfig

from conftest import random_instance, worked_instance

# --- generator ---------------------------------------------------------------


def test_generator_zero_comm_ranges():
    inst = generate_instance(GeneratorSpec(n=10, m=4, comm_delay_range=(0, 0), comm_rate_range=(0, 0)))
    assert np.all(inst.comm_delay == 0) and np.all(inst.comm_rate == 0)


def test_generator_deterministic():
    spec = GeneratorSpec(n=15, m=5, seed=8)
    assert generate_instance(spec) == generate_instance(spec)
    assert generate_instance(spec) != generate_instance(GeneratorSpec(n=15, m=5, seed=9))


def test_generator_uniform_exec_time():
    inst = generate_instance(GeneratorSpec(n=1250, m=8, exec_time_range=(1, 50), seed=2))
    a = inst.exec_time.ravel()
    assert a.size == 10_000
    assert a.min() >= 1 and a.max() <= 50
    counts, _ = np.histogram(a, bins=20, range=(1, 50))
    assert stats.chisquare(counts).pvalue > 1e-3


def test_generator_instance_is_valid():
    inst = generate_instance(GeneratorSpec(n=30, m=6, preload_range=(0, 20), seed=4))
    inst.validate()
    assert np.all(np.diag(inst.comm_delay) == 0)
    assert set(inst.origin.tolist()) <= set(range(6))


@pytest.mark.parametrize("kwargs", [
    {"exec_time_range": (0, 5)},
    {"comm_delay_range": (3, 1)},
    {"data_volume_range": (-1, 1)},
    {"n": 0},
])
def test_generator_rejects_bad_ranges(kwargs):
    with pytest.raises(ValidationError):
        GeneratorSpec(**kwargs)


# --- io ----------------------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(st.integers(1, 15), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_instance_round_trip_exact(n, m, seed):
    inst = random_instance(np.random.default_rng(seed), n, m)
    back = io.loads_instance(io.dumps_instance(inst))
    assert back == inst
    assert io.dumps_instance(back) == io.dumps_instance(inst)


def test_instance_file_round_trip(tmp_path):
    inst = worked_instance(origin=(0, 1), preload=(0.5, 1.25))
    path = tmp_path / "inst.json"
    io.write_instance(inst, path)
    assert io.read_instance(path) == inst
    doc = json.loads(path.read_text())
    assert doc["origin"] == [1, 2]
    assert doc["format"] == io.INSTANCE_FORMAT


@pytest.mark.parametrize("text", [
    "not json",
    '{"format": "tap-instance/9"}',
    '{"n": 1, "m": 1}',
    '{"n": 1, "m": 1, "exec_time": [[1.0]], "comm_delay": [[1.0]], "comm_rate": [[0.0]],'
    ' "data_volume": [0.0], "origin": [1], "preexisting_load": [0.0]}',
    '{"n": 2, "m": 1, "exec_time": [[1.0]], "comm_delay": [[0.0]], "comm_rate": [[0.0]],'
    ' "data_volume": [0.0], "origin": [1], "preexisting_load": [0.0]}',
])
def test_instance_parse_errors(text):
    with pytest.raises(ValidationError):
        io.loads_instance(text)


def test_assignment_round_trip():
    a = Assignment.from_one_based([3, 1, 2])
    assert io.loads_assignment(io.dumps_assignment(a)) == a
    assert io.loads_assignment("[3, 1, 2]") == a
    with pytest.raises(ValidationError):
        io.loads_assignment('{"targets": [1]}')


def test_config_builders_reject_unknown_keys():
    with pytest.raises(ValidationError):
        io.ga_config_from_dict({"populaton_size": 3})
    cfg = io.memetic_config_from_dict({"pso": {"swarm_size": 4}, "local_search_fraction": 0.2})
    assert cfg.pso.swarm_size == 4 and cfg.local_search_fraction == 0.2


# --- experiment --------------------------------------------------------------

def tiny_spec(**kw):
    base = dict(
        kind="vary-tasks", sweep=(8,), repetitions=1,
        generator=GeneratorSpec(m=3),
        memetic=MemeticConfig(ga=GAConfig(population_size=8, generations=3), pso=PSOConfig(iterations=2)),
        ga=GAConfig(population_size=8, generations=3),
        seed=5,
    )
    base.update(kw)
    return ExperimentSpec(**base)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_experiment_row_count(tmp_path):
    rows, summary = run_experiment(tiny_spec(), tmp_path)
    assert len(rows) == 2
    assert {r["solver"] for r in rows} == {"ga", "memetic"}
    detail = read_rows(tmp_path / "detail.csv")
    assert len(detail) == 2
    assert list(detail[0]) == list(DETAIL_COLUMNS)
    assert list(read_rows(tmp_path / "summary.csv")[0]) == list(SUMMARY_COLUMNS)
    assert json.loads((tmp_path / "experiment.json").read_text())["seed"] == 5


def strip_wall_time(path):
    rows = read_rows(path)
    for r in rows:
        r.pop("wall_time_ms")
    return rows


def test_experiment_rerun_identical(tmp_path):
    spec = tiny_spec(sweep=(6, 9), repetitions=2, kind="vary-tasks")
    run_experiment(spec, tmp_path / "a")
    run_experiment(spec, tmp_path / "b")
    assert strip_wall_time(tmp_path / "a" / "detail.csv") == strip_wall_time(tmp_path / "b" / "detail.csv")


def test_experiment_rows_reproducible_individually():
    spec = tiny_spec(kind="vary-population", sweep=(6, 10), repetitions=2)
    rows, _ = run_experiment(spec)
    again, _ = run_experiment(tiny_spec(kind="vary-population", sweep=(10,), repetitions=2))
    pick = [r for r in rows if r["sweep_value"] == 10]
    for a, b in zip(pick, again):
        a, b = dict(a), dict(b)
        a.pop("wall_time_ms"), b.pop("wall_time_ms")
        assert a == b


def test_experiment_sorted_and_summary(tmp_path):
    spec = tiny_spec(kind="vary-generations", sweep=(4, 2), repetitions=3)
    rows, summary = run_experiment(spec)
    keys = [(r["sweep_value"], r["repetition"], r["solver"]) for r in rows]
    assert keys[:2] == [(4, 0, "ga"), (4, 0, "memetic")]
    assert keys[-1] == (2, 2, "memetic")
    assert len(summary) == 4
    s = next(x for x in summary if x["sweep_value"] == 4 and x["solver"] == "ga")
    vals = [r["makespan"] for r in rows if r["sweep_value"] == 4 and r["solver"] == "ga"]
    assert s["makespan_mean"] == pytest.approx(np.mean(vals))
    assert s["makespan_std"] == pytest.approx(np.std(vals, ddof=1))


def test_experiment_workers_match_serial():
    spec = tiny_spec(sweep=(6, 7), repetitions=2)
    a, _ = run_experiment(spec)
    b, _ = run_experiment(spec, workers=2)
    strip = lambda rows: [{k: v for k, v in r.items() if k != "wall_time_ms"} for r in rows]
    assert strip(a) == strip(b)


def test_experiment_unwritable_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(ValidationError):
        run_experiment(tiny_spec(), blocker / "sub")


def test_spec_validation():
    with pytest.raises(ValidationError):
        ExperimentSpec(kind="vary-swarm")
    with pytest.raises(ValidationError):
        ExperimentSpec(repetitions=0)
    with pytest.raises(ValidationError):
        spec_from_dict({"kind": "vary-tasks", "reps": 3})
    assert ExperimentSpec(kind="vary-population").sweep == (20, 40, 60, 80, 100)


def test_spec_from_dict_shares_ga_section():
    spec = spec_from_dict({"ga": {"population_size": 12}, "memetic": {"pso": {"iterations": 3}}})
    assert spec.memetic.ga.population_size == 12
    assert spec.memetic.pso.iterations == 3


# --- cli ---------------------------------------------------------------------

@pytest.fixture
def worked_files(tmp_path):
    inst = tmp_path / "inst.json"
    io.write_instance(worked_instance(), inst)
    asg = tmp_path / "asg.json"
    io.write_assignment(Assignment.from_one_based([1, 2]), asg)
    return inst, asg


def test_cli_evaluate_worked(worked_files, capsys):
    inst, asg = worked_files
    assert main(["evaluate", str(inst), str(asg)]) == 0
    out, err = capsys.readouterr()
    doc = json.loads(out)
    assert doc["makespan"] == 2
    assert doc["ave_utilization"] == 0.75
    assert doc["fitness"] == 0.1875
    assert "effective_config" in err


def test_cli_generate_then_solve_twice_identical(tmp_path, capsys):
    inst = tmp_path / "i.json"
    assert main(["generate", "--n", "12", "--m", "3", "--seed", "4", "--out", str(inst)]) == 0
    for name in ("a.json", "b.json"):
        assert main(["solve", str(inst), "--seed", "7", "--population", "10", "--generations", "5",
                     "--pso-iterations", "3", "--out", str(tmp_path / name)]) == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    err = capsys.readouterr().err
    cfg = json.loads(err.splitlines()[1])["effective_config"]
    assert cfg["memetic"]["ga"]["mutation_rate"] == 1 / 12


def test_cli_solve_ga_writes_result(tmp_path, worked_files):
    inst, _ = worked_files
    out, res = tmp_path / "o.json", tmp_path / "r.json"
    assert main(["solve", str(inst), "--solver", "ga", "--generations", "5",
                 "--out", str(out), "--result", str(res)]) == 0
    assert io.read_assignment(out).one_based() == [1, 2]
    doc = json.loads(res.read_text())
    assert doc["evaluations_used"] == 50 * 6
    assert doc["config"]["solver"] == "ga"


def test_cli_config_file(tmp_path, worked_files):
    inst, _ = worked_files
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"ga": {"population_size": 6, "generations": 2}, "pso": {"iterations": 0}}))
    res = tmp_path / "r.json"
    assert main(["solve", str(inst), "--config", str(cfg), "--result", str(res), "--out", str(tmp_path / "o")]) == 0
    assert json.loads(res.read_text())["evaluations_used"] == 18


def test_cli_compare(tmp_path, worked_files):
    inst, _ = worked_files
    out = tmp_path / "c.json"
    assert main(["compare", str(inst), "--population", "6", "--generations", "2",
                 "--pso-iterations", "1", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["budget_mode"] == "equal-evaluations"
    assert doc["ga"]["evaluations_used"] >= doc["declared_budget"]


def test_cli_oracle(worked_files, capsys):
    inst, _ = worked_files
    assert main(["oracle", str(inst)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["best_assignment"] == [1, 2]
    assert doc["optima_count"] == 1


def test_cli_oracle_over_budget(worked_files, capsys):
    inst, _ = worked_files
    assert main(["oracle", str(inst), "--limit", "3"]) == 1
    err = capsys.readouterr().err.strip().splitlines()
    assert "exceeds limit" in err[-1]


def test_cli_experiment(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({
        "kind": "vary-tasks", "sweep": [6], "repetitions": 1,
        "generator": {"m": 3},
        "ga": {"population_size": 6, "generations": 2},
        "memetic": {"pso": {"iterations": 1}},
    }))
    assert main(["experiment", str(spec), "--out", str(tmp_path / "res")]) == 0
    assert len(read_rows(tmp_path / "res" / "detail.csv")) == 2


@pytest.mark.parametrize("argv", [
    ["evaluate", "missing.json", "missing.json"],
    ["solve", "missing.json"],
])
def test_cli_missing_file(argv):
    assert main(argv) == 1


def test_cli_bad_config(tmp_path, worked_files, capsys):
    inst, _ = worked_files
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"gaa": {}}))
    assert main(["solve", str(inst), "--config", str(cfg)]) == 1
    assert len(capsys.readouterr().err.strip().splitlines()) == 1


def test_cli_invalid_value(worked_files, capsys):
    inst, _ = worked_files
    assert main(["solve", str(inst), "--population", "0"]) == 1
    assert "population_size" in capsys.readouterr().err


def test_cli_unknown_subcommand():
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 2


def test_module_entry_point(worked_files):
    inst, asg = worked_files
    proc = subprocess.run([sys.executable, "-m", "tapmemetic", "evaluate", str(inst), str(asg)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["fitness"] == 0.1875
