import numpy as np
import pytest

import tapmemetic.ga as ga_module
import tapmemetic.memetic as memetic_module
from tapmemetic.model import ProblemInstance

# every GA / memetic fitness trace produced anywhere in the session
TRACES: list[tuple[str, list[float]]] = []
# one PASS/FAIL line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE: list[str] = []


def pytest_collection_modifyitems(items):
    # acceptance last, so the trace check covers every other run in the session
    items.sort(key=lambda item: item.path.name == "test_acceptance.py")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)


@pytest.fixture(autouse=True, scope="session")
def _record_traces():
    original = ga_module.finish

    def recording_finish(instance, best, weights, threshold, trace, evaluations, config, started):
        TRACES.append((config.get("solver", "?"), list(trace)))
        assert all(b >= a for a, b in zip(trace, trace[1:])), f"non-monotone {config.get('solver')} trace"
        return original(instance, best, weights, threshold, trace, evaluations, config, started)

    mp = pytest.MonkeyPatch()
    mp.setattr(ga_module, "finish", recording_finish)
    mp.setattr(memetic_module, "finish", recording_finish)
    yield
    mp.undo()


def worked_instance(origin=(0, 0), preload=(0.0, 0.0)) -> ProblemInstance:
    return ProblemInstance(
        exec_time=[[2.0, 4.0], [3.0, 1.0]],
        comm_delay=[[0.0, 1.0], [1.0, 0.0]],
        comm_rate=[[0.0, 0.5], [0.5, 0.0]],
        data_volume=[2.0, 2.0],
        origin=list(origin),
        preexisting_load=list(preload),
    )


@pytest.fixture
def worked():
    return worked_instance()


def random_instance(rng: np.random.Generator, n: int, m: int, integer=False, preload=True) -> ProblemInstance:
    if integer:
        a = rng.integers(1, 20, size=(n, m)).astype(float)
        r = rng.integers(0, 10, size=(m, m)).astype(float)
        h = rng.integers(0, 3, size=(m, m)).astype(float)
        d = rng.integers(0, 10, size=n).astype(float)
        pre = rng.integers(0, 30, size=m).astype(float) if preload else np.zeros(m)
    else:
        a = rng.uniform(0.1, 50, size=(n, m))
        r = rng.uniform(0, 10, size=(m, m))
        h = rng.uniform(0, 2, size=(m, m))
        d = rng.uniform(0, 20, size=n)
        pre = rng.uniform(0, 40, size=m) * (rng.random() < 0.5) if preload else np.zeros(m)
    np.fill_diagonal(r, 0)
    np.fill_diagonal(h, 0)
    return ProblemInstance(a, r, h, d, rng.integers(0, m, size=n), pre)
