import numpy as np
import pytest

from elmsol import ElmConfig, SynthSpec, fit_scaler, generate, split, train

BENCH_SEED = 42


@pytest.fixture(scope="session")
def bench_data():
    """The 5000-point, 5 % noise synthetic benchmark."""
    return generate(SynthSpec(n_points=5000, seed=BENCH_SEED, noise=0.05))


@pytest.fixture(scope="session")
def bench_split(bench_data):
    return split(bench_data, 0.75, BENCH_SEED)


@pytest.fixture(scope="session")
def bench_model(bench_split):
    tr, _ = bench_split
    return train(ElmConfig(hidden_nodes=30, seed=BENCH_SEED), tr.features(), tr.targets(), fit_scaler(tr))


@pytest.fixture(scope="session")
def small_data():
    return generate(SynthSpec(n_points=200, seed=7, noise=0.05))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_line():
    """Record one summary line per acceptance criterion."""
    def record(number, passed, detail):
        ACCEPTANCE_LINES.append(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
