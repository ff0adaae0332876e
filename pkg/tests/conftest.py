import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mafapprox.instances import RandomInstanceSpec, generate_caterpillar_grid, random_instance  # noqa: E402

DATA = Path(__file__).parent / "data"


def random_specs(count, n_min, n_max, ts=(2, 3), seed=0):
    """Deterministic stream of instance specs covering the requested ranges."""
    rng = random.Random(seed)
    return [
        RandomInstanceSpec(n=rng.randint(n_min, n_max), t=rng.choice(ts), seed=rng.randrange(2**32))
        for _ in range(count)
    ]


def random_instances(count, n_min, n_max, ts=(2, 3), seed=0):
    return [random_instance(s) for s in random_specs(count, n_min, n_max, ts, seed)]


@pytest.fixture(scope="session")
def grids():
    return {ell: generate_caterpillar_grid(ell) for ell in range(2, 7)}


@pytest.fixture
def data_dir():
    return DATA


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
