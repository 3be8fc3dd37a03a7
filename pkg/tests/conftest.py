import numpy as np
import pytest
from hypothesis import settings

from aoed import model, problems

settings.register_profile("default", max_examples=100, deadline=None)
settings.load_profile("default")

ACCEPTANCE_LINES = []


def diag_model(variances, noise_var=1.0):
    var = np.asarray(variances, dtype=float)
    m = var.size
    return model.build_model(np.eye(m), m, 1, np.diag(var), np.zeros(m), noise_var)


@pytest.fixture
def identity2():
    mod = diag_model([1.0, 1.0])
    return mod, model.precompute(mod)


@pytest.fixture
def diag41():
    mod = diag_model([4.0, 1.0])
    return mod, model.precompute(mod)


@pytest.fixture
def diag3():
    mod = diag_model([4.0, 1.0, 0.25])
    return mod, model.precompute(mod)


def random_models():
    """Seeded models shared by property checks, n <= 300."""
    specs = [problems.ProblemSpec(family="random_gaussian", m=10, d=1, n=15, seed=s) for s in range(3)]
    specs += [problems.ProblemSpec(family="random_gaussian", m=8, d=3, n=20, seed=s) for s in range(2)]
    specs += [problems.ProblemSpec(family="grid_source", m=16, d=2, n=49, seed=0)]
    return [problems.generate(s) for s in specs]


@pytest.fixture(scope="session")
def seeded_models():
    return [(mod, model.precompute(mod)) for mod in random_models()]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
