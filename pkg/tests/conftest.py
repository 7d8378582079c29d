import numpy as np
import pytest

from infocredit.binning import fit_all
from infocredit.synthdata import GeneratorConfig, generate, split

DEFAULT_SEED = 7


@pytest.fixture(scope="session")
def default_data():
    return generate(GeneratorConfig(n_rows=20_000, seed=DEFAULT_SEED))


@pytest.fixture(scope="session")
def default_split(default_data):
    return split(default_data, 0.7, seed=DEFAULT_SEED)


@pytest.fixture(scope="session")
def train_schemes(default_split):
    train, _ = default_split
    return fit_all(train.X, train.default, train.protected, train.feature_names)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
