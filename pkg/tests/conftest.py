import time
from types import SimpleNamespace

import pytest

from screensim.runner import experiments as ex
from screensim.runner.config import ExperimentConfig

# base setting (m=500) with 60 stage-latent samples at the default seed
THROUGHPUT_CFG = ExperimentConfig(m=500, n_sims=200, seed=0, n_priors=60)
# desk scale for the stage-geometry study
HEATMAP_CFG = ExperimentConfig(m=100, n_sims=200, seed=0, n_priors=60)

ACCEPTANCE_LINES: list[str] = []


def _timed(fn, cfg):
    t0 = time.perf_counter()
    rows = fn(cfg)
    return SimpleNamespace(rows=rows, seconds=time.perf_counter() - t0)


@pytest.fixture(scope="session")
def throughput_run():
    return _timed(ex.run_throughput, THROUGHPUT_CFG)


@pytest.fixture(scope="session")
def heatmap_run():
    return _timed(ex.run_heatmap, HEATMAP_CFG)


@pytest.fixture(scope="session")
def throughput_rows(throughput_run):
    return throughput_run.rows


@pytest.fixture(scope="session")
def heatmap_rows(heatmap_run):
    return heatmap_run.rows


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
