import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from latentgp.dataset import center_dataset
from latentgp.gp_core import MeanBasis
from latentgp.inference import McmcConfig, default_prior, run_chain
from latentgp.testbed import example_1d, example_2d_plane

settings.register_profile("default", max_examples=50, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def oned_short():
    """A short 1-D chain on centred data: (model-space dataset, trace)."""
    d, _ = center_dataset(example_1d())
    prior = default_prior(d, MeanBasis.LINEAR, centered=True)
    cfg = McmcConfig(iterations=3000, burnin=1000, thin=5, seed=3)
    return d, run_chain(d, MeanBasis.LINEAR, prior, cfg)


@pytest.fixture(scope="session")
def plane_short():
    d, _ = center_dataset(example_2d_plane(0))
    prior = default_prior(d, MeanBasis.LINEAR, centered=True)
    cfg = McmcConfig(iterations=2000, burnin=1000, thin=5, seed=4)
    return d, run_chain(d, MeanBasis.LINEAR, prior, cfg)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(results):
        ok, detail = results[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'} | {detail}")
