import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from irs_wpcn import PathLossModel, ScenarioGeometry, SystemParams, sample_realization  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


@pytest.fixture(scope="session")
def params():
    return SystemParams.from_dbm()


@pytest.fixture(scope="session")
def geometry():
    return ScenarioGeometry.collinear(8.0, 5.0)


@pytest.fixture(scope="session")
def model():
    return PathLossModel()


@pytest.fixture
def draw(geometry, model):
    def _draw(n, seed):
        return sample_realization(geometry, model, n, seed)
    return _draw


def random_phases(rng, n):
    from irs_wpcn import PhaseConfig
    return PhaseConfig(*(np.exp(1j * rng.uniform(0, 2 * np.pi, n)) for _ in range(4)))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
