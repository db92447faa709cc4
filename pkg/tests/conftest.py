import sys
import time
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from schwarzian_lab import GridSpec, marty_scan, parse, sd_family_scan

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def exp_nz_marty_41():
    """Full-size spherical-derivative scan of exp(n*z); (report, seconds)."""
    grid = GridSpec(-1.0, 1.0, -1.0, 1.0, 41, 41)
    t0 = time.perf_counter()
    report = marty_scan(parse("exp(n*z)"), grid, tuple(range(1, 33)), seed=0, workers=1)
    return report, time.perf_counter() - t0


@pytest.fixture(scope="session")
def example2_sd_41():
    """Full-size Schwarzian-statistic scan of exp(z/(n*z+1)); (report, seconds)."""
    grid = GridSpec(-0.5, 0.5, -0.5, 0.5, 41, 41)
    t0 = time.perf_counter()
    report = sd_family_scan(
        parse("exp(z/(n*z+1))"), grid, tuple(range(1, 33)), seed=0, workers=1
    )
    return report, time.perf_counter() - t0
