import math
import sys

import pytest

from pifilter.model import REFERENCE, derive_rates


@pytest.fixture(scope="session")
def config():
    return REFERENCE


@pytest.fixture(scope="session")
def rates():
    return derive_rates(REFERENCE)


@pytest.fixture(scope="session")
def pt_optimized():
    """Full search from the conditioned two-pole PT seed (minutes)."""
    from pifilter.optimize import optimize_filter
    from pifilter.presets import conditioned_pt_seed

    lossless = REFERENCE.with_losses()
    return optimize_filter(lossless, conditioned_pt_seed(lossless))


@pytest.fixture(scope="session")
def vectfit_optimized():
    """Full search from the three-pole fitted optimal-gain seed (minutes)."""
    from pifilter.optimize import optimize_filter
    from pifilter.ratfit import seed_from_gopt

    lossless = REFERENCE.with_losses()
    return optimize_filter(lossless, seed_from_gopt(derive_rates(lossless), n_poles=3))


@pytest.fixture(scope="session")
def band_top(rates):
    return math.pi / (2 * rates.tau_s)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
