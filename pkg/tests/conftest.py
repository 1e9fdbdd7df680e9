import numpy as np
import pytest

from triwave import DriveScheme, RateSet, REFERENCE_RATES

# populated by tests/test_acceptance.py, printed at the end of the run
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE_RESULTS:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{status}  {name}: {detail}")


@pytest.fixture
def reference_rates():
    return REFERENCE_RATES


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def scheme_c_drive():
    return DriveScheme.from_mhz("C", 20.0, 20.0)


@pytest.fixture
def cp_rates():
    """A rate set safely inside the completely positive region."""
    return RateSet.from_mhz(Gamma21=8.0, Gamma32=38.0, Gamma31=41.0,
                            gamma21=8.0, gamma32=48.0, gamma31=42.0)
