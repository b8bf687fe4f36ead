import sys

import numpy as np
import pytest

from msrcodes.construction import CodeParams, CodeProfile, check_global_constraints
from msrcodes.gf import FieldContext

from oracles import RefField


@pytest.fixture(scope="session")
def gf32():
    return FieldContext(5, 0x25)


@pytest.fixture(scope="session")
def ref32():
    return RefField(0x25)


@pytest.fixture(scope="session")
def profile_a(gf32):
    """(6, 2, 4) variant A over GF(32) with lambda_i = theta^i."""
    params = CodeParams(6, 2, 4, "A")
    prof = CodeProfile(params, gf32, [gf32.theta_power(i) for i in range(params.lambda_count)])
    assert check_global_constraints(prof).passed
    return prof


@pytest.fixture(scope="session")
def profile_b():
    """(8, 4, 6) variant B over GF(128), lambdas from the greedy search."""
    prof = CodeProfile.build(CodeParams(8, 4, 6, "B"), FieldContext(7))
    assert check_global_constraints(prof).passed
    return prof


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(results):
        terminalreporter.write_line(results[name])
