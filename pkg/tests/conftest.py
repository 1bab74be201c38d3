import math

import numpy as np
import pytest
from hypothesis import strategies as st

from hybridqb import BatteryParams

# ---------------------------------------------------------------------------
# random objects (test surface only)
# ---------------------------------------------------------------------------


def random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (a + a.conj().T)


def random_density(rng, n=6):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    r = a @ a.conj().T
    return r / np.trace(r).real


def random_params(rng):
    J, D, B = rng.uniform(-5, 5, 3)
    return BatteryParams(J=J, Delta=rng.uniform(-3, 3), D=D, g1=rng.uniform(1, 3), g2=rng.uniform(1, 3), B=B)


def bell_state():
    """(|01> + |10>)/sqrt(2) embedded in C^2 (x) C^3 (indices 1 and 3)."""
    psi = np.zeros(6, dtype=complex)
    psi[1] = psi[3] = 1 / math.sqrt(2)
    return np.outer(psi, psi.conj())


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


@pytest.fixture
def unit_params():
    return BatteryParams(J=1, Delta=1, D=1, g1=2, g2=2, B=1)


param_strategy = st.builds(
    BatteryParams,
    J=st.floats(-5, 5),
    Delta=st.floats(-3, 3),
    D=st.floats(-5, 5),
    g1=st.floats(1, 3),
    g2=st.floats(1, 3),
    B=st.floats(-5, 5),
)


# ---------------------------------------------------------------------------
# acceptance bookkeeping: one pass/fail line per criterion in the summary
# ---------------------------------------------------------------------------

_CRITERIA: dict[str, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label, text): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call":
        return
    label, text = marker.args
    _CRITERIA.setdefault(label, [text, True])
    if not rep.passed:
        _CRITERIA[label][1] = False


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")

    def key(label):
        num = "".join(ch for ch in label if ch.isdigit())
        return (int(num) if num else 0, label)

    for label in sorted(_CRITERIA, key=key):
        text, ok = _CRITERIA[label]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  [{label}] {text}")
