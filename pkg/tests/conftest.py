import mpmath as mp
import numpy as np
import pytest
from scipy.linalg import sqrtm

OMEGA = np.array([[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]], dtype=float)


def williamson_oracle(gamma):
    """Symplectic eigenvalues from the Hermitian matrix i sqrt(g) Omega sqrt(g).

    Its eigenvalues are +/- the symplectic eigenvalues; Hermitian eigensolvers
    are well conditioned, so this is a good independent reference.
    """
    root = np.real(sqrtm(np.asarray(gamma, float)))
    ev = np.linalg.eigvalsh(1j * root @ OMEGA @ root)
    return np.sort(ev[ev > 0])[::-1]


def g_ref(x):
    """Thermal-mode entropy at 40 digits."""
    with mp.workdps(40):
        x = mp.mpf(x)
        if x == 1:
            return 0.0
        return float((x + 1) / 2 * mp.log((x + 1) / 2, 2) - (x - 1) / 2 * mp.log((x - 1) / 2, 2))


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)


_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _ACCEPTANCE[report.nodeid] = report


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, rep in _ACCEPTANCE.items():
        name = nodeid.split("::")[-1]
        terminalreporter.write_line(f"{'PASS' if rep.passed else 'FAIL'}  {name}  ({rep.duration:.2f} s)")
