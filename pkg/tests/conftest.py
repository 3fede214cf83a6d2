import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=50, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_density_matrix(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def random_unitary(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def phase_equal(a, b, tol=1e-12):
    """True if ``a = e^{i phi} b`` for some phase."""
    overlap = np.vdot(b, a)
    if abs(abs(overlap) - np.linalg.norm(a) * np.linalg.norm(b)) > tol:
        return False
    return np.allclose(a, overlap / abs(overlap) * b, atol=tol)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# (criterion, passed, detail) rows appended by test_acceptance.py
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in sorted(ACCEPTANCE, key=lambda row: int(row[0].split()[0])):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
