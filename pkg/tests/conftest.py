import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from symscatter.network import LeadAttachment, ScatteringNetwork

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_network(rng, n_max=6, leads_max=4, entry_max=3.0, general_g=True, hermitian=False):
    """Random center with 2..leads_max leads on distinct sites."""
    n = int(rng.integers(2, n_max + 1))
    a = rng.uniform(-1, 1, (n, n)) + 1j * rng.uniform(-1, 1, (n, n))
    if hermitian:
        a = (a + a.conj().T) / 2
    hc = entry_max * a / max(1.0, np.max(np.abs(a)))
    n_leads = int(rng.integers(2, min(leads_max, n) + 1))
    sites = rng.choice(n, size=n_leads, replace=False)
    leads = []
    for i, s in enumerate(sites):
        g = float(rng.uniform(0.3, 1.7)) if general_g and rng.random() < 0.5 else 1.0
        leads.append(LeadAttachment(i + 1, int(s), g))
    return ScatteringNetwork(hc, tuple(leads), 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
