import json
from pathlib import Path

import numpy as np
import pytest

from fourbody.frames import cartesian_to_jacobi, derive_masses
from fourbody.simulate import OrbitElements, hierarchical_state

FROZEN = json.loads((Path(__file__).parent / "oracles" / "frozen.json").read_text())


@pytest.fixture(scope="session")
def frozen():
    return FROZEN


def random_elements(rng, a=(1.0, 20.0, 400.0)):
    """Three well-separated, inclined, eccentric orbits with distinct nodes."""
    return [
        OrbitElements(
            a[j] * rng.uniform(0.9, 1.1),
            rng.uniform(0.05, 0.5),
            rng.uniform(0.3, 1.3),
            rng.uniform(0.0, 2 * np.pi),
            rng.uniform(0.0, 2 * np.pi),
            rng.uniform(0.0, 2 * np.pi),
        )
        for j in range(3)
    ]


def random_system(seed, masses=(1.0, 1e-3, 2e-3, 3e-3)):
    rng = np.random.default_rng(seed)
    m = derive_masses(*masses)
    cart = hierarchical_state(m, random_elements(rng))
    return m, cart, cartesian_to_jacobi(cart, m)


@pytest.fixture
def system():
    return random_system(7)


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.REPORT:
        terminalreporter.section("acceptance")
        for line in test_acceptance.REPORT:
            terminalreporter.write_line(line)
