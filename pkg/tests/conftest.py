import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from vortexeq.surface import FlatTorus, ProjectivePlane, UnitSphere

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

SURFACES = {
    "sphere": UnitSphere(),
    "torus": FlatTorus(tau=0.3 + 1.1j),
    "projective_plane": ProjectivePlane(),
}


@pytest.fixture(params=sorted(SURFACES))
def surface(request):
    return SURFACES[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def spread_points(surface, rng, n, min_sep=0.3, tries=10_000):
    """``n`` random points with pairwise distance at least ``min_sep``."""
    for _ in range(tries):
        x = surface.sample(rng, n)
        if n < 2:
            return x
        j, k = np.triu_indices(n, 1)
        if np.min(surface.distance(x[j], x[k])) >= min_sep:
            return x
    raise RuntimeError("could not draw separated points")


ACCEPTANCE_LINES = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion; returns the pass flag."""
    lines = request.config.stash.setdefault(ACCEPTANCE_LINES, {})

    def record(number, passed, detail):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        lines[number] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_LINES, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for number in sorted(lines):
            terminalreporter.write_line(lines[number])
