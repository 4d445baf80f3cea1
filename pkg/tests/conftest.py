import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gtlab.geometry import ModelConfig

settings.register_profile(
    "gtlab", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("gtlab")

_criteria: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    number, title = mark.args
    prev = _criteria.get(number, (title, "PASS"))[1]
    if rep.when == "setup" and rep.passed:
        return
    status = "PASS" if rep.passed and prev == "PASS" else "FAIL"
    _criteria[number] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        title, status = _criteria[n]
        terminalreporter.write_line(f"criterion {n}: {status}  {title}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def line_model():
    return ModelConfig(1, (0, 1), 0.5)


@pytest.fixture
def plane_model():
    return ModelConfig(2, (0, 1, 2), 0.5)


@pytest.fixture
def equator():
    return np.array([1, 1], dtype=complex) / math.sqrt(2)


def random_sphere_point(rng, n):
    z = rng.normal(size=n) + 1j * rng.normal(size=n)
    return z / np.linalg.norm(z)


def random_level_point(rng, cfg):
    """Random point with f = E: random phases, moduli from a random mix of pair vertices."""
    a, E = cfg.a, cfg.energy
    verts = []
    for i in range(len(a)):
        for j in range(i + 1, len(a)):
            if (a[i] - E) * (a[j] - E) < 0:
                v = np.zeros(len(a))
                r = (E - a[i]) / (a[j] - a[i])
                v[i], v[j] = 1 - r, r
                verts.append(v)
    mix = rng.dirichlet(np.ones(len(verts)))
    r = mix @ np.array(verts)
    return np.sqrt(r) * np.exp(1j * rng.uniform(0, 2 * math.pi, len(a)))
