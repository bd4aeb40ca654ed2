import numpy as np
import pytest
from hypothesis import settings

from stad.data_io import compute_distances
from stad.samples import noisy_circle, two_gaussians

# numba compiles on first call; wall-clock deadlines would flake
settings.register_profile("stad", deadline=None, max_examples=60)
settings.load_profile("stad")


@pytest.fixture(scope="session")
def gauss25():
    return compute_distances(two_gaussians(25, seed=42))


@pytest.fixture(scope="session")
def circle10():
    return compute_distances(noisy_circle(10, noise=0.05, seed=3))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""

    def check(name: str, ok: bool, detail: str) -> None:
        line = f"{name}: {'PASS' if ok else 'FAIL'} - {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split(":")[0][1:])):
            terminalreporter.write_line(line)
