import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from twocomp import evolve, spectral

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240531)


def band_limited(grid, rng, kmax_frac=0.25):
    """Random real field with modes |j| <= kmax_frac * N."""
    n = grid.n_points
    coeffs = np.zeros(n // 2 + 1, dtype=complex)
    top = max(1, int(kmax_frac * n))
    coeffs[:top] = rng.normal(size=top) + 1j * rng.normal(size=top)
    coeffs[0] = coeffs[0].real
    return spectral.irfft(coeffs, n)


def gaussian_state(grid, v_shift=1.0, amp_u=1.0, amp_v=1.0):
    u = amp_u * np.exp(-grid.x**2)
    v = amp_v * np.exp(-((grid.x - v_shift) ** 2))
    return evolve.state_from_velocities(grid, u, v)


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per acceptance criterion and print it."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def report(number, title, checks):
        ok = all(passed for _, passed in checks)
        detail = "; ".join(f"{text} [{'ok' if passed else 'fail'}]" for text, passed in checks)
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title}: {detail}"
        lines.append(line)
        print(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
