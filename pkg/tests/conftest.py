import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from vbhmm.posteriors import GaussWishart, HmmPosterior

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

_CRITERIA = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(number, name)`` returns a
    callable ``report(passed, detail)``."""

    def start(number, name):
        def report(passed, detail=""):
            _CRITERIA[number] = (name, bool(passed), detail)
            status = "PASS" if passed else "FAIL"
            print(f"[{status}] criterion {number}: {name} {detail}".rstrip())

        return report

    return start


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        name, passed, detail = _CRITERIA[number]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number:>2}. {name}: {detail}")


def random_gw(rng, D, spread=1.0):
    A = rng.normal(size=(D, D))
    W = A @ A.T / D + 0.3 * np.eye(D)
    return GaussWishart(
        m=rng.normal(scale=spread, size=D),
        beta=rng.uniform(0.3, 5.0),
        W=W,
        nu=D - 1 + rng.uniform(0.5, 6.0),
    )


def random_posterior(rng, J, D):
    return HmmPosterior(
        initial=rng.uniform(0.3, 4.0, size=J),
        transitions=rng.uniform(0.3, 4.0, size=(J, J)),
        emissions=tuple(random_gw(rng, D, spread=1.5) for _ in range(J)),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
