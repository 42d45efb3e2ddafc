import pytest

from fsnoma.fading import FadingLink, LinkTriple
from fsnoma.model import SystemConfig

# criterion number -> (passed, title, info), filled by test_acceptance
ACCEPTANCE_RESULTS: dict = {}


def default_config(snr_db: float = 20.0, a2: float = 0.01) -> SystemConfig:
    return SystemConfig.default(10 ** (snr_db / 10), a2=a2)


@pytest.fixture
def defaults():
    return default_config


@pytest.fixture
def small_link():
    return FadingLink(2.0, 5.0, 10.0)


@pytest.fixture
def mixed_config():
    sr = FadingLink(1.5, 2.5, 1.0)
    rd = FadingLink(2.0, 4.0, 1.0)
    sd = FadingLink(2.0, 3.0, 1.0)
    return SystemConfig(LinkTriple(sr, rd, sd), 0.2, 10.0)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_RESULTS):
        ok, title, info = ACCEPTANCE_RESULTS[num]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {num}: {title} ({info})")
