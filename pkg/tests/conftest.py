import numpy as np
import pytest

from spiketrum.kernels import KernelBankConfig, build_bank


@pytest.fixture(scope="session")
def bank():
    b = build_bank()
    b.gram()
    return b


@pytest.fixture(scope="session")
def small_bank():
    """8 kernels between 200 Hz and 4 kHz: short kernels keep brute-force oracles cheap."""
    b = build_bank(KernelBankConfig(num_kernels=8, f_min=200.0, f_max=4000.0))
    b.gram()
    return b


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


VERDICTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[VERDICTS] = []


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {detail}"
        request.config.stash[VERDICTS].append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash[VERDICTS]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
