import numpy as np
import pytest
from scipy.stats import unitary_group

from echotransform.core import Pulse, PulseTrain


def random_unitary(d, seed):
    return unitary_group.rvs(d, random_state=seed) if d > 1 else np.exp(1j * np.array([[seed]]))


def random_vector(d, rng):
    return rng.normal(size=d) + 1j * rng.normal(size=d)


def basic_train(data=((300.0, 1.0, 0.0),), reads=((2000.0, 1.0, 0.0),), **kw):
    pulses = [Pulse(0.0, "write", **kw)]
    pulses += [Pulse(t, "data", a, ph, **kw) for t, a, ph in data]
    pulses += [Pulse(t, "read", a, ph, **kw) for t, a, ph in reads]
    return PulseTrain(tuple(pulses))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def acceptance_log(request):
    lines = request.config._acceptance_lines

    def log(criterion, passed, detail):
        line = f"criterion {criterion}: {'PASS' if passed else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)

    return log


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
