import numpy as np
import pytest

from berezin_kit import disc, make_spec, plane, sphere


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


@pytest.fixture(scope="session")
def plane_spec():
    return make_spec(plane(), 1)


@pytest.fixture(scope="session")
def sphere_spec():
    return make_spec(sphere(), 4)


@pytest.fixture(scope="session")
def disc_spec():
    return make_spec(disc(), 4)


def random_disc_point(rng, radius):
    r = radius * np.sqrt(rng.uniform())
    return complex(r * np.exp(2j * np.pi * rng.uniform()))


# -- acceptance reporting -------------------------------------------------------

ACCEPTANCE = {}


class _Recorder:
    def __init__(self, node):
        self.node = node

    def __call__(self, number, title, ok, detail, seconds, budget):
        ok = bool(ok) and seconds < budget
        ACCEPTANCE[number] = (title, ok, f"{detail}; {seconds:.2f}s of {budget:g}s")
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {title} ({detail}; {seconds:.2f}s < {budget:g}s)"
        print(line)
        return ok


@pytest.fixture
def acceptance(request):
    return _Recorder(request.node)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {title} ({detail})")
