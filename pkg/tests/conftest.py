import pytest

from nidwca.kdd import SyntheticSpec, generate_synthetic
from nidwca.dataset import as_arrays

BACKENDS = ["numba", "numpy"]

_criteria = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _criteria.append((marker.args[0], report.outcome))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _criteria:
        verdict = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[outcome]
        terminalreporter.write_line(f"{verdict}  {name}")


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture
def figure1_rules():
    from nidwca.rules import RuleVector
    return RuleVector.from_numbers([238, 254, 238, 252])


def synthetic_arrays(n_normal=500, n_attack=500, spread=0.05, seed=0):
    spec = SyntheticSpec.random_centers(n_normal, n_attack, spread, seed)
    return as_arrays(generate_synthetic(spec))


@pytest.fixture
def small_separable():
    """200 + 200 records around two distant centers."""
    return synthetic_arrays(200, 200, 0.05, seed=11)
