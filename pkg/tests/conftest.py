import pytest

from gtplan.domains import EcusSpec, gen_ecus
from gtplan.gts import Plan

_ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def ecus2():
    return gen_ecus(EcusSpec(2))


@pytest.fixture
def sample_plan():
    """deploy c1 on n2, destroy i1, shut down n1, create an instance of c1 on n2."""
    return Plan([
        ("deployComponent", ("c1", "n2")),
        ("destroyInstance", ("i1", "n1", "c1", "i1-runs-n1", "i1-instanceOf-c1")),
        ("shutdownNode", ("n1",)),
        ("createInstance", ("c1", "n2", "_1")),
    ])


@pytest.fixture
def acceptance_report(request):
    results = request.config.stash.setdefault(_ACCEPTANCE, {})

    def report(number: int, ok: bool, detail: str) -> None:
        results[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_ACCEPTANCE, None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])
