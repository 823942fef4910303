import sys
from importlib.resources import files
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rvfef.model import load_instance_file  # noqa: E402
from rvfef.rvf import RvfModel, construct  # noqa: E402

FIXTURES = files("rvfef") / "fixtures"


def fixture_path(name: str) -> Path:
    return Path(str(FIXTURES / name))


@pytest.fixture(scope="session")
def ex1_inst():
    return load_instance_file(fixture_path("example1.json"))


@pytest.fixture(scope="session")
def ex3_inst():
    return load_instance_file(fixture_path("example3.json"))


@pytest.fixture(scope="session")
def ex1_model(ex1_inst):
    return RvfModel(ex1_inst)


@pytest.fixture(scope="session")
def ex3_model(ex3_inst):
    return RvfModel(ex3_inst)


@pytest.fixture(scope="session")
def ex1(ex1_model):
    return construct(ex1_model)


@pytest.fixture(scope="session")
def ex3(ex3_model):
    return construct(ex3_model)


ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def report(request):
    """Record one acceptance line; the summary prints them in order."""
    lines = request.config.stash.setdefault(ACCEPTANCE, {})

    def record(k: int, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail}"
        lines[k] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
