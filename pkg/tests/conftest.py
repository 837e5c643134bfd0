import pytest

from prefset.harness.fixtures import senators_catalog, senators_gai, senators_tcp


@pytest.fixture
def senators():
    return senators_catalog()


@pytest.fixture
def sen_gai():
    return senators_gai()


@pytest.fixture
def sen_tcp():
    return senators_tcp()


ACCEPTANCE_KEY = pytest.StashKey[dict]()


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per acceptance criterion for the terminal summary."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, {})

    def report(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        lines[number] = line
        print(line)

    return report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
