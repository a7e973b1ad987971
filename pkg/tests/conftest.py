import pytest

from javelin import serialize, shooting


@pytest.fixture(scope="session")
def solved():
    """The default optimal solve, shared across the session."""
    return shooting.solve()


@pytest.fixture(scope="session")
def profile_csv(solved, tmp_path_factory):
    path = tmp_path_factory.mktemp("profile") / "optimal.csv"
    serialize.save_profile(solved.profile, path)
    return path


ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


@pytest.fixture
def criterion(request):
    """``criterion(label, ok, detail)``: record a PASS/FAIL line, then assert ``ok``."""
    lines = request.config.stash[ACCEPTANCE_KEY]

    def check(label, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        lines.append(line)
        print(line)
        return ok

    return check


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
