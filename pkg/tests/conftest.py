import pytest

from fuzzyspec.cache import EigenCache


@pytest.fixture(scope="session")
def eigen_cache(tmp_path_factory):
    return EigenCache(tmp_path_factory.mktemp("eigcache"))


@pytest.fixture(autouse=True)
def _isolated_cache_dir(tmp_path_factory, monkeypatch):
    # commands that build their own cache must never touch the user's directory
    monkeypatch.setenv("FUZZYSPEC_CACHE_DIR", str(tmp_path_factory.getbasetemp() / "envcache"))


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
