import sys
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"

# the fixture-font builder doubles as a corrupt-font generator in tests
sys.path.insert(0, str(Path(__file__).parent.parent / "scripts"))


@pytest.fixture(scope="session")
def fonts_dir() -> Path:
    return FIXTURES / "fonts"


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return FIXTURES / "corpus"


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance: gate criterion; summary prints one PASS/FAIL line each"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and item.get_closest_marker("acceptance"):
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        report.user_properties.append(("criterion", doc))


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            for name, value in rep.user_properties:
                if name == "criterion":
                    lines.append((value, rep.passed))
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for criterion, passed in lines:
            terminalreporter.write_line(
                f"{'PASS' if passed else 'FAIL'}  {criterion}"
            )
