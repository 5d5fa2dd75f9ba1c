import pytest

from btstrat.bt_strata import ParahoricTuple, ambient_for


@pytest.fixture(scope="session")
def hyperspecial3():
    tup = ParahoricTuple(3, (0,))
    return tup, ambient_for(tup)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
