import pytest

# criterion number -> (passed, description, detail); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, name, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {n:2d} {name}: {detail}")


@pytest.fixture(scope="session")
def plus4():
    from pucci_phase.params import make_params
    return make_params(1, 2, "plus", 4, 0)


@pytest.fixture(scope="session")
def minus3():
    from pucci_phase.params import make_params
    return make_params(1, 2, "minus", 3, 0)


@pytest.fixture(scope="session")
def lap3():
    from pucci_phase.params import make_params
    return make_params(1, 1, "plus", 3, 0)
