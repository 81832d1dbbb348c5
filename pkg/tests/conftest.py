from hypothesis import HealthCheck, settings

settings.register_profile("pntap", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("pntap")

# filled by test_acceptance.py, printed once at the end of the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
