"""Shared pytest wiring: one printed PASS/FAIL line per acceptance criterion."""


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.rsplit("::", 1)[-1]
    if report.passed:
        outcome = "PASS"
    elif report.skipped:
        outcome = "SKIP"
    else:
        outcome = "FAIL"
    print(f"\n[acceptance] {name}: {outcome}", flush=True)
