import os
import sys

from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=300,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def pytest_terminal_summary(terminalreporter):
    acc = sys.modules.get("test_acceptance")
    if acc is not None and acc.RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(acc.RESULTS):
            ok, title, detail = acc.RESULTS[n]
            terminalreporter.write_line(f"criterion {n} {'PASS' if ok else 'FAIL'}: {title} ({detail})")
