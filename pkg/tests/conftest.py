import time

SUITE_BUDGET = 60.0
_start = time.perf_counter()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    elapsed = time.perf_counter() - _start
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[number])
    verdict = "PASS" if elapsed < SUITE_BUDGET else "FAIL"
    terminalreporter.write_line(f"[10] {verdict}  full suite runtime {elapsed:.1f}s (budget {SUITE_BUDGET:.0f}s)")


def pytest_sessionfinish(session, exitstatus):
    if time.perf_counter() - _start >= SUITE_BUDGET and exitstatus == 0:
        session.exitstatus = 1
