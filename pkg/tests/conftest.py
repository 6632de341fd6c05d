"""Shared pytest hooks: echo the acceptance gate lines after the run."""

import sys


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None) if mod else None
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for num in range(1, 11):
        if num in results:
            ok, detail = results[num]
            status = "PASS" if ok else "FAIL"
            terminalreporter.write_line(f"criterion {num}: {status} - {detail}")
        else:
            terminalreporter.write_line(
                f"criterion {num}: not run (deselected or errored before measurement)"
            )
