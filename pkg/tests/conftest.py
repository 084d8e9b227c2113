import re


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    outcomes = {}
    for status in ("passed", "failed", "error", "skipped"):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            match = re.search(r"test_criterion_(\d+)", nodeid)
            if match:
                n = int(match.group(1))
                current = outcomes.get(n)
                if current != "FAIL":
                    outcomes[n] = "PASS" if status == "passed" else "FAIL"
    if outcomes:
        terminalreporter.write_sep("=", "acceptance criteria")
        for n in sorted(outcomes):
            terminalreporter.write_line(f"criterion {n:02d}: {outcomes[n]}")
