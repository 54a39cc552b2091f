"""Shared pytest plumbing: the acceptance checklist summary.

Acceptance tests record one or more legs per numbered check; the terminal
summary prints a single PASS/FAIL line per check so the verdicts survive
output capture. A FAIL line is a documented shortfall, not a flake; see
the matching test for the measured numbers.
"""

ACCEPTANCE = {}
ACCEPTANCE_TITLES = {}


def record_acceptance(number, title, passed, detail):
    ACCEPTANCE_TITLES[number] = title
    ACCEPTANCE.setdefault(number, []).append((bool(passed), detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance checklist")
    for number in sorted(ACCEPTANCE):
        legs = ACCEPTANCE[number]
        ok = all(passed for passed, _ in legs)
        failed = "; ".join(detail for passed, detail in legs if not passed)
        suffix = f" [{failed}]" if failed else ""
        terminalreporter.write_line(
            f"acceptance {number}: {'PASS' if ok else 'FAIL'} - "
            f"{ACCEPTANCE_TITLES[number]}{suffix}")
