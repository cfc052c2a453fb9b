"""Collects the one-line verdicts printed by the acceptance suite."""

VERDICTS: list[str] = []


def record(criterion: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {criterion:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    VERDICTS.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(VERDICTS):
            terminalreporter.write_line(line)
