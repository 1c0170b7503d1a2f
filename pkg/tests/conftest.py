"""Collects one verdict line per acceptance criterion and prints them after the run."""

VERDICTS: dict[int, str] = {}


def record(number: int, ok: bool, detail: str, verdict: str | None = None) -> None:
    line = f"criterion {number:2d}: {verdict or ('PASS' if ok else 'FAIL')}  {detail}"
    VERDICTS[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[k])
