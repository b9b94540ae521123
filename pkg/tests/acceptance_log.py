"""Shared record of acceptance outcomes, printed at the end of the session."""

RESULTS: list[str] = []


def report(criterion: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {criterion} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
    RESULTS.append(line)
    print(line, flush=True)
