import pytest

ACCEPTANCE_CRITERIA = {
    1: "closed-form desk checks",
    2: "analytic vs Monte Carlo",
    3: "random-instance lower bounds",
    4: "upper-bound convergence",
    5: "optimizer reproduction",
    6: "H-family and limit verification",
    7: "quantile-mass inequality",
    8: "determinism",
}

_results: dict = {}


@pytest.fixture
def acceptance():
    """Record one clause of an acceptance criterion; the terminal summary
    folds clauses into a single PASS/FAIL line per criterion."""

    def record(criterion: int, clause: str, ok: bool, detail: str = "") -> bool:
        _results.setdefault(criterion, []).append((clause, bool(ok), detail))
        print(f"[criterion {criterion}] {clause}: {'PASS' if ok else 'FAIL'} {detail}")
        return bool(ok)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n, title in ACCEPTANCE_CRITERIA.items():
        clauses = _results.get(n)
        if not clauses:
            tr.write_line(f"criterion {n} ({title}): FAIL (not evaluated)")
            continue
        ok = all(c[1] for c in clauses)
        parts = "; ".join(f"{name} {'ok' if good else 'FAILED'} {detail}".strip() for name, good, detail in clauses)
        tr.write_line(f"criterion {n} ({title}): {'PASS' if ok else 'FAIL'} | {parts}")
