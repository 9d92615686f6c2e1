import pytest

# Reduced grid and link settings that run the full CLI in about a second.
SMALL_INI = """\
[grid]
samples = 512
scan_steps = 12
scan_end_m = 1.2
max_discard = 0.05

[link]
frames = 1
symbols_per_frame = 25000
snr_grid_db = 0:10:5
"""

# criterion id -> list of (clause, passed, detail), filled by the acceptance tests
ACCEPTANCE: dict[str, list[tuple[str, bool, str]]] = {}


@pytest.fixture
def small_config(tmp_path):
    p = tmp_path / "small.ini"
    p.write_text(SMALL_INI)
    return p


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE, key=lambda c: int(c[1:])):
        clauses = ACCEPTANCE[cid]
        ok = all(passed for _, passed, _ in clauses)
        failed = [name for name, passed, _ in clauses if not passed]
        note = f" (failing: {', '.join(failed)})" if failed else ""
        tr.write_line(f"[{'PASS' if ok else 'FAIL'}] {cid}: {len(clauses)} clause(s){note}")
