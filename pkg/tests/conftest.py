import pytest

from sigstorm.model import UMTS_COSTS, with_pch

# criterion number -> clause name -> (passed, detail)
ACCEPTANCE: dict[int, dict[str, tuple[bool, str]]] = {}


def record(criterion: int, clause: str, ok: bool, detail: str) -> bool:
    ACCEPTANCE.setdefault(criterion, {})[clause] = (bool(ok), detail)
    print(f"criterion {criterion} [{clause}]: {'PASS' if ok else 'FAIL'}  {detail}")
    return bool(ok)


@pytest.fixture(params=[True, False], ids=["pch_on", "pch_off"])
def costs(request):
    return with_pch(UMTS_COSTS, request.param)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        clauses = ACCEPTANCE[k]
        ok = all(v[0] for v in clauses.values())
        detail = "; ".join(f"{name}: {'ok' if v[0] else 'FAILED'} ({v[1]})" for name, v in clauses.items())
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
