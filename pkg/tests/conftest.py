import pytest

from grabeval.frame import save_frame
from grabeval.patterns import DefectModel, PatternSpec, apply_defects, generate_pattern


@pytest.fixture
def write_frame(tmp_path):
    """Generate a pattern (plus defects) and save it as PGM; returns the path."""

    def make(name, kind="uniform", width=256, height=256, **kwargs):
        spec_fields = {k: kwargs.pop(k) for k in list(kwargs) if k in PatternSpec.__dataclass_fields__}
        frame = generate_pattern(PatternSpec(kind, width, height, **spec_fields))
        if kwargs:
            frame = apply_defects(frame, DefectModel(**kwargs))
        path = tmp_path / name
        save_frame(frame, path)
        return path

    return make


_ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record a pass/fail line for an acceptance criterion, then assert it."""

    def check(label, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}" + (f" -- {detail}" if detail else "")
        _ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
