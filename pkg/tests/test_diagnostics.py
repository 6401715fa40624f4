import pytest

from pysbom.diagnostics import TAXONOMY, Diagnostic, Severity, info, warning


def test_taxonomy_covers_issue_codes():
    for code in [f"T{i}" for i in range(1, 8)] + [f"E{i}" for i in range(1, 10)]:
        assert code in TAXONOMY


def test_unknown_code_rejected():
    with pytest.raises(ValueError):
        Diagnostic("X1", Severity.INFO, "nope")


def test_severity_ranks():
    assert Severity.INFO.rank < Severity.WARNING.rank < Severity.ERROR.rank
    assert Diagnostic("T3", "warning", "m").severity is Severity.WARNING


def test_sort_key_orders_by_code_then_subject():
    diags = [warning("T6", "m", "b"), info("E1", "m"), warning("T6", "m", "a")]
    assert [(d.code, d.subject) for d in sorted(diags, key=lambda d: d.sort_key())] == [
        ("E1", None), ("T6", "a"), ("T6", "b")]
