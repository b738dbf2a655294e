"""Acceptance gate: every criterion at its stated tolerance, one verdict
line each (shared with `qgfront verify`)."""

import pytest

from qgfront import acceptance


@pytest.mark.parametrize("name,fn", acceptance.CRITERIA,
                         ids=[name for name, _ in acceptance.CRITERIA])
def test_criterion(name, fn, capsys):
    result = fn()
    verdict = "PASS" if result.passed else "FAIL"
    with capsys.disabled():
        print(f"\n[{verdict}] {result.name}: {result.detail} "
              f"({result.seconds:.1f}s)")
    assert result.passed, f"{result.name}: {result.detail}"
