"""Acceptance criteria 1-10 at the stated tolerances, one PASS/FAIL line each."""

import json

import pytest

from mna.verify import CHECKS, run_check


@pytest.mark.acceptance
@pytest.mark.parametrize("check_id", sorted(CHECKS), ids=lambda i: f"{i:02d}-{CHECKS[i][0].replace(' ', '-')}")
def test_acceptance(check_id, capsys):
    result = run_check(check_id)
    with capsys.disabled():
        status = "PASS" if result["passed"] else "FAIL"
        print(f"\n{status} {check_id} {result['name']} ({result['seconds']:.1f}s)")
    assert result["passed"], json.dumps(result["details"], indent=1, default=str)[:4000]
