import json

import numpy as np
import pytest

from lib.config import RunConfig
from lib.verify import CheckResult, Verifier, format_table


@pytest.fixture(scope="module")
def verifier():
    return Verifier(RunConfig(n=3), quick=True)


def test_check_result_serializes_numpy_booleans():
    result = CheckResult("deviation", np.float64(1e-9) <= 1e-8, "tiny")
    assert result.passed is True
    assert json.loads(json.dumps(result.to_json())) == {"name": "deviation", "passed": True, "detail": "tiny"}


def test_beta_example_checks(verifier):
    results = verifier.beta_example()
    assert [r.name for r in results] == ["beta-pattern", "beta-level1-identity", "beta-level2-56"]
    assert all(r.passed for r in results)
    assert results[-1].detail == "56 -> 380"


def test_obstruction_checks(verifier):
    results = {r.name: r for r in verifier.obstruction()}
    assert all(r.passed for r in results.values())
    assert results["obstruction-degree"].detail == "degree 30 < bound 38"


def test_format_table_counts_passes():
    table = format_table([CheckResult("a", True, "ok"), CheckResult("bb", False, "no")])
    lines = table.splitlines()
    assert lines[1].startswith("a   PASS")
    assert lines[2].startswith("bb  FAIL")
    assert lines[-1] == "1/2 checks passed"
