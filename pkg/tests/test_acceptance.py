"""The eleven acceptance criteria, one test each.

Every test prints its pass/fail line as it runs; the terminal summary
repeats all of them together (see ``conftest.py``).
"""

import json

import pytest

from extremal import suite

RESULTS: dict[int, suite.CriterionResult] = {}


@pytest.mark.parametrize("criterion", suite.CRITERIA, ids=[f"criterion_{i:02d}" for i in range(1, 12)])
def test_criterion(criterion):
    r = criterion()
    RESULTS[r.number] = r
    print(r.line())
    assert r.passed, json.dumps(r.details, indent=1, default=str)
