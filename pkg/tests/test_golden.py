import pytest

import test_tool

CASES = test_tool.load_manifest()


@pytest.mark.parametrize("case", CASES, ids=[c["name"] for c in CASES])
def test_manifest_case(case):
    result = test_tool.test_case(case)
    assert result["exit"] == case["exit"], result.get("stderr") or result.get("output")
    assert result["deterministic"]


def test_golden_summary_names_failures():
    summary = test_tool.test_golden(only=["cone-control", "min2-interior"])
    assert summary["cases_run"] == 2
    assert summary["failed"] == []
    by_name = {r["name"]: r for r in summary["results"]}
    assert by_name["min2-interior"]["output"] == {"command": "interior", "interior": [0]}
