import json

import pytest

import const
import omega_tool


def run_json(capsys, *argv):
    code = omega_tool.run([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_check_reports_verdicts(capsys, instances_dir):
    code, payload = run_json(capsys, "check", instances_dir / "z5_midpoint.json")
    assert code == const.EXIT_OK
    assert payload["command"] == "check"
    assert payload["reflexive"]["verdict"] == "pass"
    assert payload["mutually_distributive"]["verdict"] == "pass"
    assert "hypotheses" in payload


def test_hull_of_named_set(capsys, instances_dir):
    code, payload = run_json(capsys, "hull", "--set", "H", instances_dir / "z5_midpoint.json")
    assert code == const.EXIT_OK
    assert payload["set"] == [0, 1]
    assert payload["hull"] == [0, 1, 2, 3, 4]


def test_extreme_hull_interior_and_boundary(capsys, instances_dir):
    min2 = instances_dir / "min2_support.json"
    assert run_json(capsys, "extreme-hull", "--set", "E", min2)[1]["extreme_hull"] == [2, 3]
    assert run_json(capsys, "interior", min2)[1]["interior"] == [0]
    assert run_json(capsys, "boundary", instances_dir / "z5_midpoint.json")[1]["boundary"] == []


def test_classify_map(capsys, instances_dir):
    code, payload = run_json(capsys, "classify-map", "--function", "f", instances_dir / "min2_support.json")
    assert code == const.EXIT_OK
    assert payload["function"] == "f"
    assert payload["convex"]["verdict"] == "pass"
    assert payload["concave"]["verdict"] == "fail"
    assert payload["affine"]["verdict"] == "fail"


def test_classify_map_expectation_sets_exit_code(capsys, instances_dir):
    min2 = instances_dir / "min2_support.json"
    code, payload = run_json(capsys, "classify-map", "--function", "f", "--expect", "convex", min2)
    assert code == const.EXIT_OK
    assert payload["expect"] == "convex"
    code, payload = run_json(capsys, "classify-map", "--function", "f", "--expect", "affine", min2)
    assert code == const.EXIT_PREDICATE_FALSE
    assert payload["affine"]["verdict"] == "fail"


def test_inline_index_list_for_set(capsys, instances_dir):
    code, payload = run_json(capsys, "hull", "--set", "0,1", instances_dir / "z5_midpoint.json")
    assert code == const.EXIT_OK
    assert payload["set"] == [0, 1]
    assert payload["hull"] == [0, 1, 2, 3, 4]
    code, payload = run_json(capsys, "classify-map", "--function", "f", "--set", "2, 3", instances_dir / "min2_support.json")
    assert code == const.EXIT_OK
    assert payload["domain"] == [2, 3]
    code, payload = run_json(capsys, "hull", "--set", "0,9", instances_dir / "z5_midpoint.json")
    assert code == const.EXIT_INVALID_INPUT
    assert payload["error"] == "OutOfRange"


def test_unexpected_crash_is_an_internal_error(capsys, instances_dir, monkeypatch):
    def crash(doc, args):
        raise ZeroDivisionError("division by zero")

    monkeypatch.setitem(omega_tool.COMMANDS, "interior", crash)
    code, payload = run_json(capsys, "interior", instances_dir / "z5_midpoint.json")
    assert code == const.EXIT_INTERNAL_ERROR
    assert code not in (const.EXIT_PREDICATE_FALSE, const.EXIT_INVALID_INPUT, const.EXIT_RESOURCE_LIMIT)
    assert payload == {"error": "InternalError", "message": "ZeroDivisionError: division by zero"}


def test_support_certificate(capsys, instances_dir):
    code, payload = run_json(capsys, "support", instances_dir / "min2_support.json")
    assert code == const.EXIT_OK
    assert payload["certificate"]["backend"] == "lp"
    assert payload["certificate"]["g"] == [["1"]] * 4


def test_support_at_boundary_point(capsys, instances_dir):
    code, payload = run_json(capsys, "support-at", "--point", "1", instances_dir / "min2_support.json")
    assert code == const.EXIT_PREDICATE_FALSE
    assert payload["error"] == "NotInterior"
    assert payload["witness"] == {"p": 1, "interior": [0]}


def test_cone_actions(capsys, instances_dir):
    cone = instances_dir / "cone_2d.json"
    code, payload = run_json(capsys, "cone", "control", "--norm", "l1", cone)
    assert code == const.EXIT_OK
    assert payload["control"] == {"phi": ["1", "1"], "scale": "1", "norm": "l1"}
    code, payload = run_json(capsys, "cone", "member", "--vector", "2,1", cone)
    assert code == const.EXIT_OK
    assert payload["member"] == {"in_cone": True, "in_bipolar": True}
    code, payload = run_json(capsys, "cone", "member", "--vector", "0,1", cone)
    assert code == const.EXIT_PREDICATE_FALSE
    assert payload["member"]["in_cone"] is False


def test_cone_needs_a_name_when_ambiguous(capsys, tmp_path):
    doc = tmp_path / "two.json"
    doc.write_text(
        json.dumps(
            {
                "schema_version": "1",
                "cones": {"A": {"kind": "orthant", "dim": 2}, "B": {"kind": "lorenz", "dim": 1, "norm": "linf"}},
            }
        )
    )
    code, payload = run_json(capsys, "cone", "sharp", doc)
    assert code == const.EXIT_INVALID_INPUT
    assert payload["error"] == "SchemaError"
    code, payload = run_json(capsys, "cone", "sharp", "--cone", "B", doc)
    assert code == const.EXIT_OK
    assert payload["sharp"]["verdict"] == "pass"


def test_ri_certificate(capsys, instances_dir):
    code, payload = run_json(capsys, "ri-cert", instances_dir / "ri_interval.json")
    assert code == const.EXIT_OK
    assert payload["ri"]["first_index"] == -2
    assert payload["ri"]["membership"]["verdict"] == "pass"


def test_input_errors_exit_2(capsys, instances_dir, tmp_path):
    code, payload = run_json(capsys, "check", tmp_path / "absent.json")
    assert code == const.EXIT_INVALID_INPUT
    assert payload["error"] == "InvalidInput"
    code, payload = run_json(capsys, "hull", instances_dir / "z5_midpoint.json")
    assert code == const.EXIT_INVALID_INPUT
    assert payload["witness"]["violations"][0]["path"] == "--set"
    code, payload = run_json(capsys, "check", instances_dir / "bad_table.json")
    assert code == const.EXIT_INVALID_INPUT
    assert payload["error"] == "SchemaError"


def test_cell_cap_exits_3(capsys, instances_dir):
    code, payload = run_json(capsys, "check", "--max-cells", "10", instances_dir / "z5_midpoint.json")
    assert code == const.EXIT_RESOURCE_LIMIT
    assert payload["error"] == "ResourceLimit"


def test_table_format(capsys, instances_dir):
    code = omega_tool.run(["check", "--format", "table", str(instances_dir / "z5_midpoint.json")])
    assert code == const.EXIT_OK
    assert "reflexive" in capsys.readouterr().out


def test_no_command_prints_help(capsys):
    assert omega_tool.run([]) == const.EXIT_INVALID_INPUT
    assert "usage" in capsys.readouterr().out


def test_missing_instance_is_a_usage_error():
    with pytest.raises(SystemExit) as info:
        omega_tool.run(["hull"])
    assert info.value.code == 2
