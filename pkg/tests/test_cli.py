import io
import json
import math

from tangentkit.cli import (
    EXIT_LAW_FAILURE,
    EXIT_NUMERIC,
    EXIT_OK,
    EXIT_USAGE,
    dispatch,
)
from tangentkit.fields import LawCheck
from tangentkit.reports import LAW_ANCHORS, emit_report, report_dict
from tangentkit.verify import run_suite


def run(argv):
    out = io.StringIO()
    code = dispatch(argv, stdout=out)
    return code, out.getvalue()


def test_solve_euler_final_state():
    code, out = run(["solve", "--dim", "1", "--vf", "x1", "--t", "1", "--x0", "1"])
    assert code == EXIT_OK
    payload = json.loads(out)
    assert abs(payload["state"][0] - math.e) <= 1e-8


def test_solve_time_dependent():
    code, out = run(
        ["solve", "--dim", "1", "--vf", "x1 + cos(t)", "--time-dependent",
         "--t", "1", "--x0", "0"]
    )
    assert code == EXIT_OK
    want = (math.e + math.sin(1.0) - math.cos(1.0)) / 2.0
    assert abs(json.loads(out)["state"][0] - want) <= 1e-6


def test_solve_blow_up_exits_3(capsys):
    code, _ = run(["solve", "--dim", "1", "--vf", "x1^2", "--t", "1", "--x0", "1"])
    assert code == EXIT_NUMERIC
    err = capsys.readouterr().err
    assert "step size collapse near t=1.000" in err


def test_usage_error_missing_flag(capsys):
    code, _ = run(["solve", "--dim", "1", "--t", "1", "--x0", "1"])
    assert code == EXIT_USAGE
    assert "--vf" in capsys.readouterr().err


def test_usage_error_bad_subcommand():
    code, _ = run(["orbit"])
    assert code == EXIT_USAGE


def test_usage_error_parse_failure(capsys):
    code, _ = run(["solve", "--dim", "1", "--vf", "x1 +", "--t", "1", "--x0", "1"])
    assert code == EXIT_USAGE
    assert "syntax error" in capsys.readouterr().err


def test_usage_error_wrong_x0_length():
    code, _ = run(["solve", "--dim", "2", "--vf", "x2; -x1", "--t", "1", "--x0", "1"])
    assert code == EXIT_USAGE


def test_flow_emits_trajectory_of_zero_field():
    code, out = run(
        ["flow", "--dim", "2", "--vf", "0; 0", "--t", "1", "--x0", "1,2", "--grid", "2"]
    )
    assert code == EXIT_OK
    lines = out.strip().splitlines()
    assert lines[0] == "t,x1,x2"
    assert len(lines) == 4
    # a zero field stays put: identical state on every row
    states = {line.split(",", 1)[1] for line in lines[1:]}
    assert states == {"1.0,2.0"}


def test_bracket_prints_value_and_matrix():
    code, out = run(
        ["bracket", "--dim", "2", "--vf", "x2; -x1", "--vf2", "x1; x2",
         "--x0", "1,2", "--as-matrix"]
    )
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["bracket"] == [0.0, 0.0]
    assert payload["matrix"] == [[0.0, 0.0], [0.0, 0.0]]


def test_commute_exit_codes():
    code, out = run(["commute", "--dim", "2", "--vf", "x2; -x1", "--vf2", "x1; x2"])
    assert code == EXIT_OK
    code, out = run(
        ["commute", "--dim", "2", "--vf", "x2; 0", "--vf2", "0; x1"]
    )
    assert code == EXIT_LAW_FAILURE
    payload = json.loads(out)
    assert any(not law["passed"] for law in payload["laws"])


def test_expm_subcommand():
    code, out = run(["expm", "--matrix", "0,1;0,0"])
    assert code == EXIT_OK
    got = json.loads(out)["expm"]
    assert abs(got[0][1] - 1.0) <= 1e-12
    code, out = run(["expm", "--matrix", "0,1;-1,0", "--t", str(math.pi / 2.0)])
    assert code == EXIT_OK
    got = json.loads(out)["expm"]
    assert abs(got[0][0]) <= 1e-12 and abs(got[0][1] - 1.0) <= 1e-12


def test_expm_usage_error_nonsquare():
    code, _ = run(["expm", "--matrix", "1,2,3;4,5,6"])
    assert code == EXIT_USAGE


def test_exp_subcommand():
    code, out = run(["exp", "--t", "1"])
    assert code == EXIT_OK
    assert abs(json.loads(out)["e"] - math.e) <= 1e-8
    code, out = run(["exp", "--t", "1", "--dim", "2", "--x0", "1,2"])
    assert code == EXIT_OK
    state = json.loads(out)["state"]
    assert abs(state[1] - 2.0 * math.e) <= 1e-8


def test_geodesic_subcommand():
    code, out = run(
        ["geodesic", "--dim", "2",
         "--christoffel", "-2*x3*x4/x2; (x3^2 - x4^2)/x2",
         "--t", "1", "--x0", "0,1,1,0"]
    )
    assert code == EXIT_OK
    payload = json.loads(out)
    x, y = payload["state"][0], payload["state"][1]
    assert abs(x * x + y * y - 1.0) <= 1e-5
    assert payload["acceleration_residual"] <= 1e-6


def test_verify_curve_suite_passes():
    code, out = run(["verify", "--suite", "curve"])
    assert code == EXIT_OK
    payload = json.loads(out)
    ids = {law["law_id"] for law in payload["laws"]}
    assert "sigma-commutative" in ids
    anchor = next(
        law["paper_anchor"]
        for law in payload["laws"]
        if law["law_id"] == "sigma-commutative"
    )
    assert anchor == "σ is a commutative operation"


def test_verify_reports_are_byte_identical():
    _, a = run(["verify", "--suite", "curve", "--seed", "7"])
    _, b = run(["verify", "--suite", "curve", "--seed", "7"])
    assert a == b


def test_verify_out_file(tmp_path):
    path = tmp_path / "report.json"
    code, out = run(["verify", "--suite", "kernel", "--out", str(path)])
    assert code == EXIT_OK
    assert out == ""
    payload = json.loads(path.read_text())
    assert payload["config"]["suite"] == "kernel"
    assert all(law["passed"] for law in payload["laws"])


def test_config_file_supplies_flags(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("dim=1\nvf=x1\nt=1\nx0=1\n# comment\n")
    code, out = run(["solve", "--config", str(cfg)])
    assert code == EXIT_OK
    assert abs(json.loads(out)["state"][0] - math.e) <= 1e-8


def test_config_file_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("dim=1\nvf=x1\nt=1\nx0=1\n")
    code, out = run(["solve", "--config", str(cfg), "--t", "0"])
    assert code == EXIT_OK
    assert json.loads(out)["state"] == [1.0]


def test_config_file_unknown_key(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("orbit=3\n")
    code, _ = run(["solve", "--config", str(cfg)])
    assert code == EXIT_USAGE


def test_rk4_flag():
    code, out = run(
        ["solve", "--dim", "1", "--vf", "x1", "--t", "1", "--x0", "1",
         "--rk4-h", "0.001"]
    )
    assert code == EXIT_OK
    assert abs(json.loads(out)["state"][0] - math.e) <= 1e-9


# -- report schema -------------------------------------------------------------------


def test_emit_report_empty_laws_is_valid_json():
    payload = json.loads(emit_report([], seed=1, config={}))
    assert payload["laws"] == []
    assert payload["version"] == "1"


def test_report_field_order_is_stable():
    law = LawCheck("sigma-commutative", True, 0.0, (1.0, 2.0), 1)
    d = report_dict([law], seed=1, config={"suite": "curve"})
    assert list(d) == ["version", "seed", "config", "laws"]
    assert list(d["laws"][0]) == [
        "law_id",
        "paper_anchor",
        "passed",
        "max_residual",
        "witness",
    ]


def test_every_emitted_law_id_is_in_the_anchor_table():
    # the law_id -> anchor mapping is a checked resource
    assert len(set(LAW_ANCHORS)) == len(LAW_ANCHORS)
    for name in ("kernel", "vf", "curve", "flows", "rig", "action"):
        for check in run_suite(name, quick=True):
            assert check.law in LAW_ANCHORS, check.law
