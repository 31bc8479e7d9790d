import json

import pytest
from click.testing import CliRunner

from app import cli
from lib.reference import DEFAULT_REFERENCE_DIR as REFERENCE_DIR

QUIET = {"LOG_LEVEL": "WARNING", "APP_DEBUG": "0"}


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, args):
    return runner.invoke(cli, args, env=QUIET, catch_exceptions=False)


def test_realalg_check(runner):
    result = invoke(runner, ["realalg", "check", "--epsilon", "-1", "--indices", "5,5,1,5,5,1,2"])
    assert result.exit_code == 0
    data = json.loads(result.output)
    assert data["condition"]["holds"] is True
    assert data["word"] == {"epsilon": -1, "indices": [5, 5, 1, 5, 5, 1, 2]}


def test_realalg_check_bad_index_is_usage_error(runner):
    result = invoke(runner, ["realalg", "check", "--epsilon", "1", "--indices", "1,7"])
    assert result.exit_code == 2
    assert "BadIndex" in result.output


def test_realalg_obstruct_default_braid(runner):
    result = invoke(runner, ["realalg", "obstruct"])
    assert result.exit_code == 0
    data = json.loads(result.output)
    assert data["conway_degree"] == 30
    assert data["bound"] == 38
    assert data["linking_sum"] == -16
    assert data["inequality_holds"] is False


def test_action_rho_n2_level_two(runner):
    result = invoke(runner, ["action", "rho", "--n", "2", "--word", "s1", "--level", "2"])
    assert result.exit_code == 0
    data = json.loads(result.output)
    assert data["cycles"] == "(0 1 6 7 8 9 14 15)(2 3 4 5 10 11 12 13)"
    assert data["source"] == "published"
    assert not data["identity"]


def test_action_act_psi(runner):
    result = invoke(runner, ["action", "act", "--n", "2", "--word", "s1^12", "--digits", "1,0"])
    assert result.exit_code == 0
    assert json.loads(result.output)["output"]["digits"] == [1, 2]


def test_action_image_n2(runner):
    result = invoke(runner, ["action", "image", "--n", "2", "--level", "2", "--word", "s1^4"])
    assert result.exit_code == 0
    data = json.loads(result.output)
    assert data["order"] == 8
    assert len(data["orbits"]) == 2
    assert data["kernel"]["member"] is False


def test_bad_word_exits_2(runner):
    result = invoke(runner, ["action", "rho", "--n", "2", "--word", "s5", "--level", "1"])
    assert result.exit_code == 2


def test_budget_exceeded_exits_1(runner):
    result = invoke(runner, ["action", "rho", "--n", "2", "--word", "s1", "--level", "30"])
    assert result.exit_code == 1
    assert "EnumerationBudgetExceeded" in result.output


def test_dynamics_orbit(runner):
    result = invoke(runner, ["dynamics", "orbit", "--n", "3", "--point", "1", "--point", "-1", "--steps", "3"])
    assert result.exit_code == 0
    data = json.loads(result.output)
    assert data["summary"]["zero_counts"] == [0, 0, 0, 0]
    assert data["summary"]["left_Vn_at"] is None


def test_dynamics_needs_a_V_point(runner):
    result = invoke(runner, ["dynamics", "orbit", "--n", "3", "--point", "1", "--point", "1", "--steps", "3"])
    assert result.exit_code == 2


def test_out_writes_file(runner, tmp_path):
    out = tmp_path / "tree.json"
    plot = tmp_path / "tree.csv"
    result = invoke(
        runner,
        ["dynamics", "tree", "--n", "2", "--point", "1", "--depth", "3", "--plot", str(plot), "--out", str(out)],
    )
    assert result.exit_code == 0
    data = json.loads(out.read_text())
    assert len(data["levels"]) == 4
    assert plot.read_text().splitlines()[0] == "depth,re,im"


def test_alternative_config(runner, tmp_path):
    cfg = tmp_path / "app.yml"
    cfg.write_text("run:\n  n: 2\n")
    result = invoke(runner, ["--config", str(cfg), "action", "rho", "--word", "s1", "--level", "1"])
    assert result.exit_code == 0
    assert json.loads(result.output)["cycles"] == "(0 1 2 3)"


@pytest.mark.slow
def test_verify_quick(runner, tmp_path):
    cfg = tmp_path / "app.yml"
    cfg.write_text(f"paths:\n  cache_dir: {tmp_path / 'cache'}\n  reference_dir: {REFERENCE_DIR}\n")
    out = tmp_path / "checks.json"
    result = invoke(runner, ["--config", str(cfg), "verify-paper", "--quick", "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert all(entry["passed"] for entry in json.loads(out.read_text()))


def test_verify_short_name_is_the_same_command():
    assert cli.commands["verify"] is cli.commands["verify-paper"]
