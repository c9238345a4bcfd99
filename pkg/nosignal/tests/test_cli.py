import json

import pytest

from resources.lib.cli import EXIT_FAIL, EXIT_INPUT, EXIT_PASS, dispatch, parse_args, router
from resources.lib.config import DEFAULT_TOLERANCES, Config
from resources.lib.toolkit import Toolkit

SIGNALING_BOX = {
    "version": "1",
    "entries": [
        {
            "box": {
                "x": 1,
                "y": 2,
                "a": 2,
                "b": 2,
                "table": [[[[0.35, 0.25], [0.15, 0.25]], [[0.25, 0.25], [0.25, 0.25]]]],
            }
        }
    ],
}


@pytest.fixture
def signaling_file(tmp_path):
    path = tmp_path / "signaling.json"
    path.write_text(json.dumps(SIGNALING_BOX), encoding="utf-8")
    return path


def test_router_knows_every_command():
    assert sorted(router.actions) == ["fixture_list", "fixture_run", "runs", "sweep", "tolerances", "verify"]


def test_parser_requires_a_command():
    with pytest.raises(SystemExit):
        parse_args([])
    with pytest.raises(SystemExit):
        parse_args(["--fixture", "pr_box", "runs"])


def test_fixture_run_passes(capsys):
    assert dispatch(["--no-record", "fixture", "run", "pr_box"]) == EXIT_PASS
    report = json.loads(capsys.readouterr().out)
    assert report["verdict"] == "pass"
    assert report["source"] == "pr_box.json"
    assert report["seed"] == 7
    assert report["entries"][0]["details"]["chsh"] == 4


def test_verify_failing_file(signaling_file, capsys):
    assert dispatch(["--no-record", "verify", str(signaling_file)]) == EXIT_FAIL
    report = json.loads(capsys.readouterr().out)
    assert report["verdict"] == "fail"
    assert report["max_deviation"] == pytest.approx(0.1, abs=1e-12)


def test_tol_flag_turns_failure_into_pass(signaling_file):
    assert dispatch(["--no-record", "--tol", "0.2", "verify", str(signaling_file)]) == EXIT_PASS


def test_missing_file_is_an_input_error(tmp_path, capsys):
    assert dispatch(["verify", str(tmp_path / "absent.json")]) == EXIT_INPUT
    assert capsys.readouterr().err.startswith("error: ")


def test_malformed_file_is_an_input_error(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"version": "1", "entries": [', encoding="utf-8")
    assert dispatch(["verify", str(path)]) == EXIT_INPUT
    assert "line 1" in capsys.readouterr().err


def test_unknown_fixture_is_an_input_error(capsys):
    assert dispatch(["fixture", "run", "nope"]) == EXIT_INPUT
    assert "unknown fixture" in capsys.readouterr().err


def test_bad_dims_are_an_input_error():
    assert dispatch(["sweep", "nosignal", "--dims", "2"]) == EXIT_INPUT
    assert dispatch(["sweep", "nosignal", "--dims", "2xq"]) == EXIT_INPUT
    assert dispatch(["--trials", "0", "sweep", "gleason"]) == EXIT_INPUT


def test_unknown_sweep_kind_exits_through_argparse():
    with pytest.raises(SystemExit) as info:
        dispatch(["sweep", "bogus"])
    assert info.value.code == 2


def test_sweep_text_output(capsys):
    args = ["--format", "text", "--trials", "3", "--seed", "1", "sweep", "gleason", "--dims", "3,4"]
    assert dispatch(args) == EXIT_PASS
    out = capsys.readouterr().out.splitlines()
    assert out[0] == f"{Toolkit.ID} {Toolkit.VERSION} | sweep gleason | seed 1"
    assert "sweep:gleason 3" in out[2]
    assert "sweep:gleason 4" in out[3]
    assert out[-1] == "overall: PASS"


def test_fixture_list(capsys):
    assert dispatch(["fixture", "list"]) == EXIT_PASS
    listing = json.loads(capsys.readouterr().out)["fixtures"]
    assert {"name": "qutrit_default", "entries": 2} in listing
    assert len(listing) == 6


def test_runs_are_recorded(toolkit_home, signaling_file, capsys):
    dispatch(["fixture", "run", "pr_box"])
    dispatch(["--seed", "3", "verify", str(signaling_file)])
    dispatch(["fixture", "list"])
    runs = Config(toolkit_home).get_runs()
    assert [r.command for r in runs] == ["fixture run pr_box", f"--seed 3 verify {signaling_file}"]
    assert [r.passed for r in runs] == [True, False]
    assert runs[1].seed == 3
    capsys.readouterr()

    assert dispatch(["--format", "text", "runs"]) == EXIT_PASS
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "runs"
    assert "fail" in lines[1]
    assert "pass" in lines[2]


def test_no_record_leaves_history_empty(toolkit_home):
    dispatch(["--no-record", "fixture", "run", "pr_box"])
    assert Config(toolkit_home).get_runs() == []


def test_debug_flag(capsys):
    assert dispatch(["--debug", "--no-record", "fixture", "run", "pr_box"]) == EXIT_PASS
    assert Toolkit.debug()
    assert "dispatching" in capsys.readouterr().err


def test_flags_after_the_command(capsys):
    args = ["--no-record", "sweep", "gleason", "--dims", "3", "--trials", "2", "--seed", "5"]
    assert dispatch(args) == EXIT_PASS
    report = json.loads(capsys.readouterr().out)
    assert report["seed"] == 5
    assert report["entries"][0]["details"]["trials"] == 2

    assert dispatch(["fixture", "run", "pr_box", "--seed", "3", "--no-record"]) == EXIT_PASS
    assert json.loads(capsys.readouterr().out)["seed"] == 3


def test_flags_after_the_command_override_earlier_ones(capsys):
    args = ["--seed", "1", "--format", "text", "sweep", "gleason", "--dims", "3", "--trials", "2", "--seed", "4"]
    assert dispatch([*args, "--no-record"]) == EXIT_PASS
    out = capsys.readouterr().out.splitlines()
    assert out[0] == f"{Toolkit.ID} {Toolkit.VERSION} | sweep gleason | seed 4"


def test_fixture_flag_runs_a_bundled_scenario(capsys):
    assert dispatch(["--no-record", "--fixture", "pr_box"]) == EXIT_PASS
    assert json.loads(capsys.readouterr().out)["source"] == "pr_box.json"


@pytest.mark.parametrize(
    "args",
    [
        ["--seed", "-1", "sweep", "gleason"],
        ["sweep", "gleason", "--seed", "-1"],
        ["--workers", "0", "fixture", "run", "pr_box"],
        ["--trials", "0", "fixture", "run", "qutrit_default"],
        ["--budget", "0", "sweep", "search"],
    ],
)
def test_out_of_range_flags_are_input_errors(args, capsys):
    assert dispatch(args) == EXIT_INPUT
    assert capsys.readouterr().err.startswith("error: ")


def test_negative_stanza_seed_is_an_input_error(tmp_path, capsys):
    path = tmp_path / "seeded.json"
    path.write_text(json.dumps({"version": "1", "entries": [{"sweep": {"kind": "gleason", "seed": -5}}]}))
    assert dispatch(["verify", str(path)]) == EXIT_INPUT
    assert "seed" in capsys.readouterr().err


def test_undecodable_file_is_an_input_error(tmp_path, capsys):
    path = tmp_path / "binary.json"
    path.write_bytes(b"\xff\xfe{}")
    assert dispatch(["verify", str(path)]) == EXIT_INPUT
    assert "line 1, column 1" in capsys.readouterr().err


@pytest.mark.parametrize("content", ["{", '{"prob": "small"}', '{"prob": -1}', "[1e-9]"])
def test_broken_tolerance_file_is_an_input_error(toolkit_home, content, capsys):
    toolkit_home.mkdir(parents=True)
    (toolkit_home / "tolerances.json").write_text(content)
    assert dispatch(["fixture", "list"]) == EXIT_INPUT
    assert "tolerances.json" in capsys.readouterr().err


def test_broken_run_history_does_not_fail_the_run(toolkit_home):
    toolkit_home.mkdir(parents=True)
    (toolkit_home / "runs.json").write_text('{"runs": [{"command": "x"}]}')
    assert dispatch(["fixture", "run", "pr_box"]) == EXIT_PASS
    assert dispatch(["runs"]) == EXIT_INPUT


def test_tolerances_command(toolkit_home, capsys):
    assert dispatch(["tolerances", "prob=1e-8", "psd=2e-9"]) == EXIT_PASS
    rows = {r["name"]: r["value"] for r in json.loads(capsys.readouterr().out)["tolerances"]}
    assert rows["prob"] == 1e-8
    assert rows["psd"] == 2e-9
    assert rows["herm"] == DEFAULT_TOLERANCES.herm
    assert Config(toolkit_home).get_tolerances().prob == 1e-8

    assert dispatch(["tolerances", "res=1e-9"]) == EXIT_PASS
    tols = Config(toolkit_home).get_tolerances()
    assert (tols.prob, tols.res) == (1e-8, 1e-9)
    assert Config(toolkit_home).get_runs() == []


@pytest.mark.parametrize("assignment", ["wobble=1", "prob", "prob=abc", "prob=-1", "prob=nan"])
def test_tolerances_command_rejects_bad_assignments(toolkit_home, assignment):
    assert dispatch(["tolerances", assignment]) == EXIT_INPUT
    assert not (toolkit_home / "tolerances.json").exists()
