import json
import logging

import pytest
from pytest import mark, raises

from apportion.propcon import LogHandler, __version__
from apportion.propcon.cli import main


@pytest.fixture(autouse=True)
def reset_logging(clean_env):
    yield
    log = logging.getLogger("apportion")
    for hdl in [h for h in log.handlers if isinstance(h, LogHandler)]:
        log.removeHandler(hdl)
    log.setLevel(logging.NOTSET)


def json_lines(out):
    return [json.loads(line) for line in out.splitlines() if line.strip()]


def test_version(capsys):
    with raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_compute_json(instance_file, capsys):
    fname = instance_file([3, 2, 1], 2)
    assert main(["compute", str(fname), "webster", "--json"]) == 0
    res = json.loads(capsys.readouterr().out)
    assert res["method"] == "webster"
    assert res["quotas"] == ["1", "2/3", "1/3"]
    assert res["apportionment"]["seats"] == [1, 1, 0]
    assert res["certificate"]["valid"] is True
    assert "trace" not in res


def test_compute_table(instance_file, capsys):
    fname = instance_file([1000, 2500, 4600], 27, names=["c", "b", "a"])
    rule = "table:default=1;2=5/2,8=17/2,14=29/2"
    assert main(["compute", str(fname), rule]) == 0
    out = capsys.readouterr().out
    assert out.startswith(f"{rule} H=27")
    lines = out.splitlines()
    assert lines[2].split() == ["c", "1000", "10/3", "3"]
    assert lines[4].split() == ["a", "4600", "46/3", "15"]
    assert "tie_flag: false" in out
    assert "certificate: lower=" in out


def test_compute_table_unnamed(instance_file, capsys):
    fname = instance_file([1, 3, 2], 6)
    assert main(["compute", str(fname), "hamilton"]) == 0
    rows = [line.split() for line in capsys.readouterr().out.splitlines()[2:5]]
    assert rows == [["1", "1", "1", "1"], ["2", "3", "3", "3"], ["3", "2", "2", "2"]]


def test_compute_house_override(instance_file, capsys):
    fname = instance_file([14375, 9350, 5425, 5425, 5425], 40)
    assert main(["compute", str(fname), "nis", "--house", "32", "--json"]) == 0
    res = json.loads(capsys.readouterr().out)
    assert res["apportionment"]["seats"] == [13, 7, 4, 4, 4]
    assert res["apportionment"]["house"] == 32


def test_compute_shift(instance_file, capsys):
    fname = instance_file([14375, 9350, 5425, 5425, 5425], 40, shift="1/2")
    assert main(["compute", str(fname), "shiftquota", "--json"]) == 0
    res = json.loads(capsys.readouterr().out)
    assert res["method"] == "shiftquota:1/2"
    assert res["apportionment"]["seats"] == [15, 9, 6, 5, 5]
    assert res["apportionment"]["tie_flag"] is True


def test_compute_trace(instance_file, capsys):
    fname = instance_file([57535, 56825, 4027, 3318, 3295], 12)
    assert main(["compute", str(fname), "quotatone:hill", "--trace", "--json"]) == 0
    res = json.loads(capsys.readouterr().out)
    trace = res["trace"]
    assert [step["house"] for step in trace] == list(range(1, 13))
    assert trace[0]["alpha_tilde"] is None
    for step in trace:
        assert step["winner"] in step["eligible"]
        assert set(step["eligible"]) == set(step["lower"]) & set(step["upper"])

    assert main(["compute", str(fname), "webster", "--trace"]) == 0
    out = capsys.readouterr().out
    assert "house=1 winner=0 priority=" in out


def test_check(instance_file, capsys):
    fname = instance_file([1000, 965, 965, 965, 965, 965, 625, 550], 70)
    assert main(["check", str(fname), "nis", "pc", "--json"]) == 1
    res = json.loads(capsys.readouterr().out)
    assert res["ok"] is False
    failed = [v for v in res["report"]["verdicts"] if not v["pass"]]
    assert failed[0]["lambda"] == "2/5"
    assert failed[0]["expected"]["seats"] == [4, 4, 4, 4, 4, 4, 2, 2]

    assert main(["check", str(fname), "nis", "pc"]) == 1
    out = capsys.readouterr().out
    assert "2/5" in out and "False" in out

    assert main(["check", str(fname), "nis", "quota", "--house", "28"]) == 1
    assert "witness: 7" in capsys.readouterr().out
    assert main(["check", str(fname), "hamilton", "quota"]) == 0
    assert main(["check", str(fname), "nis", "proportional", "--json"]) == 1
    res = json.loads(capsys.readouterr().out.splitlines()[-1])
    assert res["witness"] == "('pc', '2/5')"


@mark.parametrize(
    "prop, ok",
    [("monotone", False), ("homogeneous", True), ("weakprop", True), ("sets", True)],
)
def test_check_hamilton(instance_file, capsys, prop, ok):
    fname = instance_file([6, 6, 2], 4)
    code = main(["check", str(fname), "hamilton", prop, "--house-max", "10", "--json"])
    assert code == (0 if ok else 1)
    res = json.loads(capsys.readouterr().out)
    assert res["ok"] is ok
    if prop == "monotone":
        assert res["witness"] == "(4, 2)"


def test_search(capsys):
    argv = ["search", "webster", "--states", "3", "--min-states", "2"]
    argv += ["--max-pop", "200"]
    assert main(argv + ["--trials", "100", "--seed", "5", "--max-house", "40"]) == 0
    (line,) = json_lines(capsys.readouterr().out)
    assert line["summary"]["violations"] == 0
    assert line["summary"]["seed"] == 5
    assert line["summary"]["mode"] == "random"


def test_search_violations(capsys):
    argv = ["search", "nis", "--states", "8", "--max-pop", "1000", "--min-house", "70"]
    argv += ["--max-house", "70", "--trials", "60", "--stop-after", "1"]
    code = main(argv)
    lines = json_lines(capsys.readouterr().out)
    summary = lines[-1]["summary"]
    assert code == (1 if summary["violations"] else 0)
    assert len(lines) == 1 + summary["violations"]
    for line in lines[:-1]:
        assert line["violation"]["overall"] is False


def test_search_exhaustive(capsys):
    argv = ["search", "nis", "--states", "3", "--max-pop", "6", "--max-house", "12"]
    assert main(argv + ["--exhaustive", "--max-lambda", "1/3"]) == 0
    (line,) = json_lines(capsys.readouterr().out)
    assert line["summary"]["mode"] == "exhaustive"
    assert line["summary"]["checked"] > 0


def test_reproduce(capsys):
    assert main(["reproduce", "nis-eight"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 3
    assert all(line.startswith("PASS") for line in lines)

    assert main(["reproduce", "nis-five", "--json"]) == 0
    rows = json_lines(capsys.readouterr().out)
    assert {r["check"] for r in rows} == {"seats", "pc:4/5"}
    assert all(r["pass"] for r in rows)


@mark.timeout(60)
@mark.parametrize("fixture", ["prop1ii", "prop8", "prop9n5", "prop11", "prop13"])
def test_reproduce_ids(fixture, capsys):
    assert main(["reproduce", fixture]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines
    for line in lines:
        status, name, method, house, check = line.split()
        assert status == "PASS" and name == fixture
        assert house.startswith("H=")
    if fixture == "prop1ii":
        assert any("table:default=1;2=5/2,8=17/2,14=29/2  H=27" in x for x in lines)


def test_tie(instance_file, capsys, monkeypatch):
    fname = instance_file([1, 1], 1)
    assert main(["compute", str(fname), "webster", "--tie", "fail"]) == 1
    captured = capsys.readouterr()
    res = json.loads(captured.out)
    assert res["tie"]["house"] == 1
    assert sorted(res["tie"]["states"]) == [0, 1]
    assert "propcon:" in captured.err

    monkeypatch.setenv("PROPCON_TIE", "fail")
    assert main(["compute", str(fname), "hamilton"]) == 1
    assert main(["compute", str(fname), "hamilton", "--tie", "larger"]) == 0


def test_invalid_input(instance_file, tmp_path, capsys):
    fname = instance_file([3, 2, 1], 2)
    assert main(["compute", str(fname), "sainte-lague"]) == 2
    assert "unknown rounding rule" in capsys.readouterr().err
    assert main(["compute", str(tmp_path / "missing.json"), "webster"]) == 2
    assert main(["compute", str(instance_file([3, 0], 2)), "webster"]) == 2
    assert main(["compute", str(fname), "webster", "--house", "-1"]) == 2
    assert main(["compute", str(fname), "webster", "--tie", "coin"]) == 2
    assert main(["search", "webster", "--min-house", "0"]) == 2
    assert main(["compute", str(fname), "webster", "--log-level", "chatty"]) == 2
    with raises(SystemExit):
        main(["check", str(fname), "webster", "fairness"])


def test_log_level(instance_file, capsys, monkeypatch):
    fname = instance_file([1, 1], 1)
    assert main(["compute", str(fname), "webster", "--json"]) == 0
    captured = capsys.readouterr()
    assert json.loads(captured.out)["apportionment"]["tie_flag"] is True
    assert "tie at house 1" in captured.err

    monkeypatch.setenv("PROPCON_LOG", "ERROR")
    assert main(["compute", str(fname), "webster", "--json"]) == 0
    assert "tie at house 1" not in capsys.readouterr().err
    argv = ["compute", str(fname), "webster", "--log-level", "debug", "--trace"]
    assert main(argv) == 0
    assert "seat 1 -> state 0" in capsys.readouterr().err
