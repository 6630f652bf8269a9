import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from indiga.cli import bundled_examples, main, read_example
from indiga.errors import ParseError, SessionNameError
from indiga.session import Config, emit_report, parse_session, run_text
from indiga.session.dsl import check_names

TOWER = "let A = tower adic vars=[u] ideal=[u]\n"


@pytest.mark.parametrize("name", bundled_examples())
def test_round_trip(name):
    script = parse_session(read_example(name))
    again = parse_session(script.render())
    assert again.statements == script.statements
    assert again.render() == script.render()


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.sampled_from(["u", "u^2", "u^3", "2*u", "(1 - u)", "1/3*u"]), min_size=1, max_size=3),
    st.integers(1, 9),
)
def test_generated_statements_round_trip(terms, level):
    text = TOWER + "let D = der A { u -> " + " + ".join(terms) + " }\n" + f"exp D u level {level}\n"
    script = parse_session(text)
    assert parse_session(script.render()).statements == script.statements


def test_parse_error_location():
    with pytest.raises(ParseError) as err:
        parse_session("let A = tower fancy vars=[u]\n")
    assert err.value.line == 1
    assert "fancy" in str(err.value)
    with pytest.raises(ParseError) as err:
        parse_session(TOWER + "let D = der A { u -> u^ }\n")
    assert err.value.line == 2


def test_undefined_name():
    with pytest.raises(SessionNameError) as err:
        check_names(parse_session(TOWER + "exp D u level 3\n"))
    assert "'D' is not defined" in str(err.value)


def test_failures_are_records():
    rep = run_text(TOWER + "let D = der A { u -> u }\nexp D u level 3\nlocalize A f=u level 3\n")
    d = rep.as_dict()
    statuses = [r["status"] for r in d["records"]]
    assert statuses == ["ok", "ok", "failed", "ok"]
    assert d["records"][2]["error"]["type"] == "RequiresCertificate"
    assert d["summary"] == {"failed": 1, "ok": 3, "records": 4}


def test_fail_fast_stops():
    rep = run_text(TOWER + "let D = der A { u -> u }\nexp D u level 3\nlocalize A f=u level 3\n", Config(fail_fast=True))
    assert [r["status"] for r in rep.as_dict()["records"]] == ["ok", "ok", "failed", "skipped"]


def test_report_is_sorted_json_without_timings():
    rep = run_text(read_example("ufc"))
    out = emit_report(rep)
    data = json.loads(out)
    assert data["report_version"] == 1
    assert data["tool"]["name"] == "indiga"
    assert b'"seconds"' not in out
    assert json.dumps(data, sort_keys=True, indent=2).encode() + b"\n" == out
    assert b'"seconds"' in emit_report(rep, timings=True)


def test_seed_changes_samples_but_not_verdicts():
    a = run_text(read_example("ufc"), Config(seed=1)).as_dict()
    b = run_text(read_example("ufc"), Config(seed=2)).as_dict()
    assert [r["status"] for r in a["records"]] == [r["status"] for r in b["records"]]


def test_cli_run_and_exit_codes(tmp_path, capsys):
    assert main(["run", "ufc", "--format", "text"]) == 0
    assert "certified" in capsys.readouterr().out
    bad = tmp_path / "bad.session"
    bad.write_text(TOWER + "let D = der A { u -> u }\nexp D u level 3\n")
    assert main(["run", str(bad)]) == 1
    broken = tmp_path / "broken.session"
    broken.write_text("let A = tower fancy\n")
    assert main(["run", str(broken)]) == 2
    assert main(["run", str(tmp_path / "missing.session")]) == 2
    capsys.readouterr()
    assert main(["examples"]) == 0
    assert "ufc.session" in capsys.readouterr().out


@pytest.mark.parametrize("name", bundled_examples())
def test_bundled_examples_pass(name):
    d = run_text(read_example(name), source=name).as_dict()
    assert d["summary"]["failed"] == 0, [r for r in d["records"] if r["status"] != "ok"]


def test_empty_script_gives_empty_report():
    d = run_text("# nothing here\n\n").as_dict()
    assert d["records"] == [] and d["summary"]["records"] == 0


def test_certified_and_refuted_schema():
    d = run_text(read_example("mixed")).as_dict()
    res = d["records"][-1]["result"]
    assert res["status"] == "refuted"
    assert res["witness"] == {"generator": "X[2]", "level": 1, "power": 1}
    d = run_text(read_example("dplus")).as_dict()
    res = next(r["result"] for r in d["records"] if r["kind"] == "check-integrable")
    assert res["status"] == "certified"
    assert res["orders"][0] == {"level": 1, "order": 1}
