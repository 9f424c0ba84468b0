import io
import json
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from ttsverify import fixtures
from ttsverify.cli import main, parse_caps
from ttsverify.scg import Caps

DOCS = Path(__file__).resolve().parent.parent / "docs"
DC = str(fixtures.path("doubleclick.tts"))
PIPE = str(fixtures.path("pipeline.tts"))


def run(*argv):
    out = io.StringIO()
    rc = main(list(argv), out)
    return rc, out.getvalue()


def schema(name):
    return json.loads((DOCS / name).read_text())


def test_check_violated_writes_replayable_trace(tmp_path):
    tr = tmp_path / "cex.trace"
    rc, text = run("check", DC, "-p", "absent double after double within [0,2]", "--trace-out", str(tr))
    assert rc == 1 and "VIOLATED" in text
    body = tr.read_text().splitlines()
    assert body[-1] == "!error" and body.count("double") == 2
    rc, text = run("replay", DC, str(tr))
    assert rc == 0
    assert text.rstrip().splitlines()[-1] == "error reached at t=2"


def test_check_holds():
    rc, text = run("check", PIPE, "-p", "start leadsto done within [0,6]")
    assert rc == 0 and "HOLDS" in text


def test_check_json():
    rc, text = run("check", DC, "-p", "click leadsto (single|double) within [0,1]", "--observer", "transition", "--json")
    assert rc == 1
    data = json.loads(text)
    jsonschema.validate(data, schema("verdict.schema.json"))
    assert data["variant"] == "transition" and data["system_trace"][0] == {"event": "click1"}


def test_nondeterministic_flag():
    rc, text = run("check", PIPE, "-p", "start leadsto done within [0,6]", "--observer", "transition",
                   "--nondeterministic", "--json")
    assert rc == 0 and json.loads(text)["holds"]
    rc, _ = run("check", PIPE, "-p", "start leadsto done within [0,6]", "--observer", "data", "--nondeterministic")
    assert rc == 2


@pytest.mark.parametrize("argv, msg", [
    (["check", DC, "-p", "nope leadsto single within [0,1]"], "unknown label nope"),
    (["check", DC, "-p", "click leadsto"], ""),
    (["check", DC, "-p", "present p:s1 lasting 1", "--observer", "transition"], ""),
    (["check", "/nonexistent.tts", "-p", "a leadsto b within [0,1]"], ""),
    (["scg", DC, "--caps", "0"], "positive"),
])
def test_errors_exit_2(argv, msg, capsys):
    rc, _ = run(*argv)
    err = capsys.readouterr().err
    assert rc == 2 and err.startswith("error:") and msg in err


def test_syntax_error_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.tts"
    bad.write_text("net x\nplace p init many\n")
    rc, _ = run("scg", str(bad))
    assert rc == 2
    assert f"{bad}:2:14:" in capsys.readouterr().err


def test_oracle():
    rc, text = run("oracle", DC, "-p", "click leadsto (single|double) within [0,2]", "--depth", "5", "--horizon", "4")
    assert rc == 1 and "violating trace" in text
    rc, text = run("oracle", PIPE, "-p", "start leadsto done within [0,6]", "--depth", "6", "--horizon", "8", "--json")
    data = json.loads(text)
    assert rc == 0 and data["holds"] and data["witness"] is None and data["explored"] > 0


def test_scg(tmp_path):
    rc, text = run("scg", DC, "--stats")
    assert rc == 0 and text.strip() == "doubleclick: 5 classes, 7 edges"
    rc, text = run("scg", DC, "--json", "--full")
    data = json.loads(text)
    jsonschema.validate(data, schema("scg.schema.json"))
    assert (data["classes"], data["edges"], data["size"]) == (5, 7, 12)
    dump = tmp_path / "g.json"
    run("scg", DC, "--stats", "--dump", str(dump))
    assert len(json.loads(dump.read_text())["classes"]) == 5
    rc, text = run("scg", DC)
    assert "class 0" in text and "--tau-->" in text


def test_caps_env(monkeypatch, capsys):
    monkeypatch.setenv("TTS_CAPS", "2")
    rc, _ = run("scg", DC, "--stats")
    assert rc == 2 and "witness: click1 click2" in capsys.readouterr().err
    rc, _ = run("scg", DC, "--stats", "--caps", "classes=10")
    assert rc == 0


def test_parse_caps():
    assert parse_caps("10") == Caps(10, 8)
    assert parse_caps("10,3") == Caps(10, 3)
    assert parse_caps("tokens=2") == Caps(1_000_000, 2)
    with pytest.raises(ValueError):
        parse_caps("widgets=3")


@pytest.mark.parametrize("path", fixtures.mutants(), ids=lambda p: p.stem)
def test_innocuous_mutants(path):
    rc, text = run("innocuous", str(path), "--sync", "click,single,double", "--json")
    data = json.loads(text)
    jsonschema.validate(data, schema("innocuous.schema.json"))
    assert rc == 1 and not data["ok"]


def test_innocuous_unknown_label(capsys):
    path = str(fixtures.mutants()[0])
    rc, _ = run("innocuous", path, "--sync", "click,bogus")
    assert rc == 2 and "bogus" in capsys.readouterr().err


def test_bench():
    rc, text = run("bench", PIPE, "-p", "p:busy leadsto p:idle within [0,6]", "--json")
    rows = json.loads(text)
    jsonschema.validate(rows, schema("bench.schema.json"))
    assert rc == 0 and [r["variant"] for r in rows] == ["data", "place"]
    rc, text = run("bench", PIPE, "-p", "p:busy leadsto p:idle within [0,6]")
    assert "C_O(S)" in text
    rc, _ = run("bench", PIPE, "-p", "p:busy leadsto p:idle within [0,6]", "--variants", "data")
    assert rc == 2


def test_replay_rejects_bad_trace(tmp_path):
    tr = tmp_path / "bad.trace"
    tr.write_text("click1\n@5\n")
    rc, text = run("replay", DC, str(tr))
    assert rc == 2 and "cannot wait 5" in text


def test_entry_point():
    r = subprocess.run([sys.executable, "-m", "ttsverify.cli", "scg", DC, "--stats"], capture_output=True, text=True)
    assert r.returncode == 0 and "5 classes" in r.stdout
