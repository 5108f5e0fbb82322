import json
import subprocess
import sys

import pytest

from gmes import words as W
from gmes.cli import main, run
from gmes.datum import load


@pytest.fixture
def files(tmp_path):
    data = {
        "pervova": {"p": 3, "families": [[[1, 2]], [], [[1, 2]]]},
        "gs3": {"p": 3, "families": [[[1, 2]], [], []]},
        "gs5": {"p": 5, "families": [[[1, 2, 4, 3]], [], [], [], []]},
        "bad": {"p": 4, "families": [[], [], [], []]},
    }
    out = {}
    for name, value in data.items():
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(value))
        out[name] = str(path)
    (tmp_path / "broken.json").write_text("{p: 3")
    out["broken"] = str(tmp_path / "broken.json")
    return out


def test_validate(files):
    code, out = run(["validate", files["bad"]])
    assert code == 2 and "p must be an odd prime" in out["error"]
    code, out = run(["validate", files["pervova"]])
    assert code == 0 and out["results"]["ranks"] == [1, 0, 1]
    assert run(["validate", files["broken"]])[0] == 2
    assert run(["validate", "/nonexistent.json"])[0] == 2


def test_usage_errors(files):
    assert run([])[0] == 2
    assert run(["frobnicate"])[0] == 2
    assert run(["order", "--datum", files["gs3"]])[0] == 2
    assert run(["order", "--datum", files["gs3"], "--word", "a", "--bogus"])[0] == 2
    assert run(["order", "--word", "a"])[0] == 2
    assert run(["portrait", "--datum", files["gs3"], "--word", "a [b1_1"])[0] == 2
    assert run(["certify", "dagger", "--datum", files["gs5"]])[0] == 2
    assert run(["corpus", "--datum", files["gs3"], "--seed", "1", "--size", "-1"])[0] == 2


def test_classify(files):
    code, out = run(["classify", files["pervova"]])
    assert code == 0
    assert out["results"]["torsion_criterion"] and out["results"]["condition_ii_shared_vector"]
    assert out["fingerprint"] == load(files["pervova"]).fingerprint()


def test_word_commands(files):
    code, out = run(["order", "--datum", files["pervova"], "--word", "b3_1"])
    assert code == 0 and out["results"]["order"] == 3
    code, out = run(["act", "--datum", files["pervova"], "--word", "b1_1", "--vertex", "12"])
    assert out["results"]["image"] == "13"
    code, out = run(["portrait", "--datum", files["pervova"], "--word", "a", "--depth", "1"])
    assert code == 0 and out["results"]["portrait"]["depth"] == 1
    code, out = run(["theta-trace", "--datum", files["pervova"], "--word", "[a, b1_1]", "--check-depth", "4"])
    assert code == 0 and out["results"]["derivations_hold"]


def test_certify(files):
    assert run(["certify", "csp", "--datum", files["pervova"], "--n", "2", "--quotient-level", "3"])[0] == 0
    code, out = run(["certify", "gamma3", "--datum", files["pervova"], "--depth", "4"])
    assert code == 0 and out["results"]["overall"]
    code, out = run(["certify", "dagger", "--datum", files["gs5"], "--u", "1", "--uprime", "2", "--v", "11"])
    assert code == 0 and out["results"]["word"]
    code, out = run(["certify", "dagger", "--datum", files["gs3"], "--u", "1", "--uprime", "2", "--v", "11"])
    assert code == 2 and "error" in out


def test_quotient(files):
    code, out = run(["quotient", "--datum", files["gs3"], "--level", "2", "order"])
    assert code == 0 and out["results"]["order"] == 27
    code, out = run(["quotient", "--datum", files["gs3"], "--level", "3", "abelian-rank"])
    assert out["results"]["abelian_rank"] == 2
    code, out = run(["quotient", "--datum", files["gs3"], "--level", "3", "contains", "[a, b1_1]"])
    assert out["results"]["contains"] and out["results"]["in_derived"]
    assert run(["quotient", "--datum", files["gs3"], "--level", "3", "contains"])[0] == 2


def test_algebra(files):
    for query in ("astar-check", "xpowers", "nilindex", "phi-check", "conjugation-check", "rho-check"):
        code, out = run(["algebra", "--datum", files["gs3"], "--level", "3", "--samples", "5", query])
        assert code == 0, (query, out)
    code, out = run(["algebra", "--datum", files["gs3"], "--level", "2", "nilindex", "--export", "X"])
    assert out["results"]["matrix"]["shape"] == [9, 9]
    assert run(["algebra", "--datum", files["gs3"], "--level", "1", "rho-check"])[0] == 2


def test_corpus_examples(files):
    code, out = run(["corpus", "--datum", files["gs3"], "--seed", "1", "--size", "0"])
    assert code == 0 and out["results"]["words"] == []
    code, out = run(["corpus", "--datum", files["pervova"], "--seed", "1", "--size", "10", "--in-derived"])
    assert code == 0 and len(out["results"]["words"]) == 10 and out["results"]["all_in_kernel"]
    d = load(files["pervova"])
    assert all(not any(W.exponents(W.parse(d, w))) for w in out["results"]["words"])
    again = run(["corpus", "--datum", files["pervova"], "--seed", "1", "--size", "10", "--in-derived"])[1]
    assert again["results"] == out["results"]


def test_corpus_coherence(files, monkeypatch):
    code, out = run(["corpus", "--datum", files["pervova"], "--seed", "2", "--size", "20", "--max-length", "2",
                     "--coherence"])
    assert code == 0 and out["results"]["coherence"]["checked"] == 20
    assert run(["corpus", "--datum", files["pervova"], "--seed", "2", "--size", "20", "--coherence"])[0] == 2


def test_reports_are_deterministic(files):
    argv = ["algebra", "--datum", files["gs5"], "--level", "2", "phi-check", "--samples", "10", "--seed", "4"]
    first, second = run(argv)[1], run(argv)[1]
    first.pop("timings"), second.pop("timings")
    assert first == second


def test_main_streams(files, capsys):
    assert main(["validate", files["gs3"]]) == 0
    assert json.loads(capsys.readouterr().out)["results"]["valid"]
    assert main(["validate", files["bad"]]) == 2
    captured = capsys.readouterr()
    assert captured.out == "" and "odd prime" in json.loads(captured.err)["error"]


def test_console_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "gmes.cli", "validate", files["gs3"]], capture_output=True,
                          text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["command"] == "validate"
