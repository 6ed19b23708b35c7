from __future__ import annotations

import json

import pytest

from segre_lab import __version__
from segre_lab.cli import EXIT_BUDGET, EXIT_COUNTEREXAMPLE, EXIT_OK, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_version(capsys):
    code, out, _ = run(capsys, "--version")
    assert code == 0 and __version__ in out


def test_gen_then_analyze(tmp_path, capsys):
    path = tmp_path / "k2.json"
    assert main(["gen", "k2", "--k", "3", "--field", "gf5", "--seed", "2", "--out", str(path)]) == EXIT_OK
    gen = json.loads(path.read_text(encoding="utf-8"))
    assert len(gen["points"]) == 6 and gen["provenance"]["seed"] == 2
    code, out, _ = run(capsys, "analyze", str(path))
    rep = json.loads(out)
    assert code == EXIT_OK
    assert rep["defect"] == 2 and rep["concise"] and rep["family"]["family"] == "K2"
    assert rep["provenance"]["command"].startswith("segre-lab analyze")


def test_analyze_output_can_be_re_ingested(tmp_path, capsys):
    src = tmp_path / "z1.json"
    main(["gen", "z1", "--field", "gf5", "--out", str(src)])
    first = tmp_path / "first.json"
    main(["analyze", str(src), "--out", str(first)])
    second = tmp_path / "second.json"
    main(["analyze", str(first), "--out", str(second)])
    a, b = (json.loads(p.read_text()) for p in (first, second))
    a.pop("provenance"), b.pop("provenance")
    assert a == b
    assert a["class"] == "e-circuit(2)"


def test_analyze_from_stdin(monkeypatch, capsys):
    import io

    doc = {"field": {"kind": "GF", "p": 3}, "space": [1, 1], "points": [[[1, 0], [1, 0]], [[0, 1], [1, 0]], [[1, 1], [1, 0]]]}
    monkeypatch.setattr("sys.stdin", io.StringIO(json.dumps(doc)))
    code, out, _ = run(capsys, "analyze", "-", "--no-profile")
    rep = json.loads(out)
    assert code == 0 and rep["defect"] == 1 and rep["class"] == "circuit" and rep["width"] == 1


def test_verify_ok(capsys):
    code, out, _ = run(capsys, "verify", "z3", "--field", "gf2", "--space", "1,1")
    rep = json.loads(out)
    assert code == EXIT_OK and rep["verdict"] == "ok"
    assert "seconds" not in rep
    code, out, _ = run(capsys, "verify", "z3", "--field", "gf2", "--space", "1,1", "--timing")
    assert "seconds" in json.loads(out)


def test_verify_sampled_with_planted_circuits(capsys):
    code, out, _ = run(capsys, "verify", "x1", "--field", "gf3", "--space", "1,1,1", "--size", "6",
                       "--mode", "sampled", "--sampler", "circuits", "--count", "200", "--seed", "3")
    rep = json.loads(out)
    assert code == EXIT_OK and rep["hits"] == rep["instances"] >= 200


def test_verify_counterexample_exit_code(capsys):
    # the k = 2 decomposition statement fails over GF(3) on P^1 x P^1
    code, out, _ = run(capsys, "verify", "cp1", "--field", "gf3", "--k", "2")
    rep = json.loads(out)
    assert code == EXIT_COUNTEREXAMPLE and rep["verdict"] == "counterexample"
    assert rep["violations"] > 0 and rep["counterexamples"]


def test_verify_budget_refusal(capsys):
    code, out, _ = run(capsys, "verify", "is1", "--field", "gf2", "--space", "1,1,1,1", "--reduction", "none")
    rep = json.loads(out)
    assert code == EXIT_BUDGET and rep["verdict"] == "refused" and rep["required"] > rep["budget"]


def test_verify_injective_deletions(capsys):
    code, out, _ = run(capsys, "verify", "a2", "--count", "200", "--seed", "1")
    assert code == EXIT_OK and json.loads(out)["instances"] == 200


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "z3", "--field", "gf4"],
        ["verify", "z3", "--field", "qq", "--space", "1,1"],
        ["verify", "nosuch"],
        ["verify", "z3", "--space", "1,x"],
        ["analyze", "/nonexistent/file.json"],
        ["gen", "k2", "--field", "gf2", "--k", "3"],
        ["gen", "k2", "--k", "2", "--n1", "1", "--n2", "1"],
        ["search", "--size", "3", "--field", "qq"],
        [],
    ],
)
def test_usage_errors(argv, capsys):
    code, _, _ = run(capsys, *argv)
    assert code == EXIT_USAGE


def test_analyze_rejects_bad_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"field": {"kind": "GF", "p": 3}, "space": [1], "points": [[[0, 0]]]}')
    assert run(capsys, "analyze", str(bad))[0] == EXIT_USAGE
    bad.write_text("not json")
    assert run(capsys, "analyze", str(bad))[0] == EXIT_USAGE


def test_search_streams_json_lines(capsys):
    code, out, _ = run(capsys, "search", "--field", "gf3", "--space", "1,1", "--size", "3", "--class", "circuit")
    lines = [json.loads(x) for x in out.splitlines()]
    # dependent triples of P^1 x P^1 over GF(3): 4 points on each of 8 rulings, C(4,3) each
    assert code == 0 and len(lines) == 8 * 4
    assert all(len(x["points"]) == 3 for x in lines)


def test_search_limit_and_filters(capsys):
    code, out, _ = run(capsys, "search", "--field", "gf3", "--space", "1,1,1", "--size", "4",
                       "--defect", "1", "--width", "2", "--concise", "--limit", "5")
    assert code == 0 and len(out.splitlines()) == 0  # concise for (1,1,1) forces width 3
    # four points of a ruling are uniformly dependent, which takes precedence
    code, out, _ = run(capsys, "search", "--field", "gf3", "--space", "1,1", "--size", "4", "--class", "e-circuit")
    assert out == ""
    code, out, _ = run(capsys, "search", "--field", "gf3", "--space", "1,1", "--size", "4",
                       "--class", "uniformly-dependent", "--limit", "3")
    assert len(out.splitlines()) == 3
    code, out, _ = run(capsys, "search", "--field", "gf3", "--space", "2", "--size", "5",
                       "--class", "e-circuit", "--limit", "2")
    assert len(out.splitlines()) == 2


def test_search_sampled_is_seeded(capsys):
    argv = ["search", "--field", "gf3", "--space", "1,1,1", "--size", "5", "--mode", "sampled",
            "--count", "2000", "--seed", "4", "--defect", "1"]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b and a
