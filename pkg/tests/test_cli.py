import json

import pytest

from dyadic_mw.cli import cli_main


def run(capsys, *argv):
    code = cli_main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_all_passes(capsys):
    code, out, _ = run(capsys, "verify", "--k", "1", "--stages", "2", "--checks", "all")
    certs = json.loads(out)
    assert code == 0
    assert {c["name"] for c in certs} == {"haar_identity", "dist_estimate", "measure_preserving",
                                          "main_estimate", "corona_match", "maximal_bounds",
                                          "main_lemma", "sign_oracle"}
    assert all(c["verdict"] == "pass" and c["runtime_ms"] is None for c in certs)


def test_build_over_cap_is_a_resource_error(capsys):
    code, out, err = run(capsys, "build", "--k", "2", "--stages", "auto")
    assert code == 2 and out == ""
    payload = json.loads(err)
    assert payload["error"] == "resource_cap" and payload["stages"] == 281
    assert "4^281" in payload["message"]


def test_export_weight_csv(tmp_path, capsys):
    target = tmp_path / "blocks.csv"
    code, _, _ = run(capsys, "export", "--k", "1", "--stages", "1", "--format", "csv", "--out", str(target))
    rows = target.read_text().splitlines()
    assert code == 0 and rows[0] == "lo,hi,height" and len(rows) == 4


@pytest.mark.parametrize("what", ["forest", "corona", "maximal", "sigma", "figure"])
def test_export_json_kinds(capsys, what):
    code, out, _ = run(capsys, "export", "--stages", "1", "--what", what)
    assert code == 0 and json.loads(out)


def test_usage_errors(capsys):
    for argv in (["verify", "--checks", "bogus"], ["build", "--stages", "-1"], ["frobnicate"],
                 ["export", "--stages", "1", "--what", "forest", "--format", "csv"],
                 ["export", "--stages", "1", "--what", "figure", "--stage", "4"]):
        code, _, err = run(capsys, *argv)
        assert code == 2 and json.loads(err)["error"] == "usage"


def test_text_formats_and_energy(capsys):
    code, out, _ = run(capsys, "verify", "--stages", "1", "--checks", "main_estimate,corona_match",
                       "--format", "text")
    assert code == 0 and out.splitlines()[0].split() == ["check", "params", "verdict", "runtime_ms"]
    code, out, _ = run(capsys, "energy", "--stages", "0", "--growth", "2", "--format", "text")
    assert code == 0 and len(out.splitlines()) == 3
    code, out, _ = run(capsys, "energy", "--stages", "0")
    assert code == 0 and json.loads(out)["expectation_energy"] == "5/72"
    code, out, _ = run(capsys, "build", "--stages", "2", "--format", "text")
    assert code == 0 and "total mass=2/3" in out


def test_verify_is_deterministic_across_thread_counts(capsys, monkeypatch):
    argv = ["verify", "--k", "1", "--stages", "3", "--checks", "all", "--seed", "42"]
    _, single, _ = run(capsys, *argv)
    monkeypatch.setenv("DYADIC_MW_WORKERS", "4")
    _, threaded, _ = run(capsys, *argv)
    assert single == threaded
