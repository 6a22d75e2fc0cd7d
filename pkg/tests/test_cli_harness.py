import json
import math
import os

import pytest
from hypothesis import given, settings, strategies as st

from couette_lab import cli_harness as cli


def _run(tmp_path, *args):
    return cli.main([*args, "--out", str(tmp_path), "--fixed-epoch", "0", "--quiet"])


def test_unknown_key_exits_2(tmp_path, capsys):
    assert _run(tmp_path, "evolve", "bogus=1") == cli.EXIT_SCHEMA
    assert "bogus" in capsys.readouterr().err
    assert not os.listdir(tmp_path)


def test_bad_enum_and_bad_value_exit_2(tmp_path):
    assert _run(tmp_path, "evolve", "family=nope") == cli.EXIT_SCHEMA
    assert _run(tmp_path, "resolvent-scan", "nu=abc") == cli.EXIT_SCHEMA
    assert _run(tmp_path, "resolvent-scan", "nu") == cli.EXIT_SCHEMA


def test_unknown_subcommand_exits_2(tmp_path):
    assert cli.main(["no-such-thing"]) == cli.EXIT_SCHEMA


def test_manifest_round_trip(tmp_path):
    m = cli.build_manifest("dissipation-sweep", {"nus": "0.01,0.003", "family": "wall"}, seed=3, n=129)
    again = cli.build_manifest("dissipation-sweep", cli.parse_manifest_text(m.to_text()))
    assert again == m
    assert m.parameters["nus"] == (0.01, 0.003) and m.parameters["ks"] == (0.1, 0.5, 1.0, 2.0)


def test_manifest_file_and_override(tmp_path):
    mf = tmp_path / "run.txt"
    mf.write_text("# comment\nsubcommand=evolve\nnu=0.01\nk=0.5\n")
    m = cli.build_manifest("evolve", {**cli.parse_manifest_text(mf.read_text()), "k": "0.3"})
    assert m.parameters["nu"] == 0.01 and m.parameters["k"] == 0.3
    with pytest.raises(cli.SchemaError):
        cli.build_manifest("homog-verify", cli.parse_manifest_text(mf.read_text()))


def test_airy_selftest_passes(tmp_path):
    assert _run(tmp_path, "airy-selftest", "samples=4") == cli.EXIT_OK
    doc = json.loads((tmp_path / "airy_selftest.json").read_text())
    assert doc["passed"] is True
    assert abs(doc["results"]["a_of_zero"] + 0.4843) < 5e-4
    ids = {c["check_id"]: c for c in doc["checks"]}
    assert ids["logder_unit_literal"]["informational"] and not ids["logder_unit_literal"]["passed"]


def test_resolvent_scan_csv(tmp_path):
    assert _run(tmp_path, "resolvent-scan", "nu=1e-2", "k=0.5", "refine=1", "n_random=2", "--n", "65") == cli.EXIT_OK
    lines = (tmp_path / "resolvent_scan.csv").read_text().splitlines()
    comments = [x for x in lines if x.startswith("#")]
    assert "# subcommand=resolvent-scan" in comments and "# created=1970-01-01T00:00:00Z" in comments
    header = lines[len(comments)].split(",")
    assert header[:5] == ["nu", "k", "lambda", "bc", "forcing_id"]
    doc = json.loads((tmp_path / "resolvent_scan.json").read_text())
    assert len(lines) - len(comments) - 1 == doc["results"]["rows"]
    assert set(doc["results"]["constants"]) == {"slip_l2", "slip_hminus1", "noslip_l2", "noslip_hminus1"}


def test_outputs_deterministic(tmp_path):
    args = ("homog-verify", "lambdas=5", "cross=1")
    assert _run(tmp_path, *args) == cli.EXIT_OK
    first = {p: (tmp_path / p).read_bytes() for p in os.listdir(tmp_path)}
    assert _run(tmp_path, *args) == cli.EXIT_OK
    assert {p: (tmp_path / p).read_bytes() for p in os.listdir(tmp_path)} == first


def test_workers_match_serial(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ("dissipation-sweep", "nus=1e-2,3e-3", "ks=1.0", "--n", "129")
    assert _run(a, *args) == cli.EXIT_OK
    assert _run(b, *args, "--workers", "2") == cli.EXIT_OK
    da, db = (json.loads((d / "dissipation_sweep.json").read_text()) for d in (a, b))
    assert da["results"] == db["results"] and da["checks"] == db["checks"]


def test_atomic_write_keeps_old_file_on_failure(tmp_path, monkeypatch):
    path = tmp_path / "out.json"
    cli.atomic_write(str(path), "old\n")

    def boom(src, dst):
        raise OSError("disk full")

    monkeypatch.setattr(cli.os, "replace", boom)
    with pytest.raises(OSError):
        cli.atomic_write(str(path), "new\n")
    assert path.read_text() == "old\n"
    assert os.listdir(tmp_path) == ["out.json"]


@settings(max_examples=200, deadline=None)
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_six_significant_digit_round_trip(x):
    y = json.loads(json.dumps(cli.sig6(x)))
    assert y == float(f"{x:.6g}")
    if x != 0:
        assert abs(y - x) <= 5e-6 * abs(x) * (1 + 1e-12)


def test_nonfinite_values_serialize_as_strings():
    assert cli.sig6([math.nan, math.inf, -math.inf]) == ["nan", "inf", "-inf"]


def test_empty_report_renders_header_only():
    text, doc = cli.report_render(cli.CampaignReport("evolve"))
    assert text.strip().splitlines() == [text.strip()]
    assert text.split()[0] == "check"
    assert json.loads(doc)["checks"] == []


def test_render_sorted_by_margin():
    rep = cli.CampaignReport("x", [cli.upper_check("b", "", 0.5, 1.0), cli.upper_check("a", "", 0.9, 1.0), cli.lower_check("c", "", 3.0, 1.0)])
    text, doc = cli.report_render(rep)
    assert [c["check_id"] for c in json.loads(doc)["checks"]] == ["a", "b", "c"]
    assert text.splitlines()[1].startswith("a")


def test_failing_check_exits_1(tmp_path, monkeypatch, capsys):
    def bad(m, workers):
        return [cli.upper_check("too_big", "value below one", 2.0, 1.0)], {}, {}

    monkeypatch.setitem(cli.CAMPAIGNS, "evolve", bad)
    assert _run(tmp_path, "evolve") == cli.EXIT_FAIL
    assert "value below one" in capsys.readouterr().err


def test_informational_failure_does_not_fail(tmp_path, monkeypatch):
    def info(m, workers):
        return [cli.upper_check("lit", "literal form", 2.0, 1.0, informational=True)], {}, {}

    monkeypatch.setitem(cli.CAMPAIGNS, "evolve", info)
    assert _run(tmp_path, "evolve") == cli.EXIT_OK


def test_numerical_failure_exits_3(tmp_path, monkeypatch):
    def nan(m, workers):
        raise FloatingPointError("nan in state")

    monkeypatch.setitem(cli.CAMPAIGNS, "evolve", nan)
    assert _run(tmp_path, "evolve") == cli.EXIT_NUMERICAL


def test_budget_exhaustion_exits_4(tmp_path):
    assert _run(tmp_path, "threshold-scan", "nus=1e-2", "nx=32", "budget=1e-9", "--n", "33") == cli.EXIT_BUDGET


def test_threshold_scan_outputs(tmp_path):
    assert _run(tmp_path, "threshold-scan", "nus=1e-2", "nx=64") == cli.EXIT_OK
    doc = json.loads((tmp_path / "threshold_scan.json").read_text())
    rec = doc["results"]["records"][0]
    assert rec["verdict"] == "stable" and "runtime" not in rec
    assert doc["results"]["threshold_estimate"] == 0.5
    assert (tmp_path / "threshold_profiles.csv").exists() and (tmp_path / "threshold_series.csv").exists()


def test_evolve_and_bilinear_pass(tmp_path):
    assert _run(tmp_path, "evolve", "nu=1e-2", "k=0.5") == cli.EXIT_OK
    assert _run(tmp_path, "bilinear-check", "samples=2000", "nx=64") == cli.EXIT_OK
    doc = json.loads((tmp_path / "bilinear_check.json").read_text())
    ids = {c["check_id"]: c for c in doc["checks"]}
    assert not ids["kernel_I11"]["passed"] and ids["kernel_I11"]["informational"]
    assert ids["kernel_I11_corrected"]["passed"]


def test_module_entry_point():
    import subprocess
    import sys

    out = subprocess.run([sys.executable, "-m", "couette_lab", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "airy-selftest" in out.stdout
