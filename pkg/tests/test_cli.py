import csv
import json
import math

import pytest

import gcsf
from gcsf import cli


def write_config(tmp_path, name="config.json", **entries):
    path = tmp_path / name
    path.write_text(json.dumps(entries))
    return str(path)


def read_manifest(run_dir):
    with open(f"{run_dir}/manifest.json") as f:
        return json.load(f)


def read_summary(base_dir):
    with open(f"{base_dir}/summary.csv", newline="") as f:
        return list(csv.reader(f))


# -- run ---------------------------------------------------------------------

def test_run_log_convexity_passes(tmp_path, capsys):
    out = tmp_path / "run"
    cfg = write_config(tmp_path, experiment="log-convexity", output_dir=str(out),
                       alpha=0.7, radius=2.0)
    rc = cli.main(["run", cfg])
    assert rc == 0
    printed = capsys.readouterr().out
    assert "check log-convexity-margin:" in printed
    assert "[pass]" in printed
    manifest = read_manifest(out)
    assert manifest["artifact"] == "gcsf"
    assert manifest["version"] == gcsf.__version__
    assert manifest["pass"] is True
    assert manifest["error"] is None
    assert manifest["wall_time_s"] >= 0.0
    assert manifest["config"]["alpha"] == 0.7
    assert (out / "margins.csv").exists()


def test_run_resolves_experiment_defaults(tmp_path):
    out = tmp_path / "run"
    cfg = write_config(tmp_path, experiment="radial-translator",
                       output_dir=str(out), alpha=1.0, r_max=5.0)
    assert cli.main(["run", cfg]) == 0
    manifest = read_manifest(out)
    # sigma defaults to 1 for the translator family and is echoed resolved
    assert manifest["config"]["sigma"] == 1.0
    names = {c["name"] for c in manifest["checks"]}
    assert names == {"convex", "operator-residual", "growth-bound"}
    assert all(c["pass"] for c in manifest["checks"])


def test_run_override_beats_config(tmp_path):
    out = tmp_path / "run"
    cfg = write_config(tmp_path, experiment="log-convexity", output_dir=str(out),
                       alpha=0.7)
    assert cli.main(["run", cfg, "--alpha=2.0"]) == 0
    assert read_manifest(out)["config"]["alpha"] == 2.0


def test_run_failed_check_exits_two(tmp_path, capsys):
    out = tmp_path / "run"
    # alpha = 1 must blow up by pi/2, but the box ends at x = 1: the
    # dichotomy check cannot certify the strip and the run fails.
    cfg = write_config(tmp_path, experiment="translator1d", output_dir=str(out),
                       alpha=1.0, x_max=1.0)
    rc = cli.main(["run", cfg])
    assert rc == 2
    assert "[FAIL]" in capsys.readouterr().out
    manifest = read_manifest(out)
    assert manifest["pass"] is False
    assert manifest["error"] is None


def test_run_records_runtime_error_in_manifest(tmp_path, capsys):
    out = tmp_path / "run"
    # config-valid, but the dual grid cannot reach the fit window at run time
    cfg = write_config(tmp_path, experiment="legendre", output_dir=str(out),
                       alpha=1.0, r_max=2.0)
    rc = cli.main(["run", cfg])
    assert rc == 2
    manifest = read_manifest(out)
    assert manifest["pass"] is False
    assert manifest["error"].startswith("ValueError:")
    assert "error:" in capsys.readouterr().out
    # verify reports the recorded error instead of recomputing
    assert cli.main(["verify", str(out)]) == 2
    assert "run recorded an error" in capsys.readouterr().out


def test_flow_run_is_deterministic(tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        cfg = write_config(tmp_path, name=f"{name}.json", experiment="flow",
                           output_dir=str(out), alpha=1.0, m=64, seed=7,
                           initial_body={"kind": "random"})
        assert cli.main(["run", cfg]) == 0
        outs.append(out)
    a = (outs[0] / "trace.csv").read_bytes()
    b = (outs[1] / "trace.csv").read_bytes()
    assert a == b


def test_flow_circle_checks_and_snapshots(tmp_path):
    out = tmp_path / "run"
    cfg = write_config(tmp_path, experiment="flow", output_dir=str(out),
                       alpha=1.0, m=64, snapshot_every=100)
    assert cli.main(["run", cfg]) == 0
    manifest = read_manifest(out)
    by_name = {c["name"]: c for c in manifest["checks"]}
    assert by_name["extinct"]["value"] is True
    assert by_name["extinction-time"]["value"] <= 1e-4
    assert by_name["circle-law"]["value"] <= 1e-6
    assert math.isclose(manifest["scalars"]["extinction_time"]["value"], 0.5,
                        abs_tol=1e-4)
    assert (out / "snapshots" / "000000.json").exists()


# -- verify ------------------------------------------------------------------

def test_verify_round_trip(tmp_path, capsys):
    out = tmp_path / "run"
    cfg = write_config(tmp_path, experiment="comparison-ode", output_dir=str(out),
                       alpha=1.0, delta=1e-6)
    assert cli.main(["run", cfg]) == 0
    capsys.readouterr()
    assert cli.main(["verify", str(out)]) == 0
    printed = capsys.readouterr().out
    assert "matches manifest" in printed
    assert "MISMATCH" not in printed


def test_verify_detects_tampered_csv(tmp_path, capsys):
    out = tmp_path / "run"
    cfg = write_config(tmp_path, experiment="log-convexity", output_dir=str(out))
    assert cli.main(["run", cfg]) == 0
    path = out / "margins.csv"
    lines = path.read_text().splitlines()
    cells = lines[1].split(",")
    cells[1] = "-1.0"
    lines[1] = ",".join(cells)
    path.write_text("\n".join(lines) + "\n")
    capsys.readouterr()
    assert cli.main(["verify", str(out)]) == 2
    assert "MISMATCH" in capsys.readouterr().out


def test_verify_needs_manifest(tmp_path, capsys):
    assert cli.main(["verify", str(tmp_path)]) == 1
    assert "no manifest.json" in capsys.readouterr().err


# -- sweep -------------------------------------------------------------------

def test_sweep_shows_the_dichotomy_flip(tmp_path):
    base = tmp_path / "sweep"
    cfg = write_config(tmp_path, experiment="translator1d", output_dir=str(base))
    rc = cli.main(["sweep", cfg, "--param", "alpha", "--values", "0.4,0.6"])
    assert rc == 0
    rows = read_summary(base)
    assert rows[0] == ["alpha", "pass", "error", "half_width", "slope_end",
                       "run_dir"]
    by_alpha = {row[0]: row for row in rows[1:]}
    assert by_alpha["0.4"][1] == "true"
    assert by_alpha["0.4"][3] == ""  # entire profile: no half-width
    assert by_alpha["0.6"][1] == "true"
    assert float(by_alpha["0.6"][3]) > 0.0
    assert (base / "alpha=0.4" / "manifest.json").exists()
    assert (base / "alpha=0.6" / "manifest.json").exists()


def test_sweep_captures_per_value_failures(tmp_path):
    base = tmp_path / "sweep"
    cfg = write_config(tmp_path, experiment="translator1d", output_dir=str(base))
    rc = cli.main(["sweep", cfg, "--param", "alpha", "--values", "1,-1"])
    assert rc == 2
    rows = {row[0]: row for row in read_summary(base)[1:]}
    assert rows["1"][1] == "true" and rows["1"][2] == ""
    assert rows["-1"][1] == "false"
    assert "alpha" in rows["-1"][2]


def test_sweep_with_no_values_writes_header_only(tmp_path):
    base = tmp_path / "sweep"
    cfg = write_config(tmp_path, experiment="log-convexity", output_dir=str(base))
    assert cli.main(["sweep", cfg, "--param", "radius", "--values", ""]) == 0
    rows = read_summary(base)
    assert len(rows) == 1
    assert rows[0][0] == "radius"


def test_sweep_rejects_unsweepable_parameters(tmp_path, capsys):
    cfg = write_config(tmp_path, experiment="log-convexity",
                       output_dir=str(tmp_path / "s"))
    assert cli.main(["sweep", cfg, "--param", "output_dir",
                     "--values", "a,b"]) == 1
    assert "cannot be swept" in capsys.readouterr().err
    assert cli.main(["sweep", cfg, "--param", "bogus", "--values", "1"]) == 1
    assert "unknown sweep parameter" in capsys.readouterr().err


def test_parallel_sweep_matches_serial(tmp_path, monkeypatch):
    results = {}
    for label, threads in (("serial", "1"), ("parallel", "2")):
        base = tmp_path / label
        cfg = write_config(tmp_path, name=f"{label}.json",
                           experiment="log-convexity", output_dir=str(base))
        monkeypatch.setenv("GCSF_THREADS", threads)
        assert cli.main(["sweep", cfg, "--param", "alpha",
                         "--values", "0.7,1,2"]) == 0
        results[label] = (base / "summary.csv").read_bytes()
    assert results["serial"] == results["parallel"]


def test_thread_cap_must_be_a_positive_integer(tmp_path, monkeypatch, capsys):
    cfg = write_config(tmp_path, experiment="log-convexity",
                       output_dir=str(tmp_path / "s"))
    monkeypatch.setenv("GCSF_THREADS", "zero")
    assert cli.main(["sweep", cfg, "--param", "alpha", "--values", "1"]) == 1
    assert "GCSF_THREADS" in capsys.readouterr().err


# -- usage errors ------------------------------------------------------------

def test_unknown_config_field_is_named(tmp_path, capsys):
    cfg = write_config(tmp_path, experiment="log-convexity",
                       output_dir=str(tmp_path / "r"), bogus=1)
    assert cli.main(["run", cfg]) == 1
    assert "unknown config field 'bogus'" in capsys.readouterr().err


def test_unknown_experiment_lists_choices(tmp_path, capsys):
    cfg = write_config(tmp_path, experiment="nope",
                       output_dir=str(tmp_path / "r"))
    assert cli.main(["run", cfg]) == 1
    err = capsys.readouterr().err
    assert "'experiment' must be one of" in err and "log-convexity" in err


def test_missing_required_field(tmp_path, capsys):
    cfg = write_config(tmp_path, experiment="log-convexity")
    assert cli.main(["run", cfg]) == 1
    assert "output_dir" in capsys.readouterr().err


def test_malformed_override(tmp_path, capsys):
    cfg = write_config(tmp_path, experiment="log-convexity",
                       output_dir=str(tmp_path / "r"))
    assert cli.main(["run", cfg, "alpha=2"]) == 1
    assert "--key=value" in capsys.readouterr().err
    assert cli.main(["run", cfg, "--bogus=2"]) == 1
    assert "unknown config field 'bogus'" in capsys.readouterr().err


def test_missing_config_file(tmp_path, capsys):
    assert cli.main(["run", str(tmp_path / "absent.json")]) == 1
    assert "cannot read config" in capsys.readouterr().err


def test_nonconvex_initial_body_is_a_config_error(tmp_path, capsys):
    cfg = write_config(tmp_path, experiment="normalized-rate",
                       output_dir=str(tmp_path / "r"), eps=0.5)
    assert cli.main(["run", cfg]) == 1
    assert "initial_body" in capsys.readouterr().err


def test_verify_rejects_extra_arguments(tmp_path, capsys):
    out = tmp_path / "run"
    cfg = write_config(tmp_path, experiment="log-convexity", output_dir=str(out))
    assert cli.main(["run", cfg]) == 0
    assert cli.main(["verify", str(out), "--alpha=2"]) == 1
    assert "unexpected argument" in capsys.readouterr().err
