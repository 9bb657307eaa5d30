import csv
import json
import os

import jsonschema
import pytest

from colsafe.cli import main

SCHEMA_PATH = os.path.join(os.path.dirname(__file__), "..", "src", "colsafe",
                           "summary_schema.json")


def write_cfg(tmp_path, body, name="exp.ini"):
    p = tmp_path / name
    p.write_text(body)
    return str(p)


def tiny_cfg(tmp_path, out, budget=15, seed=1, timing="false", extra=""):
    return write_cfg(tmp_path, f"""\
[experiment]
problem = synthetic2d
budget = {budget}
seed = {seed}
out = {out}
record_timing = {timing}

[kernel]
family = epanechnikov
bandwidth = 0.08
{extra}""")


def test_run_outputs(tmp_path):
    out = tmp_path / "out"
    rc = main(["run", "--config", tiny_cfg(tmp_path, out)])
    assert rc == 0
    for f in ("trace.csv", "summary.json", "safe_set_final.csv",
              "safe_set.png", "progress.png", "config_used.ini"):
        path = out / f
        assert path.exists() and path.stat().st_size > 0


def test_trace_schema(tmp_path):
    out = tmp_path / "out"
    main(["run", "--config", tiny_cfg(tmp_path, out)])
    with open(out / "trace.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == [
        "n", "a1", "a2", "fhat", "ghat_1", "S_size", "M_size", "G_size",
        "e_n", "t_bounds_ms", "t_sets_ms", "t_select_ms", "t_ingest_ms",
        "violations_true"]
    assert [int(r["n"]) for r in rows] == list(range(1, len(rows) + 1))
    for r in rows:
        assert float(r["t_bounds_ms"]) == 0.0     # record_timing = false


def test_summary_validates_against_schema(tmp_path):
    out = tmp_path / "out"
    main(["run", "--config", tiny_cfg(tmp_path, out)])
    summary = json.load(open(out / "summary.json"))
    schema = json.load(open(SCHEMA_PATH))
    jsonschema.validate(summary, schema)
    assert summary["method"] == "colsafe"
    assert summary["budget"] == 15


def test_identical_runs_byte_identical(tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    main(["run", "--config", tiny_cfg(tmp_path, out_a)])
    main(["run", "--config", tiny_cfg(tmp_path, out_b, seed=1)])
    ta = (out_a / "trace.csv").read_bytes()
    tb = (out_b / "trace.csv").read_bytes()
    assert ta == tb
    sa = (out_a / "summary.json").read_bytes()
    sb = (out_b / "summary.json").read_bytes()
    assert sa == sb


def test_seed_override_changes_trace(tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    cfg = tiny_cfg(tmp_path, out_a)
    main(["run", "--config", cfg])
    main(["run", "--config", cfg, "--seed", "99", "--out", str(out_b)])
    assert (out_a / "trace.csv").read_bytes() \
        != (out_b / "trace.csv").read_bytes()


def test_repeats_layout(tmp_path):
    out = tmp_path / "out"
    cfg = tiny_cfg(tmp_path, out, budget=8)
    rc = main(["run", "--config", cfg, "--repeats", "2"])
    assert rc == 0
    assert (out / "run_000" / "trace.csv").exists()
    assert (out / "run_001" / "trace.csv").exists()
    # repeats get distinct derived seeds
    assert (out / "run_000" / "trace.csv").read_bytes() \
        != (out / "run_001" / "trace.csv").read_bytes()


def test_gp_method_runs(tmp_path):
    out = tmp_path / "out"
    cfg = write_cfg(tmp_path, f"""\
[experiment]
problem = synthetic2d
method = gp-safeopt
budget = 10
out = {out}
record_timing = false
""")
    assert main(["run", "--config", cfg]) == 0
    summary = json.load(open(out / "summary.json"))
    assert summary["method"] == "gp-safeopt"
    jsonschema.validate(summary, json.load(open(SCHEMA_PATH)))


def test_config_error_exit_2(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "[experiment]\nbogus = 1\n")
    assert main(["run", "--config", cfg]) == 2
    assert "bogus" in capsys.readouterr().err


def test_missing_config_exit_2(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "nope.ini")]) == 2
    assert capsys.readouterr().err


def test_bad_cli_seed_exit_2(tmp_path):
    cfg = tiny_cfg(tmp_path, tmp_path / "out")
    assert main(["run", "--config", cfg, "--seed", "-3"]) == 2


def test_compare_outputs(tmp_path):
    out = tmp_path / "cmp"
    cfg = write_cfg(tmp_path, f"""\
[experiment]
problem = synthetic2d
budget = 10
out = {out}
record_timing = true
""")
    assert main(["compare", "--config", cfg]) == 0
    for f in ("timing.csv", "timing.png", "compare_summary.json"):
        assert (out / f).exists()
    for m in ("colsafe", "gp-safeopt"):
        assert (out / m / "trace.csv").exists()
        assert (out / m / "summary.json").exists()
    with open(out / "timing.csv") as fh:
        rows = list(csv.DictReader(fh))
    methods = {r["method"] for r in rows}
    assert methods == {"colsafe", "gp-safeopt"}
    assert list(rows[0]) == ["method", "n", "t_update_select_ms",
                             "t_bounds_ms", "t_sets_ms", "t_select_ms",
                             "t_ingest_ms"]
    doc = json.load(open(out / "compare_summary.json"))
    assert set(doc["safe_set_sizes"]) == {"colsafe", "gp-safeopt"}


def test_verify_bounds_pass(tmp_path):
    out = tmp_path / "vb"
    cfg = write_cfg(tmp_path, f"""\
[experiment]
out = {out}

[concentration]
deltas = 0.05
ns = 50
trials = 1500
noises = gaussian
etas = 0.5
mg_n = 20
mg_trials = 4000
""")
    assert main(["verify-bounds", "--config", cfg]) == 0
    assert (out / "bounds_report.json").exists()
    assert (out / "bounds_report.png").exists()
    doc = json.load(open(out / "bounds_report.json"))
    assert doc["pass"] is True


def test_verify_bounds_shrunk_fails(tmp_path, capsys):
    out = tmp_path / "vb"
    cfg = write_cfg(tmp_path, f"""\
[experiment]
out = {out}

[concentration]
deltas = 0.05
ns = 50
trials = 1000
noises = gaussian
etas =
mg_trials = 10
bound_scale = 0.1
""")
    assert main(["verify-bounds", "--config", cfg]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_verify_bounds_empty_matrix(tmp_path, capsys):
    out = tmp_path / "vb"
    cfg = write_cfg(tmp_path, f"""\
[experiment]
out = {out}

[concentration]
deltas =
ns =
""")
    assert main(["verify-bounds", "--config", cfg]) == 0
    assert "warning" in capsys.readouterr().out.lower()


def test_config_used_round_trips(tmp_path):
    out = tmp_path / "out"
    main(["run", "--config", tiny_cfg(tmp_path, out, seed=7)])
    from colsafe.config import load_config
    cfg = load_config(str(out / "config_used.ini"))
    assert cfg.seed == 7
    assert cfg.budget == 15
