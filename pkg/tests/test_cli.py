import csv
import io
import json
import os
import stat

import pytest

from privest.cli import KEYS, build_parser, main, parse_config, run
from privest.errors import ParseError, ValidationError

ESTIMATE = """\
[distribution]
kind = uniform_shift
gamma = 0

[functional]
name = median

[privacy]
alpha = 1
delta = 1e-3

[data]
n = 101

[run]
seed = 5
"""

COVERAGE = """\
[run]
command = experiment
experiment = smooth_coverage

[distribution]
kind = uniform_shift
gamma = 0

[functional]
name = median

[privacy]
alpha = 1
delta = 1e-3

[experiment]
n_list = 200,400
trials = 100
"""


def _write(tmp_path, text, name="cfg.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_parse_defaults_recorded():
    cfg = parse_config(ESTIMATE, "estimate")
    assert cfg.get("experiment", "grid_size") == "1024"
    assert cfg.get("experiment", "trials") == "1000"
    assert cfg.output_format == "csv" and cfg.root_seed == 5
    assert "experiment.grid_size" in cfg.defaulted and "run.output_format" in cfg.defaulted
    assert "run.seed" not in cfg.defaulted
    assert cfg.echo()["defaults_used"] == list(cfg.defaulted)


def test_delta_zero_rejected_for_smooth_laplace():
    text = ESTIMATE.replace("delta = 1e-3", "delta = 0")
    with pytest.raises(ValidationError, match="delta"):
        parse_config(text, "estimate")


def test_unknown_key_rejected():
    with pytest.raises(ValidationError) as info:
        parse_config(ESTIMATE.replace("alpha = 1", "alpha_ = 1"), "estimate")
    assert info.value.field == "privacy.alpha_"
    with pytest.raises(ValidationError):
        parse_config("[nonsense]\na = 1\n", "estimate")


def test_parse_error_line_number():
    with pytest.raises(ParseError) as info:
        parse_config("[privacy]\nalpha = 1\nthis line has no separator\n", "estimate")
    assert info.value.line == 3
    with pytest.raises(ParseError) as info:
        parse_config("alpha = 1\n", "estimate")
    assert info.value.line == 1


def test_seed_must_be_u64():
    with pytest.raises(ValidationError):
        parse_config(ESTIMATE, "estimate", seed=2**64)
    parse_config(ESTIMATE, "estimate", seed=2**64 - 1)


def test_exponential_requires_pure_dp():
    text = ESTIMATE.replace("[privacy]", "[privacy]\nmechanism = exponential")
    with pytest.raises(ValidationError):
        parse_config(text, "estimate")


def test_z_stub_estimate_equals_plug_in(tmp_path, capsys):
    cfg = _write(tmp_path, ESTIMATE.replace("delta = 1e-3", "delta = 1e-3\nz_stub = true"))
    out = str(tmp_path / "est.json")
    assert main(["estimate", "--config", cfg, "--out", out, "--format", "json"]) == 0
    doc = json.loads(open(out).read())
    rec = doc["records"][0]
    assert rec["value"] == rec["nonprivate_value"]
    assert list(doc)[:4] == ["schema", "alpha", "delta", "mechanism"]
    assert "estimate" in capsys.readouterr().err


def test_coverage_experiment_writes_csv(tmp_path):
    cfg = _write(tmp_path, COVERAGE)
    out = tmp_path / "smooth_coverage.csv"
    assert main(["experiment", "smooth_coverage", "--config", cfg, "--out", str(out)]) == 0
    raw = out.read_bytes()
    assert b"\r\n" in raw
    rows = list(csv.reader(io.StringIO(raw.decode())))
    assert rows[0][:3] == ["alpha", "delta", "mechanism"]
    assert len(rows) == 3


@pytest.mark.skipif(os.geteuid() == 0, reason="root ignores directory permissions")
def test_unwritable_output_leaves_nothing_chmod(tmp_path):
    locked = tmp_path / "locked"
    locked.mkdir()
    locked.chmod(stat.S_IRUSR | stat.S_IXUSR)
    cfg = _write(tmp_path, COVERAGE)
    try:
        assert main(["experiment", "smooth_coverage", "--config", cfg, "--out", str(locked / "r.csv")]) == 1
        assert list(locked.iterdir()) == []
    finally:
        locked.chmod(stat.S_IRWXU)


def test_unwritable_output_exit_1_no_partial(tmp_path, capsys):
    cfg = _write(tmp_path, COVERAGE)
    target = tmp_path / "missing_dir" / "r.csv"
    assert main(["experiment", "smooth_coverage", "--config", cfg, "--out", str(target)]) == 1
    err = capsys.readouterr().err.strip().splitlines()[-1]
    assert "error" in json.loads(err)
    assert not target.parent.exists()
    # the output path is a directory: rename fails after the temp file is written
    blocker = tmp_path / "blocker"
    blocker.mkdir()
    assert main(["experiment", "smooth_coverage", "--config", cfg, "--out", str(blocker)]) == 1
    assert [p.name for p in tmp_path.iterdir() if p.name.startswith(".privest-")] == []


def test_error_record_is_json(tmp_path, capsys):
    cfg = _write(tmp_path, ESTIMATE.replace("alpha = 1", "alpha_ = 1"))
    assert main(["estimate", "--config", cfg]) == 1
    rec = json.loads(capsys.readouterr().err.strip())
    assert rec["error"] == "ValidationError" and rec["field"] == "privacy.alpha_"


def test_help_lists_commands_and_keys():
    text = build_parser().format_help()
    for command in ("estimate", "sensitivity", "bounds", "audit", "experiment"):
        assert command in text
    for section, keys in KEYS.items():
        for key, default in keys.items():
            assert f"{section}.{key} = " in text
            if default is not None:
                assert f"{section}.{key} = {default}" in text


def test_plug_in_audit_exit_2(tmp_path):
    text = """\
[functional]
name = median

[privacy]
alpha = 1
delta = 1e-3
mechanism = plug-in

[data]
values = 0.1,0.4,0.5,0.8,0.9
lower = 0
upper = 1
replace_index = 2
replace_value = 1

[experiment]
trials = 500
bins = 10
"""
    cfg = _write(tmp_path, text)
    assert main(["audit", "--config", cfg, "--out", str(tmp_path / "a.csv")]) == 2


def test_sensitivity_and_bounds_commands(tmp_path):
    text = ESTIMATE + "\n[experiment]\nn = 100\n"
    cfg = parse_config(text, "sensitivity", output_path=str(tmp_path / "s.csv"))
    assert run(cfg)[0] == 0
    rows = list(csv.DictReader(open(tmp_path / "s.csv", newline="")))
    assert float(rows[0]["smooth"]) >= float(rows[0]["local"])
    cfg = parse_config(text, "bounds", output_path=str(tmp_path / "b.csv"))
    assert run(cfg)[0] == 0
    names = [r["quantity"] for r in csv.DictReader(open(tmp_path / "b.csv", newline=""))]
    assert {"gc_radius", "gamma_n", "smooth_sensitivity_bound", "privacy_error_term"} <= set(names)


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_byte_identical_reruns(tmp_path, fmt):
    # the resolved config (output path included) is echoed, so reruns reuse the same arguments
    cfg = _write(tmp_path, COVERAGE)
    out = tmp_path / f"r.{fmt}"
    args = ["experiment", "smooth_coverage", "--config", cfg, "--out", str(out), "--format", fmt, "--seed", "9"]
    assert main(args) == 0
    first = out.read_bytes()
    assert main(args) == 0
    assert out.read_bytes() == first
