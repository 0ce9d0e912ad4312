import logging
import shutil
from dataclasses import replace

import pytest

from beamsteer.cli import evaluate, main, parse_manifest, run_suite
from beamsteer.config import ExpectConfig, load_config
from beamsteer.errors import ValidationError
from beamsteer.report import emit_trace, parse_summary, summary_text, write_outputs
from beamsteer.sim import run

from .conftest import SCENARIOS

FAST = """name = "fast"
controller = "path2d"
Te = 0.002
max_iters = 300

[path]
shape = "line"
samples = 200
size = 100.0

[expect]
status = "max_iters"
rms_d_max = 0.05
"""


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def manifest(tmp_path, entries):
    body = "".join(f'[[scenario]]\nname = "{n}"\nconfig = "{c}"\n' + (f'expect = "{e}"\n' if e else "") + "\n"
                   for n, c, e in entries)
    return write(tmp_path / "suite.manifest", body)


# ------------------------------------------------------------ suites


def test_suite_with_missing_path_file_fails_only_that_entry(tmp_path, capsys):
    write(tmp_path / "fast.toml", FAST)
    write(tmp_path / "broken.toml", FAST.replace('shape = "line"', 'file = "missing.csv"'))
    m = manifest(tmp_path, [("fast", "fast.toml", None), ("broken", "broken.toml", None)])
    code = main(["run", str(m), "--out", str(tmp_path / "out"), "--no-figures"])
    out = capsys.readouterr().out
    assert code == 1
    assert "PASS fast" in out and "FAIL broken" in out
    assert (tmp_path / "out" / "fast.csv").exists()
    assert (tmp_path / "out" / "suite_report.txt").read_text() == out


def test_missing_config_is_reported_per_entry(tmp_path, capsys):
    write(tmp_path / "fast.toml", FAST)
    m = manifest(tmp_path, [("fast", "fast.toml", None), ("ghost", "ghost.toml", None)])
    assert "ghost" in parse_manifest(m).missing
    assert main(["run", str(m), "--out", str(tmp_path / "out"), "--no-figures"]) == 1
    out = capsys.readouterr().out
    assert "PASS fast" in out and "FAIL ghost: config file not found" in out


def test_info_entries_do_not_fail_the_suite(tmp_path, capsys):
    write(tmp_path / "strict.toml", FAST.replace('status = "max_iters"', 'status = "completed"'))
    m = manifest(tmp_path, [("strict", "strict.toml", "info")])
    assert main(["run", str(m), "--out", str(tmp_path / "out"), "--no-figures"]) == 0
    assert "INFO strict" in capsys.readouterr().out


def test_empty_manifest_exits_zero_with_warning(tmp_path, caplog):
    m = write(tmp_path / "empty.manifest", "# nothing yet\n")
    with caplog.at_level(logging.WARNING, logger="beamsteer"):
        assert run_suite(parse_manifest(m), tmp_path / "out") == 0
    assert "empty manifest" in caplog.text
    assert main(["run", str(m), "--out", str(tmp_path / "out")]) == 0


def test_manifest_rejects_duplicates_and_unknown_keys(tmp_path):
    write(tmp_path / "fast.toml", FAST)
    dup = manifest(tmp_path, [("a", "fast.toml", None), ("a", "fast.toml", None)])
    with pytest.raises(ValidationError):
        parse_manifest(dup)
    assert main(["run", str(write(tmp_path / "typo.manifest", "outt = 'x'\n"))]) == 2


def test_parallel_suite_matches_serial(tmp_path, capsys):
    write(tmp_path / "fast.toml", FAST)
    write(tmp_path / "fast2.toml", FAST.replace('"line"', '"sinusoid"'))
    m = manifest(tmp_path, [("a", "fast.toml", None), ("b", "fast2.toml", None)])
    assert main(["run", str(m), "--out", str(tmp_path / "serial"), "--no-figures"]) == 0
    assert main(["run", str(m), "--out", str(tmp_path / "par"), "--jobs", "2", "--no-figures"]) == 0
    for name in ("a.csv", "b.csv", "a.summary.txt", "suite_report.txt"):
        assert (tmp_path / "serial" / name).read_bytes() == (tmp_path / "par" / name).read_bytes()


# ------------------------------------------------------------ run-one and exit codes


def test_run_one_writes_outputs_and_figures(tmp_path, capsys):
    cfg = write(tmp_path / "fast.toml", FAST)
    assert main(["run-one", str(cfg), "--out", str(tmp_path / "o")]) == 0
    files = {p.name for p in (tmp_path / "o").iterdir()}
    assert {"fast.csv", "fast.summary.txt", "fast.config.toml"} <= files
    assert any(f.endswith(".png") for f in files)
    assert "rms_d=" in capsys.readouterr().out


def test_output_directory_from_environment(tmp_path, monkeypatch):
    cfg = write(tmp_path / "fast.toml", FAST)
    monkeypatch.setenv("BEAMSTEER_OUT", str(tmp_path / "env"))
    assert main(["run-one", str(cfg), "--out", str(tmp_path / "flag"), "--no-figures"]) == 0
    assert (tmp_path / "env" / "fast.csv").exists()
    assert not (tmp_path / "flag").exists()


def test_exit_codes(tmp_path, capsys):
    bad = write(tmp_path / "bad.toml", "Te = 0\n")
    assert main(["run-one", str(bad)]) == 2
    assert "'Te'" in capsys.readouterr().err
    typo = write(tmp_path / "typo.toml", "[rig]\nfocal_lenght = 900\n")
    assert main(["run-one", str(typo)]) == 2
    assert "line 2" in capsys.readouterr().err
    assert main(["run-one", str(tmp_path / "absent.toml")]) == 2
    failing = write(tmp_path / "failing.toml", FAST.replace('status = "max_iters"', 'status = "completed"'))
    assert main(["run-one", str(failing), "--out", str(tmp_path / "o"), "--no-figures"]) == 1


def test_acceptance_manifest_parses():
    m = parse_manifest(SCENARIOS / "acceptance.manifest")
    assert not m.missing and len(m.entries) == 10
    assert len({e.name for e in m.entries}) == 10


# ------------------------------------------------------------ embedded assertions


def test_evaluate_checks_both_images():
    summary = {"status": "completed", "rms_d": 0.01, "rms_dR": 3.0}
    assert evaluate(summary, ExpectConfig(status="completed", rms_d_max=2.5)) == ["rms_dR=3.0 not < 2.5"]
    assert evaluate(summary, ExpectConfig()) == []
    assert evaluate({"status": "NoHit", "failure": "NoHit"}, ExpectConfig())


# ------------------------------------------------------------ report files


def test_trace_and_summary_are_reproducible(tmp_path):
    cfg = replace(load_config(SCENARIOS / "path2d_noise.toml"), max_iters=500)
    res = run(cfg)
    a = emit_trace(res, tmp_path / "a.csv")
    b = emit_trace(run(cfg), tmp_path / "b.csv")
    assert a.read_bytes() == b.read_bytes()
    files = write_outputs(res, tmp_path / "o", "x", figures=False)
    again = write_outputs(run(cfg), tmp_path / "p", "x", figures=False)
    for key in ("trace", "summary", "config"):
        assert files[key].read_bytes() == again[key].read_bytes()


def test_summary_values_round_trip():
    res = run(replace(load_config(SCENARIOS / "path2d_noise.toml"), max_iters=500))
    parsed = parse_summary(summary_text(res))
    for k, v in res.summary.items():
        if isinstance(v, float):
            assert float(parsed[k]) == v
        else:
            assert parsed[k] == str(v)


def test_echoed_config_reloads(tmp_path):
    src = SCENARIOS / "path2d_constant.toml"
    cfg = load_config(src)
    shutil.copytree(SCENARIOS / "paths", tmp_path / "paths")
    files = write_outputs(replace(run(replace(cfg, max_iters=50)), config=cfg), tmp_path, "echo", figures=False)
    assert load_config(files["config"]) == replace(cfg, base_dir=str(tmp_path))
