"""Command-line front end.

    beamsteer run <suite.manifest>     run every scenario of a suite
    beamsteer run-one <scenario.toml>  run a single scenario
    beamsteer check                    randomized invariant suites
    beamsteer bench                    control-step timings

Outputs go to ``--out``, overridden by the ``BEAMSTEER_OUT`` environment
variable.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .config import ExpectConfig, ScenarioConfig, load_config
from .errors import ParseError, ValidationError

log = logging.getLogger("beamsteer")

EXPECT_TAGS = ("pass", "info")


@dataclass
class SuiteEntry:
    name: str
    config: Path
    expect: str = "pass"


@dataclass
class SuiteManifest:
    entries: list
    out: Path | None = None
    missing: dict = field(default_factory=dict)


def parse_manifest(path) -> SuiteManifest:
    """TOML manifest: optional top-level ``out`` and ``[[scenario]]`` tables
    with ``name``, ``config`` and ``expect`` (``pass`` or ``info``)."""
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    unknown = set(data) - {"out", "scenario"}
    if unknown:
        raise ParseError(f"{path}: unknown key(s) {sorted(unknown)}")
    entries, seen, missing = [], set(), {}
    for i, item in enumerate(data.get("scenario", [])):
        bad = set(item) - {"name", "config", "expect"}
        if bad:
            raise ParseError(f"{path}: scenario {i}: unknown key(s) {sorted(bad)}")
        if "name" not in item or "config" not in item:
            raise ValidationError(f"scenario[{i}]", "needs 'name' and 'config'")
        name = item["name"]
        if name in seen:
            raise ValidationError(f"scenario[{i}].name", f"duplicate name '{name}'")
        seen.add(name)
        expect = item.get("expect", "pass")
        if expect not in EXPECT_TAGS:
            raise ValidationError(f"scenario[{i}].expect", f"one of {EXPECT_TAGS}")
        cfg = Path(item["config"])
        cfg = cfg if cfg.is_absolute() else path.parent / cfg
        if not cfg.exists():
            missing[name] = f"config file not found: {cfg}"
        entries.append(SuiteEntry(name, cfg, expect))
    out = data.get("out")
    return SuiteManifest(entries, (path.parent / out) if out else None, missing)


def evaluate(summary: dict, expect: ExpectConfig) -> list[str]:
    """Embedded assertions of a scenario; returns the violated ones."""
    problems = []
    status = summary.get("status", "")
    if expect.status:
        if status != expect.status:
            problems.append(f"status {status} != expected {expect.status}")
    elif "failure" in summary:
        problems.append(f"run failed with {summary['failure']}")

    def upper(key, bound, label=None):
        if bound is None:
            return
        value = summary.get(key)
        if value is None or not (value < bound):
            problems.append(f"{label or key}={value} not < {bound}")

    if expect.final_error_max is not None:
        worst = max(summary.get("final_err_L", math.inf), summary.get("final_err_R", math.inf))
        if not worst < expect.final_error_max:
            problems.append(f"final error {worst} not < {expect.final_error_max}")
    upper("rms_d", expect.rms_d_max)
    if "rms_dR" in summary:
        upper("rms_dR", expect.rms_d_max)
    upper("rms_theta", expect.rms_theta_max)
    upper("max_abs_d", expect.max_abs_d_max)
    upper("chord_dev_max", expect.chord_dev_max)
    upper("err3d_rel", expect.err3d_rel_max)
    if expect.exp_r2_min is not None:
        r2 = min(summary.get("exp_r2_L", -math.inf), summary.get("exp_r2_R", -math.inf))
        if not r2 >= expect.exp_r2_min:
            problems.append(f"exponential fit R2 {r2} not >= {expect.exp_r2_min}")
    return problems


def run_scenario(cfg: ScenarioConfig, out_dir: Path, name: str, figures: bool = True):
    from .report import write_outputs
    from .sim import run

    result = run(cfg)
    write_outputs(result, out_dir, name, figures)
    return result.summary, evaluate(result.summary, cfg.expect)


def _suite_job(args):
    entry, out_dir, figures = args
    try:
        cfg = load_config(entry.config)
        summary, problems = run_scenario(cfg, out_dir, entry.name, figures)
    except (OSError, ParseError, ValidationError) as exc:
        return entry.name, None, [f"{type(exc).__name__}: {exc}"]
    return entry.name, summary, problems


def output_dir(cli_value, default) -> Path:
    env = os.environ.get("BEAMSTEER_OUT")
    if env:
        return Path(env)
    if cli_value:
        return Path(cli_value)
    return Path(default)


def run_suite(manifest: SuiteManifest, out_dir: Path, jobs: int = 1, figures: bool = True, stream=None) -> int:
    stream = stream or sys.stdout
    if not manifest.entries:
        log.warning("empty manifest: nothing to run")
        return 0
    out_dir.mkdir(parents=True, exist_ok=True)
    todo = [(e, out_dir, figures) for e in manifest.entries if e.name not in manifest.missing]
    if jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            done = list(pool.map(_suite_job, todo))
    else:
        done = [_suite_job(t) for t in todo]
    outcome = {name: problems for name, _, problems in done}
    for name, msg in manifest.missing.items():
        outcome[name] = [msg]
    code = 0
    lines = []
    for e in manifest.entries:
        problems = outcome[e.name]
        verdict = "PASS" if not problems else ("FAIL" if e.expect == "pass" else "INFO")
        if problems and e.expect == "pass":
            code = 1
        lines.append(f"{verdict} {e.name}" + (": " + "; ".join(problems) if problems else ""))
    text = "\n".join(lines) + "\n"
    stream.write(text)
    (out_dir / "suite_report.txt").write_text(text, encoding="utf-8")
    return code


def _cmd_run(args) -> int:
    manifest = parse_manifest(args.manifest)
    out = output_dir(args.out, manifest.out or "beamsteer_out")
    return run_suite(manifest, out, args.jobs, not args.no_figures)


def _cmd_run_one(args) -> int:
    cfg = load_config(args.config)
    name = args.name or Path(args.config).stem
    out = output_dir(args.out, "beamsteer_out")
    summary, problems = run_scenario(cfg, out, name, not args.no_figures)
    for k, v in summary.items():
        print(f"{k}={v!r}" if isinstance(v, float) else f"{k}={v}")
    for p in problems:
        print(f"FAIL {p}")
    print(f"outputs in {out}")
    return 1 if problems else 0


def _cmd_check(args) -> int:
    from .checks import run_checks

    results = run_checks(args.seed)
    for r in results:
        print(r.line())
    total = sum(r.seconds for r in results)
    print(f"total time {total:.2f}s")
    return 0 if all(r.passed for r in results) else 1


def _cmd_bench(args) -> int:
    from .bench import run_bench

    results = run_bench(args.calls)
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="beamsteer", description="Laser-spot visual servoing simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a suite manifest")
    r.add_argument("manifest")
    r.add_argument("--out")
    r.add_argument("--jobs", type=int, default=1)
    r.add_argument("--no-figures", action="store_true")
    r.set_defaults(func=_cmd_run)

    o = sub.add_parser("run-one", help="run a single scenario config")
    o.add_argument("config")
    o.add_argument("--out")
    o.add_argument("--name")
    o.add_argument("--no-figures", action="store_true")
    o.set_defaults(func=_cmd_run_one)

    c = sub.add_parser("check", help="run the invariant suites")
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=_cmd_check)

    b = sub.add_parser("bench", help="time the control computations")
    b.add_argument("--calls", type=int, default=100_000)
    b.set_defaults(func=_cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print(f"error: invalid value for '{exc.field}': {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
