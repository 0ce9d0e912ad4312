from beamsteer.bench import BenchResult, bench_control_omega, bench_follow_control, bench_projection
from beamsteer.checks import CheckResult, run_checks
from beamsteer.cli import main
from beamsteer.sim import benchmark_control_step


def test_invariant_suites_pass_and_are_seeded():
    a = run_checks(0)
    assert len(a) == 5
    for r in a:
        assert r.passed, r.line()
    b = run_checks(0)
    assert [r.worst for r in a] == [r.worst for r in b]
    assert [r.worst for r in run_checks(1)] != [r.worst for r in a]


def test_check_result_verdict():
    assert CheckResult("x", 1e-10, 1e-9, 10, 0.0).line().startswith("PASS x")
    assert not CheckResult("x", float("nan"), 1e-9, 10, 0.0).passed
    assert CheckResult("x", 2e-9, 1e-9, 10, 0.0).line().startswith("FAIL x")


def test_check_command(capsys):
    assert main(["check"]) == 0
    assert capsys.readouterr().out.count("PASS") == 5


def test_benchmark_helper_counts_calls():
    calls = []
    ns = benchmark_control_step(calls.append, (1,), n=500, warmup=20)
    assert len(calls) == 520 and ns >= 0


def test_control_timings_within_bounds():
    for r in (bench_control_omega(5000), bench_follow_control(5000), bench_projection(5000)):
        assert r.passed, r.line()
    line = bench_control_omega(2000).line()
    assert "reference=2.0us" in line


def test_bench_result_line():
    r = BenchResult("demo", 1500.0, 50_000, 2_000)
    assert r.line() == "PASS demo: median=1.50us bound=50us reference=2.0us"
    assert not BenchResult("demo", 60_000.0, 50_000).passed


def test_bench_command(capsys):
    assert main(["bench", "--calls", "2000"]) == 0
    assert capsys.readouterr().out.count("PASS") == 3
