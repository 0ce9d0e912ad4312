"""Per-call timings of the control computations, next to a reference
timing where one exists.  Only the control computation itself has a
comparable reference; the rest of a hardware loop is camera transfer and
image tracking, which are not simulated."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .following import FollowGains, follow_from_projection
from .geometry import CameraModel, project
from .paths import build_path, project_onto_path
from .sim import benchmark_control_step
from .trifocal import TrifocalRig, control_omega, h_of


@dataclass(frozen=True)
class BenchResult:
    name: str
    median_ns: float
    bound_ns: float
    reference_ns: float | None = None

    @property
    def passed(self) -> bool:
        return self.median_ns < self.bound_ns

    def line(self) -> str:
        ref = f" reference={self.reference_ns / 1e3:.1f}us" if self.reference_ns else ""
        verdict = "PASS" if self.passed else "FAIL"
        return f"{verdict} {self.name}: median={self.median_ns / 1e3:.2f}us bound={self.bound_ns / 1e3:.0f}us{ref}"


def reference_rig() -> tuple[TrifocalRig, CameraModel, CameraModel]:
    camL = CameraModel(center=np.array([-40.0, 35.0, -20.0]))
    camR = CameraModel(center=np.array([40.0, 35.0, -20.0]))
    return TrifocalRig.from_cameras(camL, camR), camL, camR


def bench_control_omega(n: int = 100_000) -> BenchResult:
    rig, camL, camR = reference_rig()
    P = np.array([5.0, -3.0, 215.0])
    Ps = np.array([12.0, 4.0, 212.0])
    hL, hR = h_of(rig.F_0L, project(camL, P)), h_of(rig.F_0R, project(camR, P))
    hLs, hRs = rig.F_0L.M @ project(camL, Ps), rig.F_0R.M @ project(camR, Ps)
    ns = benchmark_control_step(control_omega, (rig, hL, hR, hLs, hRs), n=n)
    return BenchResult("trifocal control_omega", ns, 50_000, 2_000)


def _bench_curve(samples: int):
    t = np.linspace(0, 1, samples)
    return build_path(np.column_stack([320 + 200 * (t - 0.5), 240 + 60 * np.sin(2 * np.pi * 1.3 * t)]))


def bench_follow_control(n: int = 100_000) -> BenchResult:
    curve = _bench_curve(2000)
    gains = FollowGains()
    p = curve.xy[700] + np.array([0.3, -0.4])
    proj = project_onto_path(p, curve, curve.s[700], gains.window)
    tangent = proj.x_s
    ns = benchmark_control_step(follow_from_projection, (proj, tangent, curve, gains, 100.0), n=n)
    return BenchResult("path2d follow step without projection", ns, 50_000)


def bench_projection(n: int = 100_000) -> BenchResult:
    curve = _bench_curve(10_000)
    p = curve.xy[4321] + np.array([0.2, 0.5])
    ns = benchmark_control_step(project_onto_path, (p, curve, curve.s[4321], 32), n=n)
    return BenchResult("projection search, window 32, 10k samples", ns, 200_000)


def run_bench(n: int = 100_000) -> list[BenchResult]:
    return [bench_control_omega(n), bench_follow_control(n), bench_projection(n)]
