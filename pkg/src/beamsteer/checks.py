"""Randomized invariant suites run by ``beamsteer check``.

Each suite draws its samples from a seeded generator and reports the
worst value it saw against a fixed tolerance.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation

from .following import FrenetState, chained_rates, frenet_dynamics, omega_from_u2, to_chained
from .geometry import CameraModel, Intrinsics, cross, fundamental_between, normalize_h, project, unit
from .paths import build_path
from .trifocal import TrifocalRig, control_omega, h_of


@dataclass(frozen=True)
class CheckResult:
    name: str
    worst: float
    tol: float
    samples: int
    seconds: float

    @property
    def passed(self) -> bool:
        return bool(self.worst <= self.tol)

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"{verdict} {self.name}: worst={self.worst:.3e} tol={self.tol:.0e} "
                f"samples={self.samples} time={self.seconds:.2f}s")


def random_camera(rng, center, look_at) -> CameraModel:
    """Camera at ``center`` whose optical axis points roughly at ``look_at``."""
    K = Intrinsics(*rng.uniform(300, 1500, 2), *rng.uniform(100, 600, 2))
    z = unit(np.asarray(look_at) - center)
    x = unit(cross(rng.normal(size=3), z))
    R = np.column_stack([x, cross(z, x), z])
    tilt = Rotation.from_rotvec(rng.uniform(-0.2, 0.2, 3)).as_matrix()
    return CameraModel(K, R @ tilt, np.asarray(center, dtype=float))


def random_scene(rng):
    """Pivot, two cameras and a world point visible from both."""
    pivot = rng.uniform(-50, 50, 3)
    target = pivot + np.array([0.0, 0.0, 250.0]) + rng.uniform(-60, 60, 3)
    while True:
        cL = pivot + rng.uniform(-120, 120, 3) * np.array([1, 1, 0.3])
        cR = pivot + rng.uniform(-120, 120, 3) * np.array([1, 1, 0.3])
        if np.linalg.norm(cL - cR) > 10 and np.linalg.norm(cL - pivot) > 5 and np.linalg.norm(cR - pivot) > 5:
            break
    camL = random_camera(rng, cL, target)
    camR = random_camera(rng, cR, target)
    P = target + rng.uniform(-30, 30, 3)
    return pivot, camL, camR, P


def check_geometry_roundtrip(rng, n=1000) -> float:
    """Largest epipolar residual of projected points, camera-camera and
    mirror-camera pairs."""
    worst = 0.0
    for _ in range(n):
        pivot, camL, camR, P = random_scene(rng)
        pL, pR = project(camL, P), project(camR, P)
        F = fundamental_between(camL, camR)
        worst = max(worst, abs(pR @ F.M @ pL))
        z0 = unit(P - pivot)
        for cam, p in ((camL, pL), (camR, pR)):
            F0 = fundamental_between(cam, None, pivot)
            worst = max(worst, abs(z0 @ F0.M @ p))
    return worst


def check_identity(rng, n=1000) -> float:
    """``h_R x h_L = eps z0`` with ``eps = -z0 . (c_L x c_R)``, both in the
    epipole form (exact) and with ``h = F p`` (up to a positive factor)."""
    worst = 0.0
    for _ in range(n):
        pivot, camL, camR, P = random_scene(rng)
        z0 = unit(P - pivot)
        cL, cR = camL.center - pivot, camR.center - pivot
        hL, hR = cross(cL, z0), cross(cR, z0)
        eps = -z0 @ cross(cL, cR)
        scale = np.linalg.norm(cL) * np.linalg.norm(cR)
        worst = max(worst, np.linalg.norm(cross(hR, hL) - eps * z0) / scale)
        rig = TrifocalRig.from_cameras(camL, camR, pivot)
        fL = h_of(rig.F_0L, project(camL, P))
        fR = h_of(rig.F_0R, project(camR, P))
        worst = max(worst, np.linalg.norm(cross(unit(fL), unit(hL))), np.linalg.norm(cross(unit(fR), unit(hR))))
    return worst


def check_chained_equivalence(rng, n=1000, h=1e-6) -> float:
    """Central finite differences of the chained coordinates along the
    Frenet flow against the analytic chained rates, plus the inversion
    ``omega -> u2 -> omega``."""
    worst = 0.0
    for _ in range(n):
        C = rng.uniform(-0.05, 0.05)
        dC = rng.uniform(-1e-3, 1e-3)
        d = rng.uniform(-5, 5)
        th = rng.uniform(-1.2, 1.2)
        v = rng.uniform(20, 300)
        w = rng.uniform(-5, 5)
        st = FrenetState(rng.uniform(0, 100), d, th)
        rates = frenet_dynamics(st, v, w, C, dC)

        def z_at(sign):
            s_ = st.s + sign * h * rates[0]
            moved = FrenetState(s_, st.d + sign * h * rates[1], st.theta_e + sign * h * rates[2])
            z = to_chained(moved, C + dC * (s_ - st.s))
            return np.array([z.z1, z.z2, z.z3])

        fd = (z_at(1) - z_at(-1)) / (2 * h)
        an = np.array(chained_rates(st, v, w, C, dC))
        worst = max(worst, np.max(np.abs(fd - an) / np.maximum(np.abs(an), 1.0)))
        back = omega_from_u2(an[2], st, v, C, dC, rates[0], rates[1])
        worst = max(worst, abs(back - w) / max(abs(w), 1.0))
    return worst


def check_circle_curvature(rng, n=200) -> float:
    """Relative error of the sampled curvature of circles of random radius,
    both orientations."""
    worst = 0.0
    for _ in range(n):
        R = math.exp(rng.uniform(math.log(5), math.log(5000)))
        m = int(rng.integers(20, 3000))
        a = np.linspace(0, 2 * np.pi, m, endpoint=False) + rng.uniform(0, 2 * np.pi)
        sign = 1.0 if rng.random() < 0.5 else -1.0
        xy = np.column_stack([R * np.cos(sign * a), R * np.sin(sign * a)]) + rng.uniform(-500, 500, 2)
        curve = build_path(xy, closed=True)
        worst = max(worst, float(np.max(np.abs(curve.C * R - sign))))
    return worst


def check_omega_perpendicular(rng, n=1000) -> float:
    """``|Omega . z0| / |Omega|`` for consistent observations and random
    targets and target velocities."""
    worst = 0.0
    for _ in range(n):
        pivot, camL, camR, P = random_scene(rng)
        rig = TrifocalRig.from_cameras(camL, camR, pivot)
        z0 = unit(P - pivot)
        hL = h_of(rig.F_0L, project(camL, P))
        hR = h_of(rig.F_0R, project(camR, P))
        if np.linalg.norm(cross(unit(hR), unit(hL))) < 1e-3:
            continue  # too close to the baseline plane for a meaningful sample
        targ = [rig.F_0L.M @ normalize_h(np.append(rng.uniform(0, 640, 2), 1.0)),
                rig.F_0R.M @ normalize_h(np.append(rng.uniform(0, 480, 2), 1.0))]
        vel = [rig.F_0L.M @ np.append(rng.normal(0, 50, 2), 0.0),
               rig.F_0R.M @ np.append(rng.normal(0, 50, 2), 0.0)]
        w = control_omega(rig, hL, hR, targ[0], targ[1], vel[0], vel[1], lam=rng.uniform(0.1, 2))
        nw = np.linalg.norm(w)
        if nw > 0:
            worst = max(worst, abs(w @ z0) / nw)
    return worst


SUITES = (
    ("geometry round-trip (epipolar residual)", check_geometry_roundtrip, 1e-9, 1000),
    ("identity hR x hL = eps z0", check_identity, 1e-9, 1000),
    ("chained form vs Frenet finite differences", check_chained_equivalence, 1e-6, 1000),
    ("circle curvature oracle", check_circle_curvature, 1e-6, 200),
    ("Omega orthogonal to beam", check_omega_perpendicular, 1e-12, 1000),
)


def run_checks(seed: int = 0) -> list[CheckResult]:
    out = []
    for i, (name, fn, tol, n) in enumerate(SUITES):
        rng = np.random.default_rng([seed, i])
        t0 = time.perf_counter()
        worst = fn(rng, n)
        out.append(CheckResult(name, float(worst), tol, n, time.perf_counter() - t0))
    return out
