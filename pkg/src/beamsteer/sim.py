"""Deterministic fixed-step closed-loop simulation.

One iteration is: observe the spot, compute the control, rotate the
mirror by one explicit Euler step of length ``Te``, advance time.  Every
failure ends the run but still returns the partial result, tagged with
the exception class name.
"""

from __future__ import annotations

import hashlib
import io
import math
import statistics
import time
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats

from .config import ScenarioConfig
from .errors import BeamsteerError, InsufficientData
from .following import FollowGains, arc_displacement, follow_step
from .geometry import CameraModel, Intrinsics, project, unit
from .hybrid import HybridController, StereoPathPair, back_project
from .optics import (
    Heightfield,
    MirrorModel,
    MirrorState,
    Plane,
    Sphere,
    Surface,
    TimeVarying,
    integrate_joints,
    intersect,
    mirror_step,
    observe_spot,
)
from .paths import PathCurve, build_path, load_path_csv
from .trifocal import ServoGains, TrifocalRig, TrifocalServo

TRACE_COLUMNS = ("iter", "t", "exL", "eyL", "exR", "eyR", "d", "theta_e", "speed", "wx", "wy", "wz", "status")


# ---------------------------------------------------------------- rig


@dataclass(frozen=True)
class Rig:
    """True cameras (used to simulate images) and the calibration the
    controller believes in (``estimate``)."""

    camL: CameraModel
    camR: CameraModel
    pivot: np.ndarray
    estimate: TrifocalRig

    @property
    def exact(self) -> TrifocalRig:
        return TrifocalRig.from_cameras(self.camL, self.camR, self.pivot)


def build_rig(cfg) -> Rig:
    K = Intrinsics(cfg.fx, cfg.fy, cfg.cx, cfg.cy)
    camL = CameraModel(K, np.eye(3), np.array(cfg.t_left, dtype=float))
    camR = CameraModel(K, np.eye(3), np.array(cfg.t_right, dtype=float))
    pivot = np.array(cfg.pivot, dtype=float)
    rig = Rig(camL, camR, pivot, TrifocalRig.from_cameras(camL, camR, pivot))
    if cfg.calib_eps > 0:
        rig = perturb_calibration(rig, cfg.calib_eps, np.random.default_rng(cfg.calib_seed),
                                  cfg.calib_intrinsics)
    return rig


def _perturb_camera(cam: CameraModel, eps: float, rng, intrinsics: bool) -> CameraModel:
    k = cam.K
    if intrinsics:
        f = 1.0 + rng.uniform(-eps, eps, size=4)
        k = Intrinsics(k.fx * f[0], k.fy * f[1], k.cx * f[2], k.cy * f[3])
    c = cam.center * (1.0 + rng.uniform(-eps, eps, size=3))
    return CameraModel(k, cam.R, c)


def perturb_calibration(rig: Rig, relative_eps: float, rng: np.random.Generator,
                        intrinsics: bool = True) -> Rig:
    """Rebuild the controller's matrices from cameras whose translation
    (and, if ``intrinsics``, intrinsic) entries are each scaled by
    ``1 + uniform(-eps, eps)``.  The simulated (true) cameras are untouched."""
    if not 0 <= relative_eps < 1:
        raise ValueError("relative_eps must lie in [0, 1)")
    if relative_eps == 0:
        return rig
    camL = _perturb_camera(rig.camL, relative_eps, rng, intrinsics)
    camR = _perturb_camera(rig.camR, relative_eps, rng, intrinsics)
    return replace(rig, estimate=TrifocalRig.from_cameras(camL, camR, rig.pivot))


def build_surface(cfg: ScenarioConfig) -> Surface:
    s = cfg.surface
    if s.kind == "plane":
        base = Plane(np.array(s.point), np.array(s.normal))
    elif s.kind == "sphere":
        base = Sphere(np.array(s.center), s.radius)
    else:
        base = Heightfield.from_csv(cfg.resolve(s.file))
    if s.scale_amplitude > 1:
        return TimeVarying(base, s.scale_amplitude, s.scale_period, tuple(s.center))
    return base


# -------------------------------------------------------------- paths


def generate_shape(shape: str, samples: int, center, size: float) -> tuple[np.ndarray, bool]:
    """Built-in reference curves, ``size`` pixels across, and whether
    they are closed."""
    cx, cy = center
    t = np.linspace(0.0, 1.0, samples)
    closed = False
    if shape == "line":
        x, y = (t - 0.5) * size, np.zeros_like(t)
    elif shape == "circle":
        a = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
        x, y = 0.5 * size * np.cos(a), 0.5 * size * np.sin(a)
        closed = True
    elif shape == "spiral":
        a = 0.3 + t * (6 * np.pi - 0.3)
        r = 0.5 * size * (0.0625 + 0.9375 * (a - 0.3) / (6 * np.pi - 0.3))
        x, y = r * np.cos(a), r * np.sin(a)
    elif shape == "sinusoid":
        x, y = (t - 0.5) * size, 0.15 * size * np.sin(4 * np.pi * t)
    elif shape == "sigma":
        # S stroke: three quarters of a circle turning left, then three
        # quarters turning right, tangent-continuous at the joint
        R = 0.25 * size
        a = 1.5 * np.pi * np.minimum(2 * t, 1.0)
        b = 0.5 * np.pi - 1.5 * np.pi * np.maximum(2 * t - 1.0, 0.0)
        upper = t < 0.5
        x = np.where(upper, R * np.cos(a), R * np.cos(b))
        y = np.where(upper, R + R * np.sin(a), -R + R * np.sin(b))
    elif shape == "figure8":
        a = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
        x, y = 0.5 * size * np.sin(a), 0.25 * size * np.sin(2 * a)
        closed = True
    else:  # handdrawn: irregular stroke with non-uniform sample spacing
        u = t + 0.03 * np.sin(2 * np.pi * 5 * t) / (2 * np.pi * 5)
        x = size * (u - 0.5) + 0.02 * size * np.sin(2 * np.pi * 1.5 * u)
        y = 0.12 * size * np.sin(2 * np.pi * 1.2 * u) + 0.03 * size * np.sin(2 * np.pi * 3.1 * u + 0.4)
    return np.column_stack([cx + x, cy + y]), closed


def reference_curve(cfg: ScenarioConfig, center) -> PathCurve:
    p = cfg.path
    if p.file:
        return load_path_csv(cfg.resolve(p.file))
    xy, closed = generate_shape(p.shape, p.samples, center, p.size)
    return build_path(xy, closed or p.closed)


def speed_at(cfg, t: float) -> float:
    """Commanded spot speed (pixels per second) of the profile at time ``t``."""
    if cfg.profile == "constant":
        return cfg.v
    if cfg.profile == "sinusoid":
        return cfg.v + cfg.amplitude * math.sin(2 * math.pi * cfg.frequency * t)
    v = cfg.steps[0][1]
    for t0, vi in cfg.steps:
        if t >= t0:
            v = vi
    return v


# ------------------------------------------------------------ records


@dataclass
class Record:
    iter: int
    t: float
    pL: tuple = (0.0, 0.0)
    pR: tuple = (0.0, 0.0)
    world: tuple = (0.0, 0.0, 0.0)
    eL: tuple = (0.0, 0.0)
    eR: tuple = (0.0, 0.0)
    d: float = 0.0
    theta_e: float = 0.0
    dR: float = 0.0
    theta_eR: float = 0.0
    speed: float = 0.0
    omega: tuple = (0.0, 0.0, 0.0)
    err3d: float = 0.0
    side: float = 0.0
    target: int = 0
    status: str = "running"

    def row(self) -> tuple:
        return (self.iter, self.t, *self.eL, *self.eR, self.d, self.theta_e, self.speed,
                *self.omega, self.status)


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    records: list
    summary: dict
    status: str
    failure: str = ""
    wall_time: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return bool(self.failure)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)


def trace_text(records) -> str:
    buf = io.StringIO()
    buf.write(",".join(TRACE_COLUMNS) + "\n")
    for r in records:
        buf.write(",".join(v if isinstance(v, str) else repr(v) for v in _plain(r.row())) + "\n")
    return buf.getvalue()


def _plain(values):
    return [v if isinstance(v, str) else (int(v) if isinstance(v, (int, np.integer)) else float(v)) for v in values]


# ------------------------------------------------------------ metrics


def rms(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.sqrt(np.mean(x * x)))


def std(x) -> float:
    """Population standard deviation."""
    return float(np.std(np.asarray(x, dtype=float)))


def exp_fit(errors, head: float = 0.8):
    """Least-squares line through ``log e_k`` over the iterations after the
    error first drops below ``head`` times its initial value.

    Returns ``(rate, r2)``; ``rate`` is per iteration (``ln rho`` for
    ``e_k = e_0 rho^k``).
    """
    e = np.asarray(errors, dtype=float)
    if len(e) < 2 or not e[0] > 0:
        raise InsufficientData("need at least two records with a non-zero initial error")
    below = np.nonzero(e < head * e[0])[0]
    if len(below) == 0:
        raise InsufficientData("error never leaves the transient")
    k = np.arange(len(e))[below[0]:]
    e = e[below[0]:]
    ok = e > 0
    if ok.sum() < 3:
        raise InsufficientData("fewer than three points after the transient")
    fit = stats.linregress(k[ok], np.log(e[ok]))
    return float(fit.slope), float(fit.rvalue ** 2)


def chord_deviation(track, start, target) -> float:
    """Largest distance from the points of ``track`` to the segment
    ``start``-``target``."""
    track = np.asarray(track, dtype=float)
    a, b = np.asarray(start, dtype=float), np.asarray(target, dtype=float)
    ab = b - a
    L2 = ab @ ab
    if L2 == 0:
        return float(np.max(np.linalg.norm(track - a, axis=1)))
    t = np.clip((track - a) @ ab / L2, 0.0, 1.0)
    return float(np.max(np.linalg.norm(track - (a + t[:, None] * ab), axis=1)))


def metrics(records, kind: str = "path2d", transient_fraction: float = 0.1, targets=None) -> dict:
    """Summary statistics computed from the records alone."""
    if len(records) < 2:
        raise InsufficientData(f"need at least 2 records, got {len(records)}")
    last = records[-1]
    out = {"n_records": len(records), "final_t": last.t, "status": last.status}
    if kind in ("trifocal", "scripted"):
        eL = np.array([math.hypot(*r.eL) for r in records])
        eR = np.array([math.hypot(*r.eR) for r in records])
        out.update(final_err_L=float(eL[-1]), final_err_R=float(eR[-1]),
                   rms_err_L=rms(eL), std_err_L=std(eL), rms_err_R=rms(eR), std_err_R=std(eR))
        if last.status == "converged":
            out["converged_iter"] = last.iter
        first = [r for r in records if r.target == 0]
        for name, series in (("L", [math.hypot(*r.eL) for r in first]), ("R", [math.hypot(*r.eR) for r in first])):
            try:
                rate, r2 = exp_fit(series)
                out[f"exp_rate_{name}"], out[f"exp_r2_{name}"] = rate, r2
            except InsufficientData:
                pass
        if targets is not None:
            devs = []
            for j, tgt in enumerate(targets):
                seg = [r for r in records if r.target == j]
                if seg:
                    devs.append(chord_deviation([r.pL for r in seg], seg[0].pL, tgt))
            out["chord_dev_max"] = max(devs)
        sides = np.array([r.side for r in records])
        flips = np.nonzero(sides != sides[0])[0]
        if len(flips):
            out["crossing_iter"] = int(flips[0])
        return out

    k0 = int(transient_fraction * len(records))
    ss = records[k0:]
    d = np.array([r.d for r in ss])
    th = np.array([r.theta_e for r in ss])
    d_all = np.array([r.d for r in records])
    out.update(rms_d=rms(d), std_d=std(d), mean_d=float(np.mean(d)), rms_theta=rms(th), std_theta=std(th),
               max_abs_d=float(np.max(np.abs(d_all))), max_abs_d_ss=float(np.max(np.abs(d))))
    if kind == "hybrid3d":
        dR = np.array([r.dR for r in ss])
        thR = np.array([r.theta_eR for r in ss])
        e3 = np.array([r.err3d for r in records])
        out.update(rms_dR=rms(dR), std_dR=std(dR), rms_thetaR=rms(thR),
                   max_abs_dR=float(np.max(np.abs([r.dR for r in records]))),
                   err3d_mean=float(np.mean(e3)), err3d_rms=rms(e3), err3d_max=float(np.max(e3)))
        if np.std(d) > 0 and np.std(dR) > 0:
            out["corr_dLR"] = float(np.corrcoef(d, dR)[0, 1])
    return out


# ------------------------------------------------------------- engine


def _polyline_distance(p, pts) -> float:
    a, b = pts[:-1], pts[1:]
    ab = b - a
    t = np.clip(np.einsum("ij,ij->i", p - a, ab) / np.einsum("ij,ij->i", ab, ab), 0.0, 1.0)
    diff = p - (a + t[:, None] * ab)
    return float(np.sqrt(np.min(np.einsum("ij,ij->i", diff, diff))))


def _project_many(cam: CameraModel, pts) -> np.ndarray:
    Xc = (pts - cam.center) @ cam.R
    k = cam.K
    return np.column_stack([k.fx * Xc[:, 0] / Xc[:, 2] + k.cx, k.fy * Xc[:, 1] / Xc[:, 2] + k.cy])


class _Sim:
    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self.rig = build_rig(cfg.rig)
        self.scene = build_surface(cfg)
        self.rng = np.random.default_rng(cfg.seed)
        self.records: list[Record] = []
        self.failure = ""
        self.extra: dict = {}
        n = self.rig.exact.baseline_normal
        self.baseline_normal = n / np.linalg.norm(n)

    def hit_direction(self, cam: CameraModel, pixel, time_=0.0) -> np.ndarray:
        P = intersect(self.scene, cam.center, cam.ray((pixel[0], pixel[1], 1.0)), time_)
        return unit(P - self.rig.pivot)

    def observe(self, mirror, t):
        return observe_spot(self.scene, mirror, self.rig.camL, self.rig.camR, self.cfg.noise_sigma, self.rng, t)

    def base_record(self, k, obs, mirror) -> Record:
        return Record(k, k * self.cfg.Te, tuple(obs.pL[:2]), tuple(obs.pR[:2]), tuple(obs.world),
                      side=float(np.sign(self.baseline_normal @ mirror.z0)))

    def fail(self, exc: BeamsteerError, rec: Record | None):
        self.failure = exc.tag
        self.extra["failure_message"] = str(exc)
        if rec is not None:
            rec.status = exc.tag
            self.records.append(rec)
        elif self.records:
            self.records[-1].status = exc.tag
        else:
            self.records.append(Record(0, 0.0, status=exc.tag))

    # -- point-to-point and scripted sweep

    def run_trifocal(self):
        cfg, rig = self.cfg, self.rig
        tc = cfg.trifocal
        if tc.start_pixel:
            z0 = self.hit_direction(rig.camL, tc.start_pixel)
        elif cfg.controller == "scripted":
            z0 = unit(np.array(cfg.scripted.start_direction))
        else:
            z0 = np.array([0.0, 0.0, 1.0])
        mirror = MirrorState(rig.pivot, z0)
        model = MirrorModel.orthogonal_to(z0)
        q = np.zeros(2)
        servo = TrifocalServo(rig.estimate, ServoGains(tc.lam, cfg.Te, tc.sing_eps))
        start = observe_spot(self.scene, mirror, rig.camL, rig.camR)
        servo.seed(z0, rig.estimate.F_0L.M @ start.pL, rig.estimate.F_0R.M @ start.pR)

        targets = []
        if cfg.controller == "trifocal":
            for off in tc.waypoints:
                pl = start.pL[:2] + np.array(off)
                P = intersect(self.scene, rig.camL.center, rig.camL.ray((pl[0], pl[1], 1.0)))
                targets.append((project(rig.camL, P), project(rig.camR, P)))
        self.extra["targets_L"] = [tuple(t[0][:2]) for t in targets]
        j = 0
        for k in range(cfg.max_iters):
            t = k * cfg.Te
            try:
                obs = self.observe(mirror, t)
            except BeamsteerError as exc:
                return self.fail(exc, None)
            rec = self.base_record(k, obs, mirror)
            rec.target = j
            try:
                if targets:
                    pLs, pRs = targets[j]
                    rec.eL = tuple(obs.pL[:2] - pLs[:2])
                    rec.eR = tuple(obs.pR[:2] - pRs[:2])
                    if max(math.hypot(*rec.eL), math.hypot(*rec.eR)) < tc.stop_tol:
                        if j + 1 == len(targets):
                            rec.status = "converged"
                            self.records.append(rec)
                            return
                        j += 1
                        pLs, pRs = targets[j]
                        servo.retarget()
                    omega = servo.step(obs.pL, obs.pR, pLs, pRs)
                else:
                    servo.monitor(obs.pL, obs.pR)
                    omega = np.array(cfg.scripted.omega, dtype=float)
                rec.omega = tuple(omega)
                q = integrate_joints(model, q, omega, cfg.Te)
            except BeamsteerError as exc:
                rec.omega = (0.0, 0.0, 0.0)
                return self.fail(exc, rec)
            self.records.append(rec)
            mirror = mirror_step(mirror, omega, cfg.Te)
        self.records[-1].status = "max_iters"

    # -- image-plane path following (no mirror)

    def run_path2d(self):
        cfg = self.cfg
        pc = cfg.path
        center = pc.center or [cfg.rig.cx, cfg.rig.cy]
        try:
            curve = reference_curve(cfg, center)
        except (BeamsteerError, OSError, ValueError) as exc:
            return self._setup_failure(exc)
        self.extra["curve"] = curve
        tangent = curve.T[0]
        normal = np.array([-tangent[1], tangent[0]])
        p = curve.xy[0] + pc.start_offset * normal
        c, s_ = math.cos(pc.start_heading), math.sin(pc.start_heading)
        v_dir = np.array([c * tangent[0] - s_ * tangent[1], s_ * tangent[0] + c * tangent[1]])
        s, s_dot, d_prev = 0.0, 0.0, None
        for k in range(cfg.max_iters):
            t = k * cfg.Te
            v = speed_at(cfg.speed, t)
            gains = FollowGains(pc.gamma1, pc.gamma2, v, cfg.Te, pc.window, pc.d_dot_mode)
            meas = p + (self.rng.normal(0.0, cfg.noise_sigma, size=2) if cfg.noise_sigma > 0 else 0.0)
            rec = Record(k, t, pL=tuple(meas), speed=v)
            try:
                res = follow_step(meas, v_dir, curve, gains, s, s_dot, speed=v, d_prev=d_prev)
            except BeamsteerError as exc:
                return self.fail(exc, rec)
            rec.d, rec.theta_e = res.state.d, res.state.theta_e
            rec.eL = tuple(meas - res.foot)
            rec.omega = (0.0, 0.0, res.omega)
            self.records.append(rec)
            if res.completed:
                rec.status = "completed"
                return
            p = p + arc_displacement(v_dir, res.v_dir, v * cfg.Te)
            s, s_dot, d_prev, v_dir = res.state.s, res.s_dot, res.state.d, res.v_dir
        self.records[-1].status = "max_iters"

    # -- 3D path following through both images

    def run_hybrid(self):
        cfg, rig = self.cfg, self.rig
        pc = cfg.path
        center = pc.center
        if not center:
            P = intersect(self.scene, rig.pivot, np.array([0.0, 0.0, 1.0]))
            center = list(project(rig.camL, P)[:2])
        try:
            gL = reference_curve(cfg, center)
            world0 = back_project(gL, self.scene, rig.camL, 0.0)
            gR = build_path(_project_many(rig.camR, world0), gL.closed)
        except (BeamsteerError, OSError, ValueError) as exc:
            return self._setup_failure(exc)
        pair = StereoPathPair(gL, gR, world0)
        self.extra.update(curve=gL, curve_R=gR, world=world0)
        span = world0.max(axis=0) - world0.min(axis=0)
        self.extra["bbox_diag"] = float(np.linalg.norm(span))
        varying = isinstance(self.scene, TimeVarying)
        sc_center = np.array(cfg.surface.center, dtype=float)

        tangent = gL.T[0]
        start = gL.xy[0] + pc.start_offset * np.array([-tangent[1], tangent[0]])
        try:
            z0 = self.hit_direction(rig.camL, start)
        except BeamsteerError as exc:
            return self._setup_failure(exc)
        mirror = MirrorState(rig.pivot, z0)
        model = MirrorModel.orthogonal_to(z0)
        q = np.zeros(2)
        gains = FollowGains(pc.gamma1, pc.gamma2, cfg.speed.v, cfg.Te, pc.window, pc.d_dot_mode)
        ctl = HybridController(rig.estimate, pair, gains, cfg.trifocal.sing_eps, pc.heading)
        world_t = world0
        for k in range(cfg.max_iters):
            t = k * cfg.Te
            v = speed_at(cfg.speed, t)
            try:
                if varying and k % pc.retransfer_every == 0:
                    sc = self.scene.scale(t)
                    world_t = sc_center + sc * (world0 - sc_center)
                    ctl.set_pair(StereoPathPair(build_path(_project_many(rig.camL, world_t), gL.closed),
                                                build_path(_project_many(rig.camR, world_t), gL.closed), world_t))
                obs = self.observe(mirror, t)
            except BeamsteerError as exc:
                return self.fail(exc, None)
            rec = self.base_record(k, obs, mirror)
            rec.speed = v
            try:
                omega, rl, rr = ctl.step(obs.pL, obs.pR, v)
                q = integrate_joints(model, q, omega, cfg.Te)
            except BeamsteerError as exc:
                return self.fail(exc, rec)
            rec.d, rec.theta_e = rl.state.d, rl.state.theta_e
            rec.dR, rec.theta_eR = rr.state.d, rr.state.theta_e
            rec.eL = tuple(obs.pL[:2] - rl.foot)
            rec.eR = tuple(obs.pR[:2] - rr.foot)
            rec.omega = tuple(omega)
            rec.err3d = _polyline_distance(obs.world, world_t)
            self.records.append(rec)
            if rl.completed:
                rec.status = "completed"
                return
            mirror = mirror_step(mirror, omega, cfg.Te)
        self.records[-1].status = "max_iters"

    def _setup_failure(self, exc):
        tag = exc.tag if isinstance(exc, BeamsteerError) else type(exc).__name__
        self.failure = tag
        self.extra["failure_message"] = str(exc)
        self.records.append(Record(0, 0.0, status=tag))


def run(config: ScenarioConfig) -> ScenarioResult:
    """Simulate one scenario; deterministic for a given config (seed included)."""
    sim = _Sim(config)
    t0 = time.perf_counter()
    {"trifocal": sim.run_trifocal, "scripted": sim.run_trifocal,
     "path2d": sim.run_path2d, "hybrid3d": sim.run_hybrid}[config.controller]()
    wall = time.perf_counter() - t0
    return finish(config, sim.records, sim.failure, sim.extra, wall)


def finish(config, records, failure, extra, wall=0.0) -> ScenarioResult:
    targets = extra.get("targets_L") or None
    try:
        summary = metrics(records, config.controller, config.path.transient_fraction, targets)
    except InsufficientData:
        last = records[-1]
        summary = {"n_records": len(records), "final_t": last.t, "status": last.status,
                   "final_err_L": math.hypot(*last.eL), "final_err_R": math.hypot(*last.eR)}
        if last.status == "converged":
            summary["converged_iter"] = last.iter
    if "bbox_diag" in extra:
        summary["bbox_diag"] = extra["bbox_diag"]
        if "err3d_mean" in summary:
            summary["err3d_rel"] = summary["err3d_mean"] / extra["bbox_diag"]
    if failure:
        summary["failure"] = failure
        summary["failure_iter"] = records[-1].iter
    summary["trace_sha256"] = hashlib.sha256(trace_text(records).encode()).hexdigest()
    status = records[-1].status
    return ScenarioResult(config, records, summary, status, failure, wall, extra)


# ------------------------------------------------------------ benchmark


def benchmark_control_step(fn, args=(), n: int = 100_000, warmup: int = 1000) -> float:
    """Median wall time of ``fn(*args)`` in nanoseconds over ``n`` calls."""
    for _ in range(warmup):
        fn(*args)
    clock = time.perf_counter_ns
    samples = []
    append = samples.append
    for _ in range(n):
        t0 = clock()
        fn(*args)
        append(clock() - t0)
    return float(statistics.median(samples))
