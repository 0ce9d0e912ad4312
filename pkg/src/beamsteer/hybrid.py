"""3D path following: two image-plane followers fused through the
trifocal kinematic relation into a single mirror angular velocity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoHit, ZeroVelocity
from .following import FollowGains, FollowResult, follow_from_projection
from .geometry import CameraModel, cross, project
from .optics import Surface, intersect
from .paths import PathCurve, build_path, predict_abscissa, project_onto_path
from .trifocal import TrifocalRig, eta_of, h_of


HEADINGS = ("relative", "measured", "command")


@dataclass(frozen=True)
class StereoPathPair:
    """Left/right image curves aligned sample by sample, plus the 3D
    samples they were generated from."""

    gamma_L: PathCurve
    gamma_R: PathCurve
    world: np.ndarray

    def __post_init__(self):
        if self.gamma_L.n != self.gamma_R.n:
            raise ValueError("left and right curves must have equal sample counts")


def back_project(gamma: PathCurve, scene: Surface, cam: CameraModel, time: float = 0.0) -> np.ndarray:
    pts = np.empty((gamma.n, 3))
    for i, (x, y) in enumerate(gamma.xy):
        try:
            pts[i] = intersect(scene, cam.center, cam.ray((x, y, 1.0)), time)
        except NoHit as exc:
            raise NoHit(f"path sample {i} ({x:.2f}, {y:.2f}) misses the surface") from exc
    return pts


def project_curve(world: np.ndarray, cam: CameraModel) -> np.ndarray:
    return np.array([project(cam, P)[:2] for P in world])


def transfer_path(gamma_L: PathCurve, scene: Surface, camL: CameraModel, camR: CameraModel,
                  time: float = 0.0) -> StereoPathPair:
    """Right-image counterpart of ``gamma_L`` via the scene surface."""
    world = back_project(gamma_L, scene, camL, time)
    gamma_R = build_path(project_curve(world, camR), gamma_L.closed)
    return StereoPathPair(gamma_L, gamma_R, world)


def image_advance_velocity(p_dot, omega: float, Te: float = 1.0) -> np.ndarray:
    """Unit direction ``normalize(p_dot + omega Te z x p_dot)``."""
    x, y = float(p_dot[0]), float(p_dot[1])
    if np.hypot(x, y) <= 1e-12:
        raise ZeroVelocity("image velocity vanishes")
    a = omega * Te
    v = np.array([x - a * y, y + a * x])
    return v / np.linalg.norm(v)


def hybrid_omega(rig: TrifocalRig, hL, hR, vL, vR, sing_eps: float = 1e-8) -> np.ndarray:
    """``-eta x (hL x F_0R vR - hR x F_0L vL)`` with the 2D image
    velocities lifted to homogeneous vectors with zero w."""
    eta = eta_of(hL, hR, sing_eps)
    gR = rig.F_0R.M @ np.array([vR[0], vR[1], 0.0])
    gL = rig.F_0L.M @ np.array([vL[0], vL[1], 0.0])
    return -cross(eta, cross(hL, gR) - cross(hR, gL))


@dataclass
class _ImageFollower:
    path: PathCurve
    v_dir: np.ndarray
    s: float = 0.0
    s_dot: float = 0.0
    p_prev: np.ndarray | None = None
    last: FollowResult | None = None
    prev_path: PathCurve | None = None


class HybridController:
    """Runs one follower per image and returns the mirror angular velocity.

    Each follower measures ``d`` from the observed spot.  The heading used
    for the orientation error is chosen by ``heading``:

    * ``"relative"`` (default): the measured spot velocity minus the
      velocity of the reference curve at the foot point, so a deforming
      scene does not show up as a heading error;
    * ``"measured"``: the raw difference of consecutive spot positions;
    * ``"command"``: the direction commanded at the previous step.

    The right-image speed is the left speed scaled by
    the local ratio of corresponding sample spacings, so both followers ask
    for the same 3D motion.
    """

    def __init__(self, rig: TrifocalRig, pair: StereoPathPair, gains: FollowGains, sing_eps: float = 1e-8,
                 heading: str = "relative"):
        if heading not in HEADINGS:
            raise ValueError(f"heading must be one of {HEADINGS}")
        self.rig = rig
        self.heading = heading
        self.gains = gains
        self.sing_eps = sing_eps
        self.set_pair(pair)
        self.followers = [
            _ImageFollower(pair.gamma_L, self._tangent(pair.gamma_L)),
            _ImageFollower(pair.gamma_R, self._tangent(pair.gamma_R)),
        ]

    @staticmethod
    def _tangent(curve: PathCurve) -> np.ndarray:
        return curve.T[0].copy()

    def set_pair(self, pair: StereoPathPair):
        """Swap in new curves (deforming scene), keeping relative progress."""
        old = getattr(self, "pair", None)
        self.pair = pair
        seg_L = np.linalg.norm(np.diff(pair.gamma_L.xy, axis=0), axis=1)
        seg_R = np.linalg.norm(np.diff(pair.gamma_R.xy, axis=0), axis=1)
        self._ratio = seg_R / seg_L
        if old is not None:
            for f, new in zip(self.followers, (pair.gamma_L, pair.gamma_R)):
                k = new.length / f.path.length
                f.s *= k
                f.s_dot *= k
                f.path = new

    def speed_ratio(self) -> float:
        last = self.followers[0].last
        if last is None:
            return float(self._ratio[0])
        seg = min(int(np.searchsorted(self.pair.gamma_L.s, last.state.s, side="right")) - 1, len(self._ratio) - 1)
        return float(self._ratio[max(seg, 0)])

    def _heading(self, f: _ImageFollower, p, proj) -> np.ndarray:
        if self.heading == "command" or f.p_prev is None:
            return f.v_dir
        vel = (p - f.p_prev) / self.gains.Te
        if self.heading == "relative" and f.prev_path is not None and f.prev_path is not f.path:
            # remove the motion of the reference curve itself (deforming scene)
            j, k, r = proj.segment, (proj.segment + 1) % f.path.n, proj.r
            now = f.path.xy[j] * (1 - r) + f.path.xy[k] * r
            before = f.prev_path.xy[j] * (1 - r) + f.prev_path.xy[k] * r
            vel = vel - (now - before) / self.gains.Te
        n = np.linalg.norm(vel)
        return vel / n if n > 1e-9 else f.v_dir

    def step(self, pL, pR, speed: float):
        Te = self.gains.Te
        speeds = (speed, speed * self.speed_ratio())
        dirs = []
        for f, p, v in zip(self.followers, (pL, pR), speeds):
            p = np.asarray(p, dtype=float)[:2]
            s_pred = predict_abscissa(f.s, f.s_dot, Te, f.path)
            proj = project_onto_path(p, f.path, s_pred, self.gains.window)
            res = follow_from_projection(proj, self._heading(f, p, proj), f.path, self.gains, f.s_dot, v)
            if res.stalled:
                new_dir = res.v_dir
            else:
                # always rotate the previous command: with an imperfect
                # calibration the realized direction differs from the command
                # by a fixed map, and rotating the measurement would accumulate it
                new_dir = image_advance_velocity(f.v_dir, res.omega, Te)
            f.v_dir = new_dir
            f.s, f.s_dot, f.p_prev, f.last = res.state.s, res.s_dot, p, res
            f.prev_path = f.path
            dirs.append(v * new_dir)
        hL = h_of(self.rig.F_0L, pL)
        hR = h_of(self.rig.F_0R, pR)
        omega = hybrid_omega(self.rig, hL, hR, dirs[0], dirs[1], self.sing_eps)
        return omega, self.followers[0].last, self.followers[1].last


def hybrid_step(controller: HybridController, observation, speed: float):
    """Functional entry point: one iteration of ``controller``."""
    return controller.step(observation.pL, observation.pR, speed)
