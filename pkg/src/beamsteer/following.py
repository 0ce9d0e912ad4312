"""Frenet-frame kinematics, chained-form transformation and the image-plane
path-following controller of the laser spot.

Only the direction of the spot velocity is controlled; its magnitude
``v`` is an operator input and is passed through untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import OutOfDomain, SingularTube
from .paths import PathCurve, PathProjection, orientation_error, predict_abscissa, project_onto_path

TUBE_EPS = 1e-6


@dataclass(frozen=True)
class FrenetState:
    s: float
    d: float
    theta_e: float


@dataclass(frozen=True)
class ChainedState:
    z1: float
    z2: float
    z3: float


@dataclass(frozen=True)
class FollowGains:
    gamma1: float = 1.0
    gamma2: float = 1.0
    v: float = 100.0
    Te: float = 1.0 / 500.0
    window: int = 32
    d_dot_mode: str = "model"  # or "difference"

    def __post_init__(self):
        if not (self.gamma1 > 0 and self.gamma2 > 0):
            raise ValueError("gamma1 and gamma2 must be positive")
        if not self.Te > 0:
            raise ValueError("Te must be positive")
        if self.d_dot_mode not in ("model", "difference"):
            raise ValueError("d_dot_mode must be 'model' or 'difference'")


def _tube(d, C):
    g = 1.0 - d * C
    if abs(g) <= TUBE_EPS:
        raise SingularTube(f"1 - d C = {g:.3g}")
    return g


def frenet_dynamics(state: FrenetState, v: float, omega: float, C: float, dCds: float = 0.0):
    """Rates ``(ds/dt, dd/dt, dtheta_e/dt)`` of the spot in the Frenet frame."""
    g = _tube(state.d, C)
    s_dot = v * math.cos(state.theta_e) / g
    return s_dot, v * math.sin(state.theta_e), omega - s_dot * C


def to_chained(state: FrenetState, C: float) -> ChainedState:
    if abs(state.theta_e) >= math.pi / 2:
        raise OutOfDomain(f"|theta_e| = {abs(state.theta_e):.4f} >= pi/2")
    return ChainedState(state.s, state.d, (1.0 - state.d * C) * math.tan(state.theta_e))


def u1_of(v: float, d: float, C: float, theta_e: float) -> float:
    return v * math.cos(theta_e) / _tube(d, C)


def control_u2(u1: float, z2: float, z3: float, gains: FollowGains) -> float:
    return -u1 * gains.gamma1 * z2 - abs(u1) * gains.gamma2 * z3


def omega_from_u2(u2: float, state: FrenetState, v: float, C: float, dCds: float,
                  s_dot: float, d_dot: float) -> float:
    """Invert the chained-form input ``u2`` back to the rotation rate of
    the spot velocity direction."""
    g = _tube(state.d, C)
    if abs(state.theta_e) >= math.pi / 2:
        raise OutOfDomain(f"|theta_e| = {abs(state.theta_e):.4f} >= pi/2")
    tan_t = math.tan(state.theta_e)
    num = u2 + (d_dot * C + state.d * dCds * s_dot) * tan_t
    return num / (g * (1.0 + tan_t * tan_t)) + s_dot * C


def chained_rates(state: FrenetState, v: float, omega: float, C: float, dCds: float):
    """``(dz1, dz2, dz3)`` obtained by differentiating the chained
    coordinates along the Frenet dynamics."""
    s_dot, d_dot, th_dot = frenet_dynamics(state, v, omega, C, dCds)
    g = 1.0 - state.d * C
    tan_t = math.tan(state.theta_e)
    u2 = (-d_dot * C - state.d * dCds * s_dot) * tan_t + g * (1.0 + tan_t * tan_t) * th_dot
    return s_dot, d_dot, u2


def advance_direction(v_dir, omega: float, Te: float) -> np.ndarray:
    """``normalize(v + omega Te z x v)``: rotates by ``atan(omega Te)``."""
    a = omega * Te
    x, y = v_dir[0], v_dir[1]
    nx, ny = x - a * y, y + a * x
    n = math.hypot(nx, ny)
    return np.array([nx / n, ny / n])


def rotate2(v, angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])


def arc_displacement(v_dir, v_next, distance: float) -> np.ndarray:
    """Displacement after travelling ``distance`` along a circular arc whose
    heading turns uniformly from ``v_dir`` to ``v_next`` (a straight chord
    when they coincide)."""
    phi = math.atan2(v_dir[0] * v_next[1] - v_dir[1] * v_next[0], v_dir[0] * v_next[0] + v_dir[1] * v_next[1])
    half = 0.5 * phi
    chord = distance * (math.sin(half) / half if half != 0.0 else 1.0)
    return chord * rotate2(v_dir, half)


@dataclass
class FollowResult:
    v_dir: np.ndarray
    velocity: np.ndarray
    state: FrenetState
    omega: float
    u1: float
    u2: float
    s_dot: float
    C: float
    foot: np.ndarray
    stalled: bool = False
    completed: bool = False
    extra: dict = field(default_factory=dict)


def follow_step(spot_px, v_dir, path: PathCurve, gains: FollowGains, s_prev: float, s_dot_prev: float,
                speed: float | None = None, d_prev: float | None = None) -> FollowResult:
    """One controller iteration: predict abscissa, project the spot, then
    rotate the velocity direction by the chained-form feedback."""
    s_pred = predict_abscissa(s_prev, s_dot_prev, gains.Te, path)
    proj = project_onto_path(spot_px, path, s_pred, gains.window)
    return follow_from_projection(proj, v_dir, path, gains, s_dot_prev, speed, d_prev)


def follow_from_projection(proj: PathProjection, v_dir, path: PathCurve, gains: FollowGains,
                           s_dot_prev: float = 0.0, speed: float | None = None,
                           d_prev: float | None = None) -> FollowResult:
    """Control part of :func:`follow_step` once the foot point is known."""
    v = gains.v if speed is None else speed
    Te = gains.Te
    theta_e = orientation_error(v_dir, proj.smooth_frame)
    # past the end of an open path the overshoot along the tangent is
    # progress, not lateral error
    if proj.beyond_end:
        d = proj.lateral
    else:
        d = proj.d if proj.d_arc is None else proj.d_arc
    C, dC = proj.C_hp, proj.dC_hp
    state = FrenetState(proj.s_hp, d, theta_e)
    completed = (not path.closed) and proj.s_hp >= path.length - 0.5 * path.spacing

    u1 = 0.0
    stalled = abs(theta_e) >= math.pi / 2
    if not stalled:
        u1 = u1_of(v, d, C, theta_e)
        stalled = abs(u1) < 1e-9 * abs(v)
    if stalled:
        # chained form undefined: turn toward the tangent at the saturated rate
        turn = -math.copysign(min(math.pi / 2, abs(theta_e)), theta_e)
        new_dir = rotate2(v_dir, turn)
        return FollowResult(new_dir, v * new_dir, state, turn / Te, 0.0, 0.0, s_dot_prev, C,
                            proj.h_p, stalled=True, completed=completed)

    z = to_chained(state, C)
    u2 = control_u2(u1, z.z2, z.z3, gains)
    if gains.d_dot_mode == "difference" and d_prev is not None:
        d_dot = (d - d_prev) / Te
    else:
        d_dot = v * math.sin(theta_e)
    omega = omega_from_u2(u2, state, v, C, dC, u1, d_dot)
    new_dir = advance_direction(v_dir, omega, Te)
    return FollowResult(new_dir, v * new_dir, state, omega, u1, u2, u1, C, proj.h_p,
                        completed=completed)
