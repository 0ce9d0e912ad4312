"""Vectorized trifocal constraint and point-to-point laser visual servoing.

The mirror is treated as a one-pixel camera whose pixel is the beam
direction ``z0``.  With ``h_i = F_0i p_i`` the normal of the epipolar plane
through the spot seen by camera ``i``, a consistent triplet satisfies
``z0 x (h_R x h_L) = 0``.  Differentiating that constraint gives the mirror
angular velocity that realizes prescribed image velocities without any
depth estimate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BaselineSingularity, ZeroVector
from .geometry import (
    CameraModel,
    FundamentalMatrix,
    cross,
    epipole_of,
    fundamental_between,
    unit,
)


@dataclass(frozen=True)
class TrifocalRig:
    """Fundamental matrices between the mirror view (0) and both cameras.

    ``e_L``/``e_R`` are the pixel epipoles (``F_0i e_i = 0``), i.e. the
    images of the mirror pivot.  ``c_L``/``c_R`` are the matching epipoles
    in the mirror view (left null vectors, ``c_i^T F_0i = 0``): unit
    directions from the pivot toward each camera center, up to sign.
    """

    F_0L: FundamentalMatrix
    F_0R: FundamentalMatrix
    F_LR: FundamentalMatrix
    e_L: np.ndarray
    e_R: np.ndarray
    c_L: np.ndarray
    c_R: np.ndarray

    @classmethod
    def from_cameras(cls, camL: CameraModel, camR: CameraModel, pivot=None) -> "TrifocalRig":
        pivot = np.zeros(3) if pivot is None else np.asarray(pivot, dtype=float)
        F_0L = fundamental_between(camL, None, pivot)
        F_0R = fundamental_between(camR, None, pivot)
        F_LR = fundamental_between(camR, camL)
        return cls(
            F_0L,
            F_0R,
            F_LR,
            epipole_of(F_0L),
            epipole_of(F_0R),
            unit(camL.center - pivot),
            unit(camR.center - pivot),
        )

    @property
    def baseline_normal(self) -> np.ndarray:
        """Normal of the plane through the pivot and both camera centers."""
        return cross(self.c_L, self.c_R)


@dataclass(frozen=True)
class ServoGains:
    lam: float = 0.5
    Te: float = 0.05
    sing_eps: float = 1e-8

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if not self.Te > 0:
            raise ValueError("Te must be positive")
        if not 0 < self.sing_eps < 1e-3:
            raise ValueError("sing_eps must lie in (0, 1e-3)")


def h_of(F: FundamentalMatrix, p, epipole=None, z0=None) -> np.ndarray:
    """Epipolar-plane normal ``F p``.

    When both ``epipole`` (mirror-view epipole of ``F``) and ``z0`` are
    given, the sign is flipped if needed so that ``h . (epipole x z0) > 0``.
    """
    p = np.asarray(p, dtype=float)
    h = F.M @ p
    # F has unit norm, so |F p| is compared with the size of p
    if np.linalg.norm(h) <= 1e-12 * np.linalg.norm(p):
        raise ZeroVector("pixel is the epipole of F")
    if epipole is not None and z0 is not None:
        if h @ cross(epipole, z0) < 0.0:
            h = -h
    return h


def _check_singular(n, hL, hR, sing_eps):
    nn = np.linalg.norm(n)
    if nn < sing_eps * np.linalg.norm(hL) * np.linalg.norm(hR):
        raise BaselineSingularity("spot lies on the plane through both camera centers and the pivot")
    return nn


def beam_from_normals(hL, hR, reference=None, sing_eps: float = 1e-8) -> np.ndarray:
    """Beam direction recovered as the normalized ``h_R x h_L``.

    The sign ambiguity is resolved by a positive dot product with
    ``reference`` (previous beam estimate); the mirror's nominal axis
    +z is used when no reference is given.
    """
    n = cross(hR, hL)
    nn = _check_singular(n, hL, hR, sing_eps)
    z = n / nn
    ref = np.array([0.0, 0.0, 1.0]) if reference is None else reference
    return z if z @ ref >= 0.0 else -z


def trifocal_residual(z0, hL, hR) -> np.ndarray:
    return cross(z0, cross(hR, hL))


def desired_pixel_velocity(p, p_star, p_star_dot, lam: float) -> np.ndarray:
    """First-order image behaviour ``-lam (p - p*) + dp*/dt``; w part is zero."""
    p = np.asarray(p, dtype=float)
    p_star = np.asarray(p_star, dtype=float)
    out = np.zeros(3)
    out[:2] = -lam * (p[:2] - p_star[:2]) + np.asarray(p_star_dot, dtype=float)[:2]
    return out


def eta_of(hL, hR, sing_eps: float = 1e-8) -> np.ndarray:
    n = cross(hR, hL)
    nn = _check_singular(n, hL, hR, sing_eps)
    return n / (nn * nn)


def omega_from_image_velocities(rig: TrifocalRig, hL, hR, pL_dot, pR_dot, sing_eps: float = 1e-8) -> np.ndarray:
    """Mirror angular velocity producing the image velocities
    ``pL_dot``, ``pR_dot`` (homogeneous, zero w):
    ``-eta x (hL x F_0R pR_dot - hR x F_0L pL_dot)``."""
    eta = eta_of(hL, hR, sing_eps)
    gR = rig.F_0R.M @ pR_dot
    gL = rig.F_0L.M @ pL_dot
    return -cross(eta, cross(hL, gR) - cross(hR, gL))


def control_omega(rig: TrifocalRig, hL, hR, hL_star, hR_star, hL_star_dot=None, hR_star_dot=None,
                  lam: float = 0.5, sing_eps: float = 1e-8) -> np.ndarray:
    """Servo law with feed-forward.

    ``-lam eta x (hL x hR* - hR x hL*) - eta x (hL x dhR* - hR x dhL*)``
    with ``eta = (hR x hL) / |hR x hL|^2``.  The output is orthogonal to
    the beam since ``eta`` is parallel to it.
    """
    eta = eta_of(hL, hR, sing_eps)
    w = -lam * cross(eta, cross(hL, hR_star) - cross(hR, hL_star))
    if hL_star_dot is not None and hR_star_dot is not None:
        w = w - cross(eta, cross(hL, hR_star_dot) - cross(hR, hL_star_dot))
    return w


@dataclass
class TrifocalServo:
    """Stateful wrapper used by the simulation loop.

    Keeps the previous beam estimate (for the sign of ``h_R x h_L``) and
    the previous desired pixels (for the finite-difference feed-forward).
    A flip of ``h_R x h_L`` relative to the previous estimate means the
    spot crossed the baseline plane since the last sample.
    """

    rig: TrifocalRig
    gains: ServoGains
    z_est: np.ndarray | None = None
    orient: float = 1.0
    _prev_target: tuple | None = None

    def seed(self, z0, hL, hR):
        """Fix the orientation of ``h_R x h_L`` against a known beam."""
        n = cross(hR, hL)
        sign = 1.0 if n @ z0 >= 0.0 else -1.0
        self.z_est = sign * n / np.linalg.norm(n)
        self.orient = sign

    def retarget(self):
        """Forget the previous desired pixels: the next target is a new set
        point, not a sample of a moving one, so it gets no feed-forward."""
        self._prev_target = None

    def monitor(self, pL, pR):
        """Epipolar normals of the current spot, after the baseline check."""
        hL = h_of(self.rig.F_0L, pL)
        hR = h_of(self.rig.F_0R, pR)
        self._track(hL, hR)
        return hL, hR

    def step(self, pL, pR, pL_star, pR_star, pL_star_dot=None, pR_star_dot=None) -> np.ndarray:
        rig = self.rig
        hL, hR = self.monitor(pL, pR)
        hLs = rig.F_0L.M @ np.asarray(pL_star, dtype=float)
        hRs = rig.F_0R.M @ np.asarray(pR_star, dtype=float)
        if pL_star_dot is None and self._prev_target is not None:
            dL = (np.asarray(pL_star, dtype=float) - self._prev_target[0]) / self.gains.Te
            dR = (np.asarray(pR_star, dtype=float) - self._prev_target[1]) / self.gains.Te
        elif pL_star_dot is not None:
            dL = np.array([pL_star_dot[0], pL_star_dot[1], 0.0])
            dR = np.array([pR_star_dot[0], pR_star_dot[1], 0.0])
        else:
            dL = dR = np.zeros(3)
        self._prev_target = (np.asarray(pL_star, dtype=float), np.asarray(pR_star, dtype=float))
        return control_omega(rig, hL, hR, hLs, hRs, rig.F_0L.M @ dL, rig.F_0R.M @ dR,
                             self.gains.lam, self.gains.sing_eps)

    def _track(self, hL, hR):
        # orientation of hR x hL relative to the beam is fixed by seed();
        # a sign change against the previous estimate is a crossing
        n = cross(hR, hL)
        _check_singular(n, hL, hR, self.gains.sing_eps)
        z = self.orient * n / np.linalg.norm(n)
        if self.z_est is not None and z @ self.z_est < 0.0:
            raise BaselineSingularity("epipolar normals flipped: spot crossed the baseline plane")
        self.z_est = z


def servo_step(rig: TrifocalRig, observation, target_pixels, gains: ServoGains,
               target_velocity=None) -> np.ndarray:
    """Stateless servo iteration: observation and ``(pL*, pR*)`` to mirror
    angular velocity."""
    pL_star, pR_star = target_pixels
    hL = h_of(rig.F_0L, observation.pL)
    hR = h_of(rig.F_0R, observation.pR)
    hLs = rig.F_0L.M @ np.asarray(pL_star, dtype=float)
    hRs = rig.F_0R.M @ np.asarray(pR_star, dtype=float)
    if target_velocity is None:
        return control_omega(rig, hL, hR, hLs, hRs, lam=gains.lam, sing_eps=gains.sing_eps)
    vL, vR = target_velocity
    dL = rig.F_0L.M @ np.array([vL[0], vL[1], 0.0])
    dR = rig.F_0R.M @ np.array([vR[0], vR[1], 0.0])
    return control_omega(rig, hL, hR, hLs, hRs, dL, dR, gains.lam, gains.sing_eps)
