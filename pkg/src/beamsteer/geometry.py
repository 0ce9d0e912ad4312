"""Projective primitives: skew matrices, pinhole cameras, fundamental
matrices, epipoles and two-ray triangulation.

Convention used throughout the package: ``fundamental_from_poses`` builds
the matrix ``F`` of a source view ``src`` and a destination view ``dst``
such that ``p_dst^T F p_src = 0``.  ``F_0L`` therefore takes a left-image
pixel to a plane normal in the mirror frame, and ``F_LR`` satisfies
``p_L^T F_LR p_R = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BehindCamera, Degenerate, RankDeficient, ZeroBaseline


def cross(a, b):
    """3-vector cross product; several times cheaper than ``np.cross``
    on single vectors, which matters inside the control loop."""
    return np.array(
        (
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        )
    )


def skew(v) -> np.ndarray:
    """Cross-product matrix: ``skew(v) @ w == v x w``."""
    x, y, z = (float(c) for c in v)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def homog(x: float, y: float) -> np.ndarray:
    return np.array([float(x), float(y), 1.0])


def normalize_h(p, eps: float = 1e-12) -> np.ndarray:
    """Scale a homogeneous pixel so that w = 1; points at infinity
    (|w| <= eps) are returned unit-norm instead."""
    p = np.asarray(p, dtype=float)
    if abs(p[2]) > eps:
        return p / p[2]
    return p / np.linalg.norm(p)


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


@dataclass(frozen=True)
class Intrinsics:
    fx: float = 900.0
    fy: float = 900.0
    cx: float = 320.0
    cy: float = 240.0

    @property
    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
        )

    @property
    def inverse(self) -> np.ndarray:
        return np.array(
            [
                [1.0 / self.fx, 0.0, -self.cx / self.fx],
                [0.0, 1.0 / self.fy, -self.cy / self.fy],
                [0.0, 0.0, 1.0],
            ]
        )


@dataclass(frozen=True)
class CameraModel:
    """Pinhole camera.

    ``R`` rotates camera axes into the world frame and ``center`` is the
    optical center in world coordinates (millimetres), so a world point
    ``P`` has camera coordinates ``R.T @ (P - center)``.
    """

    K: Intrinsics = field(default_factory=Intrinsics)
    R: np.ndarray = field(default_factory=lambda: np.eye(3))
    center: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        R = np.asarray(self.R, dtype=float)
        if np.abs(R @ R.T - np.eye(3)).max() > 1e-10 or abs(np.linalg.det(R) - 1) > 1e-10:
            raise ValueError("camera rotation must be orthonormal with det +1")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))

    def to_camera(self, P) -> np.ndarray:
        return self.R.T @ (np.asarray(P, dtype=float) - self.center)

    def ray(self, p) -> np.ndarray:
        """Unit world-frame direction of the ray through pixel ``p``."""
        return unit(self.R @ (self.K.inverse @ normalize_h(p)))


@dataclass(frozen=True)
class FundamentalMatrix:
    """Rank-2 matrix, unit Frobenius norm, largest-magnitude entry positive."""

    M: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "M", canonical_scale(self.M))

    def __matmul__(self, other):
        return self.M @ other

    @property
    def T(self) -> np.ndarray:
        return self.M.T


def canonical_scale(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    n = np.linalg.norm(M)
    if n == 0.0:
        raise RankDeficient("zero matrix")
    M = M / n
    if M.flat[np.argmax(np.abs(M))] < 0:
        M = -M
    return M


def fundamental_from_poses(K_src: Intrinsics | None, K_dst: Intrinsics | None, R, t) -> FundamentalMatrix:
    """``F = K_dst^-T [t]x R K_src^-1`` where ``X_dst = R X_src + t``.

    ``K_dst=None`` is the mirror (virtual) view, which has no intrinsics;
    the formula then reduces to ``[t]x R K_src^-1``.
    """
    t = np.asarray(t, dtype=float)
    if np.linalg.norm(t) < 1e-12:
        raise ZeroBaseline("source and destination centers coincide")
    R = np.asarray(R, dtype=float)
    Ks_inv = np.eye(3) if K_src is None else K_src.inverse
    Kd_inv = np.eye(3) if K_dst is None else K_dst.inverse
    return FundamentalMatrix(Kd_inv.T @ skew(t) @ R @ Ks_inv)


def relative_pose(src: CameraModel | None, dst: CameraModel | None, pivot=None):
    """Pose ``(R, t)`` of ``src`` in the frame of ``dst``.

    ``None`` stands for the mirror view: world axes, centered at ``pivot``.
    """
    pivot = np.zeros(3) if pivot is None else np.asarray(pivot, dtype=float)
    R_s, c_s = (np.eye(3), pivot) if src is None else (src.R, src.center)
    R_d, c_d = (np.eye(3), pivot) if dst is None else (dst.R, dst.center)
    return R_d.T @ R_s, R_d.T @ (c_s - c_d)


def fundamental_between(src: CameraModel | None, dst: CameraModel | None, pivot=None) -> FundamentalMatrix:
    R, t = relative_pose(src, dst, pivot)
    return fundamental_from_poses(
        None if src is None else src.K, None if dst is None else dst.K, R, t
    )


def epipole_of(F: FundamentalMatrix | np.ndarray) -> np.ndarray:
    """Right null vector of ``F`` (``F e = 0``), normalized to w = 1 when
    finite."""
    M = F.M if isinstance(F, FundamentalMatrix) else np.asarray(F, dtype=float)
    _, s, Vt = np.linalg.svd(M)
    if s[1] <= 1e-9 * s[0]:
        raise RankDeficient("null space has dimension > 1")
    return normalize_h(Vt[2])


def rank(M, rtol: float = 1e-9) -> int:
    s = np.linalg.svd(np.asarray(M, dtype=float), compute_uv=False)
    return int(np.sum(s > rtol * s[0])) if s[0] > 0 else 0


def epipolar_residual(F, p_dst, p_src) -> float:
    """Bilinear form ``p_dst^T F p_src`` (zero for corresponding points)."""
    M = F.M if isinstance(F, FundamentalMatrix) else F
    return float(np.asarray(p_dst, dtype=float) @ M @ np.asarray(p_src, dtype=float))


def project(cam: CameraModel, P) -> np.ndarray:
    Xc = cam.to_camera(P)
    if Xc[2] <= 0.0:
        raise BehindCamera(f"point depth {Xc[2]:.6g} <= 0")
    K = cam.K
    return np.array([K.fx * Xc[0] / Xc[2] + K.cx, K.fy * Xc[1] / Xc[2] + K.cy, 1.0])


def closest_points(o1, d1, o2, d2):
    """Closest points of two lines ``o + s d``. Raises Degenerate when
    the directions are parallel."""
    d1 = unit(d1)
    d2 = unit(d2)
    w = np.asarray(o1, dtype=float) - np.asarray(o2, dtype=float)
    b = d1 @ d2
    denom = 1.0 - b * b
    if denom < 1e-10:
        raise Degenerate("rays are parallel")
    d = d1 @ w
    e = d2 @ w
    s1 = (b * e - d) / denom
    s2 = (e - b * d) / denom
    return o1 + s1 * d1, o2 + s2 * d2


def triangulate_point(pL, pR, camL: CameraModel, camR: CameraModel) -> np.ndarray:
    """Midpoint of the common perpendicular of the two back-projected rays."""
    a, b = closest_points(camL.center, camL.ray(pL), camR.center, camR.ray(pR))
    return 0.5 * (a + b)


def triangulate_direction(pL, pR, camL: CameraModel, camR: CameraModel, mirror_pivot) -> np.ndarray:
    """Unit beam direction from ``mirror_pivot`` toward the triangulated spot."""
    P = triangulate_point(pL, pR, camL, camR)
    return unit(P - np.asarray(mirror_pivot, dtype=float))
