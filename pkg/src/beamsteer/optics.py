"""World model: surfaces, ray casting, mirror kinematics and stereo
observation of the laser spot."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.optimize import brentq

from .errors import JointLimit, NoHit
from .geometry import CameraModel, cross, project, unit


class Surface:
    def intersect(self, origin, direction, time: float = 0.0) -> np.ndarray:
        raise NotImplementedError

    def residual(self, P, time: float = 0.0) -> float:
        """Signed implicit-function value; zero on the surface."""
        raise NotImplementedError


@dataclass(frozen=True)
class Plane(Surface):
    point: tuple = (0.0, 0.0, 0.0)
    normal: tuple = (0.0, 0.0, 1.0)

    def intersect(self, origin, direction, time=0.0):
        n = unit(self.normal)
        o = np.asarray(origin, dtype=float)
        denom = n @ direction
        if abs(denom) < 1e-14:
            raise NoHit("ray parallel to plane")
        lam = n @ (np.asarray(self.point, dtype=float) - o) / denom
        if lam <= 0.0:
            raise NoHit("plane is behind the ray origin")
        return o + lam * np.asarray(direction, dtype=float)

    def residual(self, P, time=0.0):
        return float(unit(self.normal) @ (np.asarray(P, dtype=float) - np.asarray(self.point, dtype=float)))


@dataclass(frozen=True)
class Sphere(Surface):
    center: tuple = (0.0, 0.0, 250.0)
    radius: float = 20.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("sphere radius must be positive")

    def intersect(self, origin, direction, time=0.0):
        o = np.asarray(origin, dtype=float)
        d = np.asarray(direction, dtype=float)
        oc = o - np.asarray(self.center, dtype=float)
        b = oc @ d
        c = oc @ oc - self.radius * self.radius
        disc = b * b - c
        if disc < 0.0:
            raise NoHit("ray misses sphere")
        root = math.sqrt(disc)
        for lam in (-b - root, -b + root):
            if lam > 0.0:
                return o + lam * d
        raise NoHit("sphere is behind the ray origin")

    def residual(self, P, time=0.0):
        return float(np.linalg.norm(np.asarray(P, dtype=float) - self.center) - self.radius)


class Heightfield(Surface):
    """Surface ``z = h(x, y)`` given on a rectangular grid (bilinear)."""

    def __init__(self, xs, ys, z):
        self.xs = np.asarray(xs, dtype=float)
        self.ys = np.asarray(ys, dtype=float)
        self.z = np.asarray(z, dtype=float)
        if self.z.shape != (len(self.xs), len(self.ys)):
            raise ValueError("grid shape must be (len(xs), len(ys))")
        if not np.all(np.isfinite(self.z)):
            raise ValueError("heightfield contains non-finite values")
        self._interp = RegularGridInterpolator((self.xs, self.ys), self.z, bounds_error=False, fill_value=None)

    @classmethod
    def from_csv(cls, path) -> "Heightfield":
        """Rows ``x,y,z`` covering a full rectangular grid, any order."""
        rows = []
        with open(Path(path), newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                try:
                    rows.append([float(v) for v in row[:3]])
                except ValueError:
                    continue  # header line
        data = np.array(rows)
        xs = np.unique(data[:, 0])
        ys = np.unique(data[:, 1])
        if len(xs) * len(ys) != len(data):
            raise ValueError(f"{path}: samples do not form a rectangular grid")
        z = np.full((len(xs), len(ys)), np.nan)
        z[np.searchsorted(xs, data[:, 0]), np.searchsorted(ys, data[:, 1])] = data[:, 2]
        return cls(xs, ys, z)

    def height(self, x, y) -> float:
        return float(self._interp((x, y)))

    def _inside(self, x, y):
        return self.xs[0] <= x <= self.xs[-1] and self.ys[0] <= y <= self.ys[-1]

    def intersect(self, origin, direction, time=0.0):
        o = np.asarray(origin, dtype=float)
        d = np.asarray(direction, dtype=float)

        def f(lam):
            P = o + lam * d
            return P[2] - self.height(P[0], P[1])

        # march at a fraction of the grid spacing, then bracket-refine
        step = 0.25 * min(np.diff(self.xs).min(), np.diff(self.ys).min())
        span = np.ptp(self.z) + np.ptp(self.xs) + np.ptp(self.ys) + abs(o[2]) + abs(self.z).max()
        lam_prev, f_prev = 0.0, f(0.0)
        lam = step
        while lam < 4 * span:
            P = o + lam * d
            if self._inside(P[0], P[1]):
                fl = f(lam)
                if f_prev == 0.0:
                    return o + lam_prev * d
                if np.sign(fl) != np.sign(f_prev):
                    root = brentq(f, lam_prev, lam, xtol=1e-13, rtol=1e-15)
                    return o + root * d
                lam_prev, f_prev = lam, fl
            else:
                lam_prev, f_prev = lam, f(lam)
            lam += step
        raise NoHit("ray misses heightfield")

    def residual(self, P, time=0.0):
        return float(P[2] - self.height(P[0], P[1]))


@dataclass(frozen=True)
class TimeVarying(Surface):
    """Base surface scaled about ``center`` by
    ``amplitude ** (sin(2 pi t / period) / 2)``.

    The scale stays within ``[1/sqrt(amplitude), sqrt(amplitude)]`` so the
    largest size is ``amplitude`` times the smallest.
    """

    base: Surface
    amplitude: float = 8.0
    period: float = 4.0
    center: tuple = (0.0, 0.0, 250.0)

    def __post_init__(self):
        if self.amplitude < 1.0:
            raise ValueError("amplitude must be >= 1")
        if self.period <= 0.0:
            raise ValueError("period must be positive")

    def scale(self, time: float) -> float:
        return self.amplitude ** (0.5 * math.sin(2.0 * math.pi * time / self.period))

    def _to_base(self, P, s):
        c = np.asarray(self.center, dtype=float)
        return c + (np.asarray(P, dtype=float) - c) / s

    def intersect(self, origin, direction, time=0.0):
        s = self.scale(time)
        c = np.asarray(self.center, dtype=float)
        hit = self.base.intersect(self._to_base(origin, s), direction, time)
        return c + s * (hit - c)

    def residual(self, P, time=0.0):
        s = self.scale(time)
        return s * self.base.residual(self._to_base(P, s), time)


def intersect(surface: Surface, origin, direction, time: float = 0.0) -> np.ndarray:
    return surface.intersect(np.asarray(origin, dtype=float), np.asarray(direction, dtype=float), time)


@dataclass(frozen=True)
class MirrorState:
    pivot: np.ndarray
    z0: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "pivot", np.asarray(self.pivot, dtype=float))
        object.__setattr__(self, "z0", unit(self.z0))


def mirror_step(state: MirrorState, omega, dt: float) -> MirrorState:
    """One explicit Euler step of ``dz0/dt = omega x z0``, renormalized."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    z = state.z0
    return MirrorState(state.pivot, z + dt * cross(omega, z))


@dataclass(frozen=True)
class MirrorModel:
    D_inv: np.ndarray = field(default_factory=lambda: np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]))
    joint_limit: float = 0.6

    @classmethod
    def orthogonal_to(cls, z_nominal, joint_limit: float = 0.6) -> "MirrorModel":
        """Two orthonormal rows spanning the plane orthogonal to ``z_nominal``."""
        z = unit(z_nominal)
        helper = np.array([1.0, 0.0, 0.0]) if abs(z[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        a = unit(helper - (helper @ z) * z)
        b = cross(z, a)
        return cls(np.vstack([a, b]), joint_limit)


def joint_rates(model: MirrorModel, omega) -> np.ndarray:
    return model.D_inv @ np.asarray(omega, dtype=float)


def integrate_joints(model: MirrorModel, q, omega, dt: float) -> np.ndarray:
    q_new = np.asarray(q, dtype=float) + dt * joint_rates(model, omega)
    if np.any(np.abs(q_new) > model.joint_limit):
        raise JointLimit(f"joint angles {q_new} exceed +/-{model.joint_limit} rad")
    return q_new


@dataclass(frozen=True)
class SpotObservation:
    world: np.ndarray
    pL: np.ndarray
    pR: np.ndarray
    noise_sigma: float = 0.0


def observe_spot(scene: Surface, mirror: MirrorState, camL: CameraModel, camR: CameraModel,
                 noise_sigma: float = 0.0, rng: np.random.Generator | None = None,
                 time: float = 0.0) -> SpotObservation:
    world = intersect(scene, mirror.pivot, mirror.z0, time)
    pL = project(camL, world)
    pR = project(camR, world)
    if noise_sigma > 0.0:
        if rng is None:
            raise ValueError("noise requires an rng")
        n = rng.normal(0.0, noise_sigma, size=4)
        pL = pL + np.array([n[0], n[1], 0.0])
        pR = pR + np.array([n[2], n[3], 0.0])
    return SpotObservation(world, pL, pR, noise_sigma)
