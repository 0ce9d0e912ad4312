"""Sampled image curves: arc length, three-point curvature, windowed
projection of the spot and abscissa prediction.

Orientation conventions: the Frenet frame has ``x_s`` along the local
segment and ``y_s`` its +90 degree rotation; curvature is positive for
left turns.  The lateral error ``d`` is positive on the ``y_s`` side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DuplicatePoints, EmptyWindow, TooFewPoints

MIN_SPACING = 1e-9


def _cross2(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def three_point_curvature(a, b, c) -> np.ndarray:
    """Signed inverse circumradius of the triangles ``(a, b, c)``
    (row-wise). Collinear triples, up to rounding of the cross product,
    give exactly 0."""
    ab = b - a
    bc = c - b
    ac = c - a
    cr = _cross2(ab, bc)
    n_ab = np.linalg.norm(ab, axis=-1)
    n_bc = np.linalg.norm(bc, axis=-1)
    num = 2.0 * cr
    den = n_ab * n_bc * np.linalg.norm(ac, axis=-1)
    out = np.zeros(np.shape(num))
    ok = np.abs(cr) > 1e-12 * n_ab * n_bc
    out[ok] = num[ok] / den[ok]
    return out


@dataclass(frozen=True)
class PathCurve:
    """Sampled curve. ``xy`` is (n, 2); ``s``, ``C``, ``dC`` and the unit
    tangent ``T`` are per sample.  A closed curve has an extra segment from
    the last sample back to the first and ``length`` includes it."""

    xy: np.ndarray
    s: np.ndarray
    C: np.ndarray
    dC: np.ndarray
    closed: bool = False
    T: np.ndarray | None = None

    @property
    def n(self) -> int:
        return len(self.xy)

    @property
    def length(self) -> float:
        if self.closed:
            return float(self.s[-1] + np.linalg.norm(self.xy[0] - self.xy[-1]))
        return float(self.s[-1])

    @property
    def n_segments(self) -> int:
        return self.n if self.closed else self.n - 1

    @property
    def spacing(self) -> float:
        return self.length / self.n_segments

    def segment(self, j: int):
        """End points and start abscissa of segment ``j``."""
        k = (j + 1) % self.n
        return self.xy[j], self.xy[k], self.s[j], k


def build_path(points, closed: bool = False) -> PathCurve:
    xy = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(xy) < 3:
        raise TooFewPoints(f"need at least 3 points, got {len(xy)}")
    seg = np.linalg.norm(np.diff(xy, axis=0), axis=1)
    if np.any(seg < MIN_SPACING):
        i = int(np.argmin(seg))
        raise DuplicatePoints(f"samples {i} and {i + 1} coincide")
    if closed and np.linalg.norm(xy[0] - xy[-1]) < MIN_SPACING:
        xy = xy[:-1]  # explicit closing duplicate
        if len(xy) < 3:
            raise TooFewPoints("closed path needs 3 distinct points")
        seg = seg[:-1]
    s = np.concatenate([[0.0], np.cumsum(seg)])

    C = np.zeros(len(xy))
    if closed:
        C = three_point_curvature(np.roll(xy, 1, axis=0), xy, np.roll(xy, -1, axis=0))
    else:
        C[1:-1] = three_point_curvature(xy[:-2], xy[1:-1], xy[2:])
        C[0] = C[1]
        C[-1] = C[-2]

    dC = np.zeros(len(xy))
    if closed:
        L = s[-1] + np.linalg.norm(xy[0] - xy[-1])
        s_next = np.append(s[1:], L)
        s_prev = np.insert(s[:-1], 0, s[-1] - L)
        dC = (np.roll(C, -1) - np.roll(C, 1)) / (s_next - s_prev)
    else:
        dC[1:-1] = (C[2:] - C[:-2]) / (s[2:] - s[:-2])
        dC[0] = (C[1] - C[0]) / (s[1] - s[0])
        dC[-1] = (C[-1] - C[-2]) / (s[-1] - s[-2])
    return PathCurve(xy, s, C, dC, closed, _vertex_tangents(xy, closed))


def _vertex_tangents(xy, closed):
    """Central-difference unit tangents (one-sided at open ends)."""
    if closed:
        t = np.roll(xy, -1, axis=0) - np.roll(xy, 1, axis=0)
    else:
        t = np.empty_like(xy)
        t[1:-1] = xy[2:] - xy[:-2]
        t[0] = xy[1] - xy[0]
        t[-1] = xy[-1] - xy[-2]
    return t / np.linalg.norm(t, axis=1)[:, None]


def load_path_csv(path) -> PathCurve:
    """One ``x,y`` pair per line; a ``# closed`` line marks a closed curve."""
    closed = False
    pts = []
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line[1:].strip().lower() == "closed":
                closed = True
            continue
        x, y = line.split(",")[:2]
        pts.append((float(x), float(y)))
    return build_path(pts, closed)


def save_path_csv(curve: PathCurve, path):
    lines = ["# closed"] if curve.closed else []
    lines += [f"{float(x)!r},{float(y)!r}" for x, y in curve.xy]
    Path(path).write_text("\n".join(lines) + "\n")


@dataclass(frozen=True)
class PathProjection:
    h_p: np.ndarray
    d: float
    s_hp: float
    C_hp: float
    dC_hp: float
    x_s: np.ndarray
    y_s: np.ndarray
    r: float
    segment: int
    lateral: float = 0.0
    beyond_end: bool = False
    tangent: np.ndarray | None = None
    d_arc: float | None = None

    @property
    def frame(self):
        return self.x_s, self.y_s

    @property
    def smooth_frame(self):
        """Frame of the tangent interpolated between the end samples of the
        segment; unlike the segment direction it does not jump at samples."""
        t = self.x_s if self.tangent is None else self.tangent
        return t, np.array([-t[1], t[0]])


def predict_abscissa(s_k: float, s_dot: float, Te: float, curve: PathCurve | None = None) -> float:
    s_pred = s_dot * Te + s_k
    if curve is None:
        return s_pred
    if curve.closed:
        return s_pred % curve.length
    return min(max(s_pred, 0.0), curve.length)


def _window_segments(curve: PathCurve, s_pred: float, window: int) -> np.ndarray:
    if not np.isfinite(s_pred) or window < 1:
        raise EmptyWindow(f"no samples around s={s_pred} (window {window})")
    j0 = int(np.searchsorted(curve.s, s_pred, side="right")) - 1
    if curve.closed:
        return np.arange(j0 - window, j0 + window + 1) % curve.n_segments
    lo = max(j0 - window, 0)
    hi = min(j0 + window, curve.n_segments - 1)
    if hi < lo:
        raise EmptyWindow(f"no samples around s={s_pred} (window {window})")
    return np.arange(lo, hi + 1)


def project_onto_path(p, curve: PathCurve, s_pred: float = 0.0, window: int | None = 32) -> PathProjection:
    """Orthogonal projection of ``p`` onto the closest segment among those
    within ``window`` samples of ``s_pred`` (``None`` searches the whole
    curve). Ties go to the smaller abscissa.

    ``d`` is the signed distance to the foot point, positive on the ``y_s``
    side.  ``lateral`` is the component of ``p - h_p`` along ``y_s`` and
    ``beyond_end`` flags a spot past either end of an open path, where the
    two differ by the overshoot along the tangent.  ``d_arc`` adds the sag
    of the arc of curvature ``C_hp`` through the segment ends, so it
    measures the distance to the smooth curve the samples come from to
    second order instead of to the chord.
    """
    p = np.asarray(p, dtype=float)[:2]
    if window is None:
        segs = np.arange(curve.n_segments)
    else:
        segs = _window_segments(curve, s_pred, window)
        if curve.closed:
            # scan in order of increasing abscissa so ties pick the smallest s
            segs = np.unique(segs)
    a = curve.xy[segs]
    b = curve.xy[(segs + 1) % curve.n]
    ab = b - a
    L2 = np.einsum("ij,ij->i", ab, ab)
    t_raw = np.einsum("ij,ij->i", p - a, ab) / L2
    t = np.clip(t_raw, 0.0, 1.0)
    foot = a + t[:, None] * ab
    dist2 = np.einsum("ij,ij->i", p - foot, p - foot)
    i = int(np.argmin(dist2))
    j = int(segs[i])
    r = float(t[i])
    h_p = foot[i]
    L = math.sqrt(L2[i])
    x_s = ab[i] / L
    y_s = np.array([-x_s[1], x_s[0]])
    diff = p - h_p
    dist = math.sqrt(dist2[i])
    side = diff @ y_s
    beyond_end = not curve.closed and ((j == 0 and t_raw[i] < 0) or (j == curve.n_segments - 1 and t_raw[i] > 1))
    d = math.copysign(dist, side) if dist > 0 else 0.0
    k = (j + 1) % curve.n
    C_hp = float(curve.C[j] * (1.0 - r) + curve.C[k] * r)
    dC_hp = float(curve.dC[j] * (1.0 - r) + curve.dC[k] * r)
    tangent = None
    if curve.T is not None:
        tangent = curve.T[j] * (1.0 - r) + curve.T[k] * r
        tangent = tangent / np.linalg.norm(tangent)
    d_arc = d + 0.5 * C_hp * r * (1.0 - r) * L2[i]
    return PathProjection(h_p, d, float(curve.s[j] + r * L), C_hp, dC_hp, x_s, y_s, r, j,
                          float(side), bool(beyond_end), tangent, float(d_arc))


def orientation_error(v_dir, frame) -> float:
    """Angle of ``v_dir`` measured from the tangent ``x_s`` toward ``y_s``,
    in (-pi, pi]."""
    x_s, y_s = frame
    v = np.asarray(v_dir, dtype=float)
    th = math.atan2(v @ y_s, v @ x_s)
    return math.pi if th == -math.pi else th
