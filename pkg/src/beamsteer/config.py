"""Scenario configuration: TOML text <-> validated dataclasses.

Parsing is strict: unknown keys are fatal and reported with their
position and the closest known key.
"""

from __future__ import annotations

import difflib
import re
from dataclasses import asdict, dataclass, field, fields, is_dataclass
from pathlib import Path
from typing import Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
import tomli_w

from .errors import ParseError, ValidationError

CONTROLLERS = ("trifocal", "path2d", "hybrid3d", "scripted")
SURFACES = ("plane", "sphere", "heightfield")
SHAPES = ("handdrawn", "circle", "spiral", "line", "sinusoid", "sigma", "figure8")
PROFILES = ("constant", "sinusoid", "steps")


@dataclass
class RigConfig:
    fx: float = 900.0
    fy: float = 900.0
    cx: float = 320.0
    cy: float = 240.0
    t_left: list = field(default_factory=lambda: [-40.0, 35.0, -20.0])
    t_right: list = field(default_factory=lambda: [40.0, 35.0, -20.0])
    pivot: list = field(default_factory=lambda: [0.0, 0.0, 0.0])
    # relative perturbation of the controller's calibration (0 = exact)
    calib_eps: float = 0.0
    calib_seed: int = 1
    # whether the perturbation also touches the intrinsics (else translations only)
    calib_intrinsics: bool = True


@dataclass
class SurfaceConfig:
    kind: str = "sphere"
    center: list = field(default_factory=lambda: [0.0, 0.0, 250.0])
    radius: float = 40.0
    point: list = field(default_factory=lambda: [0.0, 0.0, 250.0])
    normal: list = field(default_factory=lambda: [0.0, 0.0, -1.0])
    file: str = ""
    scale_amplitude: float = 1.0
    scale_period: float = 4.0


@dataclass
class TrifocalConfig:
    lam: float = 0.5
    sing_eps: float = 1e-8
    # left pixel where the spot starts; empty = straight along the mirror axis
    start_pixel: list = field(default_factory=list)
    # successive targets as left-image offsets from the start pixel
    waypoints: list = field(default_factory=lambda: [[30.0, 40.0]])
    stop_tol: float = 1e-3


@dataclass
class PathConfig:
    file: str = ""
    shape: str = "handdrawn"
    samples: int = 2000
    closed: bool = False
    center: list = field(default_factory=list)
    size: float = 200.0
    start_offset: float = 0.0
    start_heading: float = 0.0
    gamma1: float = 1.0
    gamma2: float = 1.0
    window: int = 32
    d_dot_mode: str = "model"
    heading: str = "relative"
    transient_fraction: float = 0.1
    retransfer_every: int = 1


@dataclass
class SpeedConfig:
    profile: str = "constant"
    v: float = 100.0
    amplitude: float = 50.0
    frequency: float = 0.5
    steps: list = field(default_factory=lambda: [[0.0, 60.0], [1.0, 140.0], [2.0, 80.0], [3.0, 120.0]])


@dataclass
class ScriptedConfig:
    omega: list = field(default_factory=lambda: [0.05, 0.0, 0.0])
    start_direction: list = field(default_factory=lambda: [0.0, -0.8, 1.0])


@dataclass
class ExpectConfig:
    """Embedded assertions checked by ``run_suite``; ``None`` (or an empty
    status) leaves the quantity unchecked."""

    status: str = ""
    final_error_max: Optional[float] = None
    rms_d_max: Optional[float] = None
    rms_theta_max: Optional[float] = None
    max_abs_d_max: Optional[float] = None
    exp_r2_min: Optional[float] = None
    chord_dev_max: Optional[float] = None
    err3d_rel_max: Optional[float] = None


@dataclass
class ScenarioConfig:
    name: str = "scenario"
    controller: str = "trifocal"
    Te: float = 0.05
    max_iters: int = 500
    seed: int = 0
    noise_sigma: float = 0.0
    rig: RigConfig = field(default_factory=RigConfig)
    surface: SurfaceConfig = field(default_factory=SurfaceConfig)
    trifocal: TrifocalConfig = field(default_factory=TrifocalConfig)
    path: PathConfig = field(default_factory=PathConfig)
    speed: SpeedConfig = field(default_factory=SpeedConfig)
    scripted: ScriptedConfig = field(default_factory=ScriptedConfig)
    expect: ExpectConfig = field(default_factory=ExpectConfig)
    base_dir: str = field(default=".", metadata={"emit": False})

    def resolve(self, rel: str) -> Path:
        p = Path(rel)
        return p if p.is_absolute() else Path(self.base_dir) / p


def _locate(text: str, key: str):
    pat = re.compile(r"^\s*" + re.escape(key) + r"\s*=", re.M)
    m = pat.search(text)
    if not m:
        return None, None
    line = text.count("\n", 0, m.start()) + 1
    col = m.start() - (text.rfind("\n", 0, m.start()) + 1) + 1 + (len(m.group(0)) - len(m.group(0).lstrip()))
    return line, col


def _coerce(cls, data: dict, text: str, prefix: str = ""):
    known = {f.name: f for f in fields(cls) if f.metadata.get("emit", True)}
    kwargs = {}
    for key, value in data.items():
        if key not in known:
            line, col = _locate(text, key)
            close = difflib.get_close_matches(key, list(known), n=1)
            hint = f"; did you mean '{close[0]}'?" if close else ""
            raise ParseError(f"unknown key '{prefix}{key}'{hint}", line, col)
        f = known[key]
        default = getattr(cls(), key)
        if is_dataclass(default):
            if not isinstance(value, dict):
                raise ValidationError(prefix + key, "expected a table")
            kwargs[key] = _coerce(type(default), value, text, prefix + key + ".")
        elif isinstance(default, bool):
            if not isinstance(value, bool):
                raise ValidationError(prefix + key, "expected true/false")
            kwargs[key] = value
        elif isinstance(default, float) or (default is None and isinstance(value, (int, float))):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValidationError(prefix + key, "expected a number")
            kwargs[key] = float(value)
        elif isinstance(default, int):
            if isinstance(value, bool) or not isinstance(value, int):
                raise ValidationError(prefix + key, "expected an integer")
            kwargs[key] = value
        elif isinstance(default, list):
            if not isinstance(value, list):
                raise ValidationError(prefix + key, "expected an array")
            kwargs[key] = _floats(value)
        else:
            if not isinstance(value, str):
                raise ValidationError(prefix + key, "expected a string")
            kwargs[key] = value
    return cls(**kwargs)


def _floats(value):
    return [_floats(v) if isinstance(v, list) else float(v) for v in value]


def _positive(name, value):
    if not value > 0:
        raise ValidationError(name, f"must be > 0, got {value}")


def validate(cfg: ScenarioConfig) -> ScenarioConfig:
    _positive("Te", cfg.Te)
    if cfg.max_iters < 1:
        raise ValidationError("max_iters", "must be >= 1")
    if cfg.controller not in CONTROLLERS:
        raise ValidationError("controller", f"one of {CONTROLLERS}")
    if cfg.noise_sigma < 0:
        raise ValidationError("noise_sigma", "must be >= 0")
    r = cfg.rig
    for k in ("fx", "fy"):
        _positive(f"rig.{k}", getattr(r, k))
    for k in ("t_left", "t_right", "pivot"):
        if len(getattr(r, k)) != 3:
            raise ValidationError(f"rig.{k}", "expected 3 components")
    if not 0 <= r.calib_eps < 1:
        raise ValidationError("rig.calib_eps", "must lie in [0, 1)")
    s = cfg.surface
    if s.kind not in SURFACES:
        raise ValidationError("surface.kind", f"one of {SURFACES}")
    _positive("surface.radius", s.radius)
    if s.scale_amplitude < 1:
        raise ValidationError("surface.scale_amplitude", "must be >= 1")
    _positive("surface.scale_period", s.scale_period)
    if s.kind == "heightfield" and not s.file:
        raise ValidationError("surface.file", "heightfield needs a CSV file")
    t = cfg.trifocal
    _positive("trifocal.lam", t.lam)
    if not 0 < t.sing_eps < 1e-3:
        raise ValidationError("trifocal.sing_eps", "must lie in (0, 1e-3)")
    if t.start_pixel and len(t.start_pixel) != 2:
        raise ValidationError("trifocal.start_pixel", "expected [x, y]")
    if not t.waypoints or any(len(w) != 2 for w in t.waypoints):
        raise ValidationError("trifocal.waypoints", "expected a list of [dx, dy]")
    _positive("trifocal.stop_tol", t.stop_tol)
    p = cfg.path
    if not p.file and p.shape not in SHAPES:
        raise ValidationError("path.shape", f"one of {SHAPES}")
    if p.samples < 3:
        raise ValidationError("path.samples", "must be >= 3")
    _positive("path.gamma1", p.gamma1)
    _positive("path.gamma2", p.gamma2)
    if p.window < 2:
        raise ValidationError("path.window", "must be >= 2")
    if p.d_dot_mode not in ("model", "difference"):
        raise ValidationError("path.d_dot_mode", "'model' or 'difference'")
    if p.heading not in ("relative", "measured", "command"):
        raise ValidationError("path.heading", "'relative', 'measured' or 'command'")
    if not 0 <= p.transient_fraction < 1:
        raise ValidationError("path.transient_fraction", "must lie in [0, 1)")
    if p.retransfer_every < 1:
        raise ValidationError("path.retransfer_every", "must be >= 1")
    sp = cfg.speed
    if sp.profile not in PROFILES:
        raise ValidationError("speed.profile", f"one of {PROFILES}")
    if sp.v == 0:
        raise ValidationError("speed.v", "must be non-zero")
    if sp.profile == "steps" and (not sp.steps or any(len(x) != 2 for x in sp.steps)):
        raise ValidationError("speed.steps", "expected a list of [t_start, v]")
    if len(cfg.scripted.omega) != 3 or len(cfg.scripted.start_direction) != 3:
        raise ValidationError("scripted", "omega and start_direction need 3 components")
    return cfg


def parse_config(text: str, base_dir: str | Path = ".") -> ScenarioConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+), column (\d+)", str(exc))
        line, col = (int(m.group(1)), int(m.group(2))) if m else (None, None)
        raise ParseError(str(exc).split(" (at line")[0], line, col) from exc
    cfg = _coerce(ScenarioConfig, data, text)
    cfg.base_dir = str(base_dir)
    return validate(cfg)


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), path.parent)


def config_dict(cfg: ScenarioConfig) -> dict:
    d = asdict(cfg)
    d.pop("base_dir", None)

    def strip(x):
        if isinstance(x, dict):
            return {k: strip(v) for k, v in x.items() if v is not None}
        return x

    return strip(d)


def emit_config(cfg: ScenarioConfig) -> str:
    """TOML with every default filled in (provenance of a run)."""
    return tomli_w.dumps(config_dict(cfg))
